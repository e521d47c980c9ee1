"""Target FIR coefficients: windowed-sinc design, file ingestion, symmetry.

Coefficient sets produced here are what the synthesis step maps onto
memristor pairs.  Designs are linear phase (Type I); antisymmetric sets
are accepted through :func:`load_coefficients` but never designed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.signal import windows as _windows

from .exceptions import InvalidSpecError, ParseError, UnsupportedError
from .validation import check_coefficients

DEFAULT_SYMMETRY_TOL = 1e-9
DEFAULT_CHEBYSHEV_ATTENUATION_DB = 50.0


class Symmetry(str, Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"
    NONE = "none"


FAMILIES = ("lowpass", "highpass")
WINDOWS = ("rectangular", "hamming", "hann", "blackman", "chebyshev")


@dataclass(frozen=True)
class FilterSpec:
    """Design request for a windowed-sinc FIR filter.

    ``order`` is the filter order m; the design has m + 1 taps.  The
    ``chebyshev`` window uses ``attenuation_db`` of sidelobe suppression and
    ignores it otherwise.
    """

    family: str
    f_s: float
    f_c: float
    order: int
    window: str = "hamming"
    attenuation_db: float = DEFAULT_CHEBYSHEV_ATTENUATION_DB

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.window not in WINDOWS:
            raise InvalidSpecError(f"window must be one of {WINDOWS}, got {self.window!r}")
        if isinstance(self.order, bool) or not isinstance(self.order, (int, np.integer)):
            raise InvalidSpecError(f"order must be an integer, got {self.order!r}")
        if self.order < 1:
            raise InvalidSpecError(f"order must be >= 1, got {self.order}")
        if not (np.isfinite(self.f_s) and self.f_s > 0):
            raise InvalidSpecError(f"f_s must be positive, got {self.f_s!r}")
        if not (0 < self.f_c < self.f_s / 2):
            raise InvalidSpecError(
                f"cutoff must satisfy 0 < f_c < f_s/2 = {self.f_s / 2:g}, got {self.f_c!r}"
            )
        if self.window == "chebyshev" and not self.attenuation_db > 0:
            raise InvalidSpecError("attenuation_db must be positive")


def classify_symmetry(coefficients, tol=DEFAULT_SYMMETRY_TOL):
    """Classify a coefficient sequence as symmetric, antisymmetric or neither.

    Symmetry is tested first, so an all-zero sequence is symmetric.
    """
    b = check_coefficients(coefficients, min_length=2)
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    rev = b[::-1]
    if np.all(np.abs(b - rev) <= tol):
        return Symmetry.SYMMETRIC
    if np.all(np.abs(b + rev) <= tol):
        return Symmetry.ANTISYMMETRIC
    return Symmetry.NONE


@dataclass(frozen=True)
class CoefficientSet:
    """Ordered target coefficients b_0..b_m with derived symmetry class."""

    coefficients: tuple
    tol: float = DEFAULT_SYMMETRY_TOL
    symmetry: Symmetry = field(init=False)

    def __post_init__(self):
        try:
            arr = check_coefficients(self.coefficients, min_length=2)
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from None
        object.__setattr__(self, "coefficients", tuple(float(v) for v in arr))
        object.__setattr__(self, "symmetry", classify_symmetry(arr, self.tol))

    @property
    def order(self):
        return len(self.coefficients) - 1

    def __len__(self):
        return len(self.coefficients)

    def __iter__(self):
        return iter(self.coefficients)

    def as_array(self):
        return np.array(self.coefficients, dtype=np.float64)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coefficients, dtype=dtype or np.float64)


def _window(name, n, attenuation_db):
    if name == "rectangular":
        return np.ones(n)
    if name == "hamming":
        return np.hamming(n)
    if name == "hann":
        return np.hanning(n)
    if name == "blackman":
        return np.blackman(n)
    return _windows.chebwin(n, at=attenuation_db, sym=True)


def design_windowed(spec: FilterSpec) -> CoefficientSet:
    """Design a linear-phase FIR filter by the windowed-sinc method.

    Lowpass designs are scaled to unit DC gain and highpass designs to unit
    magnitude at Nyquist.  Highpass requires an even order; odd-order highpass
    filters have a forced zero at Nyquist and are not supported.
    """
    m = int(spec.order)
    if spec.family == "highpass" and m % 2:
        raise UnsupportedError(
            f"highpass design needs an even order, got {m}; "
            "load precomputed coefficients from a file instead"
        )
    n = np.arange(m + 1) - m / 2.0
    cutoff = 2.0 * spec.f_c / spec.f_s
    ideal = cutoff * np.sinc(cutoff * n)
    if spec.family == "highpass":
        ideal = -ideal
        ideal[m // 2] += 1.0
    h = ideal * _window(spec.window, m + 1, spec.attenuation_db)
    # force exact mirror symmetry before scaling
    half = h[: m // 2 + 1]
    h = np.concatenate([half, half[: (m + 1) // 2][::-1]])
    if spec.family == "lowpass":
        gain = sum(h.tolist())
    else:
        # Nyquist response referenced to the centre tap, so the scaled
        # design has H(f_s/2) = +1 up to linear phase
        gain = sum(((-1) ** (i - m // 2)) * v for i, v in enumerate(h.tolist()))
    return CoefficientSet(tuple(h / gain))


def _parse_text(text):
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParseError(f"not a decimal number: {line!r}", line=lineno) from None
    return values


def _parse_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict) or "coefficients" not in doc:
        raise ParseError('JSON document must be an object with a "coefficients" list')
    raw = doc["coefficients"]
    if not isinstance(raw, list):
        raise ParseError('"coefficients" must be a list')
    values = []
    for k, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float, str)):
            raise ParseError(f"coefficient {k} is not a number: {v!r}")
        try:
            values.append(float(v))
        except ValueError:
            raise ParseError(f"coefficient {k} is not a number: {v!r}") from None
    return values


def load_coefficients(source, tol=DEFAULT_SYMMETRY_TOL) -> CoefficientSet:
    """Read a coefficient file (one decimal per line, ``#`` comments, or JSON).

    ``source`` may be a path or an open text file.
    """
    if isinstance(source, (str, os.PathLike)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    if not text.strip():
        raise ParseError("empty coefficient file")
    if text.lstrip().startswith("{"):
        values = _parse_json(text)
    else:
        values = _parse_text(text)
    if not values:
        raise ParseError("empty coefficient file")
    if len(values) < 2:
        raise InvalidSpecError(f"a filter needs at least 2 taps, file has {len(values)}")
    return CoefficientSet(tuple(values), tol=tol)


def save_coefficients(path, coefficients, header=None):
    """Write coefficients one per line with round-trip precision."""
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.extend(repr(float(v)) for v in coefficients)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
