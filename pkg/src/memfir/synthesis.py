"""Map target coefficients onto differential memristor pairs.

Each tap is realized as ``b = r_f / r_plus - r_f / r_minus`` with both
memristances drawn from a :class:`~memfir.device.MemristanceGrid`; ``r_f`` is
the shared feedback resistor of the two first-stage summers.

Two methods are provided:

* :func:`synthesize_simple` pins the opposing memristor of every tap at the
  grid maximum and rounds the other one to the nearest level.
* :func:`synthesize_advanced` sweeps ``r_f`` over a candidate list and, for
  each candidate, picks the best pair per tap by exact search over the grid.
  Given ``r_f`` the taps decouple, so the per-tap search is exact and the
  sweep is the only approximate part.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed

from .device import MemristanceGrid, quantize
from .exceptions import InfeasibleError, InvalidSpecError, UnsupportedError
from .filter_design import CoefficientSet
from .validation import check_coefficients

NORMS = ("sum_rel", "sum_abs", "sum_squared", "max_abs")
DEFAULT_NORM = "sum_rel"
DEFAULT_RF_STEP = 1e3
# sorted pair table holds 4**bits entries
MAX_ADVANCED_BITS = 10
_CHUNK = 128


def coefficient_from_pair(r_f, r_plus, r_minus):
    """Coefficient realized by a pair: ``r_f/r_plus - r_f/r_minus``.

    Works elementwise on arrays.
    """
    return r_f / r_plus - r_f / r_minus


def percent_error(target, realized):
    """Percent error ``|(target - realized) / target| * 100``.

    A zero target has no relative error; the absolute error ``|realized|`` is
    returned instead.  Callers that need to know which case applied should
    check ``target == 0`` (see ``SynthesisResult.absolute_error_taps``).
    """
    if target == 0:
        return abs(realized)
    return abs((target - realized) / target) * 100.0


def _terms(targets, realized, norm):
    err = np.abs(targets - realized)
    if norm == "sum_squared":
        return err * err
    if norm == "sum_rel":
        scale = np.abs(targets)
        safe = np.where(scale == 0, 1.0, scale)
        return np.where(scale == 0, err, err / safe)
    return err


def _reduce(terms, norm):
    # accumulate in tap order so every caller gets bitwise-identical totals
    terms = np.asarray(terms)
    total = np.zeros(terms.shape[:-1])
    for k in range(terms.shape[-1]):
        if norm == "max_abs":
            total = np.maximum(total, terms[..., k])
        else:
            total = total + terms[..., k]
    return total


def objective(targets, realized, norm=DEFAULT_NORM):
    """Total coefficient error F between ``targets`` and ``realized``.

    ``sum_rel`` sums per-tap relative errors (absolute error for zero
    targets); ``sum_abs``, ``sum_squared`` and ``max_abs`` are the usual
    norms of the error vector.
    """
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    t = check_coefficients(targets, name="targets")
    r = check_coefficients(realized, name="realized")
    if t.shape != r.shape:
        raise ValueError(f"length mismatch: {t.size} targets vs {r.size} realized")
    return float(_reduce(_terms(t, r, norm), norm))


@dataclass(frozen=True)
class SynthesisResult:
    """Feedback resistor plus one ``(r_plus, r_minus)`` pair per tap."""

    method: str
    r_f: float
    pairs: tuple
    targets: tuple
    realized: tuple
    errors_pct: tuple
    objective: float
    grid: MemristanceGrid
    objective_norm: str = DEFAULT_NORM
    overall_gain: float = 1.0
    absolute_error_taps: tuple = field(default=())

    @property
    def n_taps(self):
        return len(self.pairs)

    @property
    def max_error_pct(self):
        rel = [e for i, e in enumerate(self.errors_pct) if i not in self.absolute_error_taps]
        return max(rel) if rel else 0.0

    @property
    def mean_error_pct(self):
        rel = [e for i, e in enumerate(self.errors_pct) if i not in self.absolute_error_taps]
        return sum(rel) / len(rel) if rel else 0.0

    def realized_array(self):
        return np.array(self.realized, dtype=np.float64)

    def to_dict(self):
        taps = []
        for i, ((rp, rm), t, r, e) in enumerate(
            zip(self.pairs, self.targets, self.realized, self.errors_pct)
        ):
            taps.append(
                {
                    "r_plus_ohms": rp,
                    "r_minus_ohms": rm,
                    "target": t,
                    "realized": r,
                    "error_pct": e,
                    "error_is_absolute": i in self.absolute_error_taps,
                }
            )
        return {
            "method": self.method,
            "r_f_ohms": self.r_f,
            "taps": taps,
            "objective": self.objective,
            "objective_norm": self.objective_norm,
            "overall_gain": self.overall_gain,
            "grid": self.grid.to_dict(),
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tap", "target", "realized", "r_plus_ohms", "r_minus_ohms", "error_pct"])
        for i, ((rp, rm), t, r, e) in enumerate(
            zip(self.pairs, self.targets, self.realized, self.errors_pct)
        ):
            writer.writerow([f"b{i}", repr(t), repr(r), repr(rp), repr(rm), repr(e)])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, doc):
        try:
            g = doc["grid"]
            grid = MemristanceGrid(g["r_min"], g["r_max"], g["bits"], g.get("spacing", "linear_resistance"))
            taps = doc["taps"]
            return cls(
                method=doc["method"],
                r_f=float(doc["r_f_ohms"]),
                pairs=tuple((float(t["r_plus_ohms"]), float(t["r_minus_ohms"])) for t in taps),
                targets=tuple(float(t["target"]) for t in taps),
                realized=tuple(float(t["realized"]) for t in taps),
                errors_pct=tuple(float(t["error_pct"]) for t in taps),
                objective=float(doc["objective"]),
                grid=grid,
                objective_norm=doc.get("objective_norm", DEFAULT_NORM),
                overall_gain=float(doc.get("overall_gain", 1.0)),
                absolute_error_taps=tuple(
                    i for i, t in enumerate(taps) if t.get("error_is_absolute", False)
                ),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidSpecError(f"malformed synthesis result: {exc}") from None

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _build_result(method, r_f, pairs, targets, grid, norm):
    rp = np.array([p[0] for p in pairs])
    rm = np.array([p[1] for p in pairs])
    realized = coefficient_from_pair(r_f, rp, rm)
    t = np.asarray(targets, dtype=np.float64)
    return SynthesisResult(
        method=method,
        r_f=float(r_f),
        pairs=tuple((float(a), float(b)) for a, b in zip(rp, rm)),
        targets=tuple(float(v) for v in t),
        realized=tuple(float(v) for v in realized),
        errors_pct=tuple(float(percent_error(a, b)) for a, b in zip(t, realized)),
        objective=float(_reduce(_terms(t, realized, norm), norm)),
        grid=grid,
        objective_norm=norm,
        absolute_error_taps=tuple(i for i, v in enumerate(t) if v == 0),
    )


def _as_targets(targets):
    if isinstance(targets, CoefficientSet):
        return targets.as_array()
    return check_coefficients(targets, name="targets")


def rf_sweep(start, stop, step=DEFAULT_RF_STEP):
    """Candidates ``start, start + step, ...`` up to and including ``stop``."""
    if not (start > 0 and stop >= start and step > 0):
        raise ValueError("need 0 < start <= stop and step > 0")
    n = int(np.floor((stop - start) / step * (1 + 1e-12))) + 1
    return start + step * np.arange(n, dtype=np.float64)


def synthesize_simple(targets, grid: MemristanceGrid, r_f=None, *, rf_step=DEFAULT_RF_STEP, norm=DEFAULT_NORM):
    """Simple method: the opposing memristor of each tap sits at ``r_max``.

    For ``b >= 0`` the pair is ``(quantize(r_f / (b + r_f/r_max)), r_max)``;
    negative taps are mirrored.  Without an explicit ``r_f``, the smallest
    value of a ``rf_step`` sweep over ``[r_min, r_max]`` that keeps every
    unquantized memristance inside the grid range is used.
    """
    b = _as_targets(targets)
    mag = np.abs(b)
    r_max, r_min = grid.r_max, grid.r_min
    if r_f is None:
        cands = rf_sweep(r_min, r_max, rf_step)
        ideal = cands[:, None] / (mag[None, :] + cands[:, None] / r_max)
        slack = 1e-12
        ok = np.all((ideal >= r_min * (1 - slack)) & (ideal <= r_max * (1 + slack)), axis=1)
        if not ok.any():
            raise InfeasibleError(
                f"no feedback resistor in [{r_min:g}, {r_max:g}] ohm places all taps in range; "
                f"largest |b| = {mag.max():g}"
            )
        r_f = float(cands[np.argmax(ok)])
    elif not r_f > 0:
        raise ValueError(f"r_f must be > 0, got {r_f}")
    ideal = r_f / (mag + r_f / r_max)
    r_q = np.atleast_1d(quantize(grid, ideal))
    pairs = [(r, r_max) if v >= 0 else (r_max, r) for v, r in zip(b, r_q)]
    return _build_result("simple", r_f, pairs, b, grid, norm)


@dataclass(frozen=True)
class SearchConfig:
    """Settings for :func:`synthesize_advanced`.

    With ``r_f_candidates`` unset the sweep runs in ``rf_step`` increments
    over the grid range.  ``rf_on_grid`` restricts ``r_f`` to grid levels.
    ``n_jobs`` follows the joblib convention; results do not depend on it.
    """

    grid: MemristanceGrid
    r_f_candidates: tuple = None
    objective_norm: str = DEFAULT_NORM
    rf_step: float = DEFAULT_RF_STEP
    rf_on_grid: bool = False
    n_jobs: int = None

    def __post_init__(self):
        if self.objective_norm not in NORMS:
            raise InvalidSpecError(f"objective_norm must be one of {NORMS}, got {self.objective_norm!r}")
        if self.r_f_candidates is not None:
            c = np.asarray(self.r_f_candidates, dtype=np.float64).ravel()
            if c.size == 0 or not np.all(np.isfinite(c)) or np.any(c <= 0):
                raise InvalidSpecError("r_f_candidates must be a nonempty list of positive values")
            object.__setattr__(self, "r_f_candidates", tuple(float(v) for v in c))
        if not self.rf_step > 0:
            raise InvalidSpecError("rf_step must be positive")

    def candidates(self):
        if self.r_f_candidates is not None:
            c = np.array(self.r_f_candidates)
            if self.rf_on_grid:
                c = np.atleast_1d(quantize(self.grid, c))
        elif self.rf_on_grid:
            c = np.array(self.grid.levels)
        else:
            c = rf_sweep(self.grid.r_min, self.grid.r_max, self.rf_step)
        return np.unique(c)


@lru_cache(maxsize=8)
def _pair_table(grid: MemristanceGrid):
    """All distinct-level pairs plus ``(r_max, r_max)``, sorted by conductance difference.

    Every equal pair realizes exactly zero, so they collapse to the one that
    draws the least current.
    """
    levels = grid.levels
    n = len(levels)
    p, m = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    keep = (p != m).ravel()
    p = np.append(p.ravel()[keep], n - 1)
    m = np.append(m.ravel()[keep], n - 1)
    d = 1.0 / levels[p] - 1.0 / levels[m]
    order = np.lexsort((m, p, d))
    return d[order], p[order].astype(np.int64), m[order].astype(np.int64)


def _search_chunk(b, rfs, grid):
    d, p_idx, m_idx = _pair_table(grid)
    levels = grid.levels
    n = len(levels)
    size = len(d)
    q = b[None, :] / rfs[:, None]
    idx = np.searchsorted(d, q)
    lo = np.clip(idx - 1, 0, size - 1)
    hi = np.clip(idx, 0, size - 1)
    delta = np.minimum(np.abs(d[lo] - q), np.abs(d[hi] - q))
    # rounding slack between r_f*|q - d| and the canonical r_f/rp - r_f/rm error
    tol = 64 * np.finfo(float).eps * (1.0 / grid.r_min + np.abs(q))
    start = np.searchsorted(d, q - delta - tol, side="left")
    stop = np.searchsorted(d, q + delta + tol, side="right")
    width = int((stop - start).max())
    cand = start[..., None] + np.arange(width)
    valid = cand < stop[..., None]
    cand = np.minimum(cand, size - 1)
    pi, mi = p_idx[cand], m_idx[cand]
    rf3 = rfs[:, None, None]
    realized = coefficient_from_pair(rf3, levels[pi], levels[mi])
    err = np.where(valid, np.abs(b[None, :, None] - realized), np.inf)
    best = err.min(axis=-1, keepdims=True)
    key = np.where(err == best, pi * n + mi, np.iinfo(np.int64).max)
    pick = np.argmin(key, axis=-1)
    take = lambda a: np.take_along_axis(a, pick[..., None], axis=-1)[..., 0]
    return take(pi), take(mi), take(realized)


def _search(b, rfs, grid, norm):
    pi, mi, realized = _search_chunk(b, rfs, grid)
    return _reduce(_terms(b[None, :], realized, norm), norm), pi, mi


def synthesize_advanced(targets, config: SearchConfig):
    """Advanced method: sweep ``r_f`` and pick the best pair per tap.

    Ties are broken by the lowest ``r_f``, then by the lexicographically
    smallest ``(r_plus, r_minus)``; the result is identical for any
    ``n_jobs``.
    """
    b = _as_targets(targets)
    grid = config.grid
    if grid.bits > MAX_ADVANCED_BITS:
        raise UnsupportedError(
            f"advanced search supports up to {MAX_ADVANCED_BITS} bits, got {grid.bits}"
        )
    rfs = config.candidates()
    if rfs.size == 0:
        raise InfeasibleError("no r_f candidates")
    chunks = [rfs[i : i + _CHUNK] for i in range(0, rfs.size, _CHUNK)]
    if config.n_jobs in (None, 1) or len(chunks) == 1:
        parts = [_search(b, c, grid, config.objective_norm) for c in chunks]
    else:
        parts = Parallel(n_jobs=config.n_jobs)(
            delayed(_search)(b, c, grid, config.objective_norm) for c in chunks
        )
    F = np.concatenate([f for f, _, _ in parts])
    pi = np.concatenate([p for _, p, _ in parts])
    mi = np.concatenate([m for _, _, m in parts])
    k = int(np.argmin(F))
    levels = grid.levels
    pairs = list(zip(levels[pi[k]], levels[mi[k]]))
    return _build_result("advanced", float(rfs[k]), pairs, b, grid, config.objective_norm)


def verify_result(result: SynthesisResult, grid: MemristanceGrid = None) -> bool:
    """Check membership, pair/coefficient consistency and lengths."""
    grid = result.grid if grid is None else grid
    n = len(result.pairs)
    if not (len(result.realized) == len(result.errors_pct) == len(result.targets) == n):
        return False
    if not result.r_f > 0:
        return False
    for (rp, rm), r in zip(result.pairs, result.realized):
        if rp not in grid or rm not in grid:
            return False
        if coefficient_from_pair(result.r_f, rp, rm) != r:
            return False
    return True
