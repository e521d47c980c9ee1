"""Frequency response, tone measurement and coefficient error reporting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .exceptions import AnalysisError
from .simulation import Signal, common_window, cycle_period
from .synthesis import SynthesisResult
from .validation import check_coefficients

DB_FLOOR = -300.0
DEFAULT_POINTS = 1024


def to_db(magnitude):
    """``20 log10`` with exact zeros (and anything below) floored at -300 dB."""
    mag = np.asarray(magnitude, dtype=np.float64)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(np.where(mag > 0, db, DB_FLOOR), DB_FLOOR)


@dataclass(frozen=True)
class FrequencyResponse:
    f: np.ndarray
    magnitude: np.ndarray
    magnitude_db: np.ndarray
    phase: np.ndarray
    f_s: float

    @property
    def points(self):
        return list(zip(self.f, self.magnitude, self.magnitude_db, self.phase))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["f_hz", "magnitude", "magnitude_db", "phase_rad"])
        for row in zip(self.f, self.magnitude, self.magnitude_db, self.phase):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _accumulate(b, cos_t, sin_t):
    re = np.zeros(cos_t.shape[0])
    im = np.zeros(cos_t.shape[0])
    for i, bi in enumerate(b):
        re = re + bi * cos_t[:, i]
        im = im - bi * sin_t[:, i]
    return re, im


def frequency_response(coeffs, f_s, n_points=DEFAULT_POINTS) -> FrequencyResponse:
    """``H(f) = sum_i b_i exp(-j 2 pi f i / f_s)`` on a uniform grid over ``[0, f_s/2]``.

    Phase angles are reduced with integer arithmetic, so the DC and Nyquist
    points are exactly ``sum b_i`` and ``sum (-1)^i b_i`` (accumulated in tap
    order).
    """
    b = check_coefficients(coeffs)
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not f_s > 0:
        raise ValueError("f_s must be positive")
    half = n_points - 1
    k = np.arange(n_points)
    i = np.arange(len(b))
    r = np.outer(k, i) % (2 * half)
    theta = np.pi * r / half
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    cos_t[r == 0], sin_t[r == 0] = 1.0, 0.0
    cos_t[r == half], sin_t[r == half] = -1.0, 0.0
    re, im = _accumulate(b, cos_t, sin_t)
    mag = np.hypot(re, im)
    f = k * (f_s / 2.0) / half
    f[-1] = f_s / 2.0
    return FrequencyResponse(f, mag, to_db(mag), np.arctan2(im, re), float(f_s))


def response_at(coeffs, freqs, f_s):
    """Complex response at arbitrary frequencies."""
    b = check_coefficients(coeffs)
    f = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    theta = 2 * np.pi * np.outer(f, np.arange(len(b))) / f_s
    re, im = _accumulate(b, np.cos(theta), np.sin(theta))
    return re + 1j * im


def tone_amplitude(signal: Signal, f, settle=0, n_window=None):
    """Amplitude of the component at ``f`` by single-bin Fourier projection.

    The window starts after ``settle`` samples and must hold whole cycles of
    ``f``; by default the longest such window is used.  Pass ``n_window``
    (e.g. from :func:`~memfir.simulation.common_window`) to also hold whole
    cycles of other components, which removes their leakage.
    """
    x = signal.samples[settle:]
    if f < 0:
        raise AnalysisError("frequency must be >= 0")
    if n_window is None:
        if cycle_period(f, signal.f_sample) is None:
            raise AnalysisError(f"{f:g} Hz is not aligned to a whole number of cycles at {signal.f_sample:g} Hz")
        n_window = common_window([f], signal.f_sample, len(x))
    else:
        if n_window > len(x):
            raise AnalysisError(f"window of {n_window} samples exceeds the {len(x)} available")
        if f and abs(n_window * f / signal.f_sample - round(n_window * f / signal.f_sample)) > 1e-9:
            raise AnalysisError(f"window of {n_window} samples does not hold whole cycles of {f:g} Hz")
    cycles = n_window * f / signal.f_sample
    if n_window == 0 or (f > 0 and cycles < 2 - 1e-9):
        raise AnalysisError(
            f"post-settle window of {len(x)} samples holds fewer than 2 whole cycles of {f:g} Hz"
        )
    seg = x[:n_window]
    if f == 0:
        return abs(float(np.mean(seg)))
    n = np.arange(n_window)
    phase = 2 * np.pi * f * n / signal.f_sample
    re = float(np.dot(seg, np.cos(phase)))
    im = float(np.dot(seg, np.sin(phase)))
    scale = 1.0 / n_window if abs(2 * f - signal.f_sample) < 1e-9 * signal.f_sample else 2.0 / n_window
    return float(np.hypot(re, im) * scale)


@dataclass(frozen=True)
class ErrorReport:
    rows: tuple
    summary: tuple

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tap", "method", "bits", "target", "realized", "error_pct"])
        for r in self.rows:
            w.writerow([r["tap"], r["method"], r["bits"], repr(r["target"]), repr(r["realized"]), repr(r["error_pct"])])
        return buf.getvalue()

    def to_dict(self):
        return {"summary": list(self.summary), "rows": list(self.rows)}


def error_report(results, labels=None) -> ErrorReport:
    """Per-tap percent error for several synthesis runs of the same targets."""
    results = list(results)
    if not results:
        raise AnalysisError("no results to report")
    targets = results[0].targets
    for r in results[1:]:
        if r.targets != targets:
            raise AnalysisError("results do not share target coefficients")
    if labels is None:
        labels = [f"{r.method}-{r.grid.bits}bit" for r in results]
    if len(labels) != len(results):
        raise AnalysisError("one label per result is required")
    rows, summary = [], []
    for label, res in zip(labels, results):
        for i, (t, b, e) in enumerate(zip(res.targets, res.realized, res.errors_pct)):
            rows.append(
                {
                    "label": label,
                    "tap": i,
                    "method": res.method,
                    "bits": res.grid.bits,
                    "target": t,
                    "realized": b,
                    "error_pct": e,
                }
            )
        summary.append(
            {
                "label": label,
                "method": res.method,
                "bits": res.grid.bits,
                "r_f_ohms": res.r_f,
                "max_error_pct": res.max_error_pct,
                "mean_error_pct": res.mean_error_pct,
                "objective": res.objective,
            }
        )
    return ErrorReport(tuple(rows), tuple(summary))


def response_deviation(ideal: FrequencyResponse, realized: FrequencyResponse, passband=None):
    """Largest dB gap between two responses, in the passband and overall.

    ``passband`` is ``(f_lo, f_hi)`` in Hz; ``None`` means the whole band.
    """
    if ideal.f.shape != realized.f.shape or not np.array_equal(ideal.f, realized.f):
        raise AnalysisError("responses are on different frequency grids")
    gap = np.abs(ideal.magnitude_db - realized.magnitude_db)
    if passband is None:
        band = np.ones_like(gap, dtype=bool)
    else:
        lo, hi = passband
        band = (ideal.f >= lo) & (ideal.f <= hi)
        if not band.any():
            raise AnalysisError(f"passband {passband} contains no grid points")
    return float(gap[band].max()), float(gap.max())


def realized_response(result: SynthesisResult, f_s, n_points=DEFAULT_POINTS):
    return frequency_response(result.realized, f_s, n_points)
