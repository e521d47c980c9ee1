"""Behavioral model of the sampled memristor FIR circuit.

The track-and-hold and the master-slave delay stages are ideal: sampling
is instantaneous and each stage is an exact one-sample delay starting from
0 V.  Op-amps are ideal, so the differential two-stage circuit computes the
direct-form convolution with the realized coefficients, scaled by the input
buffer gain ``a``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .device import MemristorState, memristance, step, tune
from .exceptions import DeadZoneViolation, RateMismatchError
from .filter_design import CoefficientSet
from .synthesis import SynthesisResult, verify_result
from .validation import check_coefficients, check_samples

DEAD_ZONE_V = 0.1


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled real waveform."""

    samples: np.ndarray
    f_sample: float
    t0: float = 0.0

    def __post_init__(self):
        arr = check_samples(self.samples).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if not (math.isfinite(self.f_sample) and self.f_sample > 0):
            raise ValueError(f"f_sample must be positive, got {self.f_sample!r}")
        object.__setattr__(self, "f_sample", float(self.f_sample))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self):
        return len(self.samples)

    @property
    def times(self):
        return self.t0 + np.arange(len(self.samples)) / self.f_sample

    def peak(self):
        return float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0


@dataclass(frozen=True)
class ToneSpec:
    """Sum of sinusoids; ``components`` holds ``(amplitude_v, freq_hz, phase_rad)``."""

    components: tuple

    def __post_init__(self):
        comps = []
        for c in self.components:
            amp, freq, phase = (float(v) for v in c)
            if freq < 0:
                raise ValueError(f"tone frequency must be >= 0, got {freq}")
            comps.append((amp, freq, phase))
        object.__setattr__(self, "components", tuple(comps))

    @property
    def frequencies(self):
        return [f for _, f, _ in self.components]

    def peak_bound(self):
        return sum(abs(a) for a, _, _ in self.components)

    @classmethod
    def from_dict(cls, doc):
        return cls(
            tuple((c["amp_v"], c["freq_hz"], c.get("phase_rad", 0.0)) for c in doc["components"])
        )

    def to_dict(self):
        return {
            "components": [
                {"amp_v": a, "freq_hz": f, "phase_rad": p} for a, f, p in self.components
            ]
        }

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CircuitConfig:
    """Circuit parameters.

    ``hold_capacitance`` is recorded for documentation; the ideal sampler
    does not use it.
    """

    scaling_gain_a: float = 0.1
    r_s: float = 10e3
    op_amp_model: str = "ideal"
    compensate_output: bool = True
    dead_zone_v: float = DEAD_ZONE_V
    hold_capacitance: float = 5e-12

    def __post_init__(self):
        if not 0 < self.scaling_gain_a <= 1:
            raise ValueError(f"scaling gain a must be in (0, 1], got {self.scaling_gain_a}")
        if not self.r_s > 0:
            raise ValueError("r_s must be positive")
        if self.op_amp_model != "ideal":
            raise ValueError("only the ideal op-amp model is available")


def max_scaling_gain(peak, dead_zone_v=DEAD_ZONE_V):
    """Largest ``a <= 1`` with ``a * peak <= dead_zone_v`` in floating point."""
    if peak <= dead_zone_v:
        return 1.0
    a = dead_zone_v / peak
    while a * peak > dead_zone_v:
        a = float(np.nextafter(a, 0.0))
    return a


def generate_tones(spec: ToneSpec, f_sample, duration, t0=0.0) -> Signal:
    if not (duration > 0 and f_sample > 0):
        raise ValueError("duration and f_sample must be positive")
    n_samples = int(math.floor(duration * f_sample + 1e-9))
    n = np.arange(n_samples, dtype=np.float64)
    x = np.zeros(n_samples)
    for amp, freq, phase in spec.components:
        x = x + amp * np.sin(2 * np.pi * freq * n / f_sample + phase)
    return Signal(x, f_sample, t0)


def _integer_ratio(f_dense, f_s):
    ratio = f_dense / f_s
    k = round(ratio)
    if k < 1 or abs(ratio - k) > 1e-9 * ratio:
        raise RateMismatchError(
            f"dense rate {f_dense:g} Hz is not an integer multiple of f_s = {f_s:g} Hz"
        )
    return int(k)


def sample_hold(signal: Signal, f_s) -> Signal:
    """Ideal track-and-hold: keep every ``f_sample / f_s``-th sample."""
    if not f_s > 0:
        raise ValueError("f_s must be positive")
    k = _integer_ratio(signal.f_sample, f_s)
    return Signal(signal.samples[::k], f_s, signal.t0)


def delay_chain(signal, m):
    """Outputs of a chain of ``m`` unit delays; ``taps[k][n] = x[n - k]``."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    x = signal.samples if isinstance(signal, Signal) else check_samples(signal)
    n = len(x)
    taps = []
    for k in range(m + 1):
        t = np.zeros(n)
        if k < n:
            t[k:] = x[: n - k]
        taps.append(t)
    return taps


def _coeff_array(coeffs):
    if isinstance(coeffs, CoefficientSet):
        return coeffs.as_array()
    if isinstance(coeffs, SynthesisResult):
        return coeffs.realized_array()
    return check_coefficients(coeffs)


def evaluate_direct(coeffs, signal: Signal) -> Signal:
    """Direct-form FIR output with zero initial conditions."""
    b = _coeff_array(coeffs)
    taps = delay_chain(signal, len(b) - 1)
    y = np.zeros(len(signal))
    for bi, tap in zip(b, taps):
        y = y + bi * tap
    return Signal(y, signal.f_sample, signal.t0)


def _check_dead_zone(signal, cfg):
    peak = signal.peak()
    if cfg.scaling_gain_a * peak > cfg.dead_zone_v:
        need = max_scaling_gain(peak, cfg.dead_zone_v)
        raise DeadZoneViolation(
            f"a * max|x| = {cfg.scaling_gain_a * peak:g} V exceeds the {cfg.dead_zone_v:g} V "
            f"dead-zone; use a <= {need:.6g}",
            required_a=need,
        )


def evaluate_circuit(result: SynthesisResult, signal: Signal, cfg: CircuitConfig) -> Signal:
    """Differential two-stage circuit output.

    Each first-stage inverting summer weighs the scaled tap voltages by
    ``r_f / R`` over its memristor bank; the final stage (equal ``r_s``)
    subtracts the positive-bank output from the negative-bank output.
    """
    if not verify_result(result):
        raise ValueError("synthesis result is inconsistent with its grid")
    _check_dead_zone(signal, cfg)
    a = cfg.scaling_gain_a
    taps = delay_chain(a * signal.samples, result.n_taps - 1)
    v_plus = np.zeros(len(signal))
    v_minus = np.zeros(len(signal))
    for (rp, rm), tap in zip(result.pairs, taps):
        v_plus = v_plus - (result.r_f / rp) * tap
        v_minus = v_minus - (result.r_f / rm) * tap
    y = (cfg.r_s / cfg.r_s) * result.overall_gain * (v_minus - v_plus)
    if cfg.compensate_output:
        y = y / a
    return Signal(y, signal.f_sample, signal.t0)


@dataclass(frozen=True)
class DriftReport:
    max_relative_drift: float
    max_device_voltage: float
    n_devices: int
    n_steps: int
    v_threshold: float
    per_tap: tuple = field(default=())

    def to_dict(self):
        return {
            "max_relative_drift": self.max_relative_drift,
            "max_device_voltage_v": self.max_device_voltage,
            "n_devices": self.n_devices,
            "n_steps": self.n_steps,
            "v_threshold_v": self.v_threshold,
            "per_tap": [list(p) for p in self.per_tap],
        }


def drift_check(result: SynthesisResult, signal: Signal, cfg: CircuitConfig, device=None) -> DriftReport:
    """Run every memristor through the tap voltages it sees and measure drift.

    ``device`` is a template :class:`MemristorState` carrying the physical
    constants; each memristor is tuned from it to its pair value.  The
    reported drift is the largest ``|M(t) - M(0)| / M(0)`` over the run.
    """
    _check_dead_zone(signal, cfg)
    if device is None:
        device = MemristorState(r_on=result.grid.r_min, r_off=result.grid.r_max)
    dt = 1.0 / signal.f_sample
    taps = delay_chain(cfg.scaling_gain_a * signal.samples, result.n_taps - 1)
    worst = 0.0
    per_tap = []
    for (rp, rm), tap in zip(result.pairs, taps):
        tap_drift = []
        for r in (rp, rm):
            state = tune(device, r, result.grid)
            m0 = memristance(state)
            dev_worst = 0.0
            for v in tap:
                state = step(state, float(v), dt)
                dev_worst = max(dev_worst, abs(memristance(state) - m0) / m0)
            tap_drift.append(dev_worst)
            worst = max(worst, dev_worst)
        per_tap.append(tuple(tap_drift))
    peak_v = max((float(np.max(np.abs(t))) for t in taps if len(t)), default=0.0)
    return DriftReport(
        max_relative_drift=worst,
        max_device_voltage=peak_v,
        n_devices=2 * result.n_taps,
        n_steps=len(signal),
        v_threshold=device.v_threshold,
        per_tap=tuple(per_tap),
    )


def cycle_period(f, f_sample):
    """Smallest sample count spanning a whole number of cycles of ``f``.

    Returns ``None`` when ``f / f_sample`` is not a reasonable rational.
    """
    if f == 0:
        return 1
    ratio = f / f_sample
    frac = Fraction(ratio).limit_denominator(10**6)
    if abs(float(frac) - ratio) > 1e-14 * max(1.0, ratio):
        return None
    return frac.denominator


def common_window(frequencies, f_sample, available):
    """Longest window ``<= available`` holding whole cycles of every frequency.

    Returns 0 if no such window fits or a frequency is not aligned.
    """
    period = 1
    for f in frequencies:
        p = cycle_period(f, f_sample)
        if p is None:
            return 0
        period = period * p // math.gcd(period, p)
    return (available // period) * period
