"""Memristor device model: programmable memristance grid and HP drift dynamics.

A tuning circuit can only program a memristor to one of ``2**bits`` levels
between ``r_min`` and ``r_max``; :class:`MemristanceGrid` holds those levels.
:class:`MemristorState` follows the HP linear ion-drift model, with a
symmetric dead-zone below which the state does not move.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidSpecError

SPACINGS = ("linear_resistance", "linear_conductance")

# cited device range and dead-zone
DEFAULT_R_MIN = 1e3
DEFAULT_R_MAX = 1e6
DEFAULT_BITS = 7
DEFAULT_V_THRESHOLD = 0.1
# representative HP-model constants; only the sign/zero of drift is used
DEFAULT_THICKNESS = 10e-9
DEFAULT_MOBILITY = 1e-14


@dataclass(frozen=True)
class MemristanceGrid:
    """Sorted set of the ``2**bits`` attainable memristance values (ohms)."""

    r_min: float
    r_max: float
    bits: int
    spacing: str = "linear_resistance"
    levels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.r_min) and np.isfinite(self.r_max) and 0 < self.r_min < self.r_max):
            raise InvalidSpecError(
                f"grid range must satisfy 0 < r_min < r_max, got ({self.r_min!r}, {self.r_max!r})"
            )
        if isinstance(self.bits, bool) or not isinstance(self.bits, (int, np.integer)):
            raise InvalidSpecError(f"bits must be an integer, got {self.bits!r}")
        if not 1 <= self.bits <= 16:
            raise InvalidSpecError(f"bits must be in [1, 16], got {self.bits}")
        if self.spacing not in SPACINGS:
            raise InvalidSpecError(f"spacing must be one of {SPACINGS}, got {self.spacing!r}")
        object.__setattr__(self, "r_min", float(self.r_min))
        object.__setattr__(self, "r_max", float(self.r_max))
        object.__setattr__(self, "bits", int(self.bits))
        levels = _levels(self.r_min, self.r_max, self.bits, self.spacing)
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    def __len__(self):
        return len(self.levels)

    def __contains__(self, r):
        idx = np.searchsorted(self.levels, r)
        return bool(idx < len(self.levels) and self.levels[idx] == r)

    def to_dict(self):
        return {"r_min": self.r_min, "r_max": self.r_max, "bits": self.bits, "spacing": self.spacing}


def _levels(r_min, r_max, bits, spacing):
    n = 2**bits
    k = np.arange(n, dtype=np.float64)
    if spacing == "linear_resistance":
        levels = r_min + k * ((r_max - r_min) / (n - 1))
    else:
        g_lo, g_hi = 1.0 / r_max, 1.0 / r_min
        g = g_lo + k * ((g_hi - g_lo) / (n - 1))
        levels = np.sort(1.0 / g)
    levels[0], levels[-1] = r_min, r_max
    if np.any(np.diff(levels) <= 0):
        raise InvalidSpecError(
            f"{bits}-bit grid over [{r_min}, {r_max}] is too fine for double precision"
        )
    return levels


def build_grid(r_min=DEFAULT_R_MIN, r_max=DEFAULT_R_MAX, bits=DEFAULT_BITS, spacing="linear_resistance"):
    return MemristanceGrid(r_min, r_max, bits, spacing)


def quantize(grid: MemristanceGrid, r):
    """Snap ``r`` to the nearest grid level; ties go to the lower level.

    Accepts a scalar or an array.  Values outside the grid clamp to the
    nearest endpoint.
    """
    levels = grid.levels
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(~(r_arr > 0)):
        raise ValueError("resistance must be > 0")
    hi = np.clip(np.searchsorted(levels, r_arr), 1, len(levels) - 1)
    lo = hi - 1
    pick_lo = (r_arr - levels[lo]) <= (levels[hi] - r_arr)
    out = np.where(pick_lo, levels[lo], levels[hi])
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class MemristorState:
    """HP linear ion-drift memristor.

    ``w`` is the doped-region width in metres, ``0 <= w <= thickness``.  At
    ``w = 0`` the device sits at ``r_off``; at ``w = thickness`` at ``r_on``.
    """

    w: float = 0.0
    thickness: float = DEFAULT_THICKNESS
    r_on: float = DEFAULT_R_MIN
    r_off: float = DEFAULT_R_MAX
    mu_v: float = DEFAULT_MOBILITY
    v_threshold: float = DEFAULT_V_THRESHOLD

    def __post_init__(self):
        if not self.thickness > 0:
            raise InvalidSpecError("thickness must be positive")
        if not 0 < self.r_on < self.r_off:
            raise InvalidSpecError("need 0 < r_on < r_off")
        if not self.mu_v > 0:
            raise InvalidSpecError("mu_v must be positive")
        if not self.v_threshold >= 0:
            raise InvalidSpecError("v_threshold must be >= 0")
        if not 0.0 <= self.w <= self.thickness:
            raise InvalidSpecError(f"w must lie in [0, {self.thickness}], got {self.w}")


def memristance(state: MemristorState) -> float:
    x = state.w / state.thickness
    return state.r_on * x + state.r_off * (1.0 - x)


def step(state: MemristorState, v: float, dt: float) -> MemristorState:
    """Advance the state by one explicit Euler step under voltage ``v``.

    Positive ``v`` drives current into the polarity terminal, which widens the
    doped region and lowers the memristance.  Voltages with
    ``|v| <= v_threshold`` leave the state untouched.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if abs(v) <= state.v_threshold:
        return state
    i = v / memristance(state)
    w = state.w + state.mu_v * (state.r_on / state.thickness) * i * dt
    w = min(max(w, 0.0), state.thickness)
    return dataclasses.replace(state, w=w)


def _solve_w(state, r):
    x = (state.r_off - r) / (state.r_off - state.r_on)
    w = min(max(x * state.thickness, 0.0), state.thickness)
    # the closed form can miss r by an ulp; try neighbouring w values
    best, best_err = w, abs(memristance(dataclasses.replace(state, w=w)) - r)
    cand = w
    for direction in (np.inf, -np.inf):
        cand = w
        for _ in range(8):
            if best_err == 0:
                return best
            cand = float(np.nextafter(cand, direction))
            if not 0.0 <= cand <= state.thickness:
                break
            err = abs(memristance(dataclasses.replace(state, w=cand)) - r)
            if err < best_err:
                best, best_err = cand, err
    return best


def tune(state: MemristorState, target: float, grid: MemristanceGrid) -> MemristorState:
    """Program the device to the grid level nearest ``target``."""
    if not state.r_on <= target <= state.r_off:
        raise InvalidSpecError(
            f"target {target!r} ohm outside device range [{state.r_on}, {state.r_off}]"
        )
    r = quantize(grid, target)
    if not state.r_on <= r <= state.r_off:
        raise InvalidSpecError(f"grid level {r!r} ohm outside device range")
    return dataclasses.replace(state, w=_solve_w(state, r))
