"""scikit-learn style front end.

:class:`MemristorFIRFilter` is fitted on a set of target coefficients (the
synthesis step) and then transforms signals through the behavioral circuit.
It follows the estimator conventions (constructor stores parameters only,
learned state ends in ``_``), so ``get_params``/``set_params``/``clone`` and
pipelines work as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import frequency_response
from .device import MemristanceGrid
from .filter_design import CoefficientSet
from .simulation import CircuitConfig, Signal, evaluate_circuit, max_scaling_gain
from .synthesis import NORMS, SearchConfig, synthesize_advanced, synthesize_simple
from .validation import check_choice, check_coefficients, check_positive


class MemristorFIRFilter(TransformerMixin, BaseEstimator):
    """Memristor-based FIR filter fitted to target coefficients.

    Parameters
    ----------
    method : {"advanced", "simple"}
        Pair selection method.
    bits : int
        Tuning resolution; the grid has ``2**bits`` levels.
    r_min, r_max : float
        Memristance range in ohms.
    spacing : {"linear_resistance", "linear_conductance"}
        How grid levels are spread over the range.
    objective_norm : str
        Total-error measure minimized over the ``r_f`` sweep.
    r_f : float or None
        Fixed feedback resistor for the simple method; ``None`` selects it.
    rf_step : float
        Spacing of the ``r_f`` sweep in ohms.
    rf_on_grid : bool
        Restrict ``r_f`` to grid levels (advanced method).
    scaling_gain_a : float or "auto"
        Input buffer gain used by :meth:`transform`.  ``"auto"`` picks the
        largest gain that keeps each signal inside the dead-zone.
    compensate_output : bool
        Divide the circuit output by the buffer gain.
    n_jobs : int or None
        Workers for the ``r_f`` sweep; does not change the result.

    Attributes
    ----------
    synthesis_ : SynthesisResult
    grid_ : MemristanceGrid
    r_f_ : float
    pairs_ : ndarray of shape (n_taps, 2)
    coef_ : ndarray of shape (n_taps,)
        Realized coefficients.
    target_coef_ : ndarray of shape (n_taps,)
    errors_pct_ : ndarray of shape (n_taps,)
    """

    def __init__(
        self,
        method="advanced",
        bits=7,
        r_min=1e3,
        r_max=1e6,
        spacing="linear_resistance",
        objective_norm="sum_rel",
        r_f=None,
        rf_step=1e3,
        rf_on_grid=False,
        scaling_gain_a="auto",
        compensate_output=True,
        n_jobs=None,
    ):
        self.method = method
        self.bits = bits
        self.r_min = r_min
        self.r_max = r_max
        self.spacing = spacing
        self.objective_norm = objective_norm
        self.r_f = r_f
        self.rf_step = rf_step
        self.rf_on_grid = rf_on_grid
        self.scaling_gain_a = scaling_gain_a
        self.compensate_output = compensate_output
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        """Synthesize memristor pairs for the target coefficients ``X``."""
        check_choice(self.method, "method", {"advanced", "simple"})
        check_choice(self.objective_norm, "objective_norm", set(NORMS))
        check_positive(self.rf_step, "rf_step")
        if isinstance(X, CoefficientSet):
            targets = X.as_array()
        else:
            targets = check_coefficients(X, name="X")
        grid = MemristanceGrid(self.r_min, self.r_max, self.bits, self.spacing)
        if self.method == "simple":
            result = synthesize_simple(targets, grid, self.r_f, rf_step=self.rf_step, norm=self.objective_norm)
        else:
            config = SearchConfig(
                grid,
                objective_norm=self.objective_norm,
                rf_step=self.rf_step,
                rf_on_grid=self.rf_on_grid,
                n_jobs=self.n_jobs,
            )
            result = synthesize_advanced(targets, config)
        self.synthesis_ = result
        self.grid_ = grid
        self.r_f_ = result.r_f
        self.pairs_ = np.array(result.pairs)
        self.coef_ = result.realized_array()
        self.target_coef_ = np.array(result.targets)
        self.errors_pct_ = np.array(result.errors_pct)
        self.n_taps_ = result.n_taps
        return self

    def _gain_for(self, row):
        if self.scaling_gain_a == "auto":
            peak = float(np.max(np.abs(row))) if row.size else 0.0
            return max_scaling_gain(peak)
        return check_positive(self.scaling_gain_a, "scaling_gain_a")

    def transform(self, X):
        """Filter each row of ``X`` through the circuit model.

        ``X`` is a single signal of shape (n_samples,) or a batch of shape
        (n_signals, n_samples); the output has the same shape.
        """
        check_is_fitted(self, "synthesis_")
        X = check_array(X, ensure_2d=False, dtype=np.float64)
        single = X.ndim == 1
        rows = X[None, :] if single else X
        out = np.empty_like(rows)
        for k, row in enumerate(rows):
            cfg = CircuitConfig(scaling_gain_a=self._gain_for(row), compensate_output=self.compensate_output)
            out[k] = evaluate_circuit(self.synthesis_, Signal(row, 1.0), cfg).samples
        return out[0] if single else out

    def frequency_response(self, f_s, n_points=1024):
        check_is_fitted(self, "synthesis_")
        return frequency_response(self.coef_, f_s, n_points)

    def score(self, X=None, y=None):
        """Negative worst-case coefficient percent error (higher is better)."""
        check_is_fitted(self, "synthesis_")
        return -self.synthesis_.max_error_pct
