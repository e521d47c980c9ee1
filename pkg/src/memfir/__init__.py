"""Synthesis and behavioral verification of memristor-based FIR filters."""

from .analysis import (
    FrequencyResponse,
    error_report,
    frequency_response,
    response_at,
    response_deviation,
    tone_amplitude,
)
from .device import (
    MemristanceGrid,
    MemristorState,
    build_grid,
    memristance,
    quantize,
    step,
    tune,
)
from .estimators import MemristorFIRFilter
from .filter_design import (
    CoefficientSet,
    FilterSpec,
    Symmetry,
    classify_symmetry,
    design_windowed,
    load_coefficients,
)
from .simulation import (
    CircuitConfig,
    Signal,
    ToneSpec,
    delay_chain,
    drift_check,
    evaluate_circuit,
    evaluate_direct,
    generate_tones,
    sample_hold,
)
from .synthesis import (
    SearchConfig,
    SynthesisResult,
    coefficient_from_pair,
    objective,
    percent_error,
    synthesize_advanced,
    synthesize_simple,
    verify_result,
)

__version__ = "0.1.0"
