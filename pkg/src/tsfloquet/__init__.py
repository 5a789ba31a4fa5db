"""Floquet analysis of linear dynamic systems x^Delta = A(t) x (+ F(t)) on
time scales that are periodic in shift operators: purely discrete, purely
continuous, and hybrid windows are all handled by one propagation engine."""

__version__ = "0.1.0"

from .config import AnalysisConfig, load_config
from .errors import TimeScaleError
from .floquet import (
    FloquetDecomposition,
    FloquetExponent,
    decompose,
    find_exponent,
    monodromy,
)
from .hilger import (
    circle_minus,
    circle_neg,
    circle_plus,
    hilger_imaginary,
    hilger_real,
    in_hilger_circle,
    scalar_exp,
    uniformly_regressive,
)
from .matpow import SpectralData, matrix_log, real_power, spectral_decompose
from .pipeline import AnalysisResult, emit_report, emit_samples, run_analysis
from .shifts import (
    PeriodClock,
    ShiftSystem,
    iterate_shift,
    make_shifts,
    shift,
    shift_delta_derivative,
    verify_periodicity,
)
from .stability import StabilityReport, classify, monomial, regressivity_certificate
from .timescale import (
    TimeCell,
    TimeScaleWindow,
    delta_derivative,
    delta_integral,
    make_window,
    sample_points,
)
from .transition import (
    MatrixFunction,
    VectorFunction,
    peano_baker,
    transition_matrix,
    variation_of_constants,
)
