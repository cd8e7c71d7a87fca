"""Space-frequency purity and entanglement of SPDC photon pairs."""

from .errors import (
    ConditioningError,
    ConfigParseError,
    DomainError,
    LimitConvergenceError,
    NumericalError,
    PhaseMatchingError,
    RangeError,
    SpdcError,
    ValidationError,
    WindowError,
)
from .phasematch import Config, linearize, solve_cut_angle
from .quadratic_state import (
    FREQUENCY_TRACE,
    IDLER_TRACE,
    MOMENTUM_TRACE,
    SIGNAL_TRACE,
    PurityReport,
    QuadraticForm,
    TracePairing,
    assemble_A,
    compose_traced_form,
    det_pd,
    entanglement_measures,
    evaluate,
    purity,
)
from .scenarios import PRESETS, SweepTable, load_config, preset, sweep

__version__ = "0.1.0"
