"""Limiting spectra of fused sample covariance matrices and spectral anomaly detection.

Quick start::

    from freefusion import MpParams, asd_p1, asd_p2, mp_density

    mp = mp_density(MpParams(sigma2=1.0, c=1.0))
    p1 = asd_p1(MpParams(), MpParams())   # S0 + S1
    p2 = asd_p2(MpParams(), MpParams())   # S0 S1 + S1 S0
"""

from .datagen import (
    LabeledScenario,
    ScenarioSpec,
    TimeSeries,
    default_battery,
    generate_scenario,
    load_csv,
    sample_window,
    save_csv,
)
from .detection import Decision, DetectionReport, detect, severity_rank
from .empirical import Histogram, PolyId, empirical_spectrum
from .errors import (
    ContractError,
    ConvergenceError,
    DegenerateRowError,
    FreeFusionError,
    NumericError,
    ParseError,
    SingularityError,
)
from .free_operator import Linearization, asd_p2, linearize_p2, p2_transform
from .free_scalar import asd_p1, subordinate_pair
from .numerics import RngStream, hermitian_eigenvalues
from .pipeline import run_battery, theoretical_bound
from .spectra import (
    MpParams,
    SpectralDensity,
    cauchy_transform,
    ks_distance,
    mp_cauchy_closed,
    mp_density,
    stieltjes_invert,
)

__version__ = "0.1.0"
