"""Beam-splitter mixing of a squeezed thermal state with a thermal state.

Covariance matrices use vacuum = 1/2 units; entropic quantities are in
nats.  See :mod:`gaussmix.core` for the conventions.
"""
from .core import (
    BeamSplitter,
    CovMat2,
    CovMat4,
    Invariants,
    SingleModeState,
    apply_beam_splitter,
    cm_single_mode,
    cm_thermal,
    invariants_from_params,
    output_cm,
    output_spectrum,
    ppt_eigenvalue,
    symplectic_eigenvalues,
    symplectic_invariants,
)
from .errors import BracketError, OracleConvergenceError, UnphysicalStateError
from .kernels import BACKEND
from .measures import (
    GaussianMeasurement,
    MeasureReport,
    emin_closed_form,
    emin_oracle,
    entropy_f,
    gaussian_discord,
    log_negativity,
    measure_report,
    measure_report_params,
    measures_from_params,
    mutual_information,
    nonclassical_depth,
    p_classical,
)
from .thresholds import (
    EffectiveNC,
    ThresholdPoint,
    effective_nc,
    effective_nc_at_tau,
    p_threshold_ns,
    p_threshold_nt,
    sep_threshold_ns,
    sep_threshold_vs_p_threshold,
)

__version__ = "0.1.0"
