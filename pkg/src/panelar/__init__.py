"""Monte Carlo laboratory and inference toolkit for the panel AR(1) model.

``y_it = rho * y_{i,t-1} + eps_it`` with ``y_i0 = 0`` across six root
regimes, the pooled least-squares estimator, its regime-specific normal
limits, and the machinery to check them by simulation.
"""

from .asymptotics import (
    MomentReport,
    exact_second_moment,
    finite_t_moments,
    mildly_explosive_limit_sample,
    sample_local_to_unity_functionals,
    sample_unit_root_functionals,
)
from .core import (
    LimitLaw,
    RegimeKind,
    RegimeSpec,
    limit_law,
    local_to_unity_variance,
    resolve_rho,
)
from .estimate import (
    CrossSectionStats,
    LseResult,
    cross_section_stats,
    explosive_uv_stats,
    lse,
)
from .inference import InferenceResult, confidence_interval, unit_root_test
from .montecarlo import (
    McConfig,
    McReport,
    berry_esseen_curve,
    ks_distance,
    run_replications,
    variance_convergence,
)
from .report import emit_report, load_report
from .simulate import Family, InnovationSpec, PanelData, ingest_panel, simulate_panel

__version__ = "0.1.0"

__all__ = [
    "CrossSectionStats",
    "Family",
    "InferenceResult",
    "InnovationSpec",
    "LimitLaw",
    "LseResult",
    "McConfig",
    "McReport",
    "MomentReport",
    "PanelData",
    "RegimeKind",
    "RegimeSpec",
    "berry_esseen_curve",
    "confidence_interval",
    "cross_section_stats",
    "emit_report",
    "exact_second_moment",
    "explosive_uv_stats",
    "finite_t_moments",
    "ingest_panel",
    "ks_distance",
    "limit_law",
    "load_report",
    "local_to_unity_variance",
    "lse",
    "mildly_explosive_limit_sample",
    "resolve_rho",
    "run_replications",
    "sample_local_to_unity_functionals",
    "sample_unit_root_functionals",
    "simulate_panel",
    "unit_root_test",
    "variance_convergence",
]
