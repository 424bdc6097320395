"""
holoflow: singular complex analytic vector fields

Local classification of zeros, poles and essential points, real-time flow with
incompleteness detection, asymptotic values and tracts of the distinguished parameter
Psi, closed-form families, and deterministic SVG phase portraits.
"""

try:
    from ._version import version as __version__
except ImportError:
    __version__ = "0.0.0+unknown"

from .expr import ExprAst, evaluate, differentiate, print_expr, compose, to_rational
from .parser import parse
from .field import VectorField
from .models import (
    LocalClass,
    Census,
    Trajectory,
    CompletenessReport,
    LimitVerdict,
    TractRegion,
    InverseSingularity,
    SeparabilityResult,
    PointKind,
    TrajectoryVerdict,
    Completeness,
    LimitKind,
    SingularityKind,
    TractType,
    Separability,
)
from .exceptions import (
    HoloflowException,
    ExprSyntaxError,
    UnknownIdentifierError,
    NotRationalError,
    ConfigError,
)
from .localclass import (
    classify_point,
    classify_infinity,
    winding_number,
    residue_of_time_form,
    sector_census,
    scan_window,
)
from .flow import Budget, flow_time, integrate_real_flow, completeness_report, psi_value
from .asymptotic import (
    RaySpec,
    asymptotic_value_along_path,
    field_value_along_path,
    probe_rays,
    grow_tract,
    build_catalogue,
    separability_test,
    classify_inverse_singularity,
    coherence_check,
    seed_incomplete_in_tract,
    dichotomy_check,
)
from .families import (
    ExponentialFamilyMember,
    PeriodicFamilyMember,
    analyze_exponential,
    analyze_periodic,
    random_periodic_member,
    crosscheck,
)
from .portrait import PortraitSpec, compute_streamlines, separatrix_skeleton
from .svg import emit_svg
from .config import Config, AnalysisSettings
from .terminal import Terminal, ColorMode
from .logger import Logger, LogLevel, get_logger
from .report import Report, validate_report

__all__ = [
    "ExprAst",
    "evaluate",
    "differentiate",
    "print_expr",
    "compose",
    "to_rational",
    "parse",
    "VectorField",
    "LocalClass",
    "Census",
    "Trajectory",
    "CompletenessReport",
    "LimitVerdict",
    "TractRegion",
    "InverseSingularity",
    "SeparabilityResult",
    "PointKind",
    "TrajectoryVerdict",
    "Completeness",
    "LimitKind",
    "SingularityKind",
    "TractType",
    "Separability",
    "HoloflowException",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "NotRationalError",
    "ConfigError",
    "classify_point",
    "classify_infinity",
    "winding_number",
    "residue_of_time_form",
    "sector_census",
    "scan_window",
    "Budget",
    "flow_time",
    "integrate_real_flow",
    "completeness_report",
    "psi_value",
    "RaySpec",
    "asymptotic_value_along_path",
    "field_value_along_path",
    "probe_rays",
    "grow_tract",
    "build_catalogue",
    "separability_test",
    "classify_inverse_singularity",
    "coherence_check",
    "seed_incomplete_in_tract",
    "dichotomy_check",
    "ExponentialFamilyMember",
    "PeriodicFamilyMember",
    "analyze_exponential",
    "analyze_periodic",
    "random_periodic_member",
    "crosscheck",
    "PortraitSpec",
    "compute_streamlines",
    "separatrix_skeleton",
    "emit_svg",
    "Config",
    "AnalysisSettings",
    "Terminal",
    "ColorMode",
    "Logger",
    "LogLevel",
    "get_logger",
    "Report",
    "validate_report",
]
