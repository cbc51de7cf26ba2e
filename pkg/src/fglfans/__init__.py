"""Piecewise graded power series over the Lazard ring on toric fans."""
from .fan import Fan, star_subdivision, resolve, validate_fan
from .fgl import GradedRing, GradedSeries, fgl_sum, inverse_series, n_series, formal_linear_combination
from .lazard import build_lazard, graded_rank, axiom_residuals
from .pps import Domain, global_sections, is_global_section, pullback_subdivision
from .descent import DescentSquare, check_cartesian, compute_via_resolution
from .oracles import pp_global_sections, compare_with_additive_specialization

__version__ = "0.1.0"

__all__ = [
    "Fan", "star_subdivision", "resolve", "validate_fan",
    "GradedRing", "GradedSeries", "fgl_sum", "inverse_series", "n_series", "formal_linear_combination",
    "build_lazard", "graded_rank", "axiom_residuals",
    "Domain", "global_sections", "is_global_section", "pullback_subdivision",
    "DescentSquare", "check_cartesian", "compute_via_resolution",
    "pp_global_sections", "compare_with_additive_specialization",
]
