"""Dimension theory experiments for invariant graphs of hyperbolic skew products."""

__version__ = "0.1.0"

from .errors import (BudgetExceeded, ConfigError, InvalidParameters, NotBlenderRegime, SkewGraphError,
                     UndersampledScale)
from .symbolic import OneSidedPotential, ShiftSpace, birkhoff_sum, cylinder_words, periodic_completion
from .systems import AffineAnosov, AffineHorseshoe, BakerWeierstrass, build_system
from .thermo import pressure, solve_bowen, solve_pressure_root
from .graph import classify_regularity, evaluate_graph, sample_unstable_slice
from .geometry import box_dimension_estimate, moran_cover
from .multifractal import entropy_surface, variational_dimension
from .prediction import predict_dimension

__all__ = [
    "__version__", "BudgetExceeded", "ConfigError", "InvalidParameters", "NotBlenderRegime", "SkewGraphError",
    "UndersampledScale", "OneSidedPotential", "ShiftSpace", "birkhoff_sum", "cylinder_words",
    "periodic_completion", "AffineAnosov", "AffineHorseshoe", "BakerWeierstrass", "build_system", "pressure",
    "solve_bowen", "solve_pressure_root", "classify_regularity", "evaluate_graph", "sample_unstable_slice",
    "box_dimension_estimate", "moran_cover", "entropy_surface", "variational_dimension", "predict_dimension",
]
