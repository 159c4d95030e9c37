"""framekit: finite frame bounds, Beurling densities, frame measures and thinning."""

__version__ = "0.1.0"

from .core import (FrameBounds, FrameSystem, HermitianOperator, bessel_bound, canonical_dual,
                   diagonal_coefficients, frame_bounds, frame_operator, parseval_transform)
from .estimators import BeurlingDensityEstimator, FrameAnalyzer, FrameThinner, ParsevalTransformer
from .exceptions import (BudgetExceeded, CertificateFailure, FramekitError, InsufficientDensity,
                         InvalidInput, NoProgress, NumericalFailure, PartialResult)
from .generators import (GaborSpec, SpectrumSpec, exponential_system, gabor_probes, gabor_system,
                         localization_profile, orthonormal_basis, pw_kernel_system)
from .geometry import (DensityReport, PointGeometry, WindowFamily, ball_points, beurling_density,
                       relative_separation)
from .measure import MeasureReport, check_density_bounds, frame_measure, verify_frd
from .selector import (CellPartition, SelectorResult, alpha_norm, find_selector,
                       verify_selector_bound)
from .thinning import (ThinningConfig, ThinningTrace, alpha_set, check_near_critical_lemma,
                       choose_alpha_r, partition_cells, thin_once, thin_to_density)

__all__ = [
    "BeurlingDensityEstimator", "BudgetExceeded", "CellPartition", "CertificateFailure",
    "DensityReport", "FrameAnalyzer", "FrameBounds", "FrameSystem", "FrameThinner",
    "FramekitError", "GaborSpec", "HermitianOperator", "InsufficientDensity", "InvalidInput",
    "MeasureReport", "NoProgress", "NumericalFailure", "ParsevalTransformer", "PartialResult",
    "PointGeometry", "SelectorResult", "SpectrumSpec", "ThinningConfig", "ThinningTrace",
    "WindowFamily", "alpha_norm", "alpha_set", "ball_points", "bessel_bound", "beurling_density",
    "canonical_dual", "check_density_bounds", "check_near_critical_lemma", "choose_alpha_r",
    "diagonal_coefficients", "exponential_system", "find_selector", "frame_bounds",
    "frame_measure", "frame_operator", "gabor_probes", "gabor_system", "localization_profile",
    "orthonormal_basis", "parseval_transform", "partition_cells", "pw_kernel_system",
    "relative_separation", "thin_once", "thin_to_density", "verify_frd", "verify_selector_bound",
]
