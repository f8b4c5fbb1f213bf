"""Fidelity and rank-restricted fidelity of positive forms on block
matrix algebras, with channel-transformability tooling."""

from .errors import (
    ConvergenceError,
    LocalInvertibilityError,
    NotHermitianError,
    NotPSDError,
    ParfidError,
    PremiseError,
    ShapeMismatchError,
    ValidationError,
)
from .forms import BlockAlgebra, PositiveForm, Trace, inner_derived, random_form
from .linalg import OrthoProjection, eigh, local_inverse, modulus, polar, sqrt_psd, support
from .pairs import BlockProjection, MinimalPair, PairsElement, complete_pair, make_minimal_pair
from .fidelity import (
    FidelityReport,
    OptimizerConfig,
    bures_distance,
    fidelity_spectral,
    fidelity_value,
    fidelity_variational,
)
from .partial import (
    PartialFidelityProfile,
    SearchConfig,
    partial_fidelity_sampling,
    partial_fidelity_spectral,
    partial_fidelity_variational,
    profile,
)
from .channels import (
    ChoiMatrix,
    Feasibility,
    FeasibilityConfig,
    FeasibilityVerdict,
    KrausSet,
    apply,
    choi_from_kraus,
    feasibility,
    transformability_counterexample,
    kraus_from_choi,
    random_cptp,
)
from .io import MatrixDocument

__version__ = "1.0.0"

__all__ = [
    "BlockAlgebra",
    "BlockProjection",
    "ChoiMatrix",
    "ConvergenceError",
    "Feasibility",
    "FeasibilityConfig",
    "FeasibilityVerdict",
    "FidelityReport",
    "KrausSet",
    "LocalInvertibilityError",
    "MatrixDocument",
    "MinimalPair",
    "NotHermitianError",
    "NotPSDError",
    "OptimizerConfig",
    "OrthoProjection",
    "PairsElement",
    "ParfidError",
    "PartialFidelityProfile",
    "PositiveForm",
    "PremiseError",
    "SearchConfig",
    "ShapeMismatchError",
    "Trace",
    "ValidationError",
    "apply",
    "bures_distance",
    "choi_from_kraus",
    "complete_pair",
    "eigh",
    "feasibility",
    "fidelity_spectral",
    "fidelity_value",
    "fidelity_variational",
    "inner_derived",
    "transformability_counterexample",
    "kraus_from_choi",
    "local_inverse",
    "make_minimal_pair",
    "modulus",
    "partial_fidelity_sampling",
    "partial_fidelity_spectral",
    "partial_fidelity_variational",
    "polar",
    "profile",
    "random_cptp",
    "random_form",
    "sqrt_psd",
    "support",
]
