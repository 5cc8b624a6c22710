"""Group and Drazin inverses of dense complex matrices, with a harness that
checks additive and block-matrix group-inverse formulas against an oracle."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DEFAULT_TOL,
    ToleranceProfile,
    full_rank_factorization,
    inverse,
    numerical_rank,
    pierce_decompose,
    relative_residual,
)
from .spectral import (  # noqa: E402
    DrazinResult,
    GroupInverseResult,
    cline_transfer,
    drazin_inverse,
    group_inverse,
    verify_group_axioms,
)
from .blocks import BlockInstance, block_formula, block_hypotheses  # noqa: E402

__all__ = [
    "__version__",
    "DEFAULT_TOL",
    "ToleranceProfile",
    "numerical_rank",
    "full_rank_factorization",
    "inverse",
    "pierce_decompose",
    "relative_residual",
    "GroupInverseResult",
    "DrazinResult",
    "group_inverse",
    "drazin_inverse",
    "verify_group_axioms",
    "cline_transfer",
    "BlockInstance",
    "block_hypotheses",
    "block_formula",
]
