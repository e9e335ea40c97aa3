"""Level-one cusp forms: exact q-expansions, Hecke eigenbases, Petersson norms,
quadratic-form decompositions and prime-sum moment experiments."""

from .analytic import (
    petersson_delta_check,
    petersson_norm_quadrature,
    petersson_norm_sym2,
    sym2_L_at_1,
)
from .decomp import (
    Decomposition,
    QuadraticFormSpec,
    build_quadratic,
    decompose_spec,
    hecke_decompose,
    lp_norm,
    lp_scan,
    second_coeff_and_bounds,
    sparsity_certificate,
)
from .exactq import QSeries, delta, eisenstein, series_linear, series_mul
from .hecke import DegenerateSplittingError, Eigenform, eigenforms, hecke_basis, hecke_matrix
from .space import CuspSpace, cusp_space, dim_cusp, miller_basis

__version__ = "0.1.0"
