"""Dense multiway arrays with lexicographic vectorization and matricization."""

from .array_normal import (
    MatrixNormalParams,
    SeparableGaussian,
    log_density,
    sample,
    sample_array,
    transform,
    unfolding_law,
    vec_law,
)
from .core import (
    DenseTensor,
    classic_vec,
    classic_vec_permutation,
    dematricize,
    linear_index,
    matricize,
    matricize_oracle,
    multi_index,
    permute_modes,
    unvec,
    vec,
)
from .errors import (
    CapacityError,
    DefinitenessError,
    ModeError,
    ShapeError,
    TensorIndexError,
    UnknownIdentityError,
)
from .harness import (
    REGISTRY,
    CheckReport,
    TrialConfig,
    operator_basis_independence,
    run_all,
    run_identity,
)
from .kron import (
    cp_jacobian,
    khatri_rao,
    kron,
    kron_determinant,
    kron_slogdet,
    mode_product,
    multilinear_apply,
    outer,
    sylvester_vec_operator,
)
from .models import (
    CPModel,
    TuckerModel,
    cp_normalize,
    cp_reconstruct,
    cp_unfolding,
    cp_vec,
    diagonal_tensor,
    transform_cp,
    tucker_reconstruct,
    tucker_unfolding,
)

__version__ = "0.1.0"
