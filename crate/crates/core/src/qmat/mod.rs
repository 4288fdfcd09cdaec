//! Dense complex linear algebra and bipartite state primitives.

mod density;
mod eig;
mod matrix;

pub(crate) use density::relative_entropy_with;
pub use density::{
    copy_regroup_perm, entangled_fidelity, partial_trace, partial_transpose, relative_entropy, shannon_bits,
    tensor_power, tensor_product, trace_distance, vn_entropy, DensityMatrix, Party, PureState, Tolerances,
    HERMITIAN_TOL, NORM_TOL, POSITIVITY_TOL, SUPPORT_TOL, TRACE_TOL,
};
pub use eig::{hermitian_eig, hermitian_eigenvalues, Spectrum, JACOBI_TOL};
pub use matrix::{inner, vec_norm, ComplexMatrix, ONE, ZERO};
