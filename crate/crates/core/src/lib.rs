//! Bipartite entanglement measures on finite-dimensional density matrices.
//!
//! The crate is organised bottom-up:
//!
//! - [`qmat`]: complex matrices, a Jacobi eigensolver, partial trace and
//!   transpose, entropies.
//! - [`states`]: isotropic, Bell-diagonal, maximally entangled and UPB states,
//!   plus seeded random samplers.
//! - [`channels`]: local Kraus instruments, one-way LOCC protocols, twirling.
//! - [`measures`]: entropy of entanglement, entanglement of formation,
//!   relative entropy of entanglement, log-negativity, the hashing bound.
//! - [`axioms`]: seeded falsification checks for the monotone postulates and
//!   the isotropic scaling scan.
//!
//! All logarithms are base 2, so values are in ebits.

pub mod axioms;
pub mod channels;
pub mod error;
pub mod measures;
pub mod par;
pub mod qmat;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use par::Exec;
pub use qmat::{ComplexMatrix, DensityMatrix, Party, PureState};
