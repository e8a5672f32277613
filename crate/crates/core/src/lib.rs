//! Cavity cooling of spin ensembles with local dephasing, simulated on the
//! permutation-symmetric SU(4) subspace of the doubled (ket ⊗ bra) space.
//!
//! The symmetric subspace has dimension `(N+1)(N+2)(N+3)/6`, so collective
//! dissipators plus identical local noise stay tractable for `N = 100`.
//! All collective superoperators are built from one-body lifts of the SU(4)
//! generators; [`oracle`] holds an independent dense construction for
//! `N ≤ 4`.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod lindblad;
pub mod magnus;
pub mod oracle;
pub mod propagate;
pub mod sparse;
pub mod su4;
pub mod symspace;
pub mod verify;

pub use analytic::AnalyticParams;
pub use error::{Error, Result};
pub use lindblad::{CavityParams, ModelParams, SpinCavitySpace};
pub use magnus::FrameGenerator;
pub use propagate::{evolve, evolve_state, Method, ObservableSet, PropagationSpec, TimeSeries};
pub use sparse::SparseSuperoperator;
pub use su4::{Component, Family, GeneratorCatalog, GeneratorId, IdentityCheck};
pub use symspace::{OccupationBasis, SymState};

/// `num_complex::Complex64`, the scalar type of every superoperator.
pub type C64 = num_complex::Complex64;
