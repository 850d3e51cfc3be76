//! Exact diagonalization of the Dicke model
//!
//! ```text
//! H_ε = Δ Jz + Ω a†a + λ Jx (a + a†) − ε Jx
//! ```
//!
//! on a truncated spin ⊗ Fock space, with the observables needed to follow
//! its superradiant transition into the classical-oscillator,
//! classical-spin and fast-oscillator limits, plus the closed-form and
//! effective-model results those limits reduce to.
//!
//! ```
//! use dicke_ed::dicke::ModelParams;
//! use dicke_ed::eigensolver::{converge_cutoff, suggested_start_cutoff, SolverConfig};
//! use dicke_ed::hilbert::SpinLength;
//! use dicke_ed::observables::order_parameter;
//!
//! let p = ModelParams::with_kappa(SpinLength::new(4).unwrap(), 1.0, 1.0, 0.5).unwrap();
//! let gs = converge_cutoff(&p, suggested_start_cutoff(&p), &SolverConfig::default()).unwrap();
//! assert!(gs.converged);
//! assert!(order_parameter(&gs).1.abs() < 0.01);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analytics;
pub mod cli;
pub mod dicke;
pub mod effective_models;
pub mod eigensolver;
pub mod error;
pub mod hilbert;
pub mod observables;
pub mod squeezed_oscillator;
pub mod sweep;

pub use error::{Error, Result};

/// The guide's chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hilbert-space.md")]
    mod hilbert_space {}
    #[doc = include_str!("../../../book/src/hamiltonian.md")]
    mod hamiltonian {}
    #[doc = include_str!("../../../book/src/ground-states.md")]
    mod ground_states {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/limits.md")]
    mod limits {}
    #[doc = include_str!("../../../book/src/effective-models.md")]
    mod effective_models {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
