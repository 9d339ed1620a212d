//! Krylov construction for discrete-time (Floquet) unitary evolution.
//!
//! The crate builds Krylov bases of a seeding state under a unitary `U` with
//! the Szegő and CMV recursions, returning the Verblunsky coefficients that
//! parametrize the resulting Krylov chain. Around that core it provides chain
//! propagation and spreading observables, random Verblunsky ensembles with
//! spectral statistics, the kicked top and kicked Ising Floquet models, the
//! Lanczos/Toeplitz/XY reductions used as cross-checks, and a circuit emitter
//! for the factorized CMV unitary.
//!
//! Everything here is `no_std` + `alloc`; file formats, configuration and the
//! command line live in the companion `cmv-krylov-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod circuit;
pub mod dynamics;
pub mod ensembles;
mod error;
pub mod krylov;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod reductions;

pub use error::{Error, Result};
pub use krylov::{
    cmv_build, cmv_factorization, hessenberg_matrix, lanczos, reorthogonalize, szego, BasisKind,
    CmvForm, KrylovBasis, KrylovOptions, LanczosCoefficients, VerblunskySequence,
};
pub use linalg::C64;
pub use operator::{DenseOperator, FnUnitary, Hermitian, Unitary};
