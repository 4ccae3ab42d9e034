//! Simulation of quantum-communication protocols between two uniformly
//! accelerated observers who share the Minkowski vacuum.
//!
//! The exact engine is [`gaussian`]: every state in the protocols is Gaussian,
//! so states are mean vectors and covariance matrices over labelled modes.
//! [`fock`] is an independent truncated photon-number backend used to
//! cross-check the Gaussian engine. [`frames`] relates the inertial and
//! accelerated descriptions; [`teleport`], [`coinflip`], [`bell`] and [`qkd`]
//! implement the protocols on top.
//!
//! Convention used throughout: `a = X + iP`, vacuum `Var(X) = Var(P) = 1/4`,
//! phase-space vectors ordered `(x_1, p_1, ..., x_M, p_M)`.

pub mod bell;
pub mod cli;
pub mod coinflip;
pub mod error;
pub mod fock;
pub mod frames;
pub mod gaussian;
pub mod montecarlo;
pub mod qkd;
pub mod teleport;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, PhasePoint, SymplecticOp};
pub use num_complex::Complex64;
