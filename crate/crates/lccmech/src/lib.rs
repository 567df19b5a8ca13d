//! Hamiltonian mechanics on cosymplectic and locally conformal
//! cosymplectic (LCC) / locally conformal symplectic (LCS) Darboux charts.
//!
//! A chart carries coordinates `[q1..qn, p1..pn, t]` (plus `s` after
//! symplectization), a Lee one-form `Theta = psi_i dq^i + zeta dt`, and the
//! induced pair `eta = dt - t Theta`, `Omega = dq^i ^ dp_i + 2 p_i Theta ^
//! dq^i`. From those the crate builds Reeb and evolution fields, conformal
//! Jacobi brackets, Hamilton-Jacobi residuals, and fixed-step integrators,
//! all against symbolic expressions parsed from text.

// Index-based loops over matrix/component arrays mirror the tensor
// index notation of the underlying formulas; iterator rewrites would
// obscure which axis is which.
#![allow(clippy::needless_range_loop)]

pub mod calculus;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod hj;
pub mod linalg;
pub mod model;
pub mod ops;
pub mod report;
pub mod sample;
pub mod tol;

pub use error::Error;
