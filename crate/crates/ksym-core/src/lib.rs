//! Structure-preserving stochastic integrators for the stochastic
//! Lotka–Volterra system.
//!
//! The system is the positive-quadrant SDE (Stratonovich form)
//!
//! ```text
//! dx = x(-γ₂ y + η₂) dt + σ₂ x ∘ dW,
//! dy = y( γ₁ x - η₁) dt + σ₁ y ∘ dW,
//! ```
//!
//! which is a non-canonical Hamiltonian (Poisson) system: both the drift and
//! the diffusion are generated by scalar Hamiltonians through the
//! state-dependent skew-symmetric structure matrix `B(x,y) = [[0, xy], [-xy, 0]]`
//! ([`model`]). Its exact flow preserves the two-form `dx ∧ dy / (xy)`, and the
//! integrators in [`integrate`] are built to inherit that invariant exactly:
//! they advance the state multiplicatively, `X_{n+1} = X_n · exp(…)`, with
//! Runge–Kutta stage combinations whose coefficients satisfy algebraic
//! conditions checkable as residuals ([`tableau`]).
//!
//! The crate is the computational core of the `ksym` toolkit:
//!
//! * [`model`] — drifts, diffusion, Hamiltonians, structure matrices, and the
//!   log-coordinate (Darboux) transform.
//! * [`tableau`] — coefficient tableaus, their structure/order condition
//!   residuals, and the four built-in schemes.
//! * [`brownian`] — reproducible counter-based Wiener increments with exact
//!   block coarsening for coupled multi-resolution studies.
//! * [`integrate`] — one-step maps (two structure-preserving families plus
//!   Euler–Maruyama and Milstein comparators) and the trajectory driver.
//! * [`verify`] — finite-difference checks of the preserved two-form,
//!   phase-area tracking, and moment/Lyapunov monitors.
//! * [`experiments`] — strong-convergence, error-table, and phase-area
//!   studies with deterministic parallel path execution.
//!
//! The crate is `no_std` (with `alloc`); transcendental functions come from
//! [`libm`] so results are bit-identical across platforms and build settings.
#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod brownian;
pub mod error;
pub mod experiments;
pub mod integrate;
mod math;
pub mod model;
pub mod tableau;
pub mod verify;

pub use error::{Error, Result};
pub use model::{LogState, Mat2, ModelParams, State, Vec2};
