//! Numerical toolkit for the speeded-up zero-range process on the discrete
//! circle and its fast diffusion hydrodynamic limit `∂ₜu = ∂ₓ(u⁻²∂ₓu)`.
//!
//! The crate is split along the objects it computes:
//!
//! - [`lattice`]: torus indexing, configurations, density profiles and the
//!   `(n, α)` scaling parameters shared by everything else.
//! - [`rng`]: seedable, stream-splittable random source used by every
//!   Monte Carlo routine.
//! - [`measures`]: geometric laws, moment generating functions, rate
//!   functions, Chernoff bounds and the rate-comparison inequalities.
//! - [`zrp`]: exact event-driven simulation of the particle system, the
//!   order-preserving coupling and the macroscopic observables.
//! - [`mol`]: the method-of-lines ODE system, its diagnostics and a
//!   fine-grid reference solver for the limiting equation.
//! - [`ensemble`]: canonical boxes, equivalence of ensembles and spectral
//!   gaps of the boxed generator.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod extended;
pub mod lattice;
pub mod measures;
pub mod mol;
pub mod rng;
pub mod zrp;

pub use extended::Extended;
pub use lattice::{Configuration, DensityProfile, LatticeError, ScalingParams, TorusIndex};
pub use rng::RngStream;
