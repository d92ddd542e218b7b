//! Stochastic zeroth-order convex optimization with parameter-free step sizes.
//!
//! The crate is organized around a two-point stochastic oracle: an objective
//! that can be queried for noisy function values at a pair of points sharing
//! one noise draw, but never for gradients. On top of that oracle it provides
//!
//! * [`vectorspace`] — dense vectors and projection-defined feasible domains,
//! * [`sampling`] — seedable, splittable random streams plus uniform
//!   sphere/ball samplers,
//! * [`problems`] — concrete stochastic convex objectives (hinge loss over
//!   sparse datasets, synthetic norm objectives with known optima, an
//!   adversarial pair of piecewise-linear instances) and a LIBSVM reader,
//! * [`estimator`] — the two-point sphere-sampled finite-difference gradient
//!   estimator and Monte-Carlo smoothing oracles used as test references,
//! * [`optimizers`] — POEM with the distance-over-gradients step rule, its
//!   unbounded-domain variant, and fixed-schedule baselines over a shared
//!   projected-SGD scaffold,
//! * [`diagnostics`] — executable checkers for the pathwise inequalities the
//!   optimizers are supposed to satisfy on every trace.

pub mod diagnostics;
pub mod estimator;
pub mod numeric;
pub mod optimizers;
pub mod problems;
pub mod sampling;
pub mod vectorspace;

pub use vectorspace::{Domain, Vector};
