//! Gaussian random triangles: densities, moments and acuteness probabilities.
//!
//! Four ways of generating a random triangle from standard planar (or
//! `n`-dimensional) Gaussian points are covered:
//!
//! * **pinned** — one vertex at the origin, two i.i.d. Gaussian vertices;
//! * **staked** — vertices at `(0,0)` and `(c,0)`, one Gaussian vertex;
//! * **anchored** — vertices at `(±c/2,0)`, one Gaussian vertex;
//! * **pure** — all three vertices i.i.d. Gaussian.
//!
//! For each family the crate provides exact seeded samplers, closed-form
//! joint/marginal densities, moment evaluations along independent routes
//! (closed form, adaptive quadrature, Monte Carlo), and obtuseness
//! probabilities, together with the machinery to cross-check all of them
//! against each other.

pub mod acuteness;
pub mod densities;
pub mod model;
pub mod moments;
pub mod montecarlo;
pub mod numerics;
pub mod samplers;
pub mod specfun;

pub use numerics::{QuadConfig, QuadResult};
pub use specfun::SpecTolerance;
