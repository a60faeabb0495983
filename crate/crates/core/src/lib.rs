//! Witness sets for odd maps from spheres.
//!
//! For an odd continuous map `f: S(R^n) -> R^d` this crate finds points
//! `w_0, .., w_d` on the sphere, signs `e_i`, and convex weights with
//! `sum lambda_i f(e_i w_i) = 0`, and certifies the angular diameter of the
//! signed set `{e_i w_i}`.
//!
//! * [`circle`] solves the one-parameter case on a great circle and defines
//!   the [`ConvexCertificate`] format and its independent verifier.
//! * [`manifold`] solves the simplex and block-diagonal `SO(2^r)` families.
//! * [`hull`] decides whether the origin lies in a convex hull and searches
//!   for small-diameter witness sets.
//! * [`bounds`] tabulates the best known bounds on `delta(m, n)`.
//!
//! Geometry, linear algebra and hull membership are generic over [`Real`];
//! the aliases below fix the common precisions.

pub mod bounds;
pub mod circle;
pub mod error;
pub mod geometry;
pub mod hull;
pub mod linalg;
pub mod manifold;
pub mod odd_map;
pub mod scalar;

pub use bounds::{best_bounds, bounds_table, BoundRecord};
pub use circle::{
    solve_circle_lemma, solve_roots_of_unity, verify_certificate, CircleOptions, ConvexCertificate, Tolerances,
    VerificationReport,
};
pub use error::{Error, Result};
pub use geometry::{Configuration, Sign, SpherePoint};
pub use hull::{contains_origin, min_diameter_search, HullVerdict, Verdict};
pub use linalg::Matrix;
pub use manifold::{solve_lemma_gen, solve_simplex_theorem, ManifoldOptions};
pub use odd_map::{OddMap, OddMapDescriptor};
pub use scalar::Real;

pub type SpherePoint64 = SpherePoint<f64>;
pub type SpherePoint32 = SpherePoint<f32>;
pub type Configuration64 = Configuration<f64>;
pub type Configuration32 = Configuration<f32>;
pub type HullVerdict64 = HullVerdict<f64>;
pub type HullVerdict32 = HullVerdict<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
