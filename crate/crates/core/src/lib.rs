//! Executable certificates for the convexity of `F(H) + Λ`, where `F = (f, g)`
//! is a pair of real quadratic functions and `Λ` is a closed convex cone in the
//! plane generated by two linearly independent vectors.
//!
//! The crate is organised bottom-up:
//!
//! * [`smallmat`]: dense symmetric eigen-solves, null spaces, quadratic minimisation.
//! * [`cone2d`]: the cone `Λ = {λb + βc : λ, β ≥ 0}` and coordinates in `{b, c}`.
//! * [`conic2d`]: implicit conics in the plane, parabola sign and ray lemmas.
//! * [`quadmap`]: quadratic maps, images of lines, affine-manifold restriction.
//! * [`witness`]: explicit witnesses `F(x*) + e* = w` for convex combinations.
//! * [`slemma`]: the S-lemma decision procedure and a brute-force grid oracle.

pub mod cone2d;
pub mod conic2d;
mod error;
pub mod quadmap;
pub mod slemma;
pub mod smallmat;
mod tolerance;
pub mod witness;

pub use error::{Error, Result};
pub use tolerance::{SearchConfig, ToleranceConfig};

/// A point or vector in the plane.
pub type Vec2 = [f64; 2];
