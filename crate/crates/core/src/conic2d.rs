//! Implicit conics `ψ(y) = yᵀAy + aᵀy + a₀` in the plane.
//!
//! Besides evaluation and affine classification this module carries the two
//! facts about parabolas that the witness construction leans on: with `A ⪰ 0`,
//! `ψ` is negative strictly inside any chord joining two points of the curve,
//! and from any point with `ψ < 0` at least one of the two backward rays
//! `z - ℝ₊b`, `z - ℝ₊c` (for independent `b`, `c`) meets the curve.

use serde::{Deserialize, Serialize};

use crate::cone2d::Cone2;
use crate::{Error, Result, Vec2};

/// Coefficients below `ROUNDOFF · magnitude` are treated as exact zeros when a
/// conic is restricted to a line.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conic2 {
    /// Symmetric quadratic part, row-major.
    pub quad: [[f64; 2]; 2],
    pub lin: Vec2,
    pub constant: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConicClass {
    Ellipse,
    Hyperbola,
    Parabola,
    /// One line, two parallel lines, or two crossing lines.
    DegenerateLines,
    DegeneratePoint,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    B,
    C,
}

/// A point where a backward ray `z + t·dir`, `t ≤ 0`, meets a conic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayHit {
    pub generator: Generator,
    pub direction: Vec2,
    pub t: f64,
    pub point: Vec2,
}

/// Real roots of `a t² + b t + c = 0`; the caller decides which leading
/// coefficients are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Roots {
    None,
    One(f64),
    Two(f64, f64),
    All,
}

/// Cancellation-free roots. A slightly negative discriminant within
/// `tangent_tol · b²` is read as a double root.
pub(crate) fn solve_quadratic(a: f64, b: f64, c: f64, tangent_tol: f64) -> Roots {
    if a == 0.0 {
        if b == 0.0 {
            return if c == 0.0 { Roots::All } else { Roots::None };
        }
        return Roots::One(-c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc >= -tangent_tol * (b * b + (4.0 * a * c).abs()) {
            return Roots::One(-b / (2.0 * a));
        }
        return Roots::None;
    }
    if disc == 0.0 {
        return Roots::One(-b / (2.0 * a));
    }
    let q = -0.5 * (b + b.signum_nonzero() * disc.sqrt());
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { r1 };
    Roots::Two(r1.min(r2), r1.max(r2))
}

trait SignumNonzero {
    fn signum_nonzero(self) -> f64;
}

impl SignumNonzero for f64 {
    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl Conic2 {
    pub fn new(quad: [[f64; 2]; 2], lin: Vec2, constant: f64) -> Result<Self> {
        let sym = 0.5 * (quad[0][1] + quad[1][0]);
        let c = Self {
            quad: [[quad[0][0], sym], [sym, quad[1][1]]],
            lin,
            constant,
        };
        if c.quad_max_abs() == 0.0 && lin == [0.0, 0.0] {
            return Err(Error::ZeroConic);
        }
        Ok(c)
    }

    fn quad_max_abs(&self) -> f64 {
        self.quad[0][0]
            .abs()
            .max(self.quad[0][1].abs())
            .max(self.quad[1][1].abs())
    }

    /// Largest absolute coefficient.
    pub fn coefficient_scale(&self) -> f64 {
        self.quad_max_abs()
            .max(self.lin[0].abs())
            .max(self.lin[1].abs())
            .max(self.constant.abs())
    }

    pub fn eval(&self, y: Vec2) -> f64 {
        let [[a11, a12], [_, a22]] = self.quad;
        a11 * y[0] * y[0]
            + 2.0 * a12 * y[0] * y[1]
            + a22 * y[1] * y[1]
            + self.lin[0] * y[0]
            + self.lin[1] * y[1]
            + self.constant
    }

    /// Sum of the absolute values of the terms of `ψ(y)`: the size of the
    /// rounding error to expect when evaluating at `y`.
    pub fn eval_scale(&self, y: Vec2) -> f64 {
        let [[a11, a12], [_, a22]] = self.quad;
        (a11 * y[0] * y[0]).abs()
            + (2.0 * a12 * y[0] * y[1]).abs()
            + (a22 * y[1] * y[1]).abs()
            + (self.lin[0] * y[0]).abs()
            + (self.lin[1] * y[1]).abs()
            + self.constant.abs()
    }

    /// `|ψ(y)| ≤ on_tol · (1 + eval_scale(y))`
    pub fn is_on(&self, y: Vec2, on_tol: f64) -> bool {
        self.eval(y).abs() <= on_tol * (1.0 + self.eval_scale(y))
    }

    pub fn negated(&self) -> Self {
        let q = self.quad;
        Self {
            quad: [[-q[0][0], -q[0][1]], [-q[1][0], -q[1][1]]],
            lin: [-self.lin[0], -self.lin[1]],
            constant: -self.constant,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let q = self.quad;
        Self {
            quad: [[s * q[0][0], s * q[0][1]], [s * q[1][0], s * q[1][1]]],
            lin: [s * self.lin[0], s * self.lin[1]],
            constant: s * self.constant,
        }
    }

    /// Eigenvalues of `A`, ascending.
    pub fn quad_eigenvalues(&self) -> (f64, f64) {
        let [[a11, a12], [_, a22]] = self.quad;
        let mean = 0.5 * (a11 + a22);
        let radius = (0.5 * (a11 - a22)).hypot(a12);
        // avoid cancellation in the smaller-magnitude eigenvalue
        let det = a11 * a22 - a12 * a12;
        let big = mean + mean.signum_nonzero() * radius;
        let small = if big != 0.0 { det / big } else { 0.0 };
        (big.min(small), big.max(small))
    }

    /// Unit eigenvector of `A` for eigenvalue `lambda`.
    fn quad_eigenvector(&self, lambda: f64) -> Vec2 {
        let [[a11, a12], [_, a22]] = self.quad;
        let u = [a12, lambda - a11];
        let v = [lambda - a22, a12];
        let nu = u[0].hypot(u[1]);
        let nv = v[0].hypot(v[1]);
        let (w, nw) = if nu >= nv { (u, nu) } else { (v, nv) };
        if nw == 0.0 {
            // A is a multiple of the identity
            return [1.0, 0.0];
        }
        [w[0] / nw, w[1] / nw]
    }

    fn extended_det(&self) -> f64 {
        let [[a11, a12], [_, a22]] = self.quad;
        let (b1, b2) = (0.5 * self.lin[0], 0.5 * self.lin[1]);
        let c = self.constant;
        a11 * (a22 * c - b2 * b2) - a12 * (a12 * c - b2 * b1) + b1 * (a12 * b2 - a22 * b1)
    }

    /// Affine type of the zero set, decided on coefficients rescaled so the
    /// largest has magnitude one.
    pub fn classify(&self, tol: f64) -> ConicClass {
        let c = self.scaled(1.0 / self.coefficient_scale());
        let (l1, l2) = c.quad_eigenvalues();
        let n_quad = l1.abs().max(l2.abs());

        if n_quad <= tol {
            return if c.lin[0].hypot(c.lin[1]) > tol {
                ConicClass::DegenerateLines
            } else {
                ConicClass::Empty
            };
        }

        let small = if l1.abs() <= l2.abs() { l1 } else { l2 };
        let large = if l1.abs() <= l2.abs() { l2 } else { l1 };
        if small.abs() <= tol * n_quad {
            let kernel = c.quad_eigenvector(small);
            let along = c.lin[0] * kernel[0] + c.lin[1] * kernel[1];
            if along.abs() > tol {
                return ConicClass::Parabola;
            }
            let range = c.quad_eigenvector(large);
            let lr = c.lin[0] * range[0] + c.lin[1] * range[1];
            let disc = lr * lr - 4.0 * large * c.constant;
            return if disc >= -tol {
                ConicClass::DegenerateLines
            } else {
                ConicClass::Empty
            };
        }

        let ext = c.extended_det();
        if l1 * l2 > 0.0 {
            // definite: sign of ψ at the centre decides
            let centre_sign = ext * large.signum();
            if ext.abs() <= tol {
                ConicClass::DegeneratePoint
            } else if centre_sign < 0.0 {
                ConicClass::Ellipse
            } else {
                ConicClass::Empty
            }
        } else if ext.abs() <= tol {
            ConicClass::DegenerateLines
        } else {
            ConicClass::Hyperbola
        }
    }

    /// Returns `±self` with positive semidefinite quadratic part.
    pub fn normalize_parabola(&self, tol: f64) -> Result<Self> {
        let class = self.classify(tol);
        if class != ConicClass::Parabola {
            return Err(Error::NotAParabola(format!("{class:?}")));
        }
        if self.quad[0][0] + self.quad[1][1] < 0.0 {
            Ok(self.negated())
        } else {
            Ok(*self)
        }
    }

    /// Coefficients `(α, β, γ)` of `t ↦ ψ(z + t·dir)`.
    pub fn restrict_to_line(&self, z: Vec2, dir: Vec2) -> (f64, f64, f64) {
        let a = self.quad;
        let adir = [
            a[0][0] * dir[0] + a[0][1] * dir[1],
            a[1][0] * dir[0] + a[1][1] * dir[1],
        ];
        let alpha = dir[0] * adir[0] + dir[1] * adir[1];
        let beta = 2.0 * (z[0] * adir[0] + z[1] * adir[1]) + self.lin[0] * dir[0] + self.lin[1] * dir[1];
        (alpha, beta, self.eval(z))
    }

    /// `ψ` at `x + t(y - x)` for two points `x ≠ y` on a normalized parabola
    /// and `t ∈ (0, 1)`. The value is negative.
    pub fn chord_interior_sign(&self, x: Vec2, y: Vec2, t: f64, on_tol: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::PreconditionViolated(format!(
                "chord parameter {t} outside (0, 1)"
            )));
        }
        if x == y {
            return Err(Error::PreconditionViolated("chord endpoints coincide".into()));
        }
        for (name, p) in [("x", x), ("y", y)] {
            if !self.is_on(p, on_tol) {
                return Err(Error::PreconditionViolated(format!(
                    "{name} = {p:?} is off the conic (ψ = {:e})",
                    self.eval(p)
                )));
            }
        }
        Ok(self.eval([x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1])]))
    }

    /// Parameters `t ≤ root_tol` with `ψ(z + t·dir) = 0`, closest to zero first.
    pub fn ray_intersections(&self, z: Vec2, dir: Vec2, root_tol: f64) -> Result<Vec<f64>> {
        if dir == [0.0, 0.0] {
            return Err(Error::InvalidArgument("ray direction is zero".into()));
        }
        let (mut alpha, mut beta, gamma) = self.restrict_to_line(z, dir);
        let nd = dir[0].hypot(dir[1]);
        let nz = z[0].hypot(z[1]);
        let qa = self.quad_max_abs();
        let la = self.lin[0].hypot(self.lin[1]);
        if alpha.abs() <= ROUNDOFF * 2.0 * qa * nd * nd {
            alpha = 0.0;
        }
        if beta.abs() <= ROUNDOFF * (4.0 * qa * nz * nd + la * nd) {
            beta = 0.0;
        }
        let mut roots = match solve_quadratic(alpha, beta, gamma, 1e-12) {
            Roots::All => return Err(Error::IdenticallyZero),
            Roots::None => vec![],
            Roots::One(r) => vec![r],
            Roots::Two(r1, r2) => vec![r1, r2],
        };
        if alpha == 0.0 && beta == 0.0 && gamma.abs() <= ROUNDOFF * self.eval_scale(z) {
            return Err(Error::IdenticallyZero);
        }
        roots.retain(|r| *r <= root_tol);
        roots.sort_by(|a, b| b.total_cmp(a));
        Ok(roots)
    }

    /// First intersection of the curve with `z - ℝ₊b`, falling back to
    /// `z - ℝ₊c`. Requires `ψ(z) < 0` and a normalized parabola.
    pub fn first_negative_ray_hit(&self, z: Vec2, cone: &Cone2, root_tol: f64) -> Result<RayHit> {
        let value = self.eval(z);
        if !(value < 0.0) {
            return Err(Error::PreconditionViolated(format!(
                "ψ(z) = {value:e} is not negative"
            )));
        }
        for (generator, dir) in [(Generator::B, cone.b()), (Generator::C, cone.c())] {
            let roots = self.ray_intersections(z, dir, root_tol)?;
            if let Some(&t) = roots.first() {
                return Ok(RayHit {
                    generator,
                    direction: dir,
                    t,
                    point: [z[0] + t * dir[0], z[1] + t * dir[1]],
                });
            }
        }
        Err(Error::LemmaViolated(format!(
            "z = {z:?}, ψ(z) = {value:e}, b = {:?}, c = {:?}",
            cone.b(),
            cone.c()
        )))
    }
}
