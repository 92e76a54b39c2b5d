//! Quadratic maps `F = (f, g) : ℝⁿ → ℝ²`, their images of lines, and their
//! restriction to affine manifolds `x₀ + span(K)`.
//!
//! Along a line `t ↦ x̄ + t(ȳ - x̄)` both components are scalar quadratics in
//! `t`, so the image is a point, a ray, a full line, or a parabola. The split
//! is decided by the determinant of the leading coefficients
//! `|α β; α' β'|`; in the parabolic case a shear that kills the quadratic term
//! of one coordinate leaves the other coordinate affine in `t`, which both
//! implicitises the curve and inverts its parametrisation.

use serde::{Deserialize, Serialize};

use crate::conic2d::{solve_quadratic, Conic2, Roots};
use crate::smallmat::{self, dot, max_abs, null_space_basis, pinv_solve, RectMatrix, SymMatrix};
use crate::{Error, Result, ToleranceConfig, Vec2};

/// `q(x) = xᵀMx + mᵀx + m₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub quad: SymMatrix,
    pub lin: Vec<f64>,
    pub constant: f64,
}

impl QuadraticForm {
    pub fn new(quad: SymMatrix, lin: Vec<f64>, constant: f64) -> Result<Self> {
        if lin.len() != quad.n() {
            return Err(Error::DimensionMismatch {
                expected: quad.n(),
                got: lin.len(),
            });
        }
        Ok(Self { quad, lin, constant })
    }

    pub fn n(&self) -> usize {
        self.quad.n()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.quad.bilinear(x, x) + dot(&self.lin, x) + self.constant
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.quad
            .mul_vec(x)
            .iter()
            .zip(&self.lin)
            .map(|(mx, m)| 2.0 * mx + m)
            .collect()
    }

    /// `self + s·other`
    pub fn add_scaled(&self, s: f64, other: &QuadraticForm) -> QuadraticForm {
        QuadraticForm {
            quad: self.quad.add_scaled(s, &other.quad),
            lin: smallmat::axpy(&self.lin, s, &other.lin),
            constant: self.constant + s * other.constant,
        }
    }

    pub fn shifted(&self, delta: f64) -> QuadraticForm {
        QuadraticForm {
            constant: self.constant + delta,
            ..self.clone()
        }
    }

    /// `(quadratic, linear, constant)` coefficients of `t ↦ q(x + t·d)`.
    pub fn along(&self, x: &[f64], d: &[f64]) -> [f64; 3] {
        let md = self.quad.mul_vec(d);
        [
            dot(d, &md),
            2.0 * dot(x, &md) + dot(&self.lin, d),
            self.eval(x),
        ]
    }

    fn coefficient_scale(&self) -> f64 {
        self.quad
            .max_abs()
            .max(max_abs(&self.lin))
            .max(self.constant.abs())
    }
}

/// The pair `F = (f, g)` on a common `ℝⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticMap {
    pub f: QuadraticForm,
    pub g: QuadraticForm,
}

impl QuadraticMap {
    pub fn new(f: QuadraticForm, g: QuadraticForm) -> Result<Self> {
        if f.n() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: f.n(),
                got: g.n(),
            });
        }
        Ok(Self { f, g })
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec2> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Vec2 {
        [self.f.eval(x), self.g.eval(x)]
    }

    /// Largest absolute coefficient of either component.
    pub fn coefficient_scale(&self) -> f64 {
        self.f.coefficient_scale().max(self.g.coefficient_scale())
    }

    /// `(f - ρ, g)`.
    pub fn shift_first(&self, rho: f64) -> QuadraticMap {
        QuadraticMap {
            f: self.f.shifted(-rho),
            g: self.g.clone(),
        }
    }

    pub fn line_coeffs(&self, xbar: &[f64], ybar: &[f64]) -> Result<LineCoeffs> {
        self.check_dim(xbar)?;
        self.check_dim(ybar)?;
        let d = smallmat::sub(ybar, xbar);
        if max_abs(&d) <= 1e-12 * (1.0 + max_abs(xbar)) {
            return Err(Error::DegenerateLine);
        }
        Ok(LineCoeffs {
            first: self.f.along(xbar, &d),
            second: self.g.along(xbar, &d),
        })
    }

    /// Classifies `F` restricted to the line through `xbar` and `ybar`.
    pub fn classify_line_image(&self, xbar: &[f64], ybar: &[f64], tol: &ToleranceConfig) -> Result<LineImage> {
        let coeffs = self.line_coeffs(xbar, ybar)?;
        Ok(LineImage::from_coeffs(coeffs, tol))
    }

    /// The map `z ↦ F(x₀ + Kz)`. A zero-dimensional manifold yields the
    /// constant map `F(x₀)` on `ℝ¹`.
    pub fn restrict_to_manifold(&self, mfd: &AffineManifold) -> Result<QuadraticMap> {
        self.check_dim(&mfd.x0)?;
        Ok(QuadraticMap {
            f: restrict_form(&self.f, mfd),
            g: restrict_form(&self.g, mfd),
        })
    }
}

fn restrict_form(q: &QuadraticForm, mfd: &AffineManifold) -> QuadraticForm {
    let k = &mfd.basis;
    let constant = q.eval(&mfd.x0);
    match q.quad.congruence(k) {
        None => QuadraticForm {
            quad: SymMatrix::zeros(1),
            lin: vec![0.0],
            constant,
        },
        Some(quad) => {
            let lin = k.tr_mul_vec(&q.gradient(&mfd.x0));
            QuadraticForm { quad, lin, constant }
        }
    }
}

/// Coefficients of `t ↦ F(x̄ + t(ȳ - x̄))`: `first = (α, β, γ)` for `f`,
/// `second = (α', β', γ')` for `g`, each ordered (t², t, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineCoeffs {
    pub first: [f64; 3],
    pub second: [f64; 3],
}

impl LineCoeffs {
    pub fn eval(&self, t: f64) -> Vec2 {
        let p = |c: [f64; 3]| (c[0] * t + c[1]) * t + c[2];
        [p(self.first), p(self.second)]
    }

    /// `1 + max |coefficient|`.
    pub fn scale(&self) -> f64 {
        1.0 + max_abs(&self.first).max(max_abs(&self.second))
    }

    pub fn det(&self) -> f64 {
        self.first[0] * self.second[1] - self.second[0] * self.first[1]
    }

    fn component(&self, i: usize) -> [f64; 3] {
        if i == 0 {
            self.first
        } else {
            self.second
        }
    }
}

/// `t = weights·y + offset`: recovers the line parameter from a point on a
/// parabolic image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineParam {
    pub weights: Vec2,
    pub offset: f64,
}

impl AffineParam {
    pub fn eval(&self, y: Vec2) -> f64 {
        self.weights[0] * y[0] + self.weights[1] * y[1] + self.offset
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineImageKind {
    Point,
    Ray,
    Line,
    Parabola,
}

/// Geometry of a line image. `primary` is the coordinate whose `(α, β)` pair
/// dominates, `shear` the factor `k` with `u_other ≈ k·u_primary + const`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LineImageShape {
    Point {
        point: Vec2,
    },
    /// `{apex + s·direction : s ≥ 0}`, reached at `s = (t - vertex_t)²`.
    Ray {
        apex: Vec2,
        direction: Vec2,
        vertex_t: f64,
        primary: usize,
        shear: f64,
    },
    /// `{point + s·direction : s ∈ ℝ}`.
    Line {
        point: Vec2,
        direction: Vec2,
        primary: usize,
        shear: f64,
    },
    /// Zero set of `conic` (with `A ⪰ 0`). `pivot` is the coordinate kept by
    /// the shear `(u_p, u_q) ↦ (u_p, u_q - shear·u_p)`, after which the second
    /// coordinate is affine in `t` and `inverse` undoes it.
    Parabola {
        conic: Conic2,
        pivot: usize,
        shear: f64,
        inverse: AffineParam,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineImage {
    pub coeffs: LineCoeffs,
    pub shape: LineImageShape,
}

fn embed(primary: usize, u_primary: f64, u_other: f64) -> Vec2 {
    if primary == 0 {
        [u_primary, u_other]
    } else {
        [u_other, u_primary]
    }
}

impl LineImage {
    pub fn from_coeffs(coeffs: LineCoeffs, tol: &ToleranceConfig) -> Self {
        let [a1, b1, c1] = coeffs.first;
        let [a2, b2, c2] = coeffs.second;
        let cmax = a1.abs().max(b1.abs()).max(a2.abs()).max(b2.abs());
        let scale = coeffs.scale();

        if cmax <= tol.det_tol * scale {
            return Self {
                coeffs,
                shape: LineImageShape::Point { point: [c1, c2] },
            };
        }

        if coeffs.det().abs() > tol.det_tol * cmax * cmax {
            return Self::parabola(coeffs);
        }

        // (α', β') ≈ k (α, β) or the reverse, whichever pair is larger
        let primary = if a1.hypot(b1) >= a2.hypot(b2) { 0 } else { 1 };
        let [ap, bp, cp] = coeffs.component(primary);
        let [aq, bq, cq] = coeffs.component(1 - primary);
        let shear = (aq * ap + bq * bp) / (ap * ap + bp * bp);
        let offset = cq - shear * cp;

        let shape = if ap.abs() <= tol.det_tol * cmax {
            LineImageShape::Line {
                point: embed(primary, cp, shear * cp + offset),
                direction: embed(primary, bp, shear * bp),
                primary,
                shear,
            }
        } else {
            let vertex_t = -bp / (2.0 * ap);
            let apex_p = cp - bp * bp / (4.0 * ap);
            LineImageShape::Ray {
                apex: embed(primary, apex_p, shear * apex_p + offset),
                direction: embed(primary, ap, shear * ap),
                vertex_t,
                primary,
                shear,
            }
        };
        Self { coeffs, shape }
    }

    fn parabola(coeffs: LineCoeffs) -> Self {
        let pivot = if coeffs.first[0].abs() >= coeffs.second[0].abs() { 0 } else { 1 };
        let other = 1 - pivot;
        let [ap, bp, cp] = coeffs.component(pivot);
        let [aq, bq, cq] = coeffs.component(other);
        let shear = aq / ap;
        // after the shear the other coordinate is β''t + γ''
        let b_aff = bq - shear * bp;
        let c_aff = cq - shear * cp;

        // t = ℓ(y) = (y_q - shear·y_p - γ'') / β''
        let mut weights = [0.0; 2];
        weights[other] = 1.0 / b_aff;
        weights[pivot] = -shear / b_aff;
        let offset = -c_aff / b_aff;

        // ψ(y) = σ (α ℓ(y)² + β ℓ(y) + γ - y_p), σ = sign(α)
        let sigma = ap.signum();
        let quad = [
            [
                sigma * ap * weights[0] * weights[0],
                sigma * ap * weights[0] * weights[1],
            ],
            [
                sigma * ap * weights[1] * weights[0],
                sigma * ap * weights[1] * weights[1],
            ],
        ];
        let mut lin = [
            sigma * (2.0 * ap * offset + bp) * weights[0],
            sigma * (2.0 * ap * offset + bp) * weights[1],
        ];
        lin[pivot] -= sigma;
        let constant = sigma * ((ap * offset + bp) * offset + cp);

        Self {
            coeffs,
            shape: LineImageShape::Parabola {
                conic: Conic2 { quad, lin, constant },
                pivot,
                shear,
                inverse: AffineParam { weights, offset },
            },
        }
    }

    pub fn kind(&self) -> LineImageKind {
        match self.shape {
            LineImageShape::Point { .. } => LineImageKind::Point,
            LineImageShape::Ray { .. } => LineImageKind::Ray,
            LineImageShape::Line { .. } => LineImageKind::Line,
            LineImageShape::Parabola { .. } => LineImageKind::Parabola,
        }
    }

    pub fn conic(&self) -> Option<&Conic2> {
        match &self.shape {
            LineImageShape::Parabola { conic, .. } => Some(conic),
            _ => None,
        }
    }

    /// Where the payload places the image point for parameter `t`.
    pub fn model_point(&self, t: f64) -> Vec2 {
        match self.shape {
            LineImageShape::Point { point } => point,
            LineImageShape::Ray {
                apex,
                direction,
                vertex_t,
                ..
            } => {
                let s = (t - vertex_t) * (t - vertex_t);
                [apex[0] + s * direction[0], apex[1] + s * direction[1]]
            }
            LineImageShape::Line { point, direction, .. } => {
                [point[0] + t * direction[0], point[1] + t * direction[1]]
            }
            LineImageShape::Parabola { .. } => self.coeffs.eval(t),
        }
    }

    /// A line parameter `t` with `F(x̄ + t(ȳ - x̄)) ≈ target`.
    pub fn preimage_parameter(&self, target: Vec2, tol: &ToleranceConfig) -> Result<f64> {
        let t = match self.shape {
            LineImageShape::Point { .. } => 0.0,
            LineImageShape::Parabola { conic, inverse, .. } => {
                if !conic.is_on(target, tol.on_tol) {
                    return Err(Error::NotOnImage(format!(
                        "ψ({target:?}) = {:e}",
                        conic.eval(target)
                    )));
                }
                inverse.eval(target)
            }
            LineImageShape::Ray {
                primary, vertex_t, ..
            } => {
                let [a, b, c] = self.coeffs.component(primary);
                match solve_quadratic(a, b, c - target[primary], 0.0) {
                    Roots::One(r) => r,
                    Roots::Two(r1, r2) => smaller_magnitude(r1, r2),
                    // at (or numerically just beyond) the apex
                    Roots::None => vertex_t,
                    Roots::All => 0.0,
                }
            }
            LineImageShape::Line { primary, .. } => {
                let [a, b, c] = self.coeffs.component(primary);
                match solve_quadratic(a, b, c - target[primary], 0.0) {
                    Roots::One(r) => r,
                    Roots::Two(r1, r2) => smaller_magnitude(r1, r2),
                    Roots::None => {
                        return Err(Error::NoRealRoot(format!(
                            "line image has no parameter for {target:?}"
                        )))
                    }
                    Roots::All => 0.0,
                }
            }
        };
        if !t.is_finite() {
            return Err(Error::NoRealRoot(format!("parameter {t} for {target:?}")));
        }
        let reached = self.coeffs.eval(t);
        let miss = (reached[0] - target[0]).abs().max((reached[1] - target[1]).abs());
        let allowed = tol.on_tol * (self.coeffs.scale() + max_abs(&target) + max_abs(&reached));
        if miss > allowed {
            return Err(Error::NotOnImage(format!(
                "{:?} image misses {target:?} by {miss:e}",
                self.kind()
            )));
        }
        Ok(t)
    }

    pub fn preimage_on_line(
        &self,
        xbar: &[f64],
        ybar: &[f64],
        target: Vec2,
        tol: &ToleranceConfig,
    ) -> Result<Vec<f64>> {
        if xbar.len() != ybar.len() {
            return Err(Error::DimensionMismatch {
                expected: xbar.len(),
                got: ybar.len(),
            });
        }
        let t = self.preimage_parameter(target, tol)?;
        Ok(xbar.iter().zip(ybar).map(|(x, y)| x + t * (y - x)).collect())
    }
}

fn smaller_magnitude(r1: f64, r2: f64) -> f64 {
    if r2.abs() < r1.abs() {
        r2
    } else {
        r1
    }
}

/// The affine set `{x₀ + Kz}` with orthonormal basis columns `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineManifold {
    pub x0: Vec<f64>,
    pub basis: RectMatrix,
}

impl AffineManifold {
    pub fn new(x0: Vec<f64>, basis: RectMatrix) -> Result<Self> {
        if basis.rows() != x0.len() {
            return Err(Error::DimensionMismatch {
                expected: x0.len(),
                got: basis.rows(),
            });
        }
        let gram = basis.transpose().matmul(&basis);
        for i in 0..basis.cols() {
            for j in 0..basis.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram.get(i, j) - want).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "manifold basis is not orthonormal (KᵀK[{i}][{j}] = {})",
                        gram.get(i, j)
                    )));
                }
            }
        }
        Ok(Self { x0, basis })
    }

    pub fn whole_space(n: usize) -> Self {
        Self {
            x0: vec![0.0; n],
            basis: RectMatrix::identity(n),
        }
    }

    /// `{x : Hx = d}` as `x₀ + ker H` with the minimum-norm `x₀`.
    pub fn from_linear_system(h: &RectMatrix, d: &[f64], rank_tol: f64, tol: &ToleranceConfig) -> Result<Self> {
        let x0 = pinv_solve(h, d, rank_tol, tol)?;
        let residual = max_abs(&smallmat::sub(&h.mul_vec(&x0), d));
        if residual > rank_tol * (1.0 + max_abs(d)) * (1.0 + h.max_abs()) {
            return Err(Error::InconsistentSystem { residual });
        }
        let basis = null_space_basis(h, rank_tol, tol)?;
        Ok(Self { x0, basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Dimension of the domain of a restricted map (at least one).
    pub fn param_dim(&self) -> usize {
        self.dim().max(1)
    }

    /// `x₀ + Kz`
    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        if self.dim() == 0 {
            return self.x0.clone();
        }
        smallmat::axpy(&self.x0, 1.0, &self.basis.mul_vec(z))
    }

    /// `Kᵀ(x - x₀)`, the coordinates of the closest manifold point.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        if self.dim() == 0 {
            return vec![0.0];
        }
        self.basis.tr_mul_vec(&smallmat::sub(x, &self.x0))
    }
}
