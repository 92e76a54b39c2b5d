#![allow(dead_code)]

use hck_core::cone2d::Cone2;
use hck_core::conic2d::Conic2;
use hck_core::quadmap::{QuadraticForm, QuadraticMap};
use hck_core::smallmat::SymMatrix;
use hck_core::Vec2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn uniform(rng: &mut ChaCha8Rng, r: f64) -> f64 {
    rng.gen_range(-r..=r)
}

pub fn vector(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| uniform(rng, r)).collect()
}

pub fn form(rng: &mut ChaCha8Rng, n: usize, r: f64) -> QuadraticForm {
    let quad = SymMatrix::from_row_major(n, &vector(rng, n * n, r)).unwrap();
    QuadraticForm::new(quad, vector(rng, n, r), uniform(rng, r)).unwrap()
}

pub fn map(rng: &mut ChaCha8Rng, n: usize, r: f64) -> QuadraticMap {
    QuadraticMap::new(form(rng, n, r), form(rng, n, r)).unwrap()
}

/// `(f, k·f + c)`: every line image is contained in a straight line.
pub fn collinear_map(rng: &mut ChaCha8Rng, n: usize, r: f64) -> QuadraticMap {
    let f = form(rng, n, r);
    let k = uniform(rng, r);
    let g = QuadraticForm::new(f.quad.scaled(k), f.lin.iter().map(|m| k * m).collect(), uniform(rng, r)).unwrap();
    QuadraticMap::new(f, g).unwrap()
}

/// Both components affine, so every line image is a line or a point.
pub fn affine_map(rng: &mut ChaCha8Rng, n: usize, r: f64) -> QuadraticMap {
    let affine = |rng: &mut ChaCha8Rng| QuadraticForm::new(SymMatrix::zeros(n), vector(rng, n, r), uniform(rng, r)).unwrap();
    let f = affine(rng);
    let g = affine(rng);
    QuadraticMap::new(f, g).unwrap()
}

/// A map that is constant along the last coordinate axis.
pub fn flat_map(rng: &mut ChaCha8Rng, n: usize, r: f64) -> QuadraticMap {
    let flat = |rng: &mut ChaCha8Rng| {
        let mut entries = vector(rng, n * n, r);
        for i in 0..n {
            entries[i * n + n - 1] = 0.0;
            entries[(n - 1) * n + i] = 0.0;
        }
        let quad = SymMatrix::from_row_major(n, &entries).unwrap();
        let mut lin = vector(rng, n, r);
        lin[n - 1] = 0.0;
        QuadraticForm::new(quad, lin, uniform(rng, r)).unwrap()
    };
    let f = flat(rng);
    let g = flat(rng);
    QuadraticMap::new(f, g).unwrap()
}

/// Generators at angle in `[min_deg, 180 - min_deg]` degrees.
pub fn cone(rng: &mut ChaCha8Rng, min_deg: f64) -> Cone2 {
    let gap = rng.gen_range(min_deg..=180.0 - min_deg).to_radians();
    let theta = rng.gen_range(0.0..2.0 * PI);
    let rb = rng.gen_range(0.2..2.0);
    let rc = rng.gen_range(0.2..2.0);
    Cone2::new(
        [rb * theta.cos(), rb * theta.sin()],
        [rc * (theta + gap).cos(), rc * (theta + gap).sin()],
    )
    .unwrap()
}

/// `ψ(y) = κ((e₁·(y - y₀))² - m·e₂·(y - y₀))` for a random orthonormal frame,
/// with the parametrisation `τ ↦ y₀ + τe₁ + (τ²/m)e₂` of its zero set.
pub struct TestParabola {
    pub conic: Conic2,
    pub kappa: f64,
    pub m: f64,
    pub y0: Vec2,
    pub e1: Vec2,
    pub e2: Vec2,
}

impl TestParabola {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let phi = rng.gen_range(0.0..2.0 * PI);
        let e1 = [phi.cos(), phi.sin()];
        let e2 = [-phi.sin(), phi.cos()];
        let kappa = 10f64.powf(rng.gen_range(-1.0..1.0));
        let m = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let y0 = [uniform(rng, 3.0), uniform(rng, 3.0)];
        let p = e1[0] * y0[0] + e1[1] * y0[1];
        let q = e2[0] * y0[0] + e2[1] * y0[1];
        let quad = [
            [kappa * e1[0] * e1[0], kappa * e1[0] * e1[1]],
            [kappa * e1[1] * e1[0], kappa * e1[1] * e1[1]],
        ];
        let lin = [
            kappa * (-2.0 * p * e1[0] - m * e2[0]),
            kappa * (-2.0 * p * e1[1] - m * e2[1]),
        ];
        let conic = Conic2::new(quad, lin, kappa * (p * p + m * q)).unwrap();
        Self {
            conic,
            kappa,
            m,
            y0,
            e1,
            e2,
        }
    }

    pub fn point(&self, tau: f64) -> Vec2 {
        let s = tau * tau / self.m;
        [
            self.y0[0] + tau * self.e1[0] + s * self.e2[0],
            self.y0[1] + tau * self.e1[1] + s * self.e2[1],
        ]
    }

    /// A point with `ψ = -κ·m·h`, strictly inside when `m·h > 0`.
    pub fn offset_point(&self, tau: f64, h: f64) -> Vec2 {
        let p = self.point(tau);
        [p[0] + h * self.e2[0], p[1] + h * self.e2[1]]
    }

    /// Exact `ψ` in the frame coordinates.
    pub fn exact(&self, y: Vec2) -> f64 {
        let d = [y[0] - self.y0[0], y[1] - self.y0[1]];
        let a = self.e1[0] * d[0] + self.e1[1] * d[1];
        let b = self.e2[0] * d[0] + self.e2[1] * d[1];
        self.kappa * (a * a - self.m * b)
    }
}
