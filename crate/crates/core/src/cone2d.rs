//! The planar cone `Λ = {λb + βc : λ, β ≥ 0}` spanned by two linearly
//! independent generators, and coordinates with respect to `{b, c}`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeGenerators", into = "ConeGenerators")]
pub struct Cone2 {
    b: Vec2,
    c: Vec2,
    det: f64,
}

/// Serialized form of a [`Cone2`]: just the generators.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConeGenerators {
    pub b: Vec2,
    pub c: Vec2,
}

/// Coordinates `(lam, bet)` of a point `p = lam·b + bet·c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCoords {
    pub lam: f64,
    pub bet: f64,
}

impl ConeCoords {
    pub fn is_member(&self, tol: f64) -> bool {
        self.lam >= -tol && self.bet >= -tol
    }
}

impl Cone2 {
    pub const DEFAULT_INDEP_TOL: f64 = 1e-10;

    pub fn new(b: Vec2, c: Vec2) -> Result<Self> {
        Self::with_tolerance(b, c, Self::DEFAULT_INDEP_TOL)
    }

    pub fn with_tolerance(b: Vec2, c: Vec2, indep_tol: f64) -> Result<Self> {
        let det = b[0] * c[1] - b[1] * c[0];
        let nb = b[0].hypot(b[1]);
        let nc = c[0].hypot(c[1]);
        if !det.is_finite() || det.abs() <= indep_tol * nb * nc || nb == 0.0 || nc == 0.0 {
            return Err(Error::DegenerateCone { det });
        }
        Ok(Self { b, c, det })
    }

    /// The closed nonnegative quadrant `ℝ²₊`.
    pub fn nonneg_orthant() -> Self {
        Self {
            b: [1.0, 0.0],
            c: [0.0, 1.0],
            det: 1.0,
        }
    }

    pub fn b(&self) -> Vec2 {
        self.b
    }

    pub fn c(&self) -> Vec2 {
        self.c
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// Angle between the generators, in radians.
    pub fn angle(&self) -> f64 {
        let dot = self.b[0] * self.c[0] + self.b[1] * self.c[1];
        self.det.abs().atan2(dot)
    }

    pub fn coords(&self, p: Vec2) -> ConeCoords {
        ConeCoords {
            lam: (p[0] * self.c[1] - p[1] * self.c[0]) / self.det,
            bet: (self.b[0] * p[1] - self.b[1] * p[0]) / self.det,
        }
    }

    pub fn point(&self, lam: f64, bet: f64) -> Vec2 {
        [
            lam * self.b[0] + bet * self.c[0],
            lam * self.b[1] + bet * self.c[1],
        ]
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.coords(p).is_member(tol)
    }

    /// `λb + βc` with `λ, β` uniform in `[0, radius]`.
    pub fn sample<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> Vec2 {
        if radius <= 0.0 {
            return [0.0, 0.0];
        }
        let lam = rng.gen_range(0.0..=radius);
        let bet = rng.gen_range(0.0..=radius);
        self.point(lam, bet)
    }

    pub fn sample_seeded(&self, radius: f64, seed: u64) -> Vec2 {
        self.sample(radius, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

impl TryFrom<ConeGenerators> for Cone2 {
    type Error = Error;

    fn try_from(g: ConeGenerators) -> Result<Self> {
        Cone2::new(g.b, g.c)
    }
}

impl From<Cone2> for ConeGenerators {
    fn from(k: Cone2) -> Self {
        ConeGenerators { b: k.b, c: k.c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coords_examples() {
        let k = Cone2::nonneg_orthant();
        assert_eq!(k.coords([2.0, 3.0]), ConeCoords { lam: 2.0, bet: 3.0 });
        let k = Cone2::new([1.0, 1.0], [-1.0, 1.0]).unwrap();
        assert_eq!(k.coords([0.0, 2.0]), ConeCoords { lam: 1.0, bet: 1.0 });
        assert_eq!(k.coords([0.0, 0.0]), ConeCoords { lam: 0.0, bet: 0.0 });
    }

    #[test]
    fn contains_examples() {
        let k = Cone2::nonneg_orthant();
        assert!(k.contains([1.0, 1.0], 0.0));
        assert!(!k.contains([-1.0, 0.0], 0.0));
        let k = Cone2::new([1.0, 1.0], [-1.0, 1.0]).unwrap();
        let cc = k.coords([0.0, -1.0]);
        assert_eq!((cc.lam, cc.bet), (-0.5, -0.5));
        assert!(!k.contains([0.0, -1.0], 1e-9));
    }

    #[test]
    fn dependent_generators_rejected() {
        assert!(matches!(
            Cone2::new([1.0, 2.0], [2.0, 4.0]),
            Err(Error::DegenerateCone { .. })
        ));
        assert!(Cone2::new([0.0, 0.0], [1.0, 0.0]).is_err());
        // scale-relative: tiny but independent generators are fine
        assert!(Cone2::new([1e-9, 0.0], [0.0, 1e-9]).is_ok());
    }

    #[test]
    fn sample_is_deterministic_and_inside() {
        let k = Cone2::new([1.0, 0.2], [-0.3, 1.0]).unwrap();
        assert_eq!(k.sample_seeded(0.0, 1), [0.0, 0.0]);
        for seed in 0..200 {
            let p = k.sample_seeded(3.0, seed);
            assert_eq!(p, k.sample_seeded(3.0, seed));
            assert!(k.contains(p, 1e-12));
        }
    }

    fn cone_strategy() -> impl Strategy<Value = Cone2> {
        (0.0..std::f64::consts::TAU, 0.1f64..3.0, 0.1f64..3.0, 0.09f64..3.05)
            .prop_map(|(theta, rb, rc, gap)| {
                let b = [rb * theta.cos(), rb * theta.sin()];
                let c = [rc * (theta + gap).cos(), rc * (theta + gap).sin()];
                Cone2::new(b, c).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn coords_round_trip(k in cone_strategy(), lam in -10.0f64..10.0, bet in -10.0f64..10.0) {
            let cc = k.coords(k.point(lam, bet));
            prop_assert!((cc.lam - lam).abs() <= 1e-10 * (1.0 + lam.abs() + bet.abs()) / k.angle().sin());
            prop_assert!((cc.bet - bet).abs() <= 1e-10 * (1.0 + lam.abs() + bet.abs()) / k.angle().sin());
        }

        #[test]
        fn cone_is_closed_under_addition(k in cone_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
            let p = k.sample_seeded(5.0, s1);
            let q = k.sample_seeded(5.0, s2);
            prop_assert!(k.contains([p[0] + q[0], p[1] + q[1]], 1e-9));
        }
    }
}
