//! Explicit membership witnesses for convex combinations in `F(ℝⁿ) + Λ`.
//!
//! Given `u = F(x_u) + e₁` and `v = F(x_v) + e₂` with `e₁, e₂ ∈ Λ`, and
//! `w = αu + (1-α)v`, [`witness_convex_combination`] returns `x*` and
//! `e* ∈ Λ` with `F(x*) + e* = w`. The construction walks the line through
//! `x_u` and `x_v`: either one endpoint image already lies in `w - Λ`, or the
//! image of that line is a ray, a line or a parabola, and in each case a point
//! of it inside `w - Λ` can be written down in closed form.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone2d::{Cone2, ConeCoords};
use crate::conic2d::{solve_quadratic, RayHit, Roots};
use crate::quadmap::{AffineManifold, LineImageKind, QuadraticMap};
use crate::slemma;
use crate::smallmat::max_abs;
use crate::{Error, Result, SearchConfig, ToleranceConfig, Vec2};

/// A member `value = F(x) + e` of `F(ℝⁿ) + Λ` together with its decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub x: Vec<f64>,
    pub e: Vec2,
    pub value: Vec2,
}

impl ConePoint {
    pub fn new(map: &QuadraticMap, cone: &Cone2, x: Vec<f64>, e: Vec2, tol: &ToleranceConfig) -> Result<Self> {
        let fx = map.eval(&x)?;
        if !cone.contains(e, tol.cone_tol * (1.0 + max_abs(&e))) {
            return Err(Error::PreconditionViolated(format!("e = {e:?} is not in the cone")));
        }
        Ok(Self {
            x,
            e,
            value: add(fx, e),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "Case1_u")]
    Case1U,
    #[serde(rename = "Case1_v")]
    Case1V,
    RayOrLine,
    #[serde(rename = "ParabolaIVT")]
    ParabolaIvt,
    ParabolaRayHit,
}

impl Branch {
    pub const ALL: [Branch; 5] = [
        Branch::Case1U,
        Branch::Case1V,
        Branch::RayOrLine,
        Branch::ParabolaIvt,
        Branch::ParabolaRayHit,
    ];
}

/// Every intermediate quantity of a witness run. Fields past the Case 1 test
/// are `None` when the run stopped earlier. After a swap, `u` refers to the
/// endpoint with `s > 0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessTrace {
    /// Weight of `u` in `w = αu + βv`.
    pub alpha: f64,
    pub beta: f64,
    pub w: Vec2,
    pub u_bar: Vec2,
    pub v_bar: Vec2,
    pub w_bar: Vec2,
    /// `w̄ = w - λb - γc`.
    pub lambda: f64,
    pub gamma: f64,
    pub swapped: bool,
    /// `ū - w̄ = sb + tc`.
    pub s: Option<f64>,
    pub t: Option<f64>,
    /// `v̄ - w̄ = l(ū - w̄)`.
    pub l: Option<f64>,
    /// Cone coordinates `(μ, ν)` of `e₁` and `e₂`.
    pub e1_coords: Option<ConeCoords>,
    pub e2_coords: Option<ConeCoords>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    /// `z = w + δc` lies on the chord `[ū, w̄]`.
    pub delta: Option<f64>,
    pub z: Option<Vec2>,
    pub image_kind: Option<LineImageKind>,
    pub psi_z: Option<f64>,
    pub psi_w: Option<f64>,
    /// Segment parameter of `w*` on `[z, w]`.
    pub theta: Option<f64>,
    pub ray_hit: Option<RayHit>,
    pub w_star: Option<Vec2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub x_star: Vec<f64>,
    pub e_star: Vec2,
    pub branch: Branch,
    pub trace: WitnessTrace,
}

fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn lerp(a: Vec2, b: Vec2, wa: f64, wb: f64) -> Vec2 {
    [wa * a[0] + wb * b[0], wa * a[1] + wb * b[1]]
}

fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

fn coords_max(k: &Cone2, pts: &[Vec2]) -> f64 {
    pts.iter()
        .map(|p| {
            let c = k.coords(*p);
            c.lam.abs().max(c.bet.abs())
        })
        .fold(0.0, f64::max)
}

fn breakdown(reason: impl Into<String>, trace: &WitnessTrace) -> Error {
    Error::NumericalBreakdown {
        reason: reason.into(),
        trace: Box::new(trace.clone()),
    }
}

/// Builds `x*`, `e* ∈ Λ` with `F(x*) + e* = α·pu.value + (1-α)·pv.value`.
pub fn witness_convex_combination(
    map: &QuadraticMap,
    cone: &Cone2,
    pu: &ConePoint,
    pv: &ConePoint,
    alpha: f64,
    tol: &ToleranceConfig,
) -> Result<WitnessCertificate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 1)")));
    }
    let beta = 1.0 - alpha;
    let u_bar = map.eval(&pu.x)?;
    let v_bar = map.eval(&pv.x)?;
    let w = lerp(pu.value, pv.value, alpha, beta);
    let w_bar = lerp(u_bar, v_bar, alpha, beta);

    let cscale = 1.0 + coords_max(cone, &[u_bar, v_bar, w, pu.e, pv.e]);
    let ctol = tol.cone_tol * cscale;

    let lg = cone.coords(sub(w, w_bar));
    let mut trace = WitnessTrace {
        alpha,
        beta,
        w,
        u_bar,
        v_bar,
        w_bar,
        lambda: lg.lam,
        gamma: lg.bet,
        ..Default::default()
    };
    if !lg.is_member(ctol) {
        return Err(breakdown("w - w̄ is not in the cone; are e₁, e₂ in Λ?", &trace));
    }

    let case1 = |tolerance: f64, trace: &WitnessTrace| -> Option<WitnessCertificate> {
        if cone.contains(sub(w, u_bar), tolerance) {
            Some((pu.x.clone(), sub(w, u_bar), Branch::Case1U))
        } else if cone.contains(sub(w, v_bar), tolerance) {
            Some((pv.x.clone(), sub(w, v_bar), Branch::Case1V))
        } else {
            None
        }
        .map(|(x_star, e_star, branch)| WitnessCertificate {
            x_star,
            e_star,
            branch,
            trace: trace.clone(),
        })
    };
    if let Some(cert) = case1(ctol, &trace) {
        return Ok(cert);
    }
    let widened = ctol * tol.breakdown_widen;

    // Case 2: orient so that ū - w̄ = sb + tc has s > 0, t < 0
    let mut st = cone.coords(sub(u_bar, w_bar));
    let (mut xu, mut xv, mut e1, mut e2) = (&pu.x, &pv.x, pu.e, pv.e);
    let (mut a, mut b) = (alpha, beta);
    if st.lam < 0.0 {
        trace.swapped = true;
        std::mem::swap(&mut xu, &mut xv);
        std::mem::swap(&mut e1, &mut e2);
        std::mem::swap(&mut a, &mut b);
        st = cone.coords(sub(v_bar, w_bar));
        trace.alpha = a;
        trace.beta = b;
    }
    let (s, t) = (st.lam, st.bet);
    trace.s = Some(s);
    trace.t = Some(t);
    trace.l = Some(-a / b);
    if !(s > 0.0 && t < 0.0) {
        return case1(widened, &trace)
            .ok_or_else(|| breakdown(format!("sign contract s > 0, t < 0 failed (s = {s:e}, t = {t:e})"), &trace));
    }

    let c1 = cone.coords(e1);
    let c2 = cone.coords(e2);
    trace.e1_coords = Some(c1);
    trace.e2_coords = Some(c2);
    let (lambda, gamma) = (lg.lam, lg.bet);
    let excess = s - a * c1.lam - b * c2.lam;
    let denom = lambda + excess;
    if !(excess > 0.0 && denom > 0.0) {
        return case1(widened, &trace).ok_or_else(|| {
            breakdown(
                format!("s - αμ₁ - βμ₂ = {excess:e} should be positive"),
                &trace,
            )
        });
    }
    let delta1 = lambda / denom;
    let delta2 = excess / denom;
    let delta = delta1 * (t - a * c1.bet - b * c2.bet) - delta2 * gamma;
    trace.delta1 = Some(delta1);
    trace.delta2 = Some(delta2);
    trace.delta = Some(delta);
    if delta > tol.root_tol * cscale {
        return Err(breakdown(format!("δ = {delta:e} should be ≤ 0"), &trace));
    }

    certify_on_line_image(map, cone, xu, xv, w, w_bar, delta, tol, trace)
}

/// The line-image step of the construction: `w̄` lies on the segment between
/// `F(xu)` and `F(xv)`, `w - w̄ ∈ Λ`, and `z = w + δc` (`δ ≤ 0`) lies on the
/// chord from `F(xu)` to `w̄`. Finds `w* ∈ F(line) ∩ (w - Λ)`.
///
/// Passing `w_bar = w`, `delta = 0` certifies a point `w` on the chord between
/// two image points directly.
#[allow(clippy::too_many_arguments)]
pub fn certify_on_line_image(
    map: &QuadraticMap,
    cone: &Cone2,
    xu: &[f64],
    xv: &[f64],
    w: Vec2,
    w_bar: Vec2,
    delta: f64,
    tol: &ToleranceConfig,
    mut trace: WitnessTrace,
) -> Result<WitnessCertificate> {
    if trace.w != w {
        trace.w = w;
        trace.w_bar = w_bar;
        trace.delta = Some(delta);
    }
    let img = map
        .classify_line_image(xu, xv, tol)
        .map_err(|e| breakdown(format!("line image: {e}"), &trace))?;
    trace.image_kind = Some(img.kind());

    let preimage = |target: Vec2, trace: &WitnessTrace| {
        img.preimage_on_line(xu, xv, target, tol)
            .map_err(|e| breakdown(format!("preimage: {e}"), trace))
    };

    let Some(conic) = img.conic().copied() else {
        let x_star = preimage(w_bar, &trace)?;
        return Ok(WitnessCertificate {
            x_star,
            e_star: sub(w, w_bar),
            branch: Branch::RayOrLine,
            trace,
        });
    };

    let c = cone.c();
    let z = add(w, scale(delta, c));
    let psi_z = conic.eval(z);
    let psi_w = conic.eval(w);
    trace.z = Some(z);
    trace.psi_z = Some(psi_z);
    trace.psi_w = Some(psi_w);
    if psi_z > tol.on_tol * (1.0 + conic.eval_scale(z)) {
        return Err(breakdown(format!("ψ(z) = {psi_z:e} should be ≤ 0"), &trace));
    }

    if psi_w >= 0.0 {
        // ψ(z + θ(w - z)) has a root in [0, 1]
        let dir = sub(w, z);
        let theta = if dir == [0.0, 0.0] {
            1.0
        } else {
            let (qa, qb, qc) = conic.restrict_to_line(z, dir);
            let lo = -tol.root_tol;
            let hi = 1.0 + tol.root_tol;
            let candidates = match solve_quadratic(qa, qb, qc, 1e-12) {
                Roots::One(r) => vec![r],
                Roots::Two(r1, r2) => vec![r1, r2],
                Roots::None | Roots::All => vec![],
            };
            match candidates.into_iter().filter(|r| *r >= lo && *r <= hi).reduce(f64::max) {
                Some(r) => r.clamp(0.0, 1.0),
                None if conic.is_on(w, tol.on_tol) => 1.0,
                None => {
                    return Err(breakdown("no root of ψ on [z, w]", &trace));
                }
            }
        };
        let w_star = add(z, scale(theta, dir));
        trace.theta = Some(theta);
        trace.w_star = Some(w_star);
        let x_star = preimage(w_star, &trace)?;
        return Ok(WitnessCertificate {
            x_star,
            e_star: scale(-(1.0 - theta) * delta, c),
            branch: Branch::ParabolaIvt,
            trace,
        });
    }

    let hit = conic
        .first_negative_ray_hit(w, cone, tol.root_tol)
        .map_err(|e| breakdown(format!("ray hit: {e}"), &trace))?;
    trace.ray_hit = Some(hit);
    trace.w_star = Some(hit.point);
    let x_star = preimage(hit.point, &trace)?;
    Ok(WitnessCertificate {
        x_star,
        e_star: scale(-hit.t, hit.direction),
        branch: Branch::ParabolaRayHit,
        trace,
    })
}

/// Recomputes `F(x*) + e*` from scratch and checks it against `w`.
pub fn verify_certificate(map: &QuadraticMap, cone: &Cone2, w: Vec2, cert: &WitnessCertificate, tol: f64) -> bool {
    certificate_residual(map, cone, w, cert).is_some_and(|r| r.passes(tol))
}

/// Residuals behind [`verify_certificate`]: the value mismatch relative to
/// `1 + ‖w‖∞ + ‖F(x*)‖∞` and the worst negative cone coordinate of `e*`
/// relative to the coordinate size of `w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateResidual {
    pub value: f64,
    pub cone: f64,
}

impl CertificateResidual {
    pub fn passes(&self, tol: f64) -> bool {
        self.value <= tol && self.cone <= tol
    }
}

pub fn certificate_residual(
    map: &QuadraticMap,
    cone: &Cone2,
    w: Vec2,
    cert: &WitnessCertificate,
) -> Option<CertificateResidual> {
    let fx = map.eval(&cert.x_star).ok()?;
    let reached = add(fx, cert.e_star);
    let miss = (reached[0] - w[0]).abs().max((reached[1] - w[1]).abs());
    let value = miss / (1.0 + max_abs(&w).max(max_abs(&fx)));
    let ec = cone.coords(cert.e_star);
    let violation = (-ec.lam).max(-ec.bet).max(0.0);
    let coord_scale = 1.0 + coords_max(cone, &[w, fx]);
    let r = CertificateResidual {
        value,
        cone: violation / coord_scale,
    };
    (r.value.is_finite() && r.cone.is_finite()).then_some(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeFailure {
    pub trial: usize,
    pub u: ConePoint,
    pub v: ConePoint,
    pub alpha: f64,
    pub diagnostic: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub n: usize,
    pub trials: usize,
    pub failures: Vec<ProbeFailure>,
    pub max_residual: f64,
    pub branch_counts: BTreeMap<Branch, usize>,
}

impl ConvexityReport {
    pub fn consistent(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn verdict(&self) -> &'static str {
        if self.consistent() {
            "consistent with convexity"
        } else {
            "convexity violated"
        }
    }
}

/// Random generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Samples pairs of members of `F(ℝⁿ) + Λ` and certifies random convex
/// combinations of them.
pub fn convexity_probe(
    map: &QuadraticMap,
    cone: &Cone2,
    trials: usize,
    seed: u64,
    box_radius: f64,
    tol: &ToleranceConfig,
) -> Result<ConvexityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !(box_radius > 0.0) {
        return Err(Error::InvalidArgument(format!("box radius {box_radius} must be positive")));
    }
    let n = map.n();
    let mut report = ConvexityReport {
        n,
        trials,
        failures: vec![],
        max_residual: 0.0,
        branch_counts: Branch::ALL.iter().map(|b| (*b, 0)).collect(),
    };
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let draw_point = |rng: &mut ChaCha8Rng| -> Result<ConePoint> {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-box_radius..=box_radius)).collect();
            let e = cone.sample(box_radius, rng);
            ConePoint::new(map, cone, x, e, tol)
        };
        let u = draw_point(&mut rng)?;
        let v = draw_point(&mut rng)?;
        let alpha = loop {
            let a: f64 = rng.gen_range(0.0..1.0);
            if a > 0.0 {
                break a;
            }
        };
        let w = lerp(u.value, v.value, alpha, 1.0 - alpha);
        let outcome = witness_convex_combination(map, cone, &u, &v, alpha, tol).and_then(|cert| {
            let r = certificate_residual(map, cone, w, &cert)
                .ok_or_else(|| Error::InternalNumerics("non-finite certificate".into()))?;
            Ok((cert, r))
        });
        let diagnostic = match outcome {
            Ok((cert, r)) => {
                report.max_residual = report.max_residual.max(r.value).max(r.cone);
                *report.branch_counts.entry(cert.branch).or_default() += 1;
                if r.passes(tol.cert_tol) {
                    continue;
                }
                format!("certificate rejected: {r:?} on branch {:?}", cert.branch)
            }
            Err(e) => e.to_string(),
        };
        report.failures.push(ProbeFailure {
            trial,
            u,
            v,
            alpha,
            diagnostic,
        });
    }
    Ok(report)
}

/// Convexity probe of `F(C) - ρ(1,0) + ℝ²₊` on an affine manifold `C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DinesReport {
    pub rho: f64,
    /// Best dual lower bound on `inf {f(x) : g(x) ≤ 0, x ∈ C}`; `None` when
    /// no finite bound was found.
    pub mu_estimate: Option<f64>,
    /// Whether `ρ ≤ mu_estimate - slack`.
    pub rho_validated: bool,
    pub report: ConvexityReport,
}

#[allow(clippy::too_many_arguments)]
pub fn dines_probe(
    map: &QuadraticMap,
    manifold: &AffineManifold,
    rho: f64,
    trials: usize,
    seed: u64,
    box_radius: f64,
    tol: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<DinesReport> {
    let restricted = map.restrict_to_manifold(manifold)?;
    let bound = slemma::dual_bound(&restricted.f, &restricted.g, search, tol)?;
    let mu_estimate = bound.value.is_finite().then_some(bound.value);
    let rho_validated = mu_estimate.is_some_and(|mu| rho <= mu - search.slack);
    let shifted = restricted.shift_first(rho);
    let report = convexity_probe(&shifted, &Cone2::nonneg_orthant(), trials, seed, box_radius, tol)?;
    Ok(DinesReport {
        rho,
        mu_estimate,
        rho_validated,
        report,
    })
}
