//! The S-lemma as a decision procedure.
//!
//! With a Slater point (`g(x*) < 0`) exactly one of the following holds:
//! there is `x` with `f(x) < 0` and `g(x) ≤ 0`, or there is `λ ≥ 0` with
//! `f + λg ≥ 0` everywhere. [`decide`] maximises the concave dual function
//! `φ(λ) = inf_x f(x) + λg(x)` to look for the multiplier and, failing that,
//! searches for a counterexample. When neither search produces a certificate
//! the verdict is `Undecided`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::quadmap::QuadraticForm;
use crate::smallmat::{self, eigh, min_of_quadratic, norm, MinResult};
use crate::{Error, Result, SearchConfig, ToleranceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    MultiplierFound,
    CounterexampleFound,
    Undecided,
}

/// One evaluation of the dual function; `value = None` stands for `-∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSample {
    pub lambda: f64,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SLemmaVerdict {
    pub outcome: Outcome,
    /// The multiplier when `MultiplierFound`, otherwise the dual maximiser.
    pub lambda: f64,
    /// `φ(lambda)`, `None` for `-∞`.
    pub dual_value: Option<f64>,
    /// A point with `f < 0`, `g ≤ 0` when `CounterexampleFound`.
    pub x_witness: Option<Vec<f64>>,
    pub diagnostics: Vec<DualSample>,
}

pub fn slater_check(g: &QuadraticForm, x_star: &[f64], strict_margin: f64) -> Result<bool> {
    if x_star.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: x_star.len(),
        });
    }
    Ok(g.eval(x_star) < -strict_margin)
}

fn combined(f: &QuadraticForm, g: &QuadraticForm, lambda: f64) -> QuadraticForm {
    f.add_scaled(lambda, g)
}

fn minimise(f: &QuadraticForm, g: &QuadraticForm, lambda: f64, tol: &ToleranceConfig) -> Result<MinResult> {
    let h = combined(f, g, lambda);
    min_of_quadratic(&h.quad, &h.lin, h.constant, tol)
}

/// `inf_x f(x) + λ g(x)`, possibly `-∞`.
pub fn dual_value(f: &QuadraticForm, g: &QuadraticForm, lambda: f64, tol: &ToleranceConfig) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("multiplier {lambda} must be nonnegative")));
    }
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: g.n(),
        });
    }
    Ok(minimise(f, g, lambda, tol)?.value())
}

/// Total order used by the unimodal search: finite dual values beat `-∞`,
/// and among `-∞` points a larger smallest eigenvalue of `P + λQ` is closer
/// to the finite region.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Merit {
    finite: bool,
    score: f64,
}

impl Merit {
    fn better_than(&self, other: &Merit) -> bool {
        match (self.finite, other.finite) {
            (true, false) => true,
            (false, true) => false,
            _ => self.score > other.score,
        }
    }
}

struct DualProbe<'a> {
    f: &'a QuadraticForm,
    g: &'a QuadraticForm,
    tol: &'a ToleranceConfig,
    samples: Vec<DualSample>,
    minimizers: Vec<Vec<f64>>,
    best: Option<(f64, f64)>,
}

impl<'a> DualProbe<'a> {
    fn new(f: &'a QuadraticForm, g: &'a QuadraticForm, tol: &'a ToleranceConfig) -> Self {
        Self {
            f,
            g,
            tol,
            samples: vec![],
            minimizers: vec![],
            best: None,
        }
    }

    fn eval(&mut self, lambda: f64) -> Result<(Merit, Option<Vec<f64>>)> {
        let r = minimise(self.f, self.g, lambda, self.tol)?;
        let (merit, minimizer) = match r {
            MinResult::Bounded { value, minimizer } => {
                if self.best.is_none_or(|(_, v)| value > v) {
                    self.best = Some((lambda, value));
                }
                (
                    Merit {
                        finite: true,
                        score: value,
                    },
                    Some(minimizer),
                )
            }
            MinResult::UnboundedBelow { .. } => {
                let h = combined(self.f, self.g, lambda);
                let lmin = eigh(&h.quad, self.tol)?.values[0];
                let scale = self.f.quad.max_abs().max(self.g.quad.max_abs()).max(f64::MIN_POSITIVE);
                (
                    Merit {
                        finite: false,
                        score: lmin / scale,
                    },
                    None,
                )
            }
        };
        self.samples.push(DualSample {
            lambda,
            value: merit.finite.then_some(merit.score),
        });
        if let Some(m) = &minimizer {
            self.minimizers.push(m.clone());
        }
        Ok((merit, minimizer))
    }
}

/// Best dual value found and where.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualBound {
    pub lambda: f64,
    /// `-∞` when no evaluated multiplier gave a finite value.
    pub value: f64,
    pub samples: Vec<DualSample>,
    #[serde(skip)]
    minimizers: Vec<Vec<f64>>,
}

/// Maximises `φ` over `[0, lambda_max]`. The result is a lower bound on
/// `inf {f : g ≤ 0}`.
pub fn dual_bound(
    f: &QuadraticForm,
    g: &QuadraticForm,
    search: &SearchConfig,
    tol: &ToleranceConfig,
) -> Result<DualBound> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: g.n(),
        });
    }
    let mut probe = DualProbe::new(f, g, tol);
    let (m0, _) = probe.eval(0.0)?;

    // bracket: double hi while the merit keeps improving
    let mut hi = 1.0f64.min(search.lambda_max);
    let mut prev = m0;
    let mut lo = 0.0;
    loop {
        let (m, _) = probe.eval(hi)?;
        if !m.better_than(&prev) || hi >= search.lambda_max {
            break;
        }
        lo = 0.5 * hi;
        prev = m;
        hi = (2.0 * hi).min(search.lambda_max);
    }
    let lo_bracket = if lo > 0.0 { 0.5 * lo } else { 0.0 };

    // golden-section on [lo_bracket, hi]
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo_bracket, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut mc, _) = probe.eval(c)?;
    let (mut md, _) = probe.eval(d)?;
    for _ in 0..search.golden_iters {
        if b - a <= 1e-15 * (1.0 + b) {
            break;
        }
        if md.better_than(&mc) {
            a = c;
            c = d;
            mc = md;
            d = a + inv_phi * (b - a);
            md = probe.eval(d)?.0;
        } else {
            b = d;
            d = c;
            md = mc;
            c = b - inv_phi * (b - a);
            mc = probe.eval(c)?.0;
        }
    }

    if let Some((lambda, _)) = probe.best {
        polish(&mut probe, lambda, search)?;
    }

    let (lambda, value) = probe.best.unwrap_or((0.5 * (a + b), f64::NEG_INFINITY));
    Ok(DualBound {
        lambda,
        value,
        samples: probe.samples,
        minimizers: probe.minimizers,
    })
}

/// Refines a finite maximiser by bisection on the supergradient `g(x_λ)`,
/// which golden-section cannot resolve once `φ` is flat to rounding.
fn polish(probe: &mut DualProbe<'_>, lambda: f64, search: &SearchConfig) -> Result<()> {
    let slope = |probe: &mut DualProbe<'_>, l: f64| -> Result<Option<f64>> {
        Ok(probe.eval(l)?.1.map(|x| probe.g.eval(&x)))
    };
    let Some(s0) = slope(probe, lambda)? else {
        return Ok(());
    };
    if s0 == 0.0 {
        return Ok(());
    }
    // step away from λ along the ascent direction until the slope flips
    let dir = s0.signum();
    let mut step = 1e-9 * (1.0 + lambda);
    let mut inner = lambda;
    let mut outer = None;
    for _ in 0..60 {
        let cand = (lambda + dir * step).clamp(0.0, search.lambda_max);
        match slope(probe, cand)? {
            None => break,
            Some(s) if s.signum() != dir => {
                outer = Some(cand);
                break;
            }
            Some(_) => {
                inner = cand;
                if cand == 0.0 || cand == search.lambda_max {
                    break;
                }
            }
        }
        step *= 4.0;
    }
    let Some(mut outer) = outer else {
        return Ok(());
    };
    for _ in 0..100 {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        match slope(probe, mid)? {
            None => outer = mid,
            Some(s) if s.signum() == dir => inner = mid,
            Some(_) => outer = mid,
        }
    }
    Ok(())
}

/// `(quadratic, linear, constant)` sublevel set `{s : q(s) ≤ 0}` (or `< 0`
/// when `strict`) as a union of closed intervals, ends possibly infinite.
fn sublevel_intervals(a: f64, b: f64, c: f64, strict: bool) -> Vec<(f64, f64)> {
    const INFINITY: f64 = f64::INFINITY;
    const NEG_INFINITY: f64 = f64::NEG_INFINITY;
    let ok = |v: f64| if strict { v < 0.0 } else { v <= 0.0 };
    if a == 0.0 {
        if b == 0.0 {
            return if ok(c) { vec![(NEG_INFINITY, INFINITY)] } else { vec![] };
        }
        let r = -c / b;
        return if b > 0.0 {
            vec![(NEG_INFINITY, r)]
        } else {
            vec![(r, INFINITY)]
        };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return if a > 0.0 { vec![] } else { vec![(NEG_INFINITY, INFINITY)] };
    }
    let q = -0.5 * (b + if b < 0.0 { -1.0 } else { 1.0 } * disc.sqrt());
    let (mut r1, mut r2) = (q / a, if q != 0.0 { c / q } else { q / a });
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    if a > 0.0 {
        vec![(r1, r2)]
    } else {
        vec![(NEG_INFINITY, r1), (r2, INFINITY)]
    }
}

fn intersect(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = vec![];
    for &(a, b) in xs {
        for &(c, d) in ys {
            let lo = a.max(c);
            let hi = b.min(d);
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }
    out
}

/// Feasible point of smallest `f` found on the line `x0 + s·d`.
fn best_on_line(
    f: &QuadraticForm,
    g: &QuadraticForm,
    x0: &[f64],
    d: &[f64],
    feas_tol: f64,
) -> Option<(Vec<f64>, f64)> {
    let [fa, fb, _] = f.along(x0, d);
    let [ga, gb, gc] = g.along(x0, d);
    let mut cands = vec![0.0];
    for (lo, hi) in sublevel_intervals(ga, gb, gc, false) {
        for end in [lo, hi] {
            if end.is_finite() {
                cands.extend([end, end * (1.0 - 1e-9), end * (1.0 + 1e-9)]);
            }
        }
    }
    if fa > 0.0 {
        cands.push(-fb / (2.0 * fa));
    }
    for k in (-10..=60).step_by(2) {
        let s = 2f64.powi(k);
        cands.extend([s, -s]);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in cands {
        if !s.is_finite() {
            continue;
        }
        let x = smallmat::axpy(x0, s, d);
        let (fv, gv) = (f.eval(&x), g.eval(&x));
        if !(gv <= feas_tol) || !fv.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, bv)| fv < *bv) {
            best = Some((x, fv));
        }
    }
    best
}

fn unit_random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = norm(&v);
        if nv > 1e-3 && nv <= 1.0 {
            return v.iter().map(|x| x / nv).collect();
        }
    }
}

/// Gradient descent with backtracking on `f + ρ·max(g, 0)²`, `ρ` growing.
fn penalty_descent(f: &QuadraticForm, g: &QuadraticForm, start: Vec<f64>, iters: usize) -> Vec<f64> {
    let mut x = start;
    let mut rho = 1.0;
    let merit = |x: &[f64], rho: f64| f.eval(x) + rho * g.eval(x).max(0.0).powi(2);
    for it in 0..iters {
        if it % 20 == 19 {
            rho *= 10.0;
        }
        let gv = g.eval(&x).max(0.0);
        let grad: Vec<f64> = f
            .gradient(&x)
            .iter()
            .zip(g.gradient(&x))
            .map(|(df, dg)| df + 2.0 * rho * gv * dg)
            .collect();
        let gn = norm(&grad);
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let here = merit(&x, rho);
        let mut step = 1.0 / gn;
        let mut moved = false;
        for _ in 0..40 {
            let cand = smallmat::axpy(&x, -step, &grad);
            if merit(&cand, rho) < here - 1e-4 * step * gn * gn {
                x = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    x
}

struct CounterexampleSearch<'a> {
    f: &'a QuadraticForm,
    g: &'a QuadraticForm,
    search: &'a SearchConfig,
    best: Option<(Vec<f64>, f64)>,
}

impl CounterexampleSearch<'_> {
    fn offer(&mut self, cand: Option<(Vec<f64>, f64)>) {
        if let Some((x, v)) = cand {
            if self.best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                self.best = Some((x, v));
            }
        }
    }

    fn line(&mut self, x0: &[f64], d: &[f64]) {
        if norm(d) > 0.0 {
            let c = best_on_line(self.f, self.g, x0, d, self.search.feas_tol);
            self.offer(c);
        }
    }

    fn found(&self) -> bool {
        self.best
            .as_ref()
            .is_some_and(|(_, v)| *v < -self.search.slack.max(self.search.strict_margin))
    }

    /// Coordinate-free descent that keeps feasibility: repeated exact line
    /// minimisation from the incumbent along random and gradient directions.
    fn walk(&mut self, start: Vec<f64>, rng: &mut ChaCha8Rng, iters: usize) {
        let n = start.len();
        let mut x = start;
        for i in 0..iters {
            let d = if i % 3 == 0 {
                self.f.gradient(&x)
            } else {
                unit_random(rng, n)
            };
            if let Some((nx, nv)) = best_on_line(self.f, self.g, &x, &d, self.search.feas_tol) {
                if nv <= self.f.eval(&x) || !(self.g.eval(&x) <= self.search.feas_tol) {
                    x = nx.clone();
                }
                self.offer(Some((nx, nv)));
            }
            if self.found() {
                return;
            }
        }
    }
}

/// Decides between a multiplier `λ ≥ 0` with `f + λg ≥ 0` and a point with
/// `f < 0`, `g ≤ 0`.
pub fn decide(
    f: &QuadraticForm,
    g: &QuadraticForm,
    x_star: &[f64],
    search: &SearchConfig,
    tol: &ToleranceConfig,
) -> Result<SLemmaVerdict> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: g.n(),
        });
    }
    if !slater_check(g, x_star, search.strict_margin)? {
        return Err(Error::SlaterViolated { value: g.eval(x_star) });
    }

    let phi0 = dual_value(f, g, 0.0, tol)?;
    if phi0 >= -search.slack {
        return Ok(SLemmaVerdict {
            outcome: Outcome::MultiplierFound,
            lambda: 0.0,
            dual_value: Some(phi0),
            x_witness: None,
            diagnostics: vec![DualSample {
                lambda: 0.0,
                value: Some(phi0),
            }],
        });
    }

    let bound = dual_bound(f, g, search, tol)?;
    let dual = bound.value.is_finite().then_some(bound.value);
    if bound.value >= -search.slack {
        return Ok(SLemmaVerdict {
            outcome: Outcome::MultiplierFound,
            lambda: bound.lambda,
            dual_value: dual,
            x_witness: None,
            diagnostics: bound.samples,
        });
    }

    let n = f.n();
    let mut cx = CounterexampleSearch {
        f,
        g,
        search,
        best: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);

    cx.offer((g.eval(x_star) <= search.feas_tol).then(|| (x_star.to_vec(), f.eval(x_star))));
    for m in &bound.minimizers {
        let d = smallmat::sub(m, x_star);
        cx.line(x_star, &d);
    }

    // structured directions through the Slater point
    let mut dirs: Vec<Vec<f64>> = vec![];
    for q in [&f.quad, &g.quad, &combined(f, g, bound.lambda).quad] {
        let e = eigh(q, tol)?;
        dirs.extend((0..n).map(|i| e.vector(i)));
    }
    if let MinResult::UnboundedBelow { direction } = minimise(f, g, bound.lambda, tol)? {
        dirs.push(direction);
    }
    for d in &dirs {
        cx.line(x_star, d);
    }

    let radius = 2.0 * (1.0 + smallmat::max_abs(x_star));
    for _ in 0..search.restarts {
        if cx.found() {
            break;
        }
        let d = unit_random(&mut rng, n);
        cx.line(x_star, &d);
        let start: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..radius)).collect();
        let end = penalty_descent(f, g, start, search.descent_iters);
        let toward = smallmat::sub(&end, x_star);
        cx.line(x_star, &toward);
        cx.line(&end, &unit_random(&mut rng, n));
    }
    if !cx.found() {
        let start = cx
            .best
            .as_ref()
            .map(|(x, _)| x.clone())
            .unwrap_or_else(|| x_star.to_vec());
        cx.walk(start, &mut rng, search.descent_iters * search.restarts.max(1) / 4);
    }

    let witness = cx
        .best
        .filter(|(x, v)| *v < -search.strict_margin && g.eval(x) <= search.feas_tol);
    let (outcome, x_witness) = match witness {
        Some((x, _)) => (Outcome::CounterexampleFound, Some(x)),
        None => (Outcome::Undecided, None),
    };
    Ok(SLemmaVerdict {
        outcome,
        lambda: bound.lambda,
        dual_value: dual,
        x_witness,
        diagnostics: bound.samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleVerdict {
    Found(Vec<f64>),
    NoneOnGrid,
}

/// Scans the grid `{-r, -r + h, …, r}ⁿ` (`n ≤ 3`) for a point with `f < 0`
/// and `g ≤ 0`. The last coordinate is handled in closed form: along it both
/// functions are scalar quadratics, so only grid indices inside the
/// admissible intervals are evaluated.
pub fn brute_force_oracle(
    f: &QuadraticForm,
    g: &QuadraticForm,
    box_radius: f64,
    grid_step: f64,
) -> Result<OracleVerdict> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.n() });
    }
    if n > 3 {
        return Err(Error::DimensionTooLarge(n));
    }
    if !(grid_step > 0.0) || !(box_radius >= 0.0) {
        return Err(Error::InvalidArgument("grid step must be positive".into()));
    }
    let count = (2.0 * box_radius / grid_step).round() as i64;
    let coord = |i: i64| -box_radius + i as f64 * grid_step;
    let last = n - 1;
    let mut unit = vec![0.0; n];
    unit[last] = 1.0;

    let mut prefix = vec![0i64; last];
    loop {
        let mut base: Vec<f64> = prefix.iter().map(|&i| coord(i)).collect();
        base.push(0.0);
        let [fa, fb, fc] = f.along(&base, &unit);
        let [ga, gb, gc] = g.along(&base, &unit);
        let admissible = intersect(
            &intersect(
                &sublevel_intervals(fa, fb, fc, true),
                &sublevel_intervals(ga, gb, gc, false),
            ),
            &[(-box_radius, box_radius)],
        );
        for (lo, hi) in admissible {
            let i_lo = (((lo + box_radius) / grid_step) - 1e-9).ceil().max(0.0) as i64;
            let i_hi = (((hi + box_radius) / grid_step) + 1e-9).floor().min(count as f64) as i64;
            if i_lo > i_hi + 1 {
                continue;
            }
            let mid = (i_lo + i_hi) / 2;
            for i in [i_lo - 1, i_lo, i_lo + 1, mid, i_hi - 1, i_hi, i_hi + 1] {
                if i < 0 || i > count {
                    continue;
                }
                base[last] = coord(i);
                if f.eval(&base) < 0.0 && g.eval(&base) <= 0.0 {
                    return Ok(OracleVerdict::Found(base));
                }
            }
        }

        // odometer over the first n-1 coordinates
        let mut k = 0;
        loop {
            if k == last {
                return Ok(OracleVerdict::NoneOnGrid);
            }
            prefix[k] += 1;
            if prefix[k] <= count {
                break;
            }
            prefix[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallmat::SymMatrix;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn form1(a: f64, b: f64, c: f64) -> QuadraticForm {
        QuadraticForm::new(SymMatrix::diag(&[a]), vec![b], c).unwrap()
    }

    #[test]
    fn slater_examples() {
        assert!(slater_check(&form1(0.0, 1.0, 0.0), &[-1.0], 1e-10).unwrap());
        assert!(!slater_check(&form1(1.0, 0.0, 0.0), &[0.7], 1e-10).unwrap());
        assert!(slater_check(&form1(1.0, 0.0, -1.0), &[0.0], 1e-10).unwrap());
    }

    #[test]
    fn dual_value_examples() {
        let t = tol();
        let (f, g) = (form1(1.0, 0.0, 0.0), form1(0.0, 1.0, 0.0));
        assert_eq!(dual_value(&f, &g, 0.0, &t).unwrap(), 0.0);
        assert!((dual_value(&f, &g, 2.0, &t).unwrap() + 1.0).abs() < 1e-15);
        let v = dual_value(&form1(-1.0, 0.0, 0.0), &form1(1.0, 0.0, 0.0), 0.5, &t).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        assert!(dual_value(&f, &g, -1.0, &t).is_err());
    }

    #[test]
    fn decide_multiplier_zero() {
        let v = decide(
            &form1(1.0, 0.0, 0.0),
            &form1(0.0, 1.0, -1.0),
            &[0.0],
            &SearchConfig::default(),
            &tol(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::MultiplierFound);
        assert_eq!(v.lambda, 0.0);
    }

    #[test]
    fn decide_counterexample() {
        let v = decide(
            &form1(1.0, 0.0, -1.0),
            &form1(0.0, 1.0, 0.5),
            &[-1.0],
            &SearchConfig::default(),
            &tol(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::CounterexampleFound);
        let x = v.x_witness.clone().unwrap();
        assert!(x[0] * x[0] - 1.0 < -1e-10 && x[0] + 0.5 <= SearchConfig::default().feas_tol, "{x:?}");
    }

    #[test]
    fn decide_tight_multiplier() {
        let (f, g) = (form1(0.0, -2.0, 2.0), form1(1.0, 0.0, -1.0));
        let v = decide(&f, &g, &[0.0], &SearchConfig::default(), &tol()).unwrap();
        assert_eq!(v.outcome, Outcome::MultiplierFound);
        assert!((v.lambda - 1.0).abs() <= 1e-9, "λ = {}", v.lambda);
        assert!(dual_value(&f, &g, v.lambda, &tol()).unwrap() >= -1e-7);
    }

    #[test]
    fn decide_requires_slater_point() {
        let r = decide(
            &form1(0.0, 1.0, 0.0),
            &form1(1.0, 0.0, 0.0),
            &[0.3],
            &SearchConfig::default(),
            &tol(),
        );
        assert!(matches!(r, Err(Error::SlaterViolated { .. })));
    }

    #[test]
    fn decide_unbounded_far_away() {
        // f = -x² + 100 only goes negative beyond |x| = 10; g = -x - 1 keeps x ≥ -1
        let v = decide(
            &form1(-1.0, 0.0, 100.0),
            &form1(0.0, -1.0, -1.0),
            &[0.0],
            &SearchConfig::default(),
            &tol(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::CounterexampleFound);
    }

    #[test]
    fn oracle_examples() {
        let o = brute_force_oracle(&form1(1.0, 0.0, 0.0), &form1(0.0, 1.0, 0.0), 10.0, 0.01).unwrap();
        assert_eq!(o, OracleVerdict::NoneOnGrid);
        let OracleVerdict::Found(x) =
            brute_force_oracle(&form1(1.0, 0.0, -1.0), &form1(0.0, 1.0, 0.0), 10.0, 0.01).unwrap()
        else {
            panic!()
        };
        assert!(x[0] * x[0] - 1.0 < 0.0 && x[0] <= 0.0);
        let o = brute_force_oracle(&form1(0.0, -2.0, 2.0), &form1(1.0, 0.0, -1.0), 10.0, 0.01).unwrap();
        assert_eq!(o, OracleVerdict::NoneOnGrid);
        let big = QuadraticForm::new(SymMatrix::identity(4), vec![0.0; 4], 0.0).unwrap();
        assert!(matches!(
            brute_force_oracle(&big, &big, 1.0, 0.1),
            Err(Error::DimensionTooLarge(4))
        ));
    }

    #[test]
    fn oracle_matches_naive_scan() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let n = rng.gen_range(1..=2);
            let rf = |rng: &mut ChaCha8Rng| {
                let raw: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                QuadraticForm::new(
                    SymMatrix::from_row_major(n, &raw).unwrap(),
                    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                    rng.gen_range(-2.0..2.0),
                )
                .unwrap()
            };
            let (f, g) = (rf(&mut rng), rf(&mut rng));
            let step = 0.25;
            let fast = brute_force_oracle(&f, &g, 3.0, step).unwrap();
            let count = 24;
            let mut naive = false;
            let mut idx = vec![0usize; n];
            'scan: loop {
                let x: Vec<f64> = idx.iter().map(|&i| -3.0 + i as f64 * step).collect();
                if f.eval(&x) < 0.0 && g.eval(&x) <= 0.0 {
                    naive = true;
                    break 'scan;
                }
                let mut k = 0;
                loop {
                    if k == n {
                        break 'scan;
                    }
                    idx[k] += 1;
                    if idx[k] <= count {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
            assert_eq!(matches!(fast, OracleVerdict::Found(_)), naive);
        }
    }

    #[test]
    fn sublevel_sets() {
        assert_eq!(sublevel_intervals(1.0, 0.0, -1.0, false), vec![(-1.0, 1.0)]);
        assert_eq!(
            sublevel_intervals(-1.0, 0.0, 1.0, false),
            vec![(f64::NEG_INFINITY, -1.0), (1.0, f64::INFINITY)]
        );
        assert!(sublevel_intervals(1.0, 0.0, 1.0, false).is_empty());
        assert_eq!(sublevel_intervals(0.0, 2.0, -2.0, true), vec![(f64::NEG_INFINITY, 1.0)]);
        assert!(sublevel_intervals(0.0, 0.0, 0.0, true).is_empty());
    }
}
