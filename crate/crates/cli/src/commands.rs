use std::io::Write;
use std::time::Instant;

use hck_core::quadmap::QuadraticMap;
use hck_core::slemma::{self, Outcome};
use hck_core::witness::{
    self, certificate_residual, convexity_probe, dines_probe, Branch, CertificateResidual, ConePoint,
    WitnessCertificate, WitnessTrace,
};
use hck_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::envelope::{CommandEcho, ResultEnvelope, Timing};
use crate::error::{exit, CliError};
use crate::problem::Problem;

/// A loaded problem file with the digest of its bytes.
pub struct Input {
    pub problem: Problem,
    pub digest: String,
}

/// What a command hands back to `main`: the envelope (if any) and the exit
/// code it settled on.
pub struct Report {
    pub envelope: ResultEnvelope,
    pub exit_code: i32,
}

fn envelope(name: &str, args: Value, input: &Input, started: Instant, outcome: Value, trace: Option<Value>) -> ResultEnvelope {
    ResultEnvelope {
        command: CommandEcho {
            name: name.into(),
            args,
        },
        input_digest: input.digest.clone(),
        outcome,
        trace,
        timing: Timing {
            elapsed_seconds: started.elapsed().as_secs_f64(),
        },
        tolerances: input.problem.tolerances.clone(),
        search: input.problem.search.clone(),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

pub fn classify_line(input: &Input, args: Value, xbar: &[f64], ybar: &[f64]) -> Result<Report, CliError> {
    let started = Instant::now();
    let p = &input.problem;
    let xbar = p.check_vector("xbar", xbar)?;
    let ybar = p.check_vector("ybar", ybar)?;
    let img = p.map.classify_line_image(&xbar, &ybar, &p.tolerances)?;
    log::info!("line image is a {:?}", img.kind());
    let outcome = json!({
        "kind": img.kind(),
        "coefficients": img.coeffs,
        "det": img.coeffs.det(),
        "payload": img.shape,
    });
    Ok(Report {
        envelope: envelope("classify-line", args, input, started, outcome, None),
        exit_code: exit::OK,
    })
}

/// The part of a witness envelope that `verify` re-checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessOutcome {
    pub w: Vec2,
    pub x_star: Vec<f64>,
    pub e_star: Vec2,
    pub branch: Branch,
    pub residual: CertificateResidual,
    pub verification: String,
}

pub struct WitnessArgs<'a> {
    pub xu: &'a [f64],
    pub e1: Vec2,
    pub xv: &'a [f64],
    pub e2: Vec2,
    pub alpha: f64,
}

pub fn witness(input: &Input, args: Value, w: WitnessArgs<'_>) -> Result<Report, CliError> {
    let started = Instant::now();
    let p = &input.problem;
    let tol = &p.tolerances;
    if !(w.alpha > 0.0 && w.alpha < 1.0) {
        return Err(CliError::Validation(format!("alpha: {} is outside (0, 1)", w.alpha)));
    }
    let pu = ConePoint::new(&p.map, &p.cone, p.check_vector("xu", w.xu)?, w.e1, tol)
        .map_err(|e| CliError::Validation(format!("e1: {e}")))?;
    let pv = ConePoint::new(&p.map, &p.cone, p.check_vector("xv", w.xv)?, w.e2, tol)
        .map_err(|e| CliError::Validation(format!("e2: {e}")))?;
    let target = [
        w.alpha * pu.value[0] + (1.0 - w.alpha) * pv.value[0],
        w.alpha * pu.value[1] + (1.0 - w.alpha) * pv.value[1],
    ];
    let cert = witness::witness_convex_combination(&p.map, &p.cone, &pu, &pv, w.alpha, tol)?;
    log::info!("witness branch {:?}", cert.branch);
    log::trace!("trace: {:?}", cert.trace);
    let residual = certificate_residual(&p.map, &p.cone, target, &cert)
        .ok_or_else(|| hck_core::Error::InternalNumerics("non-finite certificate".into()))?;
    let passed = residual.passes(tol.cert_tol);
    let outcome = WitnessOutcome {
        w: target,
        x_star: cert.x_star.clone(),
        e_star: cert.e_star,
        branch: cert.branch,
        residual,
        verification: if passed { "pass" } else { "fail" }.into(),
    };
    Ok(Report {
        envelope: envelope("witness", args, input, started, to_value(&outcome), Some(to_value(&cert.trace))),
        exit_code: if passed { exit::OK } else { exit::BREAKDOWN },
    })
}

/// Re-checks a witness envelope against the problem it was computed from.
pub fn verify(input: &Input, args: Value, previous: &ResultEnvelope) -> Result<Report, CliError> {
    let started = Instant::now();
    if previous.command.name != "witness" {
        return Err(CliError::Validation(format!(
            "command: only witness envelopes can be verified, got {:?}",
            previous.command.name
        )));
    }
    if previous.input_digest != input.digest {
        return Err(CliError::Validation(format!(
            "input_digest: envelope was computed from {}, problem file is {}",
            previous.input_digest, input.digest
        )));
    }
    let stored: WitnessOutcome = serde_json::from_value(previous.outcome.clone())
        .map_err(|e| CliError::Validation(format!("outcome: {e}")))?;
    let trace: WitnessTrace = match &previous.trace {
        Some(t) => serde_json::from_value(t.clone()).map_err(|e| CliError::Validation(format!("trace: {e}")))?,
        None => WitnessTrace::default(),
    };
    let cert = WitnessCertificate {
        x_star: input.problem.check_vector("outcome.x_star", &stored.x_star)?,
        e_star: stored.e_star,
        branch: stored.branch,
        trace,
    };
    let p = &input.problem;
    let recomputed = certificate_residual(&p.map, &p.cone, stored.w, &cert);
    let (status, drift) = match recomputed {
        Some(r) => {
            let drift = (r.value - stored.residual.value)
                .abs()
                .max((r.cone - stored.residual.cone).abs());
            let ok = r.passes(previous.tolerances.cert_tol) && drift <= 1e-12;
            (if ok { "pass" } else { "fail" }, drift)
        }
        None => ("fail", f64::INFINITY),
    };
    let outcome = json!({
        "status": status,
        "drift": drift,
        "residual": recomputed,
        "branch": stored.branch,
    });
    Ok(Report {
        envelope: envelope("verify", args, input, started, outcome, None),
        exit_code: if status == "pass" { exit::OK } else { exit::BREAKDOWN },
    })
}

pub fn slemma(input: &Input, args: Value, x_star: &[f64]) -> Result<Report, CliError> {
    let started = Instant::now();
    let p = &input.problem;
    let x_star = p.check_vector("x_star", x_star)?;
    let (map, z_star) = match &p.manifold {
        None => (p.map.clone(), x_star.clone()),
        Some(m) => {
            let z = m.project(&x_star);
            let back = m.lift(&z);
            let off = back
                .iter()
                .zip(&x_star)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let scale = 1.0 + x_star.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if off > 1e-9 * scale {
                return Err(CliError::Validation(format!(
                    "x_star: lies {off:e} away from the manifold"
                )));
            }
            (p.map.restrict_to_manifold(m)?, z)
        }
    };
    let v = slemma::decide(&map.f, &map.g, &z_star, &p.search, &p.tolerances)?;
    log::info!("S-lemma verdict {:?} (λ = {})", v.outcome, v.lambda);
    let x_witness = v
        .x_witness
        .as_ref()
        .map(|z| p.manifold.as_ref().map_or_else(|| z.clone(), |m| m.lift(z)));
    let outcome = json!({
        "verdict": v.outcome,
        "lambda": (v.outcome == Outcome::MultiplierFound).then_some(v.lambda),
        "dual_maximiser": v.lambda,
        "dual_value": v.dual_value,
        "x_witness": x_witness,
        "witness_values": x_witness.as_ref().map(|x| [p.map.f.eval(x), p.map.g.eval(x)]),
        "diagnostics": v.diagnostics,
    });
    let exit_code = match v.outcome {
        Outcome::Undecided => exit::UNDECIDED,
        _ => exit::OK,
    };
    Ok(Report {
        envelope: envelope("slemma", args, input, started, outcome, None),
        exit_code,
    })
}

pub struct SampleArgs {
    pub count: usize,
    pub seed: u64,
    pub box_radius: f64,
    pub radius: f64,
}

/// Writes `count` lines `v1 v2` with `F(x) + e`, `x` uniform in the box (in
/// manifold coordinates when a manifold is given) and `e` drawn from the cone.
pub fn sample(problem: &Problem, a: &SampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.count == 0 {
        return Err(CliError::Validation("count: must be at least 1".into()));
    }
    for (name, v) in [("box", a.box_radius), ("radius", a.radius)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Validation(format!("{name}: {v} must be finite and nonnegative")));
        }
    }
    let (map, dim): (&QuadraticMap, usize) = (&problem.map, problem.n());
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let io = |e| CliError::Io {
        path: "output".into(),
        source: e,
    };
    let param_dim = problem.manifold.as_ref().map_or(dim, |m| m.param_dim());
    for _ in 0..a.count {
        let z: Vec<f64> = (0..param_dim)
            .map(|_| if a.box_radius > 0.0 { rng.gen_range(-a.box_radius..=a.box_radius) } else { 0.0 })
            .collect();
        let x = problem.manifold.as_ref().map_or(z.clone(), |m| m.lift(&z));
        let e = problem.cone.sample(a.radius, &mut rng);
        let v = map.eval(&x)?;
        writeln!(out, "{} {}", v[0] + e[0], v[1] + e[1]).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub struct ConvexityArgs {
    pub trials: usize,
    pub seed: u64,
    pub box_radius: f64,
    pub rho: Option<f64>,
}

pub fn verify_convexity(input: &Input, args: Value, a: &ConvexityArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let p = &input.problem;
    if a.trials == 0 {
        return Err(CliError::Validation("trials: must be at least 1".into()));
    }
    if !(a.box_radius > 0.0 && a.box_radius.is_finite()) {
        return Err(CliError::Validation(format!("box: {} must be positive", a.box_radius)));
    }
    let (outcome, failures) = match (a.rho, &p.manifold) {
        (Some(_), None) => {
            return Err(CliError::Validation(
                "manifold: --rho needs a manifold in the problem file".into(),
            ))
        }
        (Some(rho), Some(m)) => {
            let d = dines_probe(&p.map, m, rho, a.trials, a.seed, a.box_radius, &p.tolerances, &p.search)?;
            if !d.rho_validated {
                log::warn!("rho = {rho} is not below the dual bound {:?}", d.mu_estimate);
            }
            let failures = d.report.failures.len();
            let mut v = to_value(&d);
            v["verdict"] = json!(d.report.verdict());
            (v, failures)
        }
        (None, manifold) => {
            let restricted = manifold.as_ref().map(|m| p.map.restrict_to_manifold(m)).transpose()?;
            let map = restricted.as_ref().unwrap_or(&p.map);
            let r = convexity_probe(map, &p.cone, a.trials, a.seed, a.box_radius, &p.tolerances)?;
            let failures = r.failures.len();
            let mut v = to_value(&r);
            v["verdict"] = json!(r.verdict());
            (v, failures)
        }
    };
    log::info!("{failures} failures in {} trials", a.trials);
    Ok(Report {
        envelope: envelope("verify-convexity", args, input, started, outcome, None),
        exit_code: if failures == 0 { exit::OK } else { exit::CONVEXITY_FAILURE },
    })
}
