//! The JSON problem file: a quadratic map `F = (f, g)`, an optional cone
//! and affine manifold, and tolerance overrides.

use hck_core::cone2d::{Cone2, ConeGenerators};
use hck_core::quadmap::{AffineManifold, QuadraticForm, QuadraticMap};
use hck_core::smallmat::{RectMatrix, SymMatrix};
use hck_core::{SearchConfig, ToleranceConfig};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";
const SYMMETRY_TOL: f64 = 1e-12;

/// A matrix either as nested rows or as one flat array.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ManifoldInput {
    Constraints {
        #[serde(rename = "H")]
        h: MatrixInput,
        d: Vec<f64>,
    },
    Parametric {
        x0: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    schema_version: String,
    n: usize,
    #[serde(rename = "P")]
    p_mat: MatrixInput,
    #[serde(rename = "Q")]
    q_mat: MatrixInput,
    p: Vec<f64>,
    q: Vec<f64>,
    p0: f64,
    q0: f64,
    #[serde(default)]
    cone: Option<ConeGenerators>,
    #[serde(default)]
    manifold: Option<Value>,
    #[serde(default)]
    tolerances: Option<Value>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub map: QuadraticMap,
    pub cone: Cone2,
    pub manifold: Option<AffineManifold>,
    pub tolerances: ToleranceConfig,
    pub search: SearchConfig,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

/// Accepts full `n×n` rows, upper-triangular rows (row `i` holding columns
/// `i..n`), a flat row-major `n²` array, or a flat packed upper triangle of
/// length `n(n+1)/2`.
fn symmetric(field: &str, input: &MatrixInput, n: usize) -> Result<SymMatrix, CliError> {
    let mut full = vec![0.0; n * n];
    let mirror = |full: &mut Vec<f64>, upper: &mut dyn Iterator<Item = f64>| {
        for i in 0..n {
            for j in i..n {
                let v = upper.next().unwrap_or(0.0);
                full[i * n + j] = v;
                full[j * n + i] = v;
            }
        }
    };
    match input {
        MatrixInput::Rows(rows) => {
            if rows.len() != n {
                return Err(invalid(field, format!("expected {n} rows, got {}", rows.len())));
            }
            if rows.iter().all(|r| r.len() == n) {
                full = rows.concat();
            } else if rows.iter().enumerate().all(|(i, r)| r.len() == n - i) {
                mirror(&mut full, &mut rows.iter().flatten().copied());
            } else {
                let lens: Vec<usize> = rows.iter().map(Vec::len).collect();
                return Err(invalid(
                    field,
                    format!("row lengths {lens:?} are neither {n} each nor an upper triangle"),
                ));
            }
        }
        MatrixInput::Flat(v) => {
            if v.len() == n * n {
                full = v.clone();
            } else if v.len() == n * (n + 1) / 2 {
                mirror(&mut full, &mut v.iter().copied());
            } else {
                return Err(invalid(
                    field,
                    format!(
                        "flat array of length {} fits neither n² = {} nor n(n+1)/2 = {}",
                        v.len(),
                        n * n,
                        n * (n + 1) / 2
                    ),
                ));
            }
        }
    }
    if let Some(k) = full.iter().position(|x| !x.is_finite()) {
        return Err(invalid(field, format!("entry ({}, {}) is not finite", k / n, k % n)));
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (full[i * n + j], full[j * n + i]);
            if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                return Err(invalid(
                    field,
                    format!("not symmetric: entry ({i}, {j}) = {a} but ({j}, {i}) = {b}"),
                ));
            }
        }
    }
    SymMatrix::from_row_major(n, &full).map_err(|e| invalid(field, e))
}

fn vector(field: &str, v: &[f64], n: usize) -> Result<Vec<f64>, CliError> {
    if v.len() != n {
        return Err(invalid(field, format!("expected length {n}, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(v.to_vec())
}

fn rect(field: &str, input: &MatrixInput, cols: usize) -> Result<RectMatrix, CliError> {
    let (rows, data) = match input {
        MatrixInput::Rows(rows) => {
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
                return Err(invalid(field, format!("row {i} has length {}, expected {cols}", r.len())));
            }
            (rows.len(), rows.concat())
        }
        MatrixInput::Flat(v) => {
            if cols == 0 || v.len() % cols != 0 {
                return Err(invalid(field, format!("flat length {} is not a multiple of n = {cols}", v.len())));
            }
            (v.len() / cols, v.clone())
        }
    };
    if data.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    RectMatrix::from_row_major(rows, cols, data).map_err(|e| invalid(field, e))
}

fn manifold(value: Value, n: usize, tol: &ToleranceConfig) -> Result<AffineManifold, CliError> {
    let input: ManifoldInput = serde_json::from_value(value)
        .map_err(|_| invalid("manifold", "expected either {\"H\", \"d\"} or {\"x0\", \"basis\"}"))?;
    match input {
        ManifoldInput::Constraints { h, d } => {
            let h = rect("manifold.H", &h, n)?;
            let d = vector("manifold.d", &d, h.rows())?;
            AffineManifold::from_linear_system(&h, &d, tol.rank_tol, tol).map_err(|e| invalid("manifold", e))
        }
        ManifoldInput::Parametric { x0, basis } => {
            let x0 = vector("manifold.x0", &x0, n)?;
            for (j, col) in basis.iter().enumerate() {
                vector(&format!("manifold.basis[{j}]"), col, n)?;
            }
            let k = RectMatrix::from_columns(n, &basis).map_err(|e| invalid("manifold.basis", e))?;
            AffineManifold::new(x0, k).map_err(|e| invalid("manifold.basis", e))
        }
    }
}

/// Overlays the keys of `patch` onto `base`. The nested `search` object
/// overrides [`SearchConfig`]; every other key overrides [`ToleranceConfig`].
pub fn apply_overrides(
    field: &str,
    patch: &Value,
    tol: &mut ToleranceConfig,
    search: &mut SearchConfig,
) -> Result<(), CliError> {
    let Value::Object(patch) = patch else {
        return Err(invalid(field, "expected an object"));
    };
    let mut tol_patch = patch.clone();
    if let Some(s) = tol_patch.remove("search") {
        *search = merged(&format!("{field}.search"), search, &s)?;
    }
    *tol = merged(field, tol, &Value::Object(tol_patch))?;
    Ok(())
}

fn merged<T>(field: &str, base: &T, patch: &Value) -> Result<T, CliError>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let Value::Object(patch) = patch else {
        return Err(invalid(field, "expected an object"));
    };
    let mut obj: Map<String, Value> = match serde_json::to_value(base) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("configs serialize to objects"),
    };
    obj.extend(patch.clone());
    serde_json::from_value(Value::Object(obj)).map_err(|e| invalid(field, e))
}

impl Problem {
    /// Parses and validates a problem file. `overrides` is applied after the
    /// file's own `tolerances`.
    pub fn parse(text: &str, overrides: Option<&Value>) -> Result<Self, CliError> {
        let raw: RawProblem =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("problem file: {e}")))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {:?}, expected {SCHEMA_VERSION:?}", raw.schema_version),
            ));
        }
        let n = raw.n;
        if n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        let mut tolerances = ToleranceConfig::default();
        let mut search = SearchConfig::default();
        if let Some(t) = &raw.tolerances {
            apply_overrides("tolerances", t, &mut tolerances, &mut search)?;
        }
        if let Some(t) = overrides {
            apply_overrides("--tol-config", t, &mut tolerances, &mut search)?;
        }

        let big_p = symmetric("P", &raw.p_mat, n)?;
        let big_q = symmetric("Q", &raw.q_mat, n)?;
        let p = vector("p", &raw.p, n)?;
        let q = vector("q", &raw.q, n)?;
        for (name, v) in [("p0", raw.p0), ("q0", raw.q0)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        let f = QuadraticForm::new(big_p, p, raw.p0).map_err(|e| invalid("P", e))?;
        let g = QuadraticForm::new(big_q, q, raw.q0).map_err(|e| invalid("Q", e))?;
        let map = QuadraticMap::new(f, g).map_err(|e| invalid("Q", e))?;

        let cone = match raw.cone {
            None => Cone2::nonneg_orthant(),
            Some(gens) => Cone2::with_tolerance(gens.b, gens.c, tolerances.indep_tol)
                .map_err(|e| invalid("cone", format!("{e}; generators must be linearly independent")))?,
        };
        let manifold = raw.manifold.map(|m| manifold(m, n, &tolerances)).transpose()?;
        Ok(Self {
            map,
            cone,
            manifold,
            tolerances,
            search,
        })
    }

    pub fn n(&self) -> usize {
        self.map.n()
    }

    pub fn check_vector(&self, field: &str, v: &[f64]) -> Result<Vec<f64>, CliError> {
        vector(field, v, self.n())
    }
}
