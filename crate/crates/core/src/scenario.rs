//! Scenario files: one TOML document describing a full synthesis problem.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::abstraction::{one_step_reach, AbstractionParams, Workspace};
use crate::belief::{BeliefState, InputSet, LinearSystem, NoiseModel, PolyTerm};
use crate::error::{Error, Result};
use crate::fsearch::SearchParams;
use crate::linalg;
use crate::logic::{Formula, FormulaParser, Predicate};
use crate::scalar::Scalar;

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

/// A validated problem instance.
#[derive(Debug, Clone)]
pub struct Scenario<T: Scalar> {
    pub name: String,
    pub system: LinearSystem<T>,
    pub initial: BeliefState<T>,
    pub workspace: Workspace<T>,
    pub cov_max: DMatrix<T>,
    /// Link cells within one-step reach in the abstraction.
    pub reach_inflation: bool,
    /// Named atoms in declaration order.
    pub atoms: Vec<(String, Predicate<T>)>,
    pub spec_text: String,
    pub formula: Formula<T>,
    pub params: SearchParams<T>,
    pub k_max: usize,
    pub seed: u64,
}

impl<T: Scalar> Scenario<T> {
    pub fn abstraction_params(&self) -> AbstractionParams<T> {
        AbstractionParams {
            cov_max: self.cov_max.clone(),
            workspace: self.workspace.clone(),
            reach: if self.reach_inflation {
                one_step_reach(&self.system, &self.workspace)
            } else {
                None
            },
        }
    }

    pub fn atom(&self, name: &str) -> Option<&Predicate<T>> {
        self.atoms.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    format_version: u32,
    name: Option<String>,
    seed: Option<u64>,
    spec: String,
    system: RawSystem,
    initial: RawInitial,
    workspace: RawWorkspace,
    abstraction: RawAbstraction,
    atoms: toml::Table,
    #[serde(default)]
    search: RawSearch,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    noise: RawNoise,
    input: RawInput,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawNoise {
    Constant {
        #[serde(rename = "V")]
        v: Vec<Vec<f64>>,
    },
    MinOfConstAndPoly {
        var_const: f64,
        var_min: f64,
        terms: Vec<Vec<RawTerm>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    /// 1-based state coordinate.
    coord: usize,
    #[serde(default)]
    shift: f64,
    power: u32,
    #[serde(default = "one")]
    coeff: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    lo: Option<Vec<f64>>,
    hi: Option<Vec<f64>>,
    #[serde(rename = "H")]
    h: Option<Vec<Vec<f64>>>,
    c: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkspace {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAbstraction {
    cov_max: Vec<Vec<f64>>,
    #[serde(default = "yes")]
    reach_inflation: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    k_max: Option<usize>,
    iterations: Option<usize>,
    delta_near: Option<f64>,
    delta_drain: Option<f64>,
    w_cov: Option<f64>,
    t_min: Option<usize>,
    t_max: Option<usize>,
    q_mean: Option<f64>,
    q_cov: Option<f64>,
    qf_mean: Option<f64>,
    qf_cov: Option<f64>,
    r: Option<f64>,
    tol_loop: Option<f64>,
    tol_psd: Option<f64>,
    settle_steps: Option<usize>,
    max_hold_cycles: Option<usize>,
    early_exit: Option<bool>,
}

fn matrix<T: Scalar>(field: &str, rows: &[Vec<f64>], shape: Option<(usize, usize)>) -> Result<DMatrix<T>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::scenario(field, "rows have different lengths"));
    }
    if let Some((er, ec)) = shape {
        if (r, c) != (er, ec) {
            return Err(Error::scenario(field, format!("expected {er}x{ec}, found {r}x{c}")));
        }
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::scenario(field, "non-finite entry"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| T::of(rows[i][j])))
}

fn vector<T: Scalar>(field: &str, v: &[f64], len: usize) -> Result<DVector<T>> {
    if v.len() != len {
        return Err(Error::scenario(
            field,
            format!("expected length {len}, found {}", v.len()),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::scenario(field, "non-finite entry"));
    }
    Ok(DVector::from_iterator(len, v.iter().map(|&x| T::of(x))))
}

fn psd<T: Scalar>(field: &str, m: &DMatrix<T>) -> Result<()> {
    linalg::check_psd(m, field).map_err(|e| Error::scenario(field, e.to_string()))
}

/// Reads and validates a scenario file.
pub fn load_scenario<T: Scalar>(path: impl AsRef<Path>) -> Result<Scenario<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario")
        .to_string();
    parse_scenario(&text, &stem)
}

/// Parses and validates scenario text; `default_name` is used when the
/// file has no `name`.
pub fn parse_scenario<T: Scalar>(text: &str, default_name: &str) -> Result<Scenario<T>> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        Error::scenario("<document>", msg)
    })?;
    if raw.format_version != SCENARIO_FORMAT_VERSION {
        return Err(Error::scenario(
            "format_version",
            format!(
                "unsupported version {}, expected {SCENARIO_FORMAT_VERSION}",
                raw.format_version
            ),
        ));
    }
    let s = &raw.system;
    let a: DMatrix<T> = matrix("system.A", &s.a, None)?;
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::scenario("system.A", "must be square and non-empty"));
    }
    let b: DMatrix<T> = matrix("system.B", &s.b, None)?;
    if b.nrows() != n || b.ncols() == 0 {
        return Err(Error::scenario(
            "system.B",
            format!("expected {n} rows and at least one column"),
        ));
    }
    let m = b.ncols();
    let c: DMatrix<T> = matrix("system.C", &s.c, None)?;
    if c.ncols() != n && c.nrows() != 0 {
        return Err(Error::scenario("system.C", format!("expected {n} columns")));
    }
    let p = c.nrows();
    let c = if p == 0 { DMatrix::zeros(0, n) } else { c };
    let w: DMatrix<T> = matrix("system.W", &s.w, Some((n, n)))?;
    psd("system.W", &w)?;
    let noise = match &s.noise {
        RawNoise::Constant { v } => {
            let v: DMatrix<T> = matrix("system.noise.V", v, Some((p, p)))?;
            psd("system.noise.V", &v)?;
            NoiseModel::Constant(v)
        }
        RawNoise::MinOfConstAndPoly {
            var_const,
            var_min,
            terms,
        } => {
            if terms.len() != p {
                return Err(Error::scenario(
                    "system.noise.terms",
                    format!("expected {p} rows, one per output"),
                ));
            }
            let mut rows = Vec::with_capacity(p);
            for row in terms {
                let mut out = Vec::new();
                for t in row {
                    if t.coord == 0 || t.coord > n {
                        return Err(Error::scenario(
                            "system.noise.terms",
                            format!("coord {} outside 1..={n}", t.coord),
                        ));
                    }
                    out.push(PolyTerm {
                        index: t.coord - 1,
                        shift: T::of(t.shift),
                        power: t.power,
                        coeff: T::of(t.coeff),
                    });
                }
                rows.push(out);
            }
            NoiseModel::MinOfConstAndPoly {
                var_const: T::of(*var_const),
                var_min: T::of(*var_min),
                terms: rows,
            }
        }
    };
    let input = match (&s.input.lo, &s.input.hi, &s.input.h, &s.input.c) {
        (Some(lo), Some(hi), None, None) => {
            let lo: DVector<T> = vector("system.input.lo", lo, m)?;
            let hi: DVector<T> = vector("system.input.hi", hi, m)?;
            InputSet::bounds(lo.as_slice(), hi.as_slice())
        }
        (None, None, Some(h), Some(cu)) => {
            let h: DMatrix<T> = matrix("system.input.H", h, None)?;
            if h.ncols() != m {
                return Err(Error::scenario("system.input.H", format!("expected {m} columns")));
            }
            let cu = vector("system.input.c", cu, h.nrows())?;
            InputSet::new(h, cu)
        }
        _ => return Err(Error::scenario("system.input", "give either lo/hi or H/c")),
    }
    .map_err(|e| Error::scenario("system.input", e.to_string()))?;
    let system = LinearSystem::new(a, b, c, w, noise, input).map_err(|e| {
        let field = match &e {
            Error::NotStabilisable(_) => "system.B",
            Error::InvalidNoise(_) => "system.noise",
            _ => "system",
        };
        Error::scenario(field, e.to_string())
    })?;

    let mean = vector("initial.mean", &raw.initial.mean, n)?;
    let cov = matrix("initial.cov", &raw.initial.cov, Some((n, n)))?;
    psd("initial.cov", &cov)?;
    let initial = BeliefState::new(mean, cov).map_err(|e| Error::scenario("initial.cov", e.to_string()))?;

    let lo = vector("workspace.lo", &raw.workspace.lo, n)?;
    let hi = vector("workspace.hi", &raw.workspace.hi, n)?;
    if (0..n).any(|i| lo[i] >= hi[i]) {
        return Err(Error::scenario("workspace", "every lo must be below hi"));
    }
    let workspace = Workspace { lo, hi };
    if !workspace.contains(&initial.mean) {
        return Err(Error::scenario("initial.mean", "outside the workspace box"));
    }
    let cov_max = matrix("abstraction.cov_max", &raw.abstraction.cov_max, Some((n, n)))?;
    psd("abstraction.cov_max", &cov_max)?;

    let mut atoms = Vec::new();
    let mut atom_map = HashMap::new();
    let plain = FormulaParser::<T>::new(Some(n));
    for (name, value) in &raw.atoms {
        let field = format!("atoms.{name}");
        let text = value
            .as_str()
            .ok_or_else(|| Error::scenario(&field, "expected a predicate string"))?;
        let f = plain.parse(text).map_err(|e| Error::scenario(&field, e.to_string()))?;
        let pred = match f {
            Formula::Atom(a) => a.pred,
            _ => return Err(Error::scenario(&field, "expected a single predicate p[eps](...)")),
        };
        if pred.negated {
            return Err(Error::scenario(&field, "declarations cannot be negated; negate at use"));
        }
        atom_map.insert(name.clone(), pred.clone());
        atoms.push((name.clone(), pred));
    }
    let formula = FormulaParser::new(Some(n))
        .with_atoms(&atom_map)
        .parse(&raw.spec)
        .map_err(|e| Error::scenario("spec", e.to_string()))?;

    let rs = &raw.search;
    let d = SearchParams::<T>::default();
    let f = |v: Option<f64>, dflt: T| v.map(T::of).unwrap_or(dflt);
    let params = SearchParams {
        delta_near: f(rs.delta_near, d.delta_near),
        delta_drain: f(rs.delta_drain, d.delta_drain),
        w_cov: f(rs.w_cov, d.w_cov),
        t_min: rs.t_min.unwrap_or(d.t_min),
        t_max: rs.t_max.unwrap_or(d.t_max),
        q_mean: f(rs.q_mean, d.q_mean),
        q_cov: f(rs.q_cov, d.q_cov),
        qf_mean: f(rs.qf_mean, d.qf_mean),
        qf_cov: f(rs.qf_cov, d.qf_cov),
        r: f(rs.r, d.r),
        iterations: rs.iterations.unwrap_or(d.iterations),
        tol_loop: f(rs.tol_loop, d.tol_loop),
        tol_psd: f(rs.tol_psd, d.tol_psd),
        settle_steps: rs.settle_steps.unwrap_or(d.settle_steps),
        max_hold_cycles: rs.max_hold_cycles.unwrap_or(d.max_hold_cycles),
        early_exit: rs.early_exit.unwrap_or(d.early_exit),
    };
    if params.t_min == 0 || params.t_min > params.t_max {
        return Err(Error::scenario("search.t_min", "need 1 <= t_min <= t_max"));
    }
    if params.iterations == 0 {
        return Err(Error::scenario("search.iterations", "must be at least 1"));
    }
    if params.r.partial_cmp(&T::zero()) != Some(Ordering::Greater) {
        return Err(Error::scenario("search.r", "must be positive"));
    }

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| default_name.to_string()),
        system,
        initial,
        workspace,
        cov_max,
        reach_inflation: raw.abstraction.reach_inflation,
        atoms,
        spec_text: raw.spec,
        formula,
        params,
        k_max: rs.k_max.unwrap_or(8),
        seed: raw.seed.unwrap_or(0),
    })
}
