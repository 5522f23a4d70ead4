//! Plan and report serialization.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::belief::BeliefState;
use crate::bmc::LassoPath;
use crate::error::{Error, Result};
use crate::fsearch::Plan;
use crate::scalar::Scalar;
use crate::synth::{Infeasibility, SynthesisOutcome, SynthesisResult, SynthesisStats};

pub const PLAN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefRecord {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// On-disk form of a plan and the lasso it realizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub format_version: u32,
    pub scenario: String,
    pub beliefs: Vec<BeliefRecord>,
    pub controls: Vec<Vec<f64>>,
    pub index_map: Vec<usize>,
    pub loop_entry: usize,
    pub lasso: LassoPath,
    pub stats: Option<SynthesisStats>,
}

fn vec_f64<T: Scalar>(v: &DVector<T>) -> Vec<f64> {
    v.iter().map(|x| x.f64()).collect()
}

fn mat_f64<T: Scalar>(m: &DMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].f64()).collect())
        .collect()
}

fn to_vec<T: Scalar>(v: &[f64]) -> DVector<T> {
    DVector::from_iterator(v.len(), v.iter().map(|&x| T::of(x)))
}

impl PlanFile {
    pub fn new<T: Scalar>(plan: &Plan<T>, lasso: &LassoPath, scenario: &str, stats: Option<SynthesisStats>) -> Self {
        PlanFile {
            format_version: PLAN_FORMAT_VERSION,
            scenario: scenario.to_string(),
            beliefs: plan
                .beliefs
                .iter()
                .map(|b| BeliefRecord {
                    mean: vec_f64(&b.mean),
                    cov: mat_f64(&b.cov),
                })
                .collect(),
            controls: plan.controls.iter().map(vec_f64).collect(),
            index_map: plan.index_map.clone(),
            loop_entry: plan.loop_entry,
            lasso: lasso.clone(),
            stats,
        }
    }

    pub fn plan<T: Scalar>(&self) -> Result<Plan<T>> {
        if self.format_version != PLAN_FORMAT_VERSION {
            return Err(Error::Io(format!(
                "unsupported plan format_version {}",
                self.format_version
            )));
        }
        let beliefs = self
            .beliefs
            .iter()
            .map(|r| {
                let n = r.mean.len();
                if r.cov.len() != n || r.cov.iter().any(|row| row.len() != n) {
                    return Err(Error::Io(format!("belief covariance must be {n}x{n}")));
                }
                Ok(BeliefState::from_parts(
                    to_vec(&r.mean),
                    DMatrix::from_fn(n, n, |i, j| T::of(r.cov[i][j])),
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Plan {
            beliefs,
            controls: self.controls.iter().map(|u| to_vec(u)).collect(),
            index_map: self.index_map.clone(),
            loop_entry: self.loop_entry,
        })
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<D: DeserializeOwned>(path: impl AsRef<Path>) -> Result<D> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// One row per step: `t`, means, variances, upper covariances, controls
/// (blank on the last row), lasso position and loop flag.
pub fn plan_to_csv<T: Scalar>(plan: &Plan<T>) -> Result<String> {
    let n = plan.beliefs.first().map_or(0, |b| b.dim());
    let m = plan.controls.first().map_or(0, |u| u.len());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("mu_{i}")));
    header.extend((0..n).map(|i| format!("var_{i}")));
    for i in 0..n {
        header.extend((i + 1..n).map(|j| format!("cov_{i}_{j}")));
    }
    header.extend((0..m).map(|j| format!("u_{j}")));
    header.push("region".into());
    header.push("loop".into());
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for (t, b) in plan.beliefs.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(b.mean.iter().map(|x| x.f64().to_string()));
        row.extend((0..n).map(|i| b.cov[(i, i)].f64().to_string()));
        for i in 0..n {
            row.extend((i + 1..n).map(|j| b.cov[(i, j)].f64().to_string()));
        }
        match plan.controls.get(t) {
            Some(u) => row.extend(u.iter().map(|x| x.f64().to_string())),
            None => row.extend((0..m).map(|_| String::new())),
        }
        row.push(plan.index_map[t].to_string());
        row.push(u8::from(t >= plan.loop_entry).to_string());
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn csv_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Io(format!("plan csv line {line}: {msg}"))
}

/// Inverse of [`plan_to_csv`].
pub fn plan_from_csv<T: Scalar>(text: &str) -> Result<Plan<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| csv_err(1, e))?.clone();
    let n = header.iter().filter(|h| h.starts_with("mu_")).count();
    let m = header.iter().filter(|h| h.starts_with("u_")).count();
    let width = 1 + 2 * n + n * n.saturating_sub(1) / 2 + m + 2;
    if header.len() != width {
        return Err(csv_err(1, format!("expected {width} columns")));
    }
    let rows = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| csv_err(0, e))?;
    let mut plan = Plan {
        beliefs: Vec::new(),
        controls: Vec::new(),
        index_map: Vec::new(),
        loop_entry: 0,
    };
    let mut entry = None;
    for (r, row) in rows.iter().enumerate() {
        let line = r + 2;
        let num = |s: &str| s.parse::<f64>().map(T::of).map_err(|e| csv_err(line, e));
        let mean = DVector::from_iterator(n, (1..1 + n).map(|c| num(&row[c])).collect::<Result<Vec<_>>>()?);
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            cov[(i, i)] = num(&row[1 + n + i])?;
        }
        let mut col = 1 + 2 * n;
        for i in 0..n {
            for j in i + 1..n {
                let v = num(&row[col])?;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
                col += 1;
            }
        }
        plan.beliefs.push(BeliefState::from_parts(mean, cov));
        if r + 1 < rows.len() {
            let u = (col..col + m).map(|c| num(&row[c])).collect::<Result<Vec<_>>>()?;
            plan.controls.push(DVector::from_vec(u));
        }
        col += m;
        plan.index_map.push(row[col].parse().map_err(|e| csv_err(line, e))?);
        if &row[col + 1] == "1" && entry.is_none() {
            entry = Some(r);
        }
    }
    if plan.beliefs.is_empty() {
        return Err(csv_err(2, "no rows"));
    }
    plan.loop_entry = entry.ok_or_else(|| csv_err(2, "no loop row"))?;
    Ok(plan)
}

/// Serializable summary of a synthesis run, without the plan itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub format_version: u32,
    pub scenario: String,
    pub outcome: String,
    pub horizon: Option<usize>,
    pub lasso: Option<LassoPath>,
    pub stats: SynthesisStats,
    pub wall_time_s: f64,
}

impl ResultSummary {
    pub fn new<T: Scalar>(result: &SynthesisResult<T>, scenario: &str) -> Self {
        let (outcome, horizon, lasso) = match &result.outcome {
            SynthesisOutcome::Plan { plan, lasso } => ("plan", Some(plan.horizon()), Some(lasso.clone())),
            SynthesisOutcome::Infeasible(Infeasibility::NoLasso) => ("infeasible_no_lasso", None, None),
            SynthesisOutcome::Infeasible(Infeasibility::BudgetExhausted) => ("infeasible_budget_exhausted", None, None),
        };
        ResultSummary {
            format_version: PLAN_FORMAT_VERSION,
            scenario: scenario.to_string(),
            outcome: outcome.to_string(),
            horizon,
            lasso,
            stats: result.stats.clone(),
            wall_time_s: result.wall_time.as_secs_f64(),
        }
    }
}
