//! Policy experiments and parameter sweeps with steady-state metrics.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::RunConfig;
use crate::exploitation::{find_steady_state, SteadyStateError};
use crate::model::{ModelSpec, VarKind, VariableId};

/// Stock clamped by [`Policy::WageFloor`].
pub const WAGE_STOCK: &str = "offered_salary";

/// Steady-state tolerance and trailing window used by scenario runs.
pub const SCENARIO_TOL: f64 = 1e-6;
pub const SCENARIO_WINDOW: f64 = 50.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    /// Keeps the offered salary at or above `w_min` from time `from`.
    WageFloor { w_min: f64, from: f64 },
    ParamOverride { id: VariableId, value: f64, from: f64 },
    Composite(Vec<Policy>),
}

impl Policy {
    /// The policy that changes nothing.
    pub fn none() -> Policy {
        Policy::Composite(Vec::new())
    }

    /// Adds this policy's overrides, events and floors to `cfg`.
    pub fn apply(&self, spec: &ModelSpec, cfg: &mut RunConfig) -> Result<(), ScenarioError> {
        match self {
            Policy::WageFloor { w_min, from } => {
                if !(*from >= 0.0) || !w_min.is_finite() {
                    return Err(ScenarioError::Policy(format!("invalid wage floor {w_min} from {from}")));
                }
                if spec.stock(WAGE_STOCK).is_none() {
                    return Err(ScenarioError::Policy(format!("model has no `{WAGE_STOCK}` stock to floor")));
                }
                cfg.floors.push(crate::engine::StockFloor {
                    stock: VariableId::new(WAGE_STOCK).expect("valid identifier"),
                    min: *w_min,
                    from: *from,
                });
            }
            Policy::ParamOverride { id, value, from } => {
                if !(*from >= 0.0) {
                    return Err(ScenarioError::Policy(format!("override of `{id}` starts at negative time {from}")));
                }
                if spec.kind_of(id.as_str()) != Some(VarKind::Param) {
                    return Err(ScenarioError::Policy(format!("`{id}` is not a parameter")));
                }
                if *from <= cfg.t_start {
                    cfg.overrides.insert(id.clone(), *value);
                } else {
                    cfg.events.push(crate::engine::ParamEvent {
                        time: *from,
                        param: id.clone(),
                        value: *value,
                    });
                }
            }
            Policy::Composite(parts) => {
                for p in parts {
                    p.apply(spec, cfg)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub steady: BTreeMap<VariableId, f64>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("scenario `{name}`: {source}")]
    NotConverged {
        name: String,
        #[source]
        source: SteadyStateError,
    },
    #[error("metric keys differ between `{0}` and the baseline")]
    KeyMismatch(String),
    #[error("invalid sweep plan: {0}")]
    Plan(String),
}

/// Metric name and the variable it reads at steady state.
pub const METRICS: [(&str, &str); 4] = [
    ("employment", "exploitees"),
    ("willing_unhired", "willing_unhired"),
    ("wage", "offered_salary"),
    ("output", "outcomes"),
];

/// Metrics available in `steady`; variables the model lacks are skipped.
pub fn metrics_from(steady: &BTreeMap<VariableId, f64>) -> BTreeMap<String, f64> {
    METRICS
        .iter()
        .filter_map(|(metric, var)| steady.get(*var).map(|v| (metric.to_string(), *v)))
        .collect()
}

/// Applies `policy`, runs to steady state and reports the metrics.
pub fn run_scenario(spec: &ModelSpec, name: &str, policy: &Policy, cfg: &RunConfig) -> Result<ScenarioResult, ScenarioError> {
    let mut cfg = cfg.clone();
    policy.apply(spec, &mut cfg)?;
    let window = SCENARIO_WINDOW.min(cfg.t_end - cfg.t_start);
    let steady = find_steady_state(spec, &cfg, SCENARIO_TOL, window)
        .map_err(|source| ScenarioError::NotConverged {
            name: name.to_string(),
            source,
        })?
        .values;
    Ok(ScenarioResult {
        name: name.to_string(),
        metrics: metrics_from(&steady),
        steady,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub scenario: String,
    pub metric: String,
    pub baseline: f64,
    pub value: f64,
    pub abs_diff: f64,
    /// Percent change relative to the baseline; NaN when the baseline is 0
    /// and the value is not.
    pub pct_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn get(&self, scenario: &str, metric: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.metric == metric)
    }
}

/// One row per (result, metric), results in input order, metrics sorted.
pub fn compare(results: &[ScenarioResult], baseline: &ScenarioResult) -> Result<ComparisonTable, ScenarioError> {
    let mut rows = Vec::new();
    for r in results {
        if !r.metrics.keys().eq(baseline.metrics.keys()) {
            return Err(ScenarioError::KeyMismatch(r.name.clone()));
        }
        for (metric, &value) in &r.metrics {
            let base = baseline.metrics[metric];
            let abs_diff = value - base;
            let pct_diff = if abs_diff == 0.0 {
                0.0
            } else if base == 0.0 {
                f64::NAN
            } else {
                100.0 * abs_diff / base.abs()
            };
            rows.push(ComparisonRow {
                scenario: r.name.clone(),
                metric: metric.clone(),
                baseline: base,
                value,
                abs_diff,
                pct_diff,
            });
        }
    }
    Ok(ComparisonTable { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepDesign {
    /// Full factorial grid; the last parameter varies fastest.
    Grid(Vec<(VariableId, Vec<f64>)>),
    /// Latin-hypercube sample of `samples` points over the given ranges.
    Hypercube {
        ranges: Vec<(VariableId, f64, f64)>,
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub design: SweepDesign,
    pub config: RunConfig,
}

/// Parameter assignment for one sweep point.
pub type SweepPoint = Vec<(VariableId, f64)>;

impl SweepPlan {
    pub fn parameter_names(&self) -> Vec<&VariableId> {
        match &self.design {
            SweepDesign::Grid(axes) => axes.iter().map(|(id, _)| id).collect(),
            SweepDesign::Hypercube { ranges, .. } => ranges.iter().map(|(id, ..)| id).collect(),
        }
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Plan(m));
        match &self.design {
            SweepDesign::Grid(axes) => {
                if axes.is_empty() {
                    return bad("no parameters to sweep".into());
                }
                if let Some((id, _)) = axes.iter().find(|(_, v)| v.is_empty()) {
                    return bad(format!("`{id}` has no values"));
                }
            }
            SweepDesign::Hypercube { ranges, samples, .. } => {
                if ranges.is_empty() {
                    return bad("no parameters to sweep".into());
                }
                if *samples == 0 {
                    return bad("sample count must be positive".into());
                }
                if let Some((id, lo, hi)) = ranges.iter().find(|(_, lo, hi)| !(lo <= hi)) {
                    return bad(format!("range for `{id}` is empty ({lo}..{hi})"));
                }
            }
        }
        Ok(())
    }

    /// Points in plan order: row-major for grids, sample index for hypercubes.
    pub fn points(&self) -> Result<Vec<SweepPoint>, ScenarioError> {
        self.check()?;
        Ok(match &self.design {
            SweepDesign::Grid(axes) => {
                let total: usize = axes.iter().map(|(_, v)| v.len()).product();
                (0..total)
                    .map(|mut k| {
                        let mut point = vec![(axes[0].0.clone(), 0.0); axes.len()];
                        for (d, (id, values)) in axes.iter().enumerate().rev() {
                            point[d] = (id.clone(), values[k % values.len()]);
                            k /= values.len();
                        }
                        point
                    })
                    .collect()
            }
            SweepDesign::Hypercube { ranges, samples, seed } => {
                let unit = latin_hypercube(ranges.len(), *samples, *seed);
                unit.into_iter()
                    .map(|u| {
                        ranges
                            .iter()
                            .zip(u)
                            .map(|((id, lo, hi), x)| (id.clone(), lo + x * (hi - lo)))
                            .collect()
                    })
                    .collect()
            }
        })
    }
}

/// Stratified samples in `[0, 1)^dims`, one per row.
///
/// A ChaCha8 stream seeded with `seed` first draws, for each dimension in
/// order, a Fisher-Yates permutation of the strata and then one uniform
/// offset per sample; sample `i` in dimension `d` is
/// `(perm_d[i] + offset_{d,i}) / samples`.
pub fn latin_hypercube(dims: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![vec![0.0; dims]; samples];
    for d in 0..dims {
        let mut strata: Vec<usize> = (0..samples).collect();
        strata.shuffle(&mut rng);
        for (i, row) in out.iter_mut().enumerate() {
            let offset: f64 = rng.random();
            row[d] = (strata[i] as f64 + offset) / samples as f64;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub point: SweepPoint,
    pub result: Result<ScenarioResult, ScenarioError>,
}

/// Runs every plan point (in parallel) and returns outcomes in plan order.
pub fn sweep(spec: &ModelSpec, plan: &SweepPlan) -> Result<Vec<SweepOutcome>, ScenarioError> {
    let points = plan.points()?;
    for id in plan.parameter_names() {
        if spec.kind_of(id.as_str()) != Some(VarKind::Param) {
            return Err(ScenarioError::Plan(format!("`{id}` is not a parameter")));
        }
    }
    Ok(points
        .into_par_iter()
        .enumerate()
        .map(|(i, point)| {
            let mut cfg = plan.config.clone();
            for (id, v) in &point {
                cfg.overrides.insert(id.clone(), *v);
            }
            let result = run_scenario(spec, &format!("point_{i}"), &Policy::none(), &cfg);
            SweepOutcome { point, result }
        })
        .collect())
}
