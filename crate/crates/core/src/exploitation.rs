//! The flagship labor-exploitation model and its loop probes.
//!
//! Five stocks: the pool of potential exploitees, the exploitees, the
//! exploiter's capacity (money), accumulated exhaustion and the offered
//! salary. Word-of-mouth perception of the job's ex-post value is a
//! first-order smooth.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::dsl::parse_expr;
use crate::engine::{simulate, EngineState, RunConfig, SimError, Trajectory};
use crate::error::ModelError;
use crate::loops::{NamedLoop, Polarity};
use crate::model::{AuxDef, Expr, LookupDef, ModelSpec, ParamDef, StockDef, VariableId};
use crate::validate::validate_model;

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub pool_init: f64,
    pub pool_ref: f64,
    /// Reference demanded salary.
    pub w_ref: f64,
    /// Scarcity elasticity of the demanded salary.
    pub epsilon: f64,
    /// Pool size below which scarcity stops rising.
    pub pool_floor: f64,
    pub curve: LookupDef,
    pub hire_time: f64,
    pub layoff_time: f64,
    pub quit_base: f64,
    /// Extra quit rate per unit of exhaustion.
    pub quit_slope: f64,
    /// Offered-salary adjustment delay.
    pub t_wage: f64,
    pub target_premium: f64,
    pub revenue_share: f64,
    pub price: f64,
    /// Output level at which the unit price equals `price`.
    pub outcomes_ref: f64,
    /// How strongly the unit price falls as output rises.
    pub demand_elasticity: f64,
    pub p0: f64,
    pub load_exponent_short: f64,
    pub l_sustainable: f64,
    pub t_burnout: f64,
    pub t_recover: f64,
    pub t_wom: f64,
    pub v_ref: f64,
    /// Ex-ante overestimation multiplier.
    pub optimism: f64,
    pub k_init: f64,
    pub desired_workforce_ref: f64,
    /// Exogenous multiplier on incentives; probes step it.
    pub incentive_boost: f64,
    /// Separated workers return to the pool instead of leaving the system.
    pub closed_population: bool,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            pool_init: 10000.0,
            pool_ref: 10000.0,
            w_ref: 1.0,
            epsilon: 0.5,
            pool_floor: 1.0,
            curve: LookupDef::Normal {
                median: 1.0,
                ratio90: 1.5,
            },
            hire_time: 4.0,
            layoff_time: 4.0,
            quit_base: 0.02,
            quit_slope: 0.03,
            t_wage: 8.0,
            target_premium: 1.05,
            revenue_share: 0.3,
            price: 1.0,
            outcomes_ref: 10000.0,
            demand_elasticity: 0.5,
            p0: 5.0,
            load_exponent_short: 0.3,
            l_sustainable: 1.0,
            t_burnout: 40.0,
            t_recover: 100.0,
            t_wom: 20.0,
            v_ref: 1.5,
            optimism: 1.2,
            k_init: 5000.0,
            desired_workforce_ref: 2000.0,
            incentive_boost: 1.0,
            closed_population: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("calibration: {0}")]
    Invalid(String),
    #[error("built model failed validation: {0}")]
    Model(#[from] ModelError),
}

impl Calibration {
    /// Parameter names, values and units in declaration order.
    pub fn parameters(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("pool_init", self.pool_init, "people"),
            ("pool_ref", self.pool_ref, "people"),
            ("w_ref", self.w_ref, "money/person/time"),
            ("epsilon", self.epsilon, "1"),
            ("pool_floor", self.pool_floor, "people"),
            ("hire_time", self.hire_time, "time"),
            ("layoff_time", self.layoff_time, "time"),
            ("quit_base", self.quit_base, "1/time"),
            ("quit_slope", self.quit_slope, "1/time"),
            ("t_wage", self.t_wage, "time"),
            ("target_premium", self.target_premium, "1"),
            ("revenue_share", self.revenue_share, "1"),
            ("price", self.price, "money/outcome"),
            ("outcomes_ref", self.outcomes_ref, "outcome/time"),
            ("demand_elasticity", self.demand_elasticity, "1"),
            ("p0", self.p0, "outcome/person/time"),
            ("load_exponent_short", self.load_exponent_short, "1"),
            ("l_sustainable", self.l_sustainable, "1"),
            ("t_burnout", self.t_burnout, "time"),
            ("t_recover", self.t_recover, "time"),
            ("t_wom", self.t_wom, "time"),
            ("v_ref", self.v_ref, "1"),
            ("optimism", self.optimism, "1"),
            ("k_init", self.k_init, "money"),
            ("desired_workforce_ref", self.desired_workforce_ref, "people"),
            ("incentive_boost", self.incentive_boost, "1"),
        ]
    }

    pub fn check(&self) -> Result<(), CalibrationError> {
        let bad = |m: String| Err(CalibrationError::Invalid(m));
        for (name, v, _) in self.parameters() {
            if !v.is_finite() {
                return bad(format!("{name} is not finite"));
            }
        }
        for (name, v) in [
            ("hire_time", self.hire_time),
            ("layoff_time", self.layoff_time),
            ("t_wage", self.t_wage),
            ("t_burnout", self.t_burnout),
            ("t_recover", self.t_recover),
            ("t_wom", self.t_wom),
            ("pool_ref", self.pool_ref),
            ("pool_floor", self.pool_floor),
            ("k_init", self.k_init),
            ("w_ref", self.w_ref),
            ("v_ref", self.v_ref),
            ("outcomes_ref", self.outcomes_ref),
            ("load_exponent_short", self.load_exponent_short),
        ] {
            if v <= 0.0 {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.revenue_share) {
            return bad(format!("revenue_share must lie in [0, 1], got {}", self.revenue_share));
        }
        if !(0.0..1.0).contains(&self.demand_elasticity) {
            return bad(format!("demand_elasticity must lie in [0, 1), got {}", self.demand_elasticity));
        }
        if self.epsilon < 0.0 {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if self.optimism < 1.0 {
            return bad(format!("optimism must be >= 1, got {}", self.optimism));
        }
        for (name, v) in [
            ("pool_init", self.pool_init),
            ("quit_base", self.quit_base),
            ("quit_slope", self.quit_slope),
            ("price", self.price),
            ("p0", self.p0),
            ("desired_workforce_ref", self.desired_workforce_ref),
            ("incentive_boost", self.incentive_boost),
        ] {
            if v < 0.0 {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        Ok(())
    }
}

const EQUATIONS: &[(&str, &str, &str)] = &[
    (
        "demanded_salary",
        "w_ref * (pool_ref / MAX(potential_exploitees, pool_floor)) ^ epsilon",
        "money/person/time",
    ),
    ("relative_attractiveness", "offered_salary / demanded_salary", "1"),
    (
        "ex_post_value",
        "SMOOTH(offered_salary / w_ref * (1 - 0.5 * exhaustion) * (l_sustainable / MAX(load, 0.1)), t_wom)",
        "1",
    ),
    ("wom_multiplier", "CLIP(ex_post_value / v_ref, 0.2, 1)", "1"),
    ("ex_ante_value", "optimism * relative_attractiveness * wom_multiplier", "1"),
    ("fraction_willing", "LOOKUP(f_willing, ex_ante_value)", "1"),
    ("incentive_multiplier", "incentive_boost * (MAX(capacity, 0) / k_init) ^ 0.5", "1"),
    ("load", "incentive_multiplier", "1"),
    ("desired_workforce", "desired_workforce_ref * incentive_multiplier", "people"),
    ("vacancies", "MAX(desired_workforce - exploitees, 0)", "people"),
    (
        "hiring",
        "vacancies * (fraction_willing * potential_exploitees) / MAX(vacancies + fraction_willing * potential_exploitees, 0.000001) / hire_time",
        "people/time",
    ),
    ("layoffs", "MAX(exploitees - desired_workforce, 0) / layoff_time", "people/time"),
    ("quits", "exploitees * (quit_base + quit_slope * exhaustion)", "people/time"),
    ("separations", "quits + layoffs", "people/time"),
    (
        "outcomes",
        "exploitees * p0 * load ^ load_exponent_short * MAX(1 - exhaustion, 0)",
        "outcome/time",
    ),
    (
        "unit_price",
        "price * (outcomes_ref / MAX(outcomes, 1)) ^ demand_elasticity",
        "money/outcome",
    ),
    ("revenue", "outcomes * unit_price", "money/time"),
    ("wage_bill", "exploitees * offered_salary", "money/time"),
    ("affordability", "CLIP(capacity / k_init, 0.5, 1.5)", "1"),
    (
        "indicated_salary",
        "demanded_salary * target_premium * affordability",
        "money/person/time",
    ),
    ("burnout", "MAX(load - l_sustainable, 0) / t_burnout", "1/time"),
    ("recovery", "exhaustion / t_recover", "1/time"),
    (
        "willing_unhired",
        "fraction_willing * potential_exploitees - hiring * hire_time",
        "people",
    ),
];

fn eq(text: &str) -> Expr {
    parse_expr(text).expect("built-in equation parses")
}

fn id(name: &str) -> VariableId {
    VariableId::new(name).expect("built-in name")
}

/// Builds and validates the flagship model.
pub fn build_exploitation_model(cal: &Calibration) -> Result<ModelSpec, CalibrationError> {
    cal.check()?;
    let mut spec = ModelSpec::new("exploitation");
    spec.params = cal
        .parameters()
        .into_iter()
        .map(|(n, v, u)| ParamDef::new(id(n), v, u))
        .collect();
    spec.lookups.insert(id("f_willing"), cal.curve.clone());
    let return_flow = if cal.closed_population { "separations" } else { "0" };
    for (name, initial, inflow, outflow, unit) in [
        ("potential_exploitees", "pool_init", return_flow, "hiring", "people"),
        ("exploitees", "0", "hiring", "separations", "people"),
        ("capacity", "k_init", "revenue_share * revenue", "wage_bill", "money"),
        ("exhaustion", "0", "burnout", "recovery", "1"),
        ("offered_salary", "w_ref", "(indicated_salary - offered_salary) / t_wage", "0", "money/person/time"),
    ] {
        spec.stocks.push(StockDef {
            id: id(name),
            initial: eq(initial),
            inflow: eq(inflow),
            outflow: eq(outflow),
            unit: unit.to_string(),
        });
    }
    spec.auxes = EQUATIONS
        .iter()
        .map(|(n, e, u)| AuxDef {
            id: id(n),
            expr: eq(e),
            unit: u.to_string(),
        })
        .collect();
    validate_model(&spec).into_result()?;
    Ok(spec)
}

/// The six feedback loops the model is built to contain.
pub fn named_loops() -> Vec<NamedLoop> {
    use Polarity::*;
    vec![
        NamedLoop::new(
            "B1",
            Balancing,
            &["potential_exploitees", "demanded_salary", "relative_attractiveness", "hiring"],
        ),
        NamedLoop::new(
            "R2",
            Reinforcing,
            &[
                "offered_salary",
                "relative_attractiveness",
                "hiring",
                "exploitees",
                "outcomes",
                "revenue",
                "capacity",
            ],
        ),
        NamedLoop::new("B2", Balancing, &["offered_salary", "wage_bill", "capacity"]),
        NamedLoop::new(
            "R3",
            Reinforcing,
            &["incentive_multiplier", "load", "outcomes", "revenue", "capacity"],
        ),
        NamedLoop::new("B3", Balancing, &["load", "exhaustion", "outcomes", "capacity"]),
        NamedLoop::new(
            "B4",
            Balancing,
            &["load", "ex_post_value", "ex_ante_value", "hiring"],
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("window {window} does not fit in a run of length {horizon}")]
    Window { window: f64, horizon: f64 },
    #[error("tolerance must be > 0, got {0}")]
    Tolerance(f64),
    #[error("not converged: `{variable}` changes at relative rate {residual:e} per unit time")]
    NotConverged { variable: String, residual: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pub values: BTreeMap<VariableId, f64>,
    /// Full integration state at the end of the run, for warm starts.
    pub state: EngineState,
    pub residual: f64,
    pub trajectory: Trajectory,
}

/// Runs `cfg` and returns the final values if every stock's relative rate of
/// change, `|Δx/Δt| / max(|x|, 1)` between consecutive saved rows, stays
/// below `tol` over the trailing `window`.
pub fn steady_state(
    spec: &ModelSpec,
    cfg: &RunConfig,
    tol: f64,
    window: f64,
) -> Result<BTreeMap<VariableId, f64>, SteadyStateError> {
    find_steady_state(spec, cfg, tol, window).map(|s| s.values)
}

pub fn find_steady_state(
    spec: &ModelSpec,
    cfg: &RunConfig,
    tol: f64,
    window: f64,
) -> Result<SteadyState, SteadyStateError> {
    if !(tol > 0.0) {
        return Err(SteadyStateError::Tolerance(tol));
    }
    let horizon = cfg.t_end - cfg.t_start;
    if !(window >= 0.0 && window <= horizon) {
        return Err(SteadyStateError::Window { window, horizon });
    }
    let trajectory = simulate(spec, cfg)?;
    let residual = settle_residual(spec, &trajectory, window);
    let (variable, worst) = residual;
    if worst >= tol {
        return Err(SteadyStateError::NotConverged {
            variable,
            residual: worst,
        });
    }
    Ok(SteadyState {
        values: trajectory.final_values(),
        state: trajectory.end_state.clone().expect("completed run"),
        residual: worst,
        trajectory,
    })
}

/// Largest trailing-window relative rate over the model's stocks.
fn settle_residual(spec: &ModelSpec, traj: &Trajectory, window: f64) -> (String, f64) {
    let t_last = *traj.times.last().expect("non-empty trajectory");
    let from = traj
        .times
        .iter()
        .position(|&t| t >= t_last - window - 1e-9)
        .unwrap_or(0);
    let mut worst = (String::new(), 0.0);
    for s in &spec.stocks {
        let x = traj.series(s.id.as_str()).expect("stock recorded");
        for i in from + 1..traj.len() {
            let dt = traj.times[i] - traj.times[i - 1];
            let r = ((x[i] - x[i - 1]) / dt).abs() / x[i].abs().max(1.0);
            if !(r < worst.1) {
                worst = (s.id.to_string(), r);
            }
        }
    }
    worst
}

/// Configuration used to settle the flagship model before probing.
pub fn settle_config() -> RunConfig {
    RunConfig::new(0.0, 2000.0, 0.125)
}

pub const SETTLE_TOL: f64 = 1e-6;
pub const SETTLE_WINDOW: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Probe {
    B1Scarcity,
    R2Growth,
    B2Drain,
    R3ShortTerm,
    B3Burnout,
    B4WordOfMouth,
}

impl Probe {
    pub const ALL: [Probe; 6] = [
        Probe::B1Scarcity,
        Probe::R2Growth,
        Probe::B2Drain,
        Probe::R3ShortTerm,
        Probe::B3Burnout,
        Probe::B4WordOfMouth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Probe::B1Scarcity => "B1_scarcity",
            Probe::R2Growth => "R2_growth",
            Probe::B2Drain => "B2_drain",
            Probe::R3ShortTerm => "R3_shortterm",
            Probe::B3Burnout => "B3_burnout",
            Probe::B4WordOfMouth => "B4_wom",
        }
    }

    fn horizon(self) -> f64 {
        match self {
            Probe::B1Scarcity | Probe::R3ShortTerm => 40.0,
            Probe::R2Growth => 100.0,
            Probe::B2Drain | Probe::B4WordOfMouth => 200.0,
            Probe::B3Burnout => 400.0,
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Probe {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Probe::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown probe `{s}`"))
    }
}

/// Time at which the probes apply their perturbation.
pub const PROBE_TIME: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct PatternReport {
    pub probe: Probe,
    /// What was observed, in words.
    pub evidence: String,
    pub baseline: Trajectory,
    pub perturbed: Trajectory,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{probe}: signature not observed at t={time}: {reason}")]
pub struct PatternViolation {
    pub probe: Probe,
    pub time: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error(transparent)]
    Violation(#[from] PatternViolation),
    #[error("probe could not settle the model: {0}")]
    Settle(#[from] SteadyStateError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("model lacks `{0}` required by the probe")]
    MissingVariable(String),
}

/// Settles `spec`, then runs an unperturbed and a perturbed continuation and
/// checks the qualitative signature of one loop.
pub fn loop_probe(spec: &ModelSpec, probe: Probe) -> Result<PatternReport, ProbeError> {
    let needed: &[&str] = match probe {
        Probe::B1Scarcity => &["potential_exploitees", "demanded_salary"],
        Probe::R2Growth => &["revenue_share", "capacity", "incentive_multiplier", "offered_salary"],
        Probe::B2Drain => &["revenue_share", "capacity"],
        Probe::R3ShortTerm | Probe::B3Burnout => &["incentive_boost", "outcomes"],
        Probe::B4WordOfMouth => &["incentive_boost", "ex_post_value", "hiring"],
    };
    for n in needed {
        if spec.kind_of(n).is_none() {
            return Err(ProbeError::MissingVariable(n.to_string()));
        }
    }
    let settled = find_steady_state(spec, &settle_config(), SETTLE_TOL, SETTLE_WINDOW)?;
    let dt = settle_config().dt;
    let cfg = RunConfig::new(0.0, probe.horizon(), dt).with_initial_state(settled.state.clone());
    let baseline = simulate(spec, &cfg)?;

    let perturbed = match probe {
        Probe::B1Scarcity => {
            let cut = with_pool_cut(spec, 0.2);
            simulate(&cut, &cfg)?
        }
        Probe::R2Growth => {
            let rs = spec.param("revenue_share").expect("checked").value;
            simulate(spec, &cfg.clone().with_event(PROBE_TIME, "revenue_share", rs * 1.1))?
        }
        Probe::B2Drain => simulate(spec, &cfg.clone().with_override("revenue_share", 0.0))?,
        Probe::R3ShortTerm | Probe::B3Burnout | Probe::B4WordOfMouth => {
            let boost = spec.param("incentive_boost").expect("checked").value;
            simulate(spec, &cfg.clone().with_event(PROBE_TIME, "incentive_boost", boost * 1.2))?
        }
    };
    let evidence = check_signature(probe, &baseline, &perturbed)?;
    Ok(PatternReport {
        probe,
        evidence,
        baseline,
        perturbed,
    })
}

/// Removes `fraction` of the pool over one time unit starting at
/// [`PROBE_TIME`].
fn with_pool_cut(spec: &ModelSpec, fraction: f64) -> ModelSpec {
    let mut cut = spec.clone();
    cut.params.push(ParamDef::new(
        id("probe_cut_rate"),
        (1.0 / (1.0 - fraction)).ln(),
        "1/time",
    ));
    let pool = cut.stock_mut("potential_exploitees").expect("checked");
    let drain = eq(&format!(
        "potential_exploitees * probe_cut_rate * PULSE({PROBE_TIME}, 1)"
    ));
    pool.outflow = Expr::binary(crate::model::BinOp::Add, pool.outflow.clone(), drain);
    cut
}

fn violation(probe: Probe, time: f64, reason: impl Into<String>) -> PatternViolation {
    PatternViolation {
        probe,
        time,
        reason: reason.into(),
    }
}

fn check_signature(probe: Probe, base: &Trajectory, pert: &Trajectory) -> Result<String, PatternViolation> {
    let times = &base.times;
    let s = |t: &Trajectory, n: &str| t.series(n).expect("checked variable").to_vec();
    let after = |t0: f64| times.iter().position(|&t| t > t0 + 1e-9).unwrap_or(times.len());
    match probe {
        Probe::B1Scarcity | Probe::R3ShortTerm => {
            let var = if probe == Probe::B1Scarcity { "demanded_salary" } else { "outcomes" };
            let (b, p) = (s(base, var), s(pert, var));
            let window_end = PROBE_TIME + 5.0;
            for i in after(PROBE_TIME)..times.len() {
                if times[i] > window_end + 1e-9 {
                    break;
                }
                if p[i] > b[i] {
                    return Ok(format!("{var} above baseline at t={}", times[i]));
                }
            }
            Err(violation(probe, window_end, format!("{var} did not rise above baseline within 5 time units")))
        }
        Probe::R2Growth => {
            let vars = ["capacity", "incentive_multiplier", "offered_salary"];
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = vars.iter().map(|v| (s(base, v), s(pert, v))).collect();
            let above: Vec<bool> = (0..times.len())
                .map(|i| pairs.iter().all(|(b, p)| p[i] > b[i]))
                .collect();
            let mut run_start = None;
            for i in after(PROBE_TIME)..times.len() {
                if above[i] {
                    let start = *run_start.get_or_insert(times[i]);
                    if times[i] - start >= 20.0 - 1e-9 {
                        return Ok(format!(
                            "capacity, incentives and offered salary above baseline over [{start}, {}]",
                            times[i]
                        ));
                    }
                } else {
                    run_start = None;
                }
            }
            let t = (after(PROBE_TIME)..times.len())
                .find(|&i| !above[i])
                .map_or(*times.last().unwrap_or(&0.0), |i| times[i]);
            Err(violation(probe, t, "capacity, incentives and offered salary never stayed above baseline for 20 time units"))
        }
        Probe::B2Drain => {
            let k = s(pert, "capacity");
            for i in 1..k.len() {
                if k[i] > k[i - 1] {
                    return Err(violation(probe, times[i], "capacity increased"));
                }
            }
            Ok(format!("capacity nonincreasing from {} to {}", k[0], k[k.len() - 1]))
        }
        Probe::B3Burnout => {
            let (b, p) = (s(base, "outcomes"), s(pert, "outcomes"));
            let start = after(PROBE_TIME);
            let Some(first) = (start..times.len()).find(|&i| p[i] > b[i]) else {
                return Err(violation(probe, PROBE_TIME, "outcomes never exceeded baseline"));
            };
            let peak = (first..times.len())
                .max_by(|&i, &j| p[i].total_cmp(&p[j]).then(j.cmp(&i)))
                .expect("non-empty range");
            match (peak..times.len()).find(|&i| p[i] <= 0.95 * p[peak]) {
                Some(i) => Ok(format!(
                    "outcomes peaked at {} (t={}) and fell 5% below the peak by t={}",
                    p[peak], times[peak], times[i]
                )),
                None => {
                    let low = (peak..times.len()).map(|i| p[i]).fold(f64::INFINITY, f64::min);
                    Err(violation(
                        probe,
                        *times.last().expect("non-empty"),
                        format!("outcomes fell only {:.2}% below their peak", 100.0 * (1.0 - low / p[peak])),
                    ))
                }
            }
        }
        Probe::B4WordOfMouth => {
            let (vb, vp) = (s(base, "ex_post_value"), s(pert, "ex_post_value"));
            let (hb, hp) = (s(base, "hiring"), s(pert, "hiring"));
            let Some(iv) = (after(PROBE_TIME)..times.len()).find(|&i| vp[i] < vb[i]) else {
                return Err(violation(probe, PROBE_TIME, "ex-post value never fell below baseline"));
            };
            match (iv..times.len()).find(|&i| hp[i] < hb[i]) {
                Some(ih) => Ok(format!(
                    "ex-post value below baseline from t={}, hiring below baseline from t={}",
                    times[iv], times[ih]
                )),
                None => Err(violation(probe, times[iv], "hiring never fell below baseline after ex-post value did")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_builds_and_validates() {
        let spec = build_exploitation_model(&Calibration::default()).unwrap();
        assert!(validate_model(&spec).is_ok());
        assert_eq!(spec.stocks.len(), 5);
    }

    #[test]
    fn rejects_bad_calibration() {
        let cal = Calibration {
            t_wage: 0.0,
            ..Calibration::default()
        };
        assert!(matches!(build_exploitation_model(&cal), Err(CalibrationError::Invalid(_))));
        let cal = Calibration {
            optimism: 0.9,
            ..Calibration::default()
        };
        assert!(build_exploitation_model(&cal).is_err());
    }

    #[test]
    fn open_population_drops_return_flow() {
        let cal = Calibration {
            closed_population: false,
            ..Calibration::default()
        };
        let spec = build_exploitation_model(&cal).unwrap();
        assert_eq!(spec.stock("potential_exploitees").unwrap().inflow, Expr::Const(0.0));
    }

    #[test]
    fn flat_model_is_steady_immediately() {
        let spec = crate::fixtures::constant_stock();
        let ss = steady_state(&spec, &RunConfig::new(0.0, 10.0, 1.0), 1e-9, 5.0).unwrap();
        assert_eq!(ss[&id("x")], 3.0);
    }

    #[test]
    fn oscillator_never_settles() {
        let spec = crate::fixtures::undamped_oscillator();
        let err = steady_state(&spec, &RunConfig::new(0.0, 100.0, 0.01), 1e-6, 20.0).unwrap_err();
        assert!(matches!(err, SteadyStateError::NotConverged { .. }));
    }

    #[test]
    fn window_must_fit() {
        let spec = crate::fixtures::constant_stock();
        assert!(matches!(
            steady_state(&spec, &RunConfig::new(0.0, 10.0, 1.0), 1e-9, 50.0),
            Err(SteadyStateError::Window { .. })
        ));
    }
}
