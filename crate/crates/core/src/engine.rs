//! Fixed-step integration of a [`ModelSpec`].
//!
//! Stocks and the hidden levels of SMOOTH/DELAY1/DELAY3 form one state
//! vector advanced by Euler or classic fourth-order Runge-Kutta. Auxiliaries
//! are recomputed in evaluation order inside every derivative evaluation.
//! Parameter events bind to the first step boundary at or after their time
//! and are applied before that step's derivative evaluations.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::compile::{Ctx, DelayMode, Program};
use crate::error::ModelError;
use crate::model::{Builtin, Expr, ModelSpec, VarKind, VariableId};
use crate::validate::validate_model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IntegratorKind {
    Euler,
    #[default]
    Rk4,
}

impl std::str::FromStr for IntegratorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(IntegratorKind::Euler),
            "rk4" => Ok(IntegratorKind::Rk4),
            other => Err(format!("unknown integrator `{other}` (expected euler or rk4)")),
        }
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntegratorKind::Euler => "euler",
            IntegratorKind::Rk4 => "rk4",
        })
    }
}

/// Sets a parameter to `value` from the first step boundary at or after `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamEvent {
    pub time: f64,
    pub param: VariableId,
    pub value: f64,
}

/// Lower bound applied to a stock after every step ending at or after `from`.
#[derive(Clone, Debug, PartialEq)]
pub struct StockFloor {
    pub stock: VariableId,
    pub min: f64,
    pub from: f64,
}

/// Complete integration state: stock values plus hidden delay levels.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineState {
    pub stocks: BTreeMap<VariableId, f64>,
    pub delay_levels: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub save_every: usize,
    pub integrator: IntegratorKind,
    pub overrides: BTreeMap<VariableId, f64>,
    pub events: Vec<ParamEvent>,
    pub floors: Vec<StockFloor>,
    /// Replaces the computed initial state (warm start).
    pub initial_state: Option<EngineState>,
}

impl RunConfig {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Self {
        RunConfig {
            t_start,
            t_end,
            dt,
            save_every: 1,
            integrator: IntegratorKind::Rk4,
            overrides: BTreeMap::new(),
            events: Vec::new(),
            floors: Vec::new(),
            initial_state: None,
        }
    }

    pub fn integrator(mut self, kind: IntegratorKind) -> Self {
        self.integrator = kind;
        self
    }

    pub fn save_every(mut self, k: usize) -> Self {
        self.save_every = k;
        self
    }

    pub fn with_override(mut self, id: &str, value: f64) -> Self {
        self.overrides
            .insert(VariableId::new(id).expect("valid identifier"), value);
        self
    }

    pub fn with_event(mut self, time: f64, param: &str, value: f64) -> Self {
        self.events.push(ParamEvent {
            time,
            param: VariableId::new(param).expect("valid identifier"),
            value,
        });
        self
    }

    pub fn with_floor(mut self, stock: &str, min: f64, from: f64) -> Self {
        self.floors.push(StockFloor {
            stock: VariableId::new(stock).expect("valid identifier"),
            min,
            from,
        });
        self
    }

    pub fn with_initial_state(mut self, state: EngineState) -> Self {
        self.initial_state = Some(state);
        self
    }

    /// Number of integration steps, after checking every invariant.
    pub fn steps(&self) -> Result<usize, SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return bad("t_start and t_end must be finite".into());
        }
        if self.t_end < self.t_start {
            return bad(format!("t_end {} precedes t_start {}", self.t_end, self.t_start));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.save_every == 0 {
            return bad("save_every must be a positive integer".into());
        }
        let exact = (self.t_end - self.t_start) / self.dt;
        let n = exact.round();
        if (exact - n).abs() > 1e-9 * n.max(1.0) {
            return bad(format!(
                "(t_end - t_start) / dt = {exact} is not a whole number of steps"
            ));
        }
        for e in &self.events {
            if !(e.time >= self.t_start && e.time <= self.t_end) {
                return bad(format!(
                    "event for `{}` at t={} lies outside [{}, {}]",
                    e.param, e.time, self.t_start, self.t_end
                ));
            }
        }
        Ok(n as usize)
    }

    fn time_at(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }
}

/// Saved simulation output: one row per saved step, one column per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<VariableId>,
    pub columns: Vec<Vec<f64>>,
    /// State after the last saved row; `None` for aborted runs.
    pub end_state: Option<EngineState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n.as_str() == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Value at the saved row whose time is closest to `t`.
    pub fn value_at(&self, name: &str, t: f64) -> Option<f64> {
        let series = self.series(name)?;
        let row = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(series[row])
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.series(name).and_then(|s| s.last().copied())
    }

    /// Final value of every recorded variable.
    pub fn final_values(&self) -> BTreeMap<VariableId, f64> {
        self.names
            .iter()
            .zip(&self.columns)
            .filter_map(|(n, c)| c.last().map(|v| (n.clone(), *v)))
            .collect()
    }

    /// All variables at one saved row.
    pub fn row(&self, i: usize) -> BTreeMap<VariableId, f64> {
        self.names
            .iter()
            .zip(&self.columns)
            .map(|(n, c)| (n.clone(), c[i]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("non-finite value in `{variable}` at t={time}; trajectory truncated to {} row(s)", .trajectory.len())]
    NonFiniteState {
        time: f64,
        variable: String,
        trajectory: Box<Trajectory>,
    },
}

/// Evaluates every flow at the initial point; used by validation.
pub(crate) fn check_initial_flows(spec: &ModelSpec) -> Result<(), String> {
    let prog = Program::compile(spec).map_err(|e| e.to_string())?;
    let sim = Simulator {
        prog: &prog,
        params: prog.param_values.clone(),
    };
    let (values, _) = sim
        .initial_state(0.0)
        .map_err(|e| e.to_string())?;
    let mut ctx = Ctx::new(0.0, &values, &prog.lookups, DelayMode::Transparent);
    for (k, s) in prog.stocks.iter().enumerate() {
        for (what, node) in [("inflow", &s.inflow), ("outflow", &s.outflow)] {
            let v = ctx.eval(node);
            if !v.is_finite() {
                return Err(format!(
                    "{what} of stock `{}` is not finite at the initial point ({v})",
                    spec.stocks[k].id
                ));
            }
        }
    }
    Ok(())
}

struct Simulator<'p> {
    prog: &'p Program,
    params: Vec<f64>,
}

impl Simulator<'_> {
    fn fresh_values(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.prog.names.len()];
        values[..self.prog.n_params].copy_from_slice(&self.params);
        values
    }

    /// Returns (variable values, state vector) at the start of the run.
    fn initial_state(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>), SimError> {
        let prog = self.prog;
        let mut values = self.fresh_values();
        for s in &prog.stocks {
            let v = Ctx::new(t, &values, &prog.lookups, DelayMode::Transparent).eval(&s.initial);
            values[s.slot] = v;
        }
        let ns = prog.n_stocks();
        let mut states = vec![0.0; prog.n_delay_states];
        let mut ready = vec![false; prog.n_delay_states];
        let mut fault = None;
        for (slot, node) in &prog.auxes {
            let mut ctx = Ctx::new(
                t,
                &values,
                &prog.lookups,
                DelayMode::Init {
                    states: &mut states,
                    ready: &mut ready,
                },
            );
            let v = ctx.eval(node);
            fault = fault.or(ctx.fault);
            values[*slot] = v;
        }
        for s in &prog.stocks {
            for node in [&s.inflow, &s.outflow] {
                let mut ctx = Ctx::new(
                    t,
                    &values,
                    &prog.lookups,
                    DelayMode::Init {
                        states: &mut states,
                        ready: &mut ready,
                    },
                );
                ctx.eval(node);
                fault = fault.or(ctx.fault);
            }
        }
        if let Some(f) = fault {
            return Err(SimError::Config(f));
        }
        let mut y = Vec::with_capacity(ns + states.len());
        y.extend(prog.stocks.iter().map(|s| values[s.slot]));
        y.extend(states);
        Ok((values, y))
    }

    /// Fills `values` (stocks and auxiliaries) and writes dy/dt into `dy`.
    fn derivative(&self, t: f64, y: &[f64], values: &mut [f64], dy: &mut [f64]) -> Option<String> {
        let prog = self.prog;
        let ns = prog.n_stocks();
        for (s, v) in prog.stocks.iter().zip(y) {
            values[s.slot] = *v;
        }
        let (stock_dy, delay_dy) = dy.split_at_mut(ns);
        let states = &y[ns..];
        let mut fault = None;
        for (slot, node) in &prog.auxes {
            let mut ctx = Ctx::new(
                t,
                values,
                &prog.lookups,
                DelayMode::Running {
                    states,
                    derivs: delay_dy,
                },
            );
            let v = ctx.eval(node);
            fault = fault.or(ctx.fault);
            values[*slot] = v;
        }
        let mut ctx = Ctx::new(
            t,
            values,
            &prog.lookups,
            DelayMode::Running {
                states,
                derivs: delay_dy,
            },
        );
        for (k, s) in prog.stocks.iter().enumerate() {
            stock_dy[k] = ctx.eval(&s.inflow) - ctx.eval(&s.outflow);
        }
        fault.or(ctx.fault)
    }
}

fn resolve_param(prog: &Program, spec: &ModelSpec, id: &VariableId) -> Result<usize, SimError> {
    match spec.kind_of(id.as_str()) {
        Some(VarKind::Param) => Ok(prog.slot(id.as_str()).expect("param has a slot")),
        Some(_) => Err(SimError::Config(format!("`{id}` is not a parameter"))),
        None => Err(SimError::UnknownVariable(id.to_string())),
    }
}

/// Integrates `spec` under `cfg`. Bit-identical across repeated calls.
pub fn simulate(spec: &ModelSpec, cfg: &RunConfig) -> Result<Trajectory, SimError> {
    validate_model(spec).into_result()?;
    simulate_unchecked(spec, cfg)
}

pub(crate) fn simulate_unchecked(spec: &ModelSpec, cfg: &RunConfig) -> Result<Trajectory, SimError> {
    let n_steps = cfg.steps()?;
    let prog = Program::compile(spec)?;

    let mut params = prog.param_values.clone();
    for (id, v) in &cfg.overrides {
        let slot = resolve_param(&prog, spec, id)?;
        if !v.is_finite() {
            return Err(SimError::Config(format!("override for `{id}` is not finite")));
        }
        let def = spec.param(id.as_str()).expect("resolved as param");
        if !def.admits(*v) {
            return Err(SimError::Config(format!(
                "override {v} for `{id}` outside admissible range [{}, {}]",
                def.range.0, def.range.1
            )));
        }
        params[slot] = *v;
    }
    let mut events = Vec::with_capacity(cfg.events.len());
    for e in &cfg.events {
        events.push((e.time, resolve_param(&prog, spec, &e.param)?, e.value));
    }
    // stable: simultaneous events apply in the order given
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut floors = Vec::with_capacity(cfg.floors.len());
    for f in &cfg.floors {
        let k = spec
            .stocks
            .iter()
            .position(|s| s.id == f.stock)
            .ok_or_else(|| SimError::UnknownVariable(f.stock.to_string()))?;
        floors.push((k, f.min, f.from));
    }

    let mut sim = Simulator {
        prog: &prog,
        params,
    };
    let (mut values, mut y) = sim.initial_state(cfg.t_start)?;
    if let Some(state) = &cfg.initial_state {
        for (k, s) in spec.stocks.iter().enumerate() {
            y[k] = *state
                .stocks
                .get(&s.id)
                .ok_or_else(|| SimError::Config(format!("initial state lacks stock `{}`", s.id)))?;
        }
        if state.delay_levels.len() != prog.n_delay_states {
            return Err(SimError::Config(format!(
                "initial state has {} delay levels, model needs {}",
                state.delay_levels.len(),
                prog.n_delay_states
            )));
        }
        y[prog.n_stocks()..].copy_from_slice(&state.delay_levels);
    }

    let dim = y.len();
    let mut out = Trajectory {
        times: Vec::new(),
        names: prog.names.clone(),
        columns: vec![Vec::new(); prog.names.len()],
        end_state: None,
    };
    let eps = 1e-9 * cfg.dt;
    let mut next_event = 0;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut scratch = vec![0.0; dim];
    let mut stage_values = values.clone();

    for step in 0..=n_steps {
        let t = cfg.time_at(step);
        while next_event < events.len() && events[next_event].0 <= t + eps {
            let (_, slot, v) = events[next_event];
            sim.params[slot] = v;
            values[slot] = v;
            stage_values[slot] = v;
            next_event += 1;
        }
        if let Some(f) = sim.derivative(t, &y, &mut values, &mut k1) {
            return Err(SimError::Config(f));
        }
        if let Some(bad) = first_non_finite(&prog, &values, &y) {
            out.end_state = None;
            return Err(SimError::NonFiniteState {
                time: t,
                variable: bad,
                trajectory: Box::new(out),
            });
        }
        if step % cfg.save_every == 0 || step == n_steps {
            out.times.push(t);
            for (col, v) in out.columns.iter_mut().zip(&values) {
                col.push(*v);
            }
        }
        if step == n_steps {
            break;
        }
        let dt = cfg.dt;
        match cfg.integrator {
            IntegratorKind::Euler => {
                for i in 0..dim {
                    y[i] += dt * k1[i];
                }
            }
            IntegratorKind::Rk4 => {
                for i in 0..dim {
                    scratch[i] = y[i] + 0.5 * dt * k1[i];
                }
                sim.derivative(t + 0.5 * dt, &scratch, &mut stage_values, &mut k2);
                for i in 0..dim {
                    scratch[i] = y[i] + 0.5 * dt * k2[i];
                }
                sim.derivative(t + 0.5 * dt, &scratch, &mut stage_values, &mut k3);
                for i in 0..dim {
                    scratch[i] = y[i] + dt * k3[i];
                }
                sim.derivative(t + dt, &scratch, &mut stage_values, &mut k4);
                for i in 0..dim {
                    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        let t_next = cfg.time_at(step + 1);
        for &(k, min, from) in &floors {
            if t_next + eps >= from && y[k] < min {
                y[k] = min;
            }
        }
    }
    out.end_state = Some(EngineState {
        stocks: spec
            .stocks
            .iter()
            .zip(&y)
            .map(|(s, v)| (s.id.clone(), *v))
            .collect(),
        delay_levels: y[prog.n_stocks()..].to_vec(),
    });
    Ok(out)
}

fn first_non_finite(prog: &Program, values: &[f64], y: &[f64]) -> Option<String> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Some(prog.names[i].to_string());
    }
    y[prog.n_stocks()..]
        .iter()
        .position(|v| !v.is_finite())
        .map(|i| format!("delay level #{i}"))
}

/// Step response of `SMOOTH(STEP(height, 0), tau)`, starting one step before
/// the step so the smoothed level begins at 0.
pub fn step_response(height: f64, tau: f64, horizon: f64, dt: f64) -> Result<Trajectory, SimError> {
    if !(tau > 0.0) {
        return Err(SimError::Config(format!("tau must be > 0, got {tau}")));
    }
    if !(dt > 0.0 && dt <= tau / 10.0 * (1.0 + 1e-12)) {
        return Err(SimError::Config(format!("dt must lie in (0, tau/10], got {dt}")));
    }
    if !(horizon > 0.0) {
        return Err(SimError::Config(format!("horizon must be > 0, got {horizon}")));
    }
    let spec = ModelSpec::new("smooth_probe")
        .with_param("height", height, "1")
        .with_param("tau", tau, "time")
        .with_aux(
            "input",
            Expr::call(Builtin::Step, vec![Expr::var("height"), 0.0.into()]),
            "1",
        )
        .with_aux(
            "y",
            Expr::call(Builtin::Smooth, vec![Expr::var("input"), Expr::var("tau")]),
            "1",
        );
    simulate(&spec, &RunConfig::new(-dt, horizon, dt))
}

/// `SMOOTH(STEP(1, 0), tau)` from a zero level.
pub fn smooth_response_probe(tau: f64, horizon: f64, dt: f64) -> Result<Trajectory, SimError> {
    step_response(1.0, tau, horizon, dt)
}

/// Largest deviation over saved rows of the summed `group` stocks from their
/// sum at `t_start`.
pub fn conservation_probe(spec: &ModelSpec, cfg: &RunConfig, group: &[&str]) -> Result<f64, SimError> {
    for g in group {
        if spec.stock(g).is_none() {
            return Err(SimError::UnknownVariable(g.to_string()));
        }
    }
    if group.is_empty() {
        return Ok(0.0);
    }
    let traj = simulate(spec, cfg)?;
    let cols: Vec<&[f64]> = group
        .iter()
        .map(|g| traj.series(g).expect("stock recorded"))
        .collect();
    let total = |i: usize| cols.iter().map(|c| c[i]).sum::<f64>();
    let start = total(0);
    Ok((0..traj.len())
        .map(|i| (total(i) - start).abs())
        .fold(0.0, f64::max))
}

/// Largest deviation of any recorded variable from its first saved value.
pub fn invariant_drift(spec: &ModelSpec, cfg: &RunConfig, variable: &str) -> Result<f64, SimError> {
    let traj = simulate(spec, cfg)?;
    let s = traj
        .series(variable)
        .ok_or_else(|| SimError::UnknownVariable(variable.to_string()))?;
    Ok(s.iter().map(|v| (v - s[0]).abs()).fold(0.0, f64::max))
}
