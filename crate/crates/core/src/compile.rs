//! Lowering of a [`ModelSpec`] into an index-addressed program shared by the
//! simulator and the signed-graph builder.

use std::collections::HashMap;

use crate::error::ModelError;
use crate::model::{BinOp, Builtin, Expr, ModelSpec, VariableId};
use crate::validate::evaluation_indices;
use crate::willingness::{resolve_lookup, LookupCurve};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DelayKind {
    /// SMOOTH and DELAY1: one first-order stage.
    First,
    /// DELAY3: three first-order stages, each with time constant tau/3.
    Third,
}

impl DelayKind {
    pub(crate) fn stages(self) -> usize {
        match self {
            DelayKind::First => 1,
            DelayKind::Third => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Min(Vec<Node>),
    Max(Vec<Node>),
    Clip(Box<[Node; 3]>),
    Step(Box<Node>, Box<Node>),
    Pulse(Box<Node>, Box<Node>),
    Time,
    Lookup(usize, Box<Node>),
    Delay {
        kind: DelayKind,
        state: usize,
        input: Box<Node>,
        tau: Box<Node>,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledStock {
    pub slot: usize,
    pub initial: Node,
    pub inflow: Node,
    pub outflow: Node,
}

/// Slots are laid out params, then stocks, then auxiliaries (declaration
/// order within each group).
#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub names: Vec<VariableId>,
    pub index: HashMap<String, usize>,
    pub n_params: usize,
    pub param_values: Vec<f64>,
    pub stocks: Vec<CompiledStock>,
    /// Auxiliaries in evaluation order: (slot, expression).
    pub auxes: Vec<(usize, Node)>,
    /// Per declared auxiliary (declaration order): its expression.
    pub aux_by_decl: Vec<(usize, Node)>,
    pub lookups: Vec<LookupCurve>,
    pub n_delay_states: usize,
}

pub(crate) enum DelayMode<'a> {
    /// Delays return their stored level and write d(level)/dt.
    Running {
        states: &'a [f64],
        derivs: &'a mut [f64],
    },
    /// First visit sets every stage to the input value.
    Init {
        states: &'a mut [f64],
        ready: &'a mut [bool],
    },
    /// Delays pass their input through (steady-state gain of one).
    Transparent,
}

pub(crate) struct Ctx<'a> {
    pub time: f64,
    pub values: &'a [f64],
    pub lookups: &'a [LookupCurve],
    pub mode: DelayMode<'a>,
    pub fault: Option<String>,
}

impl<'a> Ctx<'a> {
    pub fn new(time: f64, values: &'a [f64], lookups: &'a [LookupCurve], mode: DelayMode<'a>) -> Self {
        Ctx {
            time,
            values,
            lookups,
            mode,
            fault: None,
        }
    }

    pub fn eval(&mut self, node: &Node) -> f64 {
        match node {
            Node::Const(v) => *v,
            Node::Var(i) => self.values[*i],
            Node::Neg(x) => -self.eval(x),
            Node::Bin(op, l, r) => {
                let a = self.eval(l);
                let b = self.eval(r);
                op.apply(a, b)
            }
            Node::Min(args) => {
                let mut acc = f64::INFINITY;
                for a in args {
                    let v = self.eval(a);
                    acc = if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.min(v) };
                }
                acc
            }
            Node::Max(args) => {
                let mut acc = f64::NEG_INFINITY;
                for a in args {
                    let v = self.eval(a);
                    acc = if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) };
                }
                acc
            }
            Node::Clip(args) => {
                let x = self.eval(&args[0]);
                let lo = self.eval(&args[1]);
                let hi = self.eval(&args[2]);
                if x.is_nan() || lo.is_nan() || hi.is_nan() {
                    f64::NAN
                } else {
                    x.max(lo).min(hi)
                }
            }
            Node::Step(height, start) => {
                let h = self.eval(height);
                let s = self.eval(start);
                if self.time >= s {
                    h
                } else {
                    0.0
                }
            }
            Node::Pulse(start, width) => {
                let s = self.eval(start);
                let w = self.eval(width);
                if self.time >= s && self.time < s + w {
                    1.0
                } else {
                    0.0
                }
            }
            Node::Time => self.time,
            Node::Lookup(curve, x) => {
                let v = self.eval(x);
                self.lookups[*curve].eval(v)
            }
            Node::Delay {
                kind,
                state,
                input,
                tau,
            } => {
                let x = self.eval(input);
                let t = self.eval(tau);
                self.delay(*kind, *state, x, t)
            }
        }
    }

    fn delay(&mut self, kind: DelayKind, state: usize, input: f64, tau: f64) -> f64 {
        let n = kind.stages();
        if !(tau > 0.0) && self.fault.is_none() {
            self.fault = Some(format!("delay time constant must be > 0, got {tau}"));
        }
        match &mut self.mode {
            DelayMode::Transparent => input,
            DelayMode::Init { states, ready } => {
                if !ready[state] {
                    for k in 0..n {
                        states[state + k] = input;
                        ready[state + k] = true;
                    }
                }
                states[state + n - 1]
            }
            DelayMode::Running { states, derivs } => {
                let stage_tau = tau / n as f64;
                let mut upstream = input;
                for k in 0..n {
                    let level = states[state + k];
                    derivs[state + k] = (upstream - level) / stage_tau;
                    upstream = level;
                }
                states[state + n - 1]
            }
        }
    }
}

struct Lowering<'a> {
    index: &'a HashMap<String, usize>,
    lookup_index: &'a HashMap<String, usize>,
    n_delay_states: usize,
}

impl Lowering<'_> {
    fn lower(&mut self, expr: &Expr) -> Result<Node, ModelError> {
        Ok(match expr {
            Expr::Const(v) => Node::Const(*v),
            Expr::Var(id) => Node::Var(
                *self
                    .index
                    .get(id.as_str())
                    .ok_or_else(|| ModelError::UnknownVariable(id.to_string()))?,
            ),
            Expr::Neg(x) => Node::Neg(Box::new(self.lower(x)?)),
            Expr::Binary(op, l, r) => Node::Bin(*op, Box::new(self.lower(l)?), Box::new(self.lower(r)?)),
            Expr::Call(b, args) => {
                if !b.arity().accepts(args.len()) {
                    return Err(ModelError::Malformed(format!(
                        "{} expects {} argument(s), got {}",
                        b.name(),
                        b.arity(),
                        args.len()
                    )));
                }
                match b {
                    Builtin::Min => Node::Min(self.lower_all(args)?),
                    Builtin::Max => Node::Max(self.lower_all(args)?),
                    Builtin::Clip => {
                        let [x, lo, hi]: [Node; 3] = self
                            .lower_all(args)?
                            .try_into()
                            .expect("arity checked");
                        Node::Clip(Box::new([x, lo, hi]))
                    }
                    Builtin::Step => {
                        Node::Step(Box::new(self.lower(&args[0])?), Box::new(self.lower(&args[1])?))
                    }
                    Builtin::Pulse => {
                        Node::Pulse(Box::new(self.lower(&args[0])?), Box::new(self.lower(&args[1])?))
                    }
                    Builtin::Time => Node::Time,
                    Builtin::Lookup => {
                        let curve = match &args[0] {
                            Expr::Var(id) => *self
                                .lookup_index
                                .get(id.as_str())
                                .ok_or_else(|| ModelError::UnknownVariable(id.to_string()))?,
                            _ => {
                                return Err(ModelError::Malformed(
                                    "LOOKUP expects a lookup name as its first argument".into(),
                                ))
                            }
                        };
                        Node::Lookup(curve, Box::new(self.lower(&args[1])?))
                    }
                    Builtin::Smooth | Builtin::Delay1 | Builtin::Delay3 => {
                        let kind = if *b == Builtin::Delay3 {
                            DelayKind::Third
                        } else {
                            DelayKind::First
                        };
                        let input = Box::new(self.lower(&args[0])?);
                        let tau = Box::new(self.lower(&args[1])?);
                        let state = self.n_delay_states;
                        self.n_delay_states += kind.stages();
                        Node::Delay {
                            kind,
                            state,
                            input,
                            tau,
                        }
                    }
                }
            }
        })
    }

    fn lower_all(&mut self, args: &[Expr]) -> Result<Vec<Node>, ModelError> {
        args.iter().map(|a| self.lower(a)).collect()
    }
}

impl Program {
    /// Structural lowering only; run [`crate::validate::validate_model`]
    /// first for diagnostics.
    pub fn compile(spec: &ModelSpec) -> Result<Program, ModelError> {
        let names: Vec<VariableId> = spec.variable_ids().cloned().collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, id) in names.iter().enumerate() {
            if index.insert(id.to_string(), i).is_some() {
                return Err(ModelError::Malformed(format!("duplicate declaration of `{id}`")));
            }
        }
        let mut lookups = Vec::new();
        let mut lookup_index = HashMap::new();
        for (name, def) in &spec.lookups {
            let curve = resolve_lookup(name.as_str(), def).map_err(|e| ModelError::BadLookup {
                name: name.to_string(),
                message: e.to_string(),
            })?;
            lookup_index.insert(name.to_string(), lookups.len());
            lookups.push(curve);
        }
        let n_params = spec.params.len();
        let mut low = Lowering {
            index: &index,
            lookup_index: &lookup_index,
            n_delay_states: 0,
        };
        let mut stocks = Vec::with_capacity(spec.stocks.len());
        for (k, s) in spec.stocks.iter().enumerate() {
            stocks.push(CompiledStock {
                slot: n_params + k,
                initial: low.lower(&s.initial)?,
                inflow: low.lower(&s.inflow)?,
                outflow: low.lower(&s.outflow)?,
            });
        }
        let aux_base = n_params + spec.stocks.len();
        let mut aux_by_decl = Vec::with_capacity(spec.auxes.len());
        for (k, a) in spec.auxes.iter().enumerate() {
            aux_by_decl.push((aux_base + k, low.lower(&a.expr)?));
        }
        let order = evaluation_indices(spec)?;
        let auxes = order.iter().map(|&k| aux_by_decl[k].clone()).collect();
        let n_delay_states = low.n_delay_states;
        Ok(Program {
            names,
            index,
            n_params,
            param_values: spec.params.iter().map(|p| p.value).collect(),
            stocks,
            auxes,
            aux_by_decl,
            lookups,
            n_delay_states,
        })
    }

    pub fn n_stocks(&self) -> usize {
        self.stocks.len()
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}
