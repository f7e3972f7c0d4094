//! Signed causal graph of a model, with link polarities taken from central
//! finite differences at an operating point.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::compile::{Ctx, DelayMode, Node, Program};
use crate::error::ModelError;
use crate::model::{ModelSpec, VariableId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        })
    }
}

/// Directed graph with one signed edge per ordered node pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignedDigraph {
    nodes: BTreeSet<VariableId>,
    edges: BTreeMap<(VariableId, VariableId), Sign>,
}

impl SignedDigraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: VariableId) {
        self.nodes.insert(id);
    }

    /// Inserts both endpoints; replaces any existing edge between them.
    pub fn add_edge(&mut self, from: VariableId, to: VariableId, sign: Sign) {
        self.nodes.insert(from.clone());
        self.nodes.insert(to.clone());
        self.edges.insert((from, to), sign);
    }

    /// Nodes in sorted order.
    pub fn nodes(&self) -> impl Iterator<Item = &VariableId> {
        self.nodes.iter()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&VariableId, &VariableId, Sign)> {
        self.edges.iter().map(|((a, b), s)| (a, b, *s))
    }

    pub fn sign(&self, from: &str, to: &str) -> Option<Sign> {
        // BTreeMap lookups need owned keys; names are validated identifiers
        let key = (VariableId::new(from).ok()?, VariableId::new(to).ok()?);
        self.edges.get(&key).copied()
    }

    /// Adjacency over node indices (sorted-name order) with edge signs.
    pub(crate) fn indexed(&self) -> (Vec<VariableId>, Vec<Vec<(usize, Sign)>>) {
        let names: Vec<VariableId> = self.nodes.iter().cloned().collect();
        let pos: BTreeMap<&VariableId, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); names.len()];
        for ((a, b), s) in &self.edges {
            adj[pos[a]].push((pos[b], *s));
        }
        (names, adj)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("operating point lacks a value for `{0}`")]
    MissingValue(String),
    #[error("operating point value for `{0}` is not finite")]
    NonFiniteValue(String),
    #[error("non-finite derivative of `{to}` with respect to `{from}`")]
    NonFiniteDerivative { from: String, to: String },
}

/// Signed graph at `point`, evaluated at time 0.
pub fn signed_graph(spec: &ModelSpec, point: &BTreeMap<VariableId, f64>) -> Result<SignedDigraph, GraphError> {
    signed_graph_at(spec, point, 0.0)
}

/// Signed graph at `point` with time-dependent builtins evaluated at `time`.
///
/// Delays are transparent: a delayed link carries the sign of its input.
pub fn signed_graph_at(
    spec: &ModelSpec,
    point: &BTreeMap<VariableId, f64>,
    time: f64,
) -> Result<SignedDigraph, GraphError> {
    let prog = Program::compile(spec)?;
    let mut values = Vec::with_capacity(prog.names.len());
    for id in &prog.names {
        let v = *point
            .get(id)
            .ok_or_else(|| GraphError::MissingValue(id.to_string()))?;
        if !v.is_finite() {
            return Err(GraphError::NonFiniteValue(id.to_string()));
        }
        values.push(v);
    }

    let mut g = SignedDigraph::new();
    for id in spec.variable_ids() {
        g.add_node(id.clone());
    }
    let base = spec.params.len();
    for (k, stock) in spec.stocks.iter().enumerate() {
        let c = &prog.stocks[k];
        let mut refs = stock.inflow.references();
        refs.extend(stock.outflow.references());
        for from in refs {
            let slot = prog.slot(from.as_str()).expect("compiled reference");
            let net = |ctx: &mut Ctx<'_>| ctx.eval(&c.inflow) - ctx.eval(&c.outflow);
            let d = partial(&prog, &mut values, slot, time, net)
                .ok_or_else(|| GraphError::NonFiniteDerivative {
                    from: from.to_string(),
                    to: stock.id.to_string(),
                })?;
            if d.abs() >= 1e-12 {
                g.add_edge(from, stock.id.clone(), Sign::of(d));
            }
        }
        debug_assert_eq!(c.slot, base + k);
    }
    for (k, aux) in spec.auxes.iter().enumerate() {
        let node: &Node = &prog.aux_by_decl[k].1;
        for from in aux.expr.references() {
            let slot = prog.slot(from.as_str()).expect("compiled reference");
            let d = partial(&prog, &mut values, slot, time, |ctx| ctx.eval(node)).ok_or_else(|| {
                GraphError::NonFiniteDerivative {
                    from: from.to_string(),
                    to: aux.id.to_string(),
                }
            })?;
            if d.abs() >= 1e-12 {
                g.add_edge(from, aux.id.clone(), Sign::of(d));
            }
        }
    }
    Ok(g)
}

fn partial(
    prog: &Program,
    values: &mut [f64],
    slot: usize,
    time: f64,
    f: impl Fn(&mut Ctx<'_>) -> f64,
) -> Option<f64> {
    let x = values[slot];
    let h = (1e-6 * x.abs()).max(1e-6);
    let at = |v: f64, values: &mut [f64]| {
        values[slot] = v;
        let mut ctx = Ctx::new(time, values, &prog.lookups, DelayMode::Transparent);
        f(&mut ctx)
    };
    let hi = at(x + h, values);
    let lo = at(x - h, values);
    values[slot] = x;
    let d = (hi - lo) / (2.0 * h);
    (hi.is_finite() && lo.is_finite() && d.is_finite()).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinOp, Builtin, Expr, LookupDef};

    fn point(pairs: &[(&str, f64)]) -> BTreeMap<VariableId, f64> {
        pairs
            .iter()
            .map(|(k, v)| (VariableId::new(*k).unwrap(), *v))
            .collect()
    }

    #[test]
    fn sum_has_positive_edges() {
        let spec = ModelSpec::new("m")
            .with_param("a", 1.0, "")
            .with_param("b", 2.0, "")
            .with_aux("y", Expr::binary(BinOp::Add, Expr::var("a"), Expr::var("b")), "");
        let g = signed_graph(&spec, &point(&[("a", 1.0), ("b", 2.0), ("y", 3.0)])).unwrap();
        assert_eq!(g.sign("a", "y"), Some(Sign::Positive));
        assert_eq!(g.sign("b", "y"), Some(Sign::Positive));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn quotient_denominator_is_negative() {
        let spec = ModelSpec::new("m")
            .with_param("w_off", 1.0, "")
            .with_param("w_dem", 1.0, "")
            .with_aux("r", Expr::binary(BinOp::Div, Expr::var("w_off"), Expr::var("w_dem")), "");
        let g = signed_graph(&spec, &point(&[("w_off", 1.0), ("w_dem", 1.0), ("r", 1.0)])).unwrap();
        assert_eq!(g.sign("w_dem", "r"), Some(Sign::Negative));
        assert_eq!(g.sign("w_off", "r"), Some(Sign::Positive));
    }

    #[test]
    fn monotone_expressions_match_analytic_signs() {
        let cases: Vec<(Expr, f64, Sign)> = vec![
            (Expr::binary(BinOp::Add, Expr::var("x"), 3.0.into()), 1.0, Sign::Positive),
            (Expr::binary(BinOp::Mul, (-2.0).into(), Expr::var("x")), 1.0, Sign::Negative),
            (Expr::binary(BinOp::Pow, Expr::var("x"), 2.0.into()), 1.5, Sign::Positive),
            (Expr::binary(BinOp::Pow, Expr::var("x"), 2.0.into()), -1.5, Sign::Negative),
            (
                Expr::call(Builtin::Lookup, vec![Expr::var("curve"), Expr::var("x")]),
                0.9,
                Sign::Positive,
            ),
            (
                Expr::Neg(Box::new(Expr::call(Builtin::Lookup, vec![Expr::var("curve"), Expr::var("x")]))),
                0.9,
                Sign::Negative,
            ),
        ];
        for (expr, x, expected) in cases {
            let spec = ModelSpec::new("m")
                .with_param("x", x, "")
                .with_lookup("curve", LookupDef::Normal { median: 1.0, ratio90: 1.5 })
                .with_aux("y", expr.clone(), "");
            let g = signed_graph(&spec, &point(&[("x", x), ("y", 0.0)])).unwrap();
            assert_eq!(g.sign("x", "y"), Some(expected), "{expr:?} at {x}");
        }
    }

    #[test]
    fn flat_dependency_is_omitted() {
        let spec = ModelSpec::new("m")
            .with_param("x", 5.0, "")
            .with_aux("y", Expr::call(Builtin::Min, vec![Expr::var("x"), 1.0.into()]), "");
        let g = signed_graph(&spec, &point(&[("x", 5.0), ("y", 1.0)])).unwrap();
        assert_eq!(g.sign("x", "y"), None);
    }

    #[test]
    fn flows_sign_stock_edges() {
        let spec = ModelSpec::new("m")
            .with_param("k", 0.5, "")
            .with_stock("s", 1.0.into(), Expr::var("gain"), Expr::var("loss"), "")
            .with_aux("gain", Expr::var("k"), "")
            .with_aux("loss", Expr::binary(BinOp::Mul, Expr::var("k"), Expr::var("s")), "");
        let p = point(&[("k", 0.5), ("s", 1.0), ("gain", 0.5), ("loss", 0.5)]);
        let g = signed_graph(&spec, &p).unwrap();
        assert_eq!(g.sign("gain", "s"), Some(Sign::Positive));
        assert_eq!(g.sign("loss", "s"), Some(Sign::Negative));
        assert_eq!(g.sign("s", "loss"), Some(Sign::Positive));
        assert_eq!(g.sign("s", "s"), None);
    }

    #[test]
    fn delays_are_transparent() {
        let spec = ModelSpec::new("m")
            .with_param("x", 2.0, "")
            .with_aux("y", Expr::call(Builtin::Smooth, vec![Expr::Neg(Box::new(Expr::var("x"))), 4.0.into()]), "");
        let g = signed_graph(&spec, &point(&[("x", 2.0), ("y", -2.0)])).unwrap();
        assert_eq!(g.sign("x", "y"), Some(Sign::Negative));
    }

    #[test]
    fn missing_and_non_finite_points() {
        let spec = ModelSpec::new("m")
            .with_param("x", 0.0, "")
            .with_aux("y", Expr::binary(BinOp::Div, 1.0.into(), Expr::var("x")), "");
        assert!(matches!(
            signed_graph(&spec, &point(&[("x", 0.0)])),
            Err(GraphError::MissingValue(_))
        ));
        // 1/x at 0: the perturbed points are finite but huge; the quotient is fine.
        // log-like blowups show up through 0^-1 at an exact zero:
        let spec = ModelSpec::new("m")
            .with_param("x", 0.0, "")
            .with_aux("y", Expr::binary(BinOp::Pow, Expr::var("x"), (-1.0).into()), "");
        let p = point(&[("x", 0.0), ("y", 0.0)]);
        assert!(signed_graph(&spec, &p).is_ok());
        let spec = ModelSpec::new("m")
            .with_param("x", 0.0, "")
            .with_aux("y", Expr::binary(BinOp::Pow, Expr::var("x"), 0.5.into()), "");
        assert!(matches!(
            signed_graph(&spec, &p),
            Err(GraphError::NonFiniteDerivative { .. })
        ));
    }
}
