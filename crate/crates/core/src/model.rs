//! Declarative stock-flow model representation.
//!
//! A [`ModelSpec`] is a plain value: parameters, lookups, stocks and
//! auxiliaries, each defined by an [`Expr`]. Nothing here evaluates
//! anything; see [`crate::validate`] and [`crate::engine`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::ModelError;

/// Lowercase identifier naming a variable or lookup, `[a-z_][a-z0-9_]*`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(String);

impl VariableId {
    pub fn new(name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(VariableId(name))
        } else {
            Err(ModelError::InvalidIdentifier(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c == '_' || c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c == '_' || c.is_ascii_lowercase() || c.is_ascii_digit())
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for VariableId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariableId::new(s)
    }
}

impl AsRef<str> for VariableId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for VariableId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    pub fn apply(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            BinOp::Add => lhs + rhs,
            BinOp::Sub => lhs - rhs,
            BinOp::Mul => lhs * rhs,
            BinOp::Div => lhs / rhs,
            BinOp::Pow => lhs.powf(rhs),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Min,
    Max,
    Clip,
    Step,
    Pulse,
    Smooth,
    Delay1,
    Delay3,
    Lookup,
    Time,
}

/// Accepted argument counts for a builtin call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exactly(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, "at least {k}"),
        }
    }
}

impl Builtin {
    pub const ALL: [Builtin; 10] = [
        Builtin::Min,
        Builtin::Max,
        Builtin::Clip,
        Builtin::Step,
        Builtin::Pulse,
        Builtin::Smooth,
        Builtin::Delay1,
        Builtin::Delay3,
        Builtin::Lookup,
        Builtin::Time,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Min => "MIN",
            Builtin::Max => "MAX",
            Builtin::Clip => "CLIP",
            Builtin::Step => "STEP",
            Builtin::Pulse => "PULSE",
            Builtin::Smooth => "SMOOTH",
            Builtin::Delay1 => "DELAY1",
            Builtin::Delay3 => "DELAY3",
            Builtin::Lookup => "LOOKUP",
            Builtin::Time => "TIME",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    /// MIN/MAX are variadic; CLIP is (x, lo, hi); STEP is (height, start);
    /// PULSE is (start, width); LOOKUP is (curve, x).
    pub fn arity(self) -> Arity {
        match self {
            Builtin::Min | Builtin::Max => Arity::AtLeast(2),
            Builtin::Clip => Arity::Exactly(3),
            Builtin::Step
            | Builtin::Pulse
            | Builtin::Smooth
            | Builtin::Delay1
            | Builtin::Delay3
            | Builtin::Lookup => Arity::Exactly(2),
            Builtin::Time => Arity::Exactly(0),
        }
    }

    pub fn is_delay(self) -> bool {
        matches!(self, Builtin::Smooth | Builtin::Delay1 | Builtin::Delay3)
    }
}

/// Expression tree for every equation in a model.
///
/// `LOOKUP` carries its curve as a `Var` in argument position 0.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(VariableId),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(VariableId::new(name).expect("valid identifier"))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(builtin: Builtin, args: Vec<Expr>) -> Expr {
        Expr::Call(builtin, args)
    }

    /// Variables read by this expression, excluding lookup curve names.
    pub fn references(&self) -> BTreeSet<VariableId> {
        let mut out = BTreeSet::new();
        self.visit_refs(&mut |id| {
            out.insert(id.clone());
        });
        out
    }

    /// Visits variable references in left-to-right order (duplicates included).
    pub fn visit_refs<'a>(&'a self, f: &mut impl FnMut(&'a VariableId)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(id) => f(id),
            Expr::Neg(inner) => inner.visit_refs(f),
            Expr::Binary(_, lhs, rhs) => {
                lhs.visit_refs(f);
                rhs.visit_refs(f);
            }
            Expr::Call(Builtin::Lookup, args) => {
                for arg in args.iter().skip(1) {
                    arg.visit_refs(f);
                }
            }
            Expr::Call(_, args) => {
                for arg in args {
                    arg.visit_refs(f);
                }
            }
        }
    }

    /// Visits every sub-expression, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(inner) => inner.walk(f),
            Expr::Binary(_, lhs, rhs) => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

/// Declared unit tag. `"1"` (or empty) is dimensionless.
pub type Unit = String;

#[derive(Clone, Debug, PartialEq)]
pub struct StockDef {
    pub id: VariableId,
    pub initial: Expr,
    pub inflow: Expr,
    pub outflow: Expr,
    pub unit: Unit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxDef {
    pub id: VariableId,
    pub expr: Expr,
    pub unit: Unit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDef {
    pub id: VariableId,
    pub value: f64,
    pub unit: Unit,
    pub range: (f64, f64),
}

impl ParamDef {
    pub fn new(id: VariableId, value: f64, unit: impl Into<Unit>) -> Self {
        ParamDef {
            id,
            value,
            unit: unit.into(),
            range: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn admits(&self, value: f64) -> bool {
        value >= self.range.0 && value <= self.range.1
    }
}

/// A lookup curve as declared in a model file.
///
/// The two distribution forms are stored by their anchors (median and the
/// ratio at which 90% are willing) and resolved to a
/// [`WillingnessCurve`](crate::willingness::WillingnessCurve) at compile time.
#[derive(Clone, Debug, PartialEq)]
pub enum LookupDef {
    Normal { median: f64, ratio90: f64 },
    LogNormal { median: f64, ratio90: f64 },
    /// Piecewise-linear table, constant outside the first and last point.
    Points(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModelSpec {
    pub name: String,
    pub params: Vec<ParamDef>,
    pub lookups: BTreeMap<VariableId, LookupDef>,
    pub stocks: Vec<StockDef>,
    pub auxes: Vec<AuxDef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Param,
    Stock,
    Aux,
    Lookup,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ModelSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn param(&self, id: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.id.as_str() == id)
    }

    pub fn param_mut(&mut self, id: &str) -> Option<&mut ParamDef> {
        self.params.iter_mut().find(|p| p.id.as_str() == id)
    }

    pub fn stock(&self, id: &str) -> Option<&StockDef> {
        self.stocks.iter().find(|s| s.id.as_str() == id)
    }

    pub fn stock_mut(&mut self, id: &str) -> Option<&mut StockDef> {
        self.stocks.iter_mut().find(|s| s.id.as_str() == id)
    }

    pub fn aux(&self, id: &str) -> Option<&AuxDef> {
        self.auxes.iter().find(|a| a.id.as_str() == id)
    }

    pub fn aux_mut(&mut self, id: &str) -> Option<&mut AuxDef> {
        self.auxes.iter_mut().find(|a| a.id.as_str() == id)
    }

    /// Kind of the first declaration with this name (declaration order:
    /// params, lookups, stocks, auxes).
    pub fn kind_of(&self, id: &str) -> Option<VarKind> {
        if self.param(id).is_some() {
            Some(VarKind::Param)
        } else if self.lookups.contains_key(id) {
            Some(VarKind::Lookup)
        } else if self.stock(id).is_some() {
            Some(VarKind::Stock)
        } else if self.aux(id).is_some() {
            Some(VarKind::Aux)
        } else {
            None
        }
    }

    pub fn unit_of(&self, id: &str) -> Option<&str> {
        if let Some(p) = self.param(id) {
            return Some(&p.unit);
        }
        if let Some(s) = self.stock(id) {
            return Some(&s.unit);
        }
        self.aux(id).map(|a| a.unit.as_str())
    }

    /// Every declared name, in declaration order, lookups included.
    pub fn all_ids(&self) -> impl Iterator<Item = &VariableId> {
        self.params
            .iter()
            .map(|p| &p.id)
            .chain(self.lookups.keys())
            .chain(self.stocks.iter().map(|s| &s.id))
            .chain(self.auxes.iter().map(|a| &a.id))
    }

    /// Variables that carry a value (params, stocks, auxes), in declaration order.
    pub fn variable_ids(&self) -> impl Iterator<Item = &VariableId> {
        self.params
            .iter()
            .map(|p| &p.id)
            .chain(self.stocks.iter().map(|s| &s.id))
            .chain(self.auxes.iter().map(|a| &a.id))
    }

    pub fn with_param(mut self, name: &str, value: f64, unit: &str) -> Self {
        self.params
            .push(ParamDef::new(VariableId::new(name).expect("valid identifier"), value, unit));
        self
    }

    pub fn with_stock(
        mut self,
        name: &str,
        initial: Expr,
        inflow: Expr,
        outflow: Expr,
        unit: &str,
    ) -> Self {
        self.stocks.push(StockDef {
            id: VariableId::new(name).expect("valid identifier"),
            initial,
            inflow,
            outflow,
            unit: unit.to_string(),
        });
        self
    }

    pub fn with_aux(mut self, name: &str, expr: Expr, unit: &str) -> Self {
        self.auxes.push(AuxDef {
            id: VariableId::new(name).expect("valid identifier"),
            expr,
            unit: unit.to_string(),
        });
        self
    }

    pub fn with_lookup(mut self, name: &str, def: LookupDef) -> Self {
        self.lookups
            .insert(VariableId::new(name).expect("valid identifier"), def);
        self
    }
}
