//! Static checks on a [`ModelSpec`] and the auxiliary evaluation order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::ModelError;
use crate::model::{BinOp, Builtin, Expr, ModelSpec, VarKind, VariableId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Warning)
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn into_result(self) -> Result<(), ModelError> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(ModelError::Invalid(
                self.findings
                    .into_iter()
                    .filter(|f| f.severity == Severity::Error)
                    .collect(),
            ))
        }
    }

    fn error(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Error,
            location: location.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            location: location.into(),
            message: message.into(),
        });
    }
}

/// Runs every static check. Findings are data; this never fails.
pub fn validate_model(spec: &ModelSpec) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut seen = HashSet::new();
    for id in spec.all_ids() {
        if !seen.insert(id.as_str()) {
            report.error(id.to_string(), format!("duplicate declaration of `{id}`"));
        }
    }

    for p in &spec.params {
        let loc = format!("param {}", p.id);
        if !p.value.is_finite() {
            report.error(&loc, "value is not finite");
        } else if !p.admits(p.value) {
            report.error(
                &loc,
                format!(
                    "value {} outside admissible range [{}, {}]",
                    p.value, p.range.0, p.range.1
                ),
            );
        }
    }

    for (name, def) in &spec.lookups {
        if let Err(e) = crate::willingness::resolve_lookup(name.as_str(), def) {
            report.error(format!("lookup {name}"), e.to_string());
        }
    }

    for (loc, expr) in equations(spec) {
        check_expr(spec, &loc, expr, &mut report);
    }

    for s in &spec.stocks {
        let mut bad = BTreeSet::new();
        s.initial.visit_refs(&mut |id| {
            if matches!(spec.kind_of(id.as_str()), Some(VarKind::Stock | VarKind::Aux)) {
                bad.insert(id.clone());
            }
        });
        for id in bad {
            report.error(
                format!("stock {} (initial)", s.id),
                format!("initial value may reference parameters only, found `{id}`"),
            );
        }
        let mut has_delay = false;
        s.initial.walk(&mut |e| {
            if let Expr::Call(b, _) = e {
                has_delay |= b.is_delay();
            }
        });
        if has_delay {
            report.error(
                format!("stock {} (initial)", s.id),
                "initial value may not contain delay functions",
            );
        }
    }

    for cycle in aux_cycles(spec) {
        let path: Vec<&str> = cycle.iter().map(|v| v.as_str()).collect();
        report.error(
            format!("aux {}", cycle[0]),
            format!("algebraic cycle {}", path.join("→")),
        );
    }

    check_units(spec, &mut report);

    if report.is_ok() {
        if let Err(message) = crate::engine::check_initial_flows(spec) {
            report.error("initial point", message);
        }
    }

    report
}

fn equations(spec: &ModelSpec) -> Vec<(String, &Expr)> {
    let mut out = Vec::new();
    for s in &spec.stocks {
        out.push((format!("stock {} (initial)", s.id), &s.initial));
        out.push((format!("stock {} (inflow)", s.id), &s.inflow));
        out.push((format!("stock {} (outflow)", s.id), &s.outflow));
    }
    for a in &spec.auxes {
        out.push((format!("aux {}", a.id), &a.expr));
    }
    out
}

fn check_expr(spec: &ModelSpec, loc: &str, expr: &Expr, report: &mut ValidationReport) {
    let mut undeclared = BTreeSet::new();
    let mut misused = BTreeSet::new();
    expr.visit_refs(&mut |id| match spec.kind_of(id.as_str()) {
        None => {
            undeclared.insert(id.clone());
        }
        Some(VarKind::Lookup) => {
            misused.insert(id.clone());
        }
        Some(_) => {}
    });
    for id in undeclared {
        report.error(loc, format!("undeclared reference {id}"));
    }
    for id in misused {
        report.error(loc, format!("lookup `{id}` used as a value"));
    }
    expr.walk(&mut |e| {
        if let Expr::Call(b, args) = e {
            let arity = b.arity();
            if !arity.accepts(args.len()) {
                report.error(
                    loc,
                    format!(
                        "{} expects {} argument(s), got {}",
                        b.name(),
                        arity,
                        args.len()
                    ),
                );
            }
            if *b == Builtin::Lookup {
                match args.first() {
                    Some(Expr::Var(id)) if spec.lookups.contains_key(id.as_str()) => {}
                    Some(Expr::Var(id)) => {
                        report.error(loc, format!("undeclared lookup {id}"));
                    }
                    _ => report.error(loc, "LOOKUP expects a lookup name as its first argument"),
                }
            }
        }
    });
}

/// Auxiliary-to-auxiliary dependencies, indexed by declaration position.
fn aux_dependencies(spec: &ModelSpec) -> Vec<Vec<usize>> {
    let index: HashMap<&str, usize> = spec
        .auxes
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.as_str(), i))
        .collect();
    spec.auxes
        .iter()
        .map(|a| {
            let mut deps: Vec<usize> = a
                .expr
                .references()
                .iter()
                .filter_map(|r| index.get(r.as_str()).copied())
                .collect();
            deps.sort_unstable();
            deps
        })
        .collect()
}

/// One representative cycle per strongly connected component of the
/// auxiliary dependency graph (including self-references).
fn aux_cycles(spec: &ModelSpec) -> Vec<Vec<VariableId>> {
    let deps = aux_dependencies(spec);
    let sccs = tarjan(&deps);
    let mut out = Vec::new();
    for comp in sccs {
        let members: HashSet<usize> = comp.iter().copied().collect();
        let start = *comp.iter().min().expect("non-empty component");
        if comp.len() == 1 && !deps[start].contains(&start) {
            continue;
        }
        // walk dependencies inside the component until we return to start
        let mut path = vec![start];
        let mut visited = HashSet::from([start]);
        let found = extend_to(start, start, &deps, &members, &mut path, &mut visited);
        debug_assert!(found);
        path.push(start);
        out.push(path.into_iter().map(|i| spec.auxes[i].id.clone()).collect());
    }
    out.sort();
    out
}

fn extend_to(
    at: usize,
    target: usize,
    deps: &[Vec<usize>],
    members: &HashSet<usize>,
    path: &mut Vec<usize>,
    visited: &mut HashSet<usize>,
) -> bool {
    for &next in &deps[at] {
        if next == target {
            return true;
        }
        if members.contains(&next) && visited.insert(next) {
            path.push(next);
            if extend_to(next, target, deps, members, path, visited) {
                return true;
            }
            path.pop();
        }
    }
    false
}

pub(crate) fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for i in 0..s.adj[v].len() {
            let w = s.adj[v][i];
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("stack holds component");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }
    let n = adj.len();
    let mut s = State {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}



/// Auxiliaries ordered so each follows everything it references; ties go to
/// declaration order.
pub fn evaluation_order(spec: &ModelSpec) -> Result<Vec<VariableId>, ModelError> {
    evaluation_indices(spec).map(|order| {
        order
            .into_iter()
            .map(|i| spec.auxes[i].id.clone())
            .collect()
    })
}

pub(crate) fn evaluation_indices(spec: &ModelSpec) -> Result<Vec<usize>, ModelError> {
    let deps = aux_dependencies(spec);
    let n = deps.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d] && d != i));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                let stuck: Vec<&str> = (0..n)
                    .filter(|&i| !done[i])
                    .map(|i| spec.auxes[i].id.as_str())
                    .collect();
                return Err(ModelError::Cycle(stuck.join(", ")));
            }
        }
    }
    Ok(order)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum UnitTag {
    Any,
    Known(String),
}

impl UnitTag {
    fn from_decl(unit: &str) -> UnitTag {
        let u = unit.trim();
        if u.is_empty() || u == "1" {
            UnitTag::Any
        } else {
            UnitTag::Known(u.to_string())
        }
    }
}

fn check_units(spec: &ModelSpec, report: &mut ValidationReport) {
    let units: BTreeMap<&str, UnitTag> = spec
        .variable_ids()
        .map(|id| {
            (
                id.as_str(),
                UnitTag::from_decl(spec.unit_of(id.as_str()).unwrap_or("")),
            )
        })
        .collect();
    let mut mismatches = Vec::new();
    for (loc, expr) in equations(spec) {
        let mut local = Vec::new();
        infer_unit(expr, &units, &mut local);
        mismatches.extend(local.into_iter().map(|m| (loc.clone(), m)));
    }
    for s in &spec.stocks {
        let mut local = Vec::new();
        let inflow = infer_unit(&s.inflow, &units, &mut local);
        let outflow = infer_unit(&s.outflow, &units, &mut local);
        if let (UnitTag::Known(a), UnitTag::Known(b)) = (&inflow, &outflow) {
            if a != b {
                mismatches.push((
                    format!("stock {}", s.id),
                    format!("unit mismatch between inflow [{a}] and outflow [{b}]"),
                ));
            }
        }
    }
    for (loc, msg) in mismatches {
        report.error(loc, msg);
    }
    for s in &spec.stocks {
        if s.unit.trim().is_empty() {
            report.warning(format!("stock {}", s.id), "no unit declared");
        }
    }
}

fn unify(a: UnitTag, b: UnitTag, op: &str, errors: &mut Vec<String>) -> UnitTag {
    match (a, b) {
        (UnitTag::Any, other) | (other, UnitTag::Any) => other,
        (UnitTag::Known(x), UnitTag::Known(y)) => {
            if x != y {
                errors.push(format!("unit mismatch: [{x}] {op} [{y}]"));
            }
            UnitTag::Known(x)
        }
    }
}

fn infer_unit(expr: &Expr, units: &BTreeMap<&str, UnitTag>, errors: &mut Vec<String>) -> UnitTag {
    match expr {
        Expr::Const(_) => UnitTag::Any,
        Expr::Var(id) => units.get(id.as_str()).cloned().unwrap_or(UnitTag::Any),
        Expr::Neg(inner) => infer_unit(inner, units, errors),
        Expr::Binary(op, lhs, rhs) => {
            let l = infer_unit(lhs, units, errors);
            let r = infer_unit(rhs, units, errors);
            match op {
                BinOp::Add | BinOp::Sub => unify(l, r, op.symbol(), errors),
                BinOp::Mul => match (l, r) {
                    (UnitTag::Any, other) | (other, UnitTag::Any) => other,
                    _ => UnitTag::Any,
                },
                BinOp::Div => match r {
                    UnitTag::Any => l,
                    _ => UnitTag::Any,
                },
                BinOp::Pow => UnitTag::Any,
            }
        }
        Expr::Call(b, args) => {
            let mut tags: Vec<UnitTag> = match b {
                Builtin::Lookup => args
                    .iter()
                    .skip(1)
                    .map(|a| infer_unit(a, units, errors))
                    .collect(),
                _ => args.iter().map(|a| infer_unit(a, units, errors)).collect(),
            };
            match b {
                Builtin::Min | Builtin::Max | Builtin::Clip => {
                    let first = if tags.is_empty() {
                        UnitTag::Any
                    } else {
                        tags.remove(0)
                    };
                    tags.into_iter()
                        .fold(first, |acc, t| unify(acc, t, b.name(), errors))
                }
                Builtin::Step | Builtin::Smooth | Builtin::Delay1 | Builtin::Delay3 => {
                    tags.into_iter().next().unwrap_or(UnitTag::Any)
                }
                Builtin::Pulse | Builtin::Lookup | Builtin::Time => UnitTag::Any,
            }
        }
    }
}
