#![allow(dead_code)]

use dynex::{BinOp, Builtin, Expr, LookupDef, ModelSpec, SignedDigraph, Sign, VariableId};
use rand::Rng;
use rand::seq::IndexedRandom;

const UNITS: [&str; 4] = ["", "1", "people", "money/time"];

fn number(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..5) {
        0 => rng.random_range(0..20) as f64,
        1 => -(rng.random_range(1..20) as f64),
        2 => rng.random_range(-1e3..1e3),
        3 => rng.random_range(1e-9..1e-6),
        _ => rng.random_range(0.0..1.0) * 10f64.powi(rng.random_range(-8..18)),
    }
}

fn leaf(rng: &mut impl Rng, names: &[String]) -> Expr {
    if names.is_empty() || rng.random_bool(0.4) {
        Expr::Const(number(rng))
    } else {
        Expr::var(names.choose(rng).unwrap())
    }
}

fn expr(rng: &mut impl Rng, names: &[String], lookups: &[String], depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.3) {
        return leaf(rng, names);
    }
    let sub = |rng: &mut _| expr(rng, names, lookups, depth - 1);
    match rng.random_range(0..10) {
        0..=4 => {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow].choose(rng).unwrap();
            Expr::binary(op, sub(rng), sub(rng))
        }
        5 => Expr::Neg(Box::new(sub(rng))),
        6 => {
            let n = rng.random_range(2..4);
            let b = if rng.random_bool(0.5) { Builtin::Min } else { Builtin::Max };
            Expr::call(b, (0..n).map(|_| sub(rng)).collect())
        }
        7 => Expr::call(Builtin::Clip, vec![sub(rng), sub(rng), sub(rng)]),
        8 => match rng.random_range(0..5) {
            0 => Expr::call(Builtin::Smooth, vec![sub(rng), sub(rng)]),
            1 => Expr::call(Builtin::Delay3, vec![sub(rng), sub(rng)]),
            2 => Expr::call(Builtin::Step, vec![sub(rng), sub(rng)]),
            3 => Expr::call(Builtin::Pulse, vec![sub(rng), sub(rng)]),
            _ => Expr::call(Builtin::Time, vec![]),
        },
        _ if !lookups.is_empty() => {
            Expr::call(Builtin::Lookup, vec![Expr::var(lookups.choose(rng).unwrap()), sub(rng)])
        }
        _ => sub(rng),
    }
}

/// A random model; may fail validation, callers filter with `validate_model`.
pub fn random_spec(rng: &mut impl Rng) -> ModelSpec {
    let mut spec = ModelSpec::new(format!("m{}", rng.random_range(0..1000)));
    let mut params = Vec::new();
    for i in 0..rng.random_range(0..4) {
        let name = format!("p{i}");
        spec = spec.with_param(&name, number(rng), UNITS.choose(rng).unwrap());
        params.push(name);
    }
    let mut lookups = Vec::new();
    for i in 0..rng.random_range(0..3) {
        let name = format!("f{i}");
        let def = match rng.random_range(0..3) {
            0 => LookupDef::Normal { median: rng.random_range(0.5..2.0), ratio90: rng.random_range(2.1..4.0) },
            1 => LookupDef::LogNormal { median: rng.random_range(0.5..2.0), ratio90: rng.random_range(2.1..4.0) },
            _ => {
                let mut x = 0.0;
                let mut y: f64 = 0.0;
                let mut pts = vec![(x, y)];
                for _ in 0..rng.random_range(1..4) {
                    x += rng.random_range(0.1..2.0);
                    y = (y + rng.random_range(0.05..0.5)).min(1.0);
                    pts.push((x, y));
                }
                pts.last_mut().unwrap().1 = 1.0;
                LookupDef::Points(pts)
            }
        };
        spec = spec.with_lookup(&name, def);
        lookups.push(name);
    }
    let n_stocks = rng.random_range(1..4);
    let stock_names: Vec<String> = (0..n_stocks).map(|i| format!("s{i}")).collect();
    let n_aux = rng.random_range(0..5);
    let aux_names: Vec<String> = (0..n_aux).map(|i| format!("a{i}")).collect();
    for s in &stock_names {
        let mut refs: Vec<String> = params.clone();
        refs.extend(stock_names.iter().cloned());
        refs.extend(aux_names.iter().cloned());
        let init = expr(rng, &params, &[], 1);
        let inflow = expr(rng, &refs, &lookups, 3);
        let outflow = expr(rng, &refs, &lookups, 3);
        spec = spec.with_stock(s, init, inflow, outflow, UNITS.choose(rng).unwrap());
    }
    for (i, a) in aux_names.iter().enumerate() {
        let mut refs: Vec<String> = params.clone();
        refs.extend(stock_names.iter().cloned());
        refs.extend(aux_names[..i].iter().cloned());
        let e = expr(rng, &refs, &lookups, 3);
        spec = spec.with_aux(a, e, UNITS.choose(rng).unwrap());
    }
    spec
}

pub fn node(i: usize) -> VariableId {
    VariableId::new(format!("n{i}")).unwrap()
}

/// Random signed digraph on `n` nodes named `n0..`, no self loops unless
/// `self_loops`.
pub fn random_digraph(rng: &mut impl Rng, n: usize, density: f64, self_loops: bool) -> SignedDigraph {
    let mut g = SignedDigraph::new();
    for i in 0..n {
        g.add_node(node(i));
    }
    for i in 0..n {
        for j in 0..n {
            if (i != j || self_loops) && rng.random_bool(density) {
                let sign = if rng.random_bool(0.5) { Sign::Positive } else { Sign::Negative };
                g.add_edge(node(i), node(j), sign);
            }
        }
    }
    g
}

/// Every simple cycle by exhaustive path extension from each start node
/// through larger-indexed nodes only, as sorted node-index sequences.
pub fn brute_force_cycles(g: &SignedDigraph, n: usize) -> Vec<Vec<usize>> {
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| g.sign(node(i).as_str(), node(j).as_str()).is_some()).collect())
        .collect();
    let mut out = Vec::new();
    fn extend(adj: &[Vec<bool>], path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let start = path[0];
        let last = *path.last().unwrap();
        if adj[last][start] {
            out.push(path.clone());
        }
        for next in start + 1..adj.len() {
            if adj[last][next] && !path.contains(&next) {
                path.push(next);
                extend(adj, path, out);
                path.pop();
            }
        }
    }
    for s in 0..n {
        extend(&adj, &mut vec![s], &mut out);
    }
    out.sort();
    out
}
