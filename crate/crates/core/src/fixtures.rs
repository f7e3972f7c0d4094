//! Small reference models with known analytic behavior.

use crate::model::{BinOp, Builtin, Expr, LookupDef, ModelSpec};

fn mul(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Mul, a, b)
}

fn sub(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Sub, a, b)
}

fn div(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Div, a, b)
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

/// `dx/dt = -k x`, `x(0) = 1`, `k = 1`.
pub fn exponential_decay() -> ModelSpec {
    ModelSpec::new("exponential_decay")
        .with_param("k", 1.0, "1/time")
        .with_stock("x", 1.0.into(), 0.0.into(), mul(v("k"), v("x")), "1")
}

/// `dx/dt = αx − βxy`, `dy/dt = δxy − γy`, all rates 1, `x0 = y0 = 0.5`.
pub fn lotka_volterra() -> ModelSpec {
    ModelSpec::new("lotka_volterra")
        .with_param("alpha", 1.0, "1/time")
        .with_param("beta", 1.0, "1/time")
        .with_param("gamma", 1.0, "1/time")
        .with_param("delta", 1.0, "1/time")
        .with_param("x0", 0.5, "1")
        .with_param("y0", 0.5, "1")
        .with_stock(
            "prey",
            v("x0"),
            mul(v("alpha"), v("prey")),
            mul(mul(v("beta"), v("prey")), v("predator")),
            "1",
        )
        .with_stock(
            "predator",
            v("y0"),
            mul(mul(v("delta"), v("prey")), v("predator")),
            mul(v("gamma"), v("predator")),
            "1",
        )
}

/// `C = δx − γ ln x + βy − α ln y`, conserved along Lotka-Volterra orbits.
pub fn lotka_volterra_invariant(alpha: f64, beta: f64, gamma: f64, delta: f64, x: f64, y: f64) -> f64 {
    delta * x - gamma * x.ln() + beta * y - alpha * y.ln()
}

/// `x'' = -x` as two stocks; no steady state exists.
pub fn undamped_oscillator() -> ModelSpec {
    ModelSpec::new("undamped_oscillator")
        .with_stock("position", 1.0.into(), v("velocity"), 0.0.into(), "1")
        .with_stock("velocity", 0.0.into(), 0.0.into(), v("position"), "1")
}

/// One stock with every flow zero.
pub fn constant_stock() -> ModelSpec {
    ModelSpec::new("constant_stock").with_stock("x", 3.0.into(), 0.0.into(), 0.0.into(), "1")
}

/// Linear-demand labor market.
///
/// Demand `a − b·w`, supply `F(w / w_dem)·pool` with the linear willingness
/// table `F(r) = r/2` on `[0, 2]`. Employment chases `MIN(demand, supply)`
/// and the wage moves with excess demand, so the equilibrium wage solves
/// demand = supply. Stocks are `exploitees` and `offered_salary`.
pub fn linear_labor_market() -> ModelSpec {
    let supply = mul(
        Expr::call(Builtin::Lookup, vec![v("f_willing"), div(v("offered_salary"), v("w_dem"))]),
        v("pool"),
    );
    ModelSpec::new("linear_labor_market")
        .with_param("a", 1000.0, "people")
        .with_param("b", 200.0, "people/money")
        .with_param("pool", 1000.0, "people")
        .with_param("w_dem", 1.0, "money")
        .with_param("hire_time", 4.0, "time")
        .with_param("wage_response", 7000.0, "people*time/money")
        .with_param("w_init", 1.0, "money")
        .with_lookup("f_willing", LookupDef::Points(vec![(0.0, 0.0), (2.0, 1.0)]))
        .with_stock(
            "exploitees",
            0.0.into(),
            div(sub(v("hiring_target"), v("exploitees")), v("hire_time")),
            0.0.into(),
            "people",
        )
        .with_stock(
            "offered_salary",
            v("w_init"),
            div(sub(v("demand"), v("supply")), v("wage_response")),
            0.0.into(),
            "money",
        )
        .with_aux("demand", sub(v("a"), mul(v("b"), v("offered_salary"))), "people")
        .with_aux("supply", supply, "people")
        .with_aux(
            "hiring_target",
            Expr::call(Builtin::Min, vec![v("demand"), v("supply")]),
            "people",
        )
        .with_aux(
            "willing_unhired",
            Expr::call(Builtin::Max, vec![sub(v("supply"), v("exploitees")), 0.0.into()]),
            "people",
        )
}

/// Closed-form equilibrium `(wage, employment)` of [`linear_labor_market`]
/// with its default parameters, optionally with a binding wage floor.
pub fn linear_labor_market_equilibrium(floor: Option<f64>) -> (f64, f64) {
    let (a, b, pool, w_dem) = (1000.0, 200.0, 1000.0, 1.0);
    let w_star = a / (b + pool / (2.0 * w_dem));
    let w = floor.map_or(w_star, |f| f.max(w_star));
    let demand = a - b * w;
    let supply = (w / w_dem / 2.0).min(1.0) * pool;
    (w, demand.min(supply))
}
