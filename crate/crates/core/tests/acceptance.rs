//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use dynex::exploitation::{find_steady_state, settle_config, SETTLE_TOL, SETTLE_WINDOW};
use dynex::willingness::{calibrate, fraction_willing, DEFAULT_ANCHORS};
use dynex::{
    build_exploitation_model, enumerate_cycles, fixtures, loop_probe, match_named_loops, named_loops,
    parse_model, run_scenario, serialize_model, signed_graph, simulate, validate_model, write_csv,
    Calibration, CurveAnchor, CurveKind, IntegratorKind, MatchStatus, Polarity, Policy, Probe,
    RunConfig, VariableId, WillingnessCurve,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn model_file() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/exploitation.sd")
}

fn flagship() -> dynex::ModelSpec {
    build_exploitation_model(&Calibration::default()).expect("default calibration builds")
}

fn decay_error(kind: IntegratorKind, dt: f64) -> Result<f64, String> {
    let cfg = RunConfig::new(0.0, 1.0, dt).integrator(kind);
    let traj = simulate(&fixtures::exponential_decay(), &cfg).map_err(|e| e.to_string())?;
    let x1 = traj.last("x").ok_or("x not recorded")?;
    Ok((x1 - (-1.0f64).exp()).abs())
}

fn integrator_accuracy() -> Outcome {
    let rk4 = decay_error(IntegratorKind::Rk4, 0.1)?;
    let euler = decay_error(IntegratorKind::Euler, 0.1)?;
    ensure(rk4 < 1e-6, format!("RK4 error {rk4:e} >= 1e-6"))?;
    ensure(euler < 2e-2, format!("Euler error {euler:e} >= 2e-2"))?;
    let mut ratios = Vec::new();
    for (kind, lo, hi) in [(IntegratorKind::Euler, 1.8, 2.2), (IntegratorKind::Rk4, 12.0, 20.0)] {
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&dt| decay_error(kind, dt))
            .collect::<Result<_, _>>()?;
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            ensure((lo..=hi).contains(&r), format!("{kind} order ratio {r:.3} outside [{lo}, {hi}]"))?;
            ratios.push(format!("{kind} {r:.2}"));
        }
    }
    Ok(format!("rk4 err {rk4:.2e}, euler err {euler:.2e}, ratios {}", ratios.join(", ")))
}

fn smooth_step() -> Outcome {
    let tau = 2.0;
    let traj = dynex::smooth_response_probe(tau, 3.0 * tau, tau / 100.0).map_err(|e| e.to_string())?;
    let y = traj.value_at("y", 3.0 * tau).ok_or("y not recorded")?;
    let expected = 1.0 - (-3.0f64).exp();
    ensure((y - expected).abs() <= 1e-3, format!("y(3 tau) = {y}, expected {expected}"))?;
    Ok(format!("y(3 tau) = {y:.6} vs {expected:.6}"))
}

fn lotka_volterra() -> Outcome {
    let cfg = RunConfig::new(0.0, 30.0, 0.01);
    let traj = simulate(&fixtures::lotka_volterra(), &cfg).map_err(|e| e.to_string())?;
    let x = traj.series("prey").ok_or("prey missing")?;
    let y = traj.series("predator").ok_or("predator missing")?;
    // one full orbit: from the start to the second prey peak after it
    let peaks: Vec<usize> = (1..x.len() - 1).filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1]).collect();
    ensure(peaks.len() >= 2, "fewer than two prey peaks in 30 time units")?;
    let period = traj.times[peaks[1]] - traj.times[peaks[0]];
    let end = traj.times.iter().position(|&t| t >= period).ok_or("period beyond horizon")?;
    let c = |i: usize| x[i] - x[i].ln() + y[i] - y[i].ln();
    let c0 = c(0);
    let drift = (0..=end).map(|i| ((c(i) - c0) / c0).abs()).fold(0.0, f64::max);
    ensure(drift < 1e-3, format!("relative drift {drift:e}"))?;
    Ok(format!("period {period:.2}, relative drift {drift:.2e}"))
}

/// Normal CDF truncated at zero, from an independent implementation.
fn truncated_normal(r: f64, mu: f64, sigma: f64) -> f64 {
    let n = Normal::new(mu, sigma).unwrap();
    let z = n.cdf(0.0);
    (n.cdf(r) - z) / (1.0 - z)
}

fn willingness_anchors() -> Outcome {
    let curve = WillingnessCurve::default_normal();
    let at = |r: f64| fraction_willing(&curve, r).map_err(|e| e.to_string());
    let half = at(1.0)?;
    ensure((half - 0.5).abs() < 1e-9, format!("F(1) = {half}"))?;
    ensure(at(0.0)? == 0.0, "F(0) != 0")?;
    let f10 = at(10.0)?;
    ensure(f10 > 0.999, format!("F(10) = {f10}"))?;
    let fitted = calibrate(CurveKind::Normal, &[CurveAnchor::new(1.0, 0.5), CurveAnchor::new(1.5, 0.9)])
        .map_err(|e| e.to_string())?;
    let WillingnessCurve::NormalCdf { mu, sigma } = fitted else {
        return Err("normal calibration returned another form".into());
    };
    for a in DEFAULT_ANCHORS {
        let got = fraction_willing(&fitted, a.ratio).map_err(|e| e.to_string())?;
        let oracle = truncated_normal(a.ratio, mu, sigma);
        ensure((got - a.fraction).abs() < 1e-9, format!("F({}) = {got}, anchor {}", a.ratio, a.fraction))?;
        ensure((oracle - a.fraction).abs() < 1e-9, format!("oracle F({}) = {oracle}", a.ratio))?;
    }
    Ok(format!("F(1) = {half}, F(10) = {f10:.6}, mu = {mu:.6}, sigma = {sigma:.6}"))
}

fn loop_verification() -> Outcome {
    let spec = flagship();
    let ss = find_steady_state(&spec, &settle_config(), SETTLE_TOL, SETTLE_WINDOW).map_err(|e| e.to_string())?;
    let graph = signed_graph(&spec, &ss.values).map_err(|e| e.to_string())?;
    let report = enumerate_cycles(&graph, 12);
    let matches = match_named_loops(&report, &named_loops());
    let mut balancing = 0;
    let mut reinforcing = 0;
    for m in &matches.entries {
        let MatchStatus::Found(i) = m.status else {
            return Err(format!("{} is {:?}", m.label, m.status));
        };
        // recount polarity from the edge signs rather than trusting the label
        let negatives = report.cycles[i].0.edge_signs.iter().filter(|s| s.value() < 0).count();
        match (negatives % 2 == 1, m.expected) {
            (true, Polarity::Balancing) => balancing += 1,
            (false, Polarity::Reinforcing) => reinforcing += 1,
            _ => return Err(format!("{} has {negatives} negative links", m.label)),
        }
    }
    ensure(balancing == 4 && reinforcing == 2, format!("{balancing} balancing, {reinforcing} reinforcing"))?;
    Ok(format!("{} cycles, all six named loops found (4 balancing, 2 reinforcing)", report.cycles.len()))
}

fn loop_probes() -> Outcome {
    let spec = flagship();
    for p in Probe::ALL {
        loop_probe(&spec, p).map_err(|e| e.to_string())?;
    }
    let no_scarcity = build_exploitation_model(&Calibration { epsilon: 0.0, ..Calibration::default() })
        .map_err(|e| e.to_string())?;
    ensure(loop_probe(&no_scarcity, Probe::B1Scarcity).is_err(), "B1 passes with epsilon = 0")?;
    let no_burnout = build_exploitation_model(&Calibration { t_burnout: 1e9, ..Calibration::default() })
        .map_err(|e| e.to_string())?;
    ensure(loop_probe(&no_burnout, Probe::B3Burnout).is_err(), "B3 passes with t_burnout = 1e9")?;
    let drained = simulate(&spec, &RunConfig::new(0.0, 200.0, 0.125).with_override("revenue_share", 0.0))
        .map_err(|e| e.to_string())?;
    let k = drained.series("capacity").ok_or("capacity missing")?;
    ensure(k.windows(2).all(|w| w[1] <= w[0]), "capacity rose with revenue_share = 0")?;
    Ok("six probes pass; epsilon = 0 breaks B1, t_burnout = 1e9 breaks B3, revenue_share = 0 drains capacity".into())
}

fn employment(r: &dynex::ScenarioResult) -> f64 {
    r.metrics["employment"]
}

fn wage_floor() -> Outcome {
    // linear fixture: demand a - b w meets supply (w / 2 w_dem) pool
    let (a, b, pool, w_dem): (f64, f64, f64, f64) = (1000.0, 200.0, 1000.0, 1.0);
    let w_star = a / (b + pool / (2.0 * w_dem));
    let e_star = a - b * w_star;
    let w_floor = 1.2 * w_star;
    let e_floor = (a - b * w_floor).min(w_floor / (2.0 * w_dem) * pool);
    let lin = fixtures::linear_labor_market();
    let cfg = RunConfig::new(0.0, 2000.0, 0.125);
    let lin_base = run_scenario(&lin, "baseline", &Policy::none(), &cfg).map_err(|e| e.to_string())?;
    let lin_floor = run_scenario(&lin, "floor", &Policy::WageFloor { w_min: w_floor, from: 0.0 }, &cfg)
        .map_err(|e| e.to_string())?;
    for (got, want, what) in [(employment(&lin_base), e_star, "baseline"), (employment(&lin_floor), e_floor, "floor")] {
        ensure(((got - want) / want).abs() < 1e-3, format!("linear {what} employment {got}, oracle {want}"))?;
    }
    ensure(employment(&lin_floor) < employment(&lin_base), "linear floor did not lower employment")?;

    let spec = flagship();
    let base = run_scenario(&spec, "baseline", &Policy::none(), &settle_config()).map_err(|e| e.to_string())?;
    let w_ss = base.metrics["wage"];
    let floor_cfg = RunConfig::new(0.0, 3000.0, 0.125);
    let floor = run_scenario(&spec, "floor", &Policy::WageFloor { w_min: 1.2 * w_ss, from: 0.0 }, &floor_cfg)
        .map_err(|e| e.to_string())?;
    ensure(
        employment(&floor) < employment(&base),
        format!("flagship employment {} vs baseline {}", employment(&floor), employment(&base)),
    )?;
    Ok(format!(
        "linear E {:.3} -> {:.3} (oracle {e_star:.3} -> {e_floor:.3}); flagship E {:.1} -> {:.1}",
        employment(&lin_base),
        employment(&lin_floor),
        employment(&base),
        employment(&floor)
    ))
}

fn conservation() -> Outcome {
    let cal = Calibration::default();
    let spec = flagship();
    let traj = simulate(&spec, &RunConfig::new(0.0, 2000.0, 0.125)).map_err(|e| e.to_string())?;
    let p = traj.series("potential_exploitees").ok_or("pool missing")?;
    let e = traj.series("exploitees").ok_or("exploitees missing")?;
    let worst = p.iter().zip(e).map(|(p, e)| (p + e - cal.pool_init).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-9, format!("max |P + E - pool_init| = {worst:e}"))?;
    Ok(format!("max |P + E - pool_init| = {worst:.2e} over {} rows", traj.len()))
}

fn cycle_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0;
    for trial in 0..50 {
        let n = rng.random_range(1..=8);
        let density = rng.random_range(0.1..0.6);
        let g = common::random_digraph(&mut rng, n, density, true);
        let expected = common::brute_force_cycles(&g, n);
        let report = enumerate_cycles(&g, 8);
        let mut got: Vec<Vec<usize>> = report
            .cycles
            .iter()
            .map(|(c, _)| c.nodes.iter().map(|id| id.as_str()[1..].parse().unwrap()).collect())
            .collect();
        got.sort();
        ensure(got == expected, format!("graph {trial}: {} cycles vs {} brute force", got.len(), expected.len()))?;
        total += got.len();
    }
    Ok(format!("50 graphs, {total} cycles, all identical"))
}

fn parser_round_trip() -> Outcome {
    let spec = flagship();
    let text = std::fs::read_to_string(model_file()).map_err(|e| e.to_string())?;
    ensure(text == serialize_model(&spec), "models/exploitation.sd differs from the builder")?;
    let parsed = parse_model(&text).map_err(|e| e.to_string())?;
    ensure(parsed == spec, "parsed model file differs from the builder")?;
    ensure(serialize_model(&parsed) == text, "flagship text is not a fixpoint")?;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    while checked < 200 {
        let s = common::random_spec(&mut rng);
        if !validate_model(&s).is_ok() {
            continue;
        }
        let once = serialize_model(&s);
        let back = parse_model(&once).map_err(|e| format!("{e}\n{once}"))?;
        ensure(back == s, format!("round trip changed the spec:\n{once}"))?;
        ensure(serialize_model(&back) == once, format!("not a fixpoint:\n{once}"))?;
        checked += 1;
    }

    let cfg = RunConfig::new(0.0, 200.0, 0.125);
    let csv = || -> Result<Vec<u8>, String> {
        let traj = simulate(&spec, &cfg).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_csv(&traj, &traj.names.clone(), &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let (first, second) = (csv()?, csv()?);
    ensure(first == second, "CSV differs between runs")?;
    let columns: Vec<VariableId> = vec![VariableId::new("exploitees").unwrap()];
    let traj = simulate(&spec, &RunConfig::new(0.0, 12.5, 0.125)).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_csv(&traj, &columns, &mut buf).map_err(|e| e.to_string())?;
    let rows = String::from_utf8(buf).map_err(|e| e.to_string())?.lines().count() - 1;
    ensure(rows == 101, format!("100-step run wrote {rows} rows"))?;
    Ok(format!("golden file matches, 200 random specs round-trip, {} CSV bytes identical", first.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("integrator accuracy", integrator_accuracy),
        ("SMOOTH step response", smooth_step),
        ("Lotka-Volterra invariant", lotka_volterra),
        ("willingness anchors", willingness_anchors),
        ("named feedback loops", loop_verification),
        ("loop probe signatures", loop_probes),
        ("wage floor lowers employment", wage_floor),
        ("closed-population conservation", conservation),
        ("cycle enumeration oracle", cycle_oracle),
        ("parser round trip and CSV determinism", parser_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
