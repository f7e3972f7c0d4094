use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dynex::dsl::{parse_plan, parse_scenarios};
use dynex::exploitation::settle_config;
use dynex::scenario::{metrics_from, SweepPlan};
use dynex::willingness::{calibrate, CurveAnchor, CurveKind};
use dynex::{
    compare, enumerate_cycles, match_named_loops, named_loops, parse_model, run_scenario, signed_graph,
    simulate, sweep, write_csv, DslError, IntegratorKind, MatchStatus, ModelSpec, Policy, RunConfig,
    VariableId,
};

#[derive(Parser)]
#[command(name = "dynex", version, about = "Stock-and-flow simulation and feedback-loop analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file; findings go to stderr.
    Validate { model: PathBuf },
    /// Simulate a model and write its trajectory as CSV.
    Simulate {
        model: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Output file, or `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
        /// Comma-separated columns; defaults to every variable.
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
    },
    /// List feedback loops at the model's settled operating point.
    Loops {
        model: PathBuf,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        /// Check that a named loop set is present.
        #[arg(long)]
        expect: Option<Expectation>,
    },
    /// Compare policy scenarios against the unmodified baseline.
    Scenario {
        model: PathBuf,
        scenarios: PathBuf,
        #[command(flatten)]
        run: SettleFlags,
    },
    /// Run a parameter sweep, one CSV row per point.
    Sweep {
        model: PathBuf,
        plan: PathBuf,
        #[command(flatten)]
        run: SettleFlags,
    },
    /// Fit a willingness curve to two anchors.
    Calibrate {
        #[arg(long)]
        kind: CurveArg,
        /// `RATIO,FRACTION`; give exactly two.
        #[arg(long = "anchor", required = true, num_args = 1)]
        anchors: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Expectation {
    Fig2,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveArg {
    Normal,
    Lognormal,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Euler,
    Rk4,
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 0.0)]
    t_start: f64,
    #[arg(long, default_value_t = 0.125)]
    dt: f64,
    #[arg(long, value_enum, default_value = "rk4")]
    integrator: IntegratorArg,
    #[arg(long, default_value_t = 1)]
    save_every: usize,
}

#[derive(Args)]
struct SettleFlags {
    #[arg(long, default_value_t = 2000.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.0)]
    t_start: f64,
    #[arg(long, default_value_t = 0.125)]
    dt: f64,
    #[arg(long, value_enum, default_value = "rk4")]
    integrator: IntegratorArg,
}

impl IntegratorArg {
    fn kind(self) -> IntegratorKind {
        match self {
            IntegratorArg::Euler => IntegratorKind::Euler,
            IntegratorArg::Rk4 => IntegratorKind::Rk4,
        }
    }
}

impl SettleFlags {
    fn config(&self) -> RunConfig {
        RunConfig::new(self.t_start, self.t_end, self.dt).integrator(self.integrator.kind())
    }
}

/// Bad input from the caller rather than a failed analysis; exits with 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ModelSpec> {
    let text = read(path)?;
    parse_model(&text).map_err(|e| describe_dsl(path, e))
}

fn describe_dsl(path: &Path, e: DslError) -> anyhow::Error {
    match e {
        DslError::Parse(p) => anyhow!("{}:{}", path.display(), p),
        DslError::Invalid(findings) => {
            let lines: Vec<String> = findings.iter().map(|f| f.to_string()).collect();
            anyhow!("{} is invalid:\n{}", path.display(), lines.join("\n"))
        }
    }
}

fn csv_field(v: f64) -> String {
    v.to_string()
}

fn cmd_validate(model: &Path) -> Result<()> {
    let text = read(model)?;
    let spec = match dynex::parse_model_unchecked(&text) {
        Ok(s) => s,
        Err(e) => bail!("{}:{}", model.display(), e),
    };
    let report = dynex::validate_model(&spec);
    for f in &report.findings {
        eprintln!("{f}");
    }
    if report.is_ok() {
        Ok(())
    } else {
        bail!("{} has {} error(s)", model.display(), report.errors().count())
    }
}

fn cmd_simulate(model: &Path, run: &RunFlags, out: &str, vars: Option<&[String]>) -> Result<()> {
    let spec = load_model(model)?;
    let cfg = RunConfig::new(run.t_start, run.t_end, run.dt)
        .integrator(run.integrator.kind())
        .save_every(run.save_every);
    cfg.steps().map_err(|e| usage(e.to_string()))?;
    let columns: Vec<VariableId> = match vars {
        Some(names) => names
            .iter()
            .map(|n| {
                let n = n.trim();
                match spec.kind_of(n) {
                    Some(_) => VariableId::new(n).map_err(|e| usage(e.to_string())),
                    None => Err(usage(format!("unknown variable `{n}`"))),
                }
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let traj = simulate(&spec, &cfg).context("simulation failed")?;
    let columns = if vars.is_some() { columns } else { traj.names.clone() };
    let mut buf = Vec::new();
    write_csv(&traj, &columns, &mut buf)?;
    if out == "-" {
        io::stdout().lock().write_all(&buf)?;
    } else {
        fs::write(out, &buf).with_context(|| format!("cannot write {out}"))?;
    }
    Ok(())
}

fn cmd_loops(model: &Path, max_len: usize, expect: Option<Expectation>) -> Result<()> {
    if max_len == 0 {
        return Err(usage("--max-len must be at least 1"));
    }
    let spec = load_model(model)?;
    let traj = simulate(&spec, &settle_config()).context("settling run failed")?;
    let graph = signed_graph(&spec, &traj.final_values())?;
    let report = enumerate_cycles(&graph, max_len);
    let mut out = io::stdout().lock();
    writeln!(out, "polarity,length,nodes")?;
    for (cycle, polarity) in &report.cycles {
        let names: Vec<&str> = cycle.nodes.iter().map(|n| n.as_str()).collect();
        writeln!(out, "{polarity},{},{}", names.len(), names.join(" -> "))?;
    }
    if report.truncated {
        eprintln!("note: cycles longer than {max_len} were skipped");
    }
    if let Some(Expectation::Fig2) = expect {
        let matches = match_named_loops(&report, &named_loops());
        for m in &matches.entries {
            let status = match m.status {
                MatchStatus::Found(i) => format!("found as cycle {i}"),
                MatchStatus::PolarityMismatch(i) => format!("polarity mismatch (cycle {i})"),
                MatchStatus::Missing => "missing".to_string(),
            };
            eprintln!("{} ({}): {status}", m.label, m.expected);
        }
        if !matches.all_found() {
            bail!("not every named loop was found");
        }
    }
    Ok(())
}

fn cmd_scenario(model: &Path, scenarios: &Path, run: &SettleFlags) -> Result<()> {
    let spec = load_model(model)?;
    let text = read(scenarios)?;
    let named = parse_scenarios(&text).map_err(|e| usage(format!("{}:{e}", scenarios.display())))?;
    let cfg = run.config();
    cfg.steps().map_err(|e| usage(e.to_string()))?;
    let baseline = run_scenario(&spec, "baseline", &Policy::none(), &cfg)?;
    let results = named
        .iter()
        .map(|s| run_scenario(&spec, &s.name, &s.policy, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let table = compare(&results, &baseline)?;
    let mut out = io::stdout().lock();
    writeln!(out, "scenario,metric,baseline,value,abs_diff,pct_diff")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scenario,
            r.metric,
            csv_field(r.baseline),
            csv_field(r.value),
            csv_field(r.abs_diff),
            csv_field(r.pct_diff)
        )?;
    }
    Ok(())
}

fn cmd_sweep(model: &Path, plan_path: &Path, run: &SettleFlags) -> Result<()> {
    let spec = load_model(model)?;
    let text = read(plan_path)?;
    let design = parse_plan(&text).map_err(|e| usage(format!("{}:{e}", plan_path.display())))?;
    let cfg = run.config();
    cfg.steps().map_err(|e| usage(e.to_string()))?;
    let plan = SweepPlan { design, config: cfg };
    let outcomes = sweep(&spec, &plan)?;
    let metric_names: Vec<String> = metrics_from(&spec_defaults(&spec)).into_keys().collect();
    let mut out = io::stdout().lock();
    let mut header: Vec<String> = plan.parameter_names().iter().map(|p| p.to_string()).collect();
    header.extend(metric_names.iter().cloned());
    header.push("status".into());
    writeln!(out, "{}", header.join(","))?;
    for (i, o) in outcomes.iter().enumerate() {
        let mut row: Vec<String> = o.point.iter().map(|(_, v)| csv_field(*v)).collect();
        match &o.result {
            Ok(r) => {
                row.extend(metric_names.iter().map(|m| r.metrics.get(m).map_or(String::new(), |v| csv_field(*v))));
                row.push("ok".into());
            }
            Err(e) => {
                eprintln!("point {i}: {e}");
                row.extend(metric_names.iter().map(|_| String::new()));
                row.push("failed".into());
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Zero for every variable, used only to learn which metrics a model supports.
fn spec_defaults(spec: &ModelSpec) -> std::collections::BTreeMap<VariableId, f64> {
    spec.variable_ids().map(|id| (id.clone(), 0.0)).collect()
}

fn cmd_calibrate(kind: CurveArg, anchors: &[String]) -> Result<()> {
    if anchors.len() != 2 {
        return Err(usage(format!("expected exactly two --anchor values, got {}", anchors.len())));
    }
    let parsed = anchors
        .iter()
        .map(|a| {
            let (r, f) = a
                .split_once(',')
                .ok_or_else(|| usage(format!("anchor `{a}` is not RATIO,FRACTION")))?;
            let r: f64 = r.trim().parse().map_err(|_| usage(format!("bad ratio in `{a}`")))?;
            let f: f64 = f.trim().parse().map_err(|_| usage(format!("bad fraction in `{a}`")))?;
            Ok(CurveAnchor::new(r, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let kind = match kind {
        CurveArg::Normal => CurveKind::Normal,
        CurveArg::Lognormal => CurveKind::LogNormal,
    };
    let curve = calibrate(kind, &parsed)?;
    let mut out = io::stdout().lock();
    for (name, value) in curve.parameters() {
        writeln!(out, "{name}={value}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { model } => cmd_validate(&model),
        Command::Simulate { model, run, out, vars } => cmd_simulate(&model, &run, &out, vars.as_deref()),
        Command::Loops { model, max_len, expect } => cmd_loops(&model, max_len, expect),
        Command::Scenario { model, scenarios, run } => cmd_scenario(&model, &scenarios, &run),
        Command::Sweep { model, plan, run } => cmd_sweep(&model, &plan, &run),
        Command::Calibrate { kind, anchors } => cmd_calibrate(kind, &anchors),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.chain().any(|c| matches!(c.downcast_ref::<io::Error>(), Some(io) if io.kind() == io::ErrorKind::BrokenPipe)) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
