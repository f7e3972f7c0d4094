//! Stock-and-flow modeling of labor-market exploitation.
//!
//! [`model`] holds the equation representation, [`engine`] integrates it,
//! [`graph`] and [`loops`] extract and classify feedback loops,
//! [`exploitation`] builds the flagship model and [`scenario`] runs policy
//! experiments on it. [`dsl`] reads and writes the text formats.

// `!(x > 0.0)` style checks are used on purpose so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod compile;
pub mod csv_out;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod exploitation;
pub mod fixtures;
pub mod graph;
pub mod loops;
pub mod model;
pub mod scenario;
pub mod validate;
pub mod willingness;

pub use csv_out::{write_csv, CsvError};
pub use dsl::{parse_expr, parse_model, parse_model_unchecked, serialize_model, DslError, ParseError, SourceSpan};
pub use engine::{
    conservation_probe, simulate, smooth_response_probe, EngineState, IntegratorKind, ParamEvent,
    RunConfig, SimError, StockFloor, Trajectory,
};
pub use error::ModelError;
pub use exploitation::{
    build_exploitation_model, loop_probe, named_loops, steady_state, Calibration, CalibrationError,
    PatternReport, PatternViolation, Probe, ProbeError, SteadyStateError,
};
pub use graph::{signed_graph, signed_graph_at, GraphError, Sign, SignedDigraph};
pub use loops::{
    classify, enumerate_cycles, match_named_loops, Cycle, LoopMatch, LoopReport, MatchReport,
    MatchStatus, NamedLoop, Polarity,
};
pub use model::{
    AuxDef, BinOp, Builtin, Expr, LookupDef, ModelSpec, ParamDef, StockDef, VarKind, VariableId,
};
pub use scenario::{
    compare, run_scenario, sweep, ComparisonTable, Policy, ScenarioError, ScenarioResult, SweepDesign,
    SweepPlan,
};
pub use validate::{evaluation_order, validate_model, Finding, Severity, ValidationReport};
pub use willingness::{CurveAnchor, CurveError, CurveKind, SalaryRatio, WillingnessCurve};
