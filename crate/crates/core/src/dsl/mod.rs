//! Text formats: `.sd` model files, scenario files and sweep plans.
//!
//! ```text
//! model decay
//! param k = 0.5 [1/time]
//! stock x = 1 [widgets] { inflow: 0 outflow: k * x }
//! aux half_life = 0.693147 / k [time]
//! ```

mod files;
mod lexer;
mod parser;
mod serialize;

use std::fmt;

use thiserror::Error;

use crate::model::{Expr, ModelSpec};
use crate::validate::{validate_model, Finding};

pub use files::{parse_plan, parse_scenarios, NamedScenario};
pub use serialize::{format_number, serialize_expr, serialize_model};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan { line, column, length }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>, expected: Vec<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
            expected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DslError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("model has {} validation error(s)", .0.len())]
    Invalid(Vec<Finding>),
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<ModelSpec, DslError> {
    let spec = parse_model_unchecked(text)?;
    let report = validate_model(&spec);
    if report.is_ok() {
        Ok(spec)
    } else {
        Err(DslError::Invalid(report.errors().cloned().collect()))
    }
}

/// Parses a model file without running validation.
pub fn parse_model_unchecked(text: &str) -> Result<ModelSpec, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let spec = p.model()?;
    p.expect_end()?;
    Ok(spec)
}

/// Parses a single expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinOp, Builtin, LookupDef};

    #[test]
    fn minimal_model() {
        let spec = parse_model("model m\nstock x = 1 { inflow: 0 outflow: 0 }").unwrap();
        assert_eq!(spec.name, "m");
        assert_eq!(spec.stocks.len(), 1);
        assert_eq!(spec.stocks[0].initial, Expr::Const(1.0));
    }

    #[test]
    fn open_paren_reports_position() {
        let err = parse_model_unchecked("model m\naux a = (").unwrap_err();
        assert_eq!(err.span.line, 2);
        assert!(err.message.contains("expected expression"), "{}", err.message);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("a + b * c ^ d ^ e").unwrap();
        let pow = Expr::binary(BinOp::Pow, Expr::var("c"), Expr::binary(BinOp::Pow, Expr::var("d"), Expr::var("e")));
        let expected = Expr::binary(BinOp::Add, Expr::var("a"), Expr::binary(BinOp::Mul, Expr::var("b"), pow));
        assert_eq!(e, expected);
        assert_eq!(
            parse_expr("-2 ^ 2").unwrap(),
            Expr::Neg(Box::new(Expr::binary(BinOp::Pow, 2.0.into(), 2.0.into())))
        );
        assert_eq!(parse_expr("a - b - c").unwrap(), parse_expr("(a - b) - c").unwrap());
        assert_eq!(parse_expr("-3").unwrap(), Expr::Const(-3.0));
        assert_eq!(parse_expr("-x").unwrap(), Expr::Neg(Box::new(Expr::var("x"))));
    }

    #[test]
    fn calls_and_lookups() {
        let text = "model m\nparam p = 1\nlookup f = normal(median=1, ratio90=1.5)\n\
                    lookup g = points((0, 0), (2, 1))\naux a = LOOKUP(f, p) + MIN(p, 2, TIME()) # comment\n";
        let spec = parse_model(text).unwrap();
        assert_eq!(spec.lookups.len(), 2);
        assert_eq!(
            spec.lookups.get("g"),
            Some(&LookupDef::Points(vec![(0.0, 0.0), (2.0, 1.0)]))
        );
        match &spec.auxes[0].expr {
            Expr::Binary(BinOp::Add, l, r) => {
                assert!(matches!(**l, Expr::Call(Builtin::Lookup, _)));
                assert!(matches!(&**r, Expr::Call(Builtin::Min, args) if args.len() == 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arity_and_unknown_function_errors() {
        assert!(parse_expr("SMOOTH(x)").is_err());
        let err = parse_expr("FOO(1)").unwrap_err();
        assert!(err.message.contains("unknown function"));
        assert!(parse_expr("Foo").is_err());
    }

    #[test]
    fn units_are_raw_text() {
        let spec = parse_model_unchecked("model m\nparam w = 1 [money / person / time]").unwrap();
        assert_eq!(spec.params[0].unit, "money / person / time");
    }

    #[test]
    fn validation_errors_surface() {
        match parse_model("model m\naux a = b") {
            Err(DslError::Invalid(f)) => assert_eq!(f[0].message, "undeclared reference b"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn numbers_format_compactly() {
        assert_eq!(format_number(10000.0), "10000");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(-1.5e-7), "-1.5e-7");
        assert_eq!(format_number(1.0 / 3.0), "0.3333333333333333");
        assert_eq!(format_number(0.2231435513142097), "0.2231435513142097");
        assert_eq!(format_number(1e20), "1e20");
        for v in [1.0 / 3.0, 123456.7, 2.5e-300, f64::MAX, 0.1 + 0.2] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn serializer_round_trips_tricky_expressions() {
        for text in [
            "(-2) ^ x",
            "-(2)",
            "-(-2)",
            "a - -2",
            "a ^ -b",
            "-a ^ b",
            "(a ^ b) ^ c",
            "a / (b * c)",
            "a - (b - c)",
            "-(a + b) * c",
            "--a",
        ] {
            let e = parse_expr(text).unwrap();
            let s = serialize_expr(&e);
            assert_eq!(parse_expr(&s).unwrap(), e, "{text} -> {s}");
        }
    }
}
