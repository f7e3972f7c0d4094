use std::fmt::Write;

use crate::model::{BinOp, Expr, LookupDef, ModelSpec};

/// Shortest decimal with at most six significant digits that parses back to
/// `v`; otherwise the shortest exact rendering.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    for digits in 1..=6 {
        let s = format!("{:.*e}", digits - 1, v);
        if s.parse::<f64>() == Ok(v) {
            return tidy(&s);
        }
    }
    tidy(&format!("{v:e}"))
}

/// Turns `m.mmmeX` into positional notation when the exponent is modest.
fn tidy(sci: &str) -> String {
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if !(-5..=15).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let point = exp + 1;
    let out = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{out}")
}

const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(v) if v.is_sign_negative() => UNARY,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
        Expr::Neg(_) => UNARY,
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => MUL,
        Expr::Binary(BinOp::Pow, ..) => POW,
    }
}

fn write_wrapped(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Const(v) => out.push_str(&format_number(*v)),
        Expr::Var(id) => out.push_str(id.as_str()),
        Expr::Neg(x) => {
            out.push('-');
            // a bare literal would be read back as a negative constant
            let parens = precedence(x) < UNARY || matches!(**x, Expr::Const(_));
            write_wrapped(out, x, parens);
        }
        Expr::Binary(op, l, r) => {
            let p = precedence(e);
            let (lp, rp) = if *op == BinOp::Pow {
                (precedence(l) <= POW, precedence(r) < UNARY)
            } else {
                (precedence(l) < p, precedence(r) <= p)
            };
            write_wrapped(out, l, lp);
            let _ = write!(out, " {} ", op.symbol());
            write_wrapped(out, r, rp);
        }
        Expr::Call(b, args) => {
            out.push_str(b.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

pub fn serialize_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn unit_suffix(unit: &str) -> String {
    if unit.is_empty() {
        String::new()
    } else {
        format!(" [{unit}]")
    }
}

/// Canonical text: params, lookups, stocks, auxes, one declaration per line.
pub fn serialize_model(spec: &ModelSpec) -> String {
    let mut out = format!("model {}\n", spec.name);
    if !spec.params.is_empty() {
        out.push('\n');
    }
    for p in &spec.params {
        let _ = writeln!(out, "param {} = {}{}", p.id, format_number(p.value), unit_suffix(&p.unit));
    }
    if !spec.lookups.is_empty() {
        out.push('\n');
    }
    for (id, def) in &spec.lookups {
        let curve = match def {
            LookupDef::Normal { median, ratio90 } => format!(
                "normal(median={}, ratio90={})",
                format_number(*median),
                format_number(*ratio90)
            ),
            LookupDef::LogNormal { median, ratio90 } => format!(
                "lognormal(median={}, ratio90={})",
                format_number(*median),
                format_number(*ratio90)
            ),
            LookupDef::Points(points) => {
                let pts: Vec<String> = points
                    .iter()
                    .map(|(x, y)| format!("({}, {})", format_number(*x), format_number(*y)))
                    .collect();
                format!("points({})", pts.join(", "))
            }
        };
        let _ = writeln!(out, "lookup {id} = {curve}");
    }
    if !spec.stocks.is_empty() {
        out.push('\n');
    }
    for s in &spec.stocks {
        let _ = writeln!(
            out,
            "stock {} = {}{} {{ inflow: {} outflow: {} }}",
            s.id,
            serialize_expr(&s.initial),
            unit_suffix(&s.unit),
            serialize_expr(&s.inflow),
            serialize_expr(&s.outflow)
        );
    }
    if !spec.auxes.is_empty() {
        out.push('\n');
    }
    for a in &spec.auxes {
        let _ = writeln!(out, "aux {} = {}{}", a.id, serialize_expr(&a.expr), unit_suffix(&a.unit));
    }
    out
}
