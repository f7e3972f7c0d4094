//! Line-oriented scenario and sweep-plan files.
//!
//! ```text
//! scenario floor
//! wage_floor 1.3 from 0
//! override epsilon = 0.8 at 50
//! ```
//!
//! ```text
//! grid epsilon = 0, 0.5, 1
//! range p0 = 4..6 samples 20
//! seed 7
//! ```

use super::{ParseError, SourceSpan};
use crate::model::VariableId;
use crate::scenario::{Policy, SweepDesign};

/// A named policy from a scenario file.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedScenario {
    pub name: String,
    pub policy: Policy,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn error(&self, fragment: &str, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let column = fragment.as_ptr() as usize - self.text.as_ptr() as usize + 1;
        let column = column.min(self.text.len() + 1);
        ParseError::new(
            SourceSpan::new(self.number, column, fragment.len()),
            message,
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn number(&self, fragment: &'a str) -> Result<f64, ParseError> {
        let f = fragment.trim();
        f.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(f, format!("expected number, found `{f}`"), &["number"]))
    }

    fn ident(&self, fragment: &'a str) -> Result<VariableId, ParseError> {
        let f = fragment.trim();
        VariableId::new(f).map_err(|_| self.error(f, format!("expected identifier, found `{f}`"), &["identifier"]))
    }
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let text = raw.split('#').next().unwrap_or("");
        (!text.trim().is_empty()).then_some(Line { number: i + 1, text })
    })
}

/// Splits `head rest` on the first whitespace after leading blanks.
fn head(text: &str) -> (&str, &str) {
    let t = text.trim_start();
    match t.find(char::is_whitespace) {
        Some(i) => (&t[..i], &t[i..]),
        None => (t, ""),
    }
}

pub fn parse_scenarios(text: &str) -> Result<Vec<NamedScenario>, ParseError> {
    let mut out: Vec<NamedScenario> = Vec::new();
    for line in lines(text) {
        let (kw, rest) = head(line.text);
        match kw {
            "scenario" => {
                let name = rest.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(line.error(rest, "expected a single scenario name", &["name"]));
                }
                out.push(NamedScenario {
                    name: name.to_string(),
                    policy: Policy::none(),
                });
            }
            "override" | "wage_floor" => {
                let Some(current) = out.last_mut() else {
                    return Err(line.error(kw, format!("`{kw}` before any `scenario` line"), &["scenario"]));
                };
                let policy = if kw == "override" {
                    let Some((id, value)) = rest.split_once('=') else {
                        return Err(line.error(rest, "expected `<param> = <number> [at <time>]`", &["="]));
                    };
                    let id = line.ident(id)?;
                    let (value, from) = match value.split_once(" at ") {
                        Some((v, t)) => (line.number(v)?, line.number(t)?),
                        None => (line.number(value)?, 0.0),
                    };
                    Policy::ParamOverride { id, value, from }
                } else {
                    let Some((w, t)) = rest.split_once(" from ") else {
                        return Err(line.error(rest, "expected `wage_floor <number> from <time>`", &["from"]));
                    };
                    Policy::WageFloor {
                        w_min: line.number(w)?,
                        from: line.number(t)?,
                    }
                };
                if let Policy::Composite(parts) = &mut current.policy {
                    parts.push(policy);
                }
            }
            _ => {
                return Err(line.error(
                    kw,
                    format!("unknown directive `{kw}`"),
                    &["scenario", "override", "wage_floor"],
                ))
            }
        }
    }
    if out.is_empty() {
        return Err(ParseError::new(
            SourceSpan::new(1, 1, 0),
            "no scenarios defined",
            vec!["scenario".into()],
        ));
    }
    Ok(out)
}

pub fn parse_plan(text: &str) -> Result<SweepDesign, ParseError> {
    let mut grid: Vec<(VariableId, Vec<f64>)> = Vec::new();
    let mut ranges: Vec<(VariableId, f64, f64)> = Vec::new();
    let mut samples: Option<(usize, usize)> = None;
    let mut seed = 0u64;
    let mut last_line = 1;
    for line in lines(text) {
        last_line = line.number;
        let (kw, rest) = head(line.text);
        match kw {
            "grid" => {
                let Some((id, values)) = rest.split_once('=') else {
                    return Err(line.error(rest, "expected `grid <param> = v1, v2, ...`", &["="]));
                };
                let id = line.ident(id)?;
                let values = values.split(',').map(|v| line.number(v)).collect::<Result<Vec<_>, _>>()?;
                grid.push((id, values));
            }
            "range" => {
                let Some((id, spec)) = rest.split_once('=') else {
                    return Err(line.error(rest, "expected `range <param> = low..high samples N`", &["="]));
                };
                let id = line.ident(id)?;
                let Some((bounds, n)) = spec.split_once("samples") else {
                    return Err(line.error(spec, "expected `samples N`", &["samples"]));
                };
                let Some((lo, hi)) = bounds.split_once("..") else {
                    return Err(line.error(bounds, "expected `low..high`", &[".."]));
                };
                let (lo, hi) = (line.number(lo)?, line.number(hi)?);
                let n_text = n.trim();
                let n: usize = n_text
                    .parse()
                    .ok()
                    .filter(|n| *n > 0)
                    .ok_or_else(|| line.error(n_text, "expected a positive sample count", &["integer"]))?;
                match samples {
                    Some((m, _)) if m != n => {
                        return Err(line.error(n_text, format!("sample count {n} differs from earlier {m}"), &[]))
                    }
                    _ => samples = Some((n, line.number)),
                }
                ranges.push((id, lo, hi));
            }
            "seed" => {
                let t = rest.trim();
                seed = t
                    .parse()
                    .map_err(|_| line.error(t, "expected a non-negative integer seed", &["integer"]))?;
            }
            _ => return Err(line.error(kw, format!("unknown directive `{kw}`"), &["grid", "range", "seed"])),
        }
    }
    match (grid.is_empty(), ranges.is_empty()) {
        (false, true) => Ok(SweepDesign::Grid(grid)),
        (true, false) => Ok(SweepDesign::Hypercube {
            ranges,
            samples: samples.expect("set with ranges").0,
            seed,
        }),
        (true, true) => Err(ParseError::new(
            SourceSpan::new(last_line, 1, 0),
            "plan has no grid or range lines",
            vec!["grid".into(), "range".into()],
        )),
        (false, false) => Err(ParseError::new(
            SourceSpan::new(samples.map_or(last_line, |s| s.1), 1, 0),
            "grid and range lines cannot be mixed",
            Vec::new(),
        )),
    }
}
