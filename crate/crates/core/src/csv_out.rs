//! Plain CSV emission for trajectories.

use std::io::{self, Write};

use thiserror::Error;

use crate::engine::Trajectory;
use crate::model::VariableId;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("column `{0}` is not recorded in the trajectory")]
    UnknownColumn(String),
    #[error("failed to write CSV: {0}")]
    Sink(#[from] io::Error),
}

/// Writes `time` plus the requested columns, one row per saved step.
///
/// Floats use Rust's shortest round-trip rendering and every line ends in
/// `\n`. Returns the number of bytes written.
pub fn write_csv(traj: &Trajectory, columns: &[VariableId], sink: &mut dyn Write) -> Result<usize, CsvError> {
    let series = columns
        .iter()
        .map(|c| traj.series(c.as_str()).ok_or_else(|| CsvError::UnknownColumn(c.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut buf = String::from("time");
    for c in columns {
        buf.push(',');
        buf.push_str(c.as_str());
    }
    buf.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        buf.push_str(&t.to_string());
        for s in &series {
            buf.push(',');
            buf.push_str(&s[i].to_string());
        }
        buf.push('\n');
    }
    sink.write_all(buf.as_bytes())?;
    Ok(buf.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, RunConfig};
    use crate::fixtures;

    #[test]
    fn one_row_one_column() {
        let traj = simulate(&fixtures::exponential_decay(), &RunConfig::new(0.0, 0.0, 0.1)).unwrap();
        let mut out = Vec::new();
        let n = write_csv(&traj, &[VariableId::new("x").unwrap()], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "time,x\n0,1\n");
        assert_eq!(n, 11);
    }

    #[test]
    fn time_only_and_unknown_column() {
        let traj = simulate(&fixtures::exponential_decay(), &RunConfig::new(0.0, 0.2, 0.1)).unwrap();
        let mut out = Vec::new();
        write_csv(&traj, &[], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "time\n0\n0.1\n0.2\n");
        let err = write_csv(&traj, &[VariableId::new("nope").unwrap()], &mut Vec::new()).unwrap_err();
        assert!(matches!(err, CsvError::UnknownColumn(_)));
    }
}
