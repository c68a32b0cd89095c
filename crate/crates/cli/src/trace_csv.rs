//! Plot-ready per-iteration CSV:
//! `t,inner_iters,residual,eps_t,regret_p1,...,regret_pn,cce_gap`.
//! Reals are written with 17 significant digits so they read back exactly;
//! `cce_gap` is blank on rows off the metric cadence.

use std::io::{Read, Write};

use cpm_core::{metrics, NormalFormGame, RunTrace};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub inner_iters: usize,
    pub residual: f64,
    pub eps_t: f64,
    pub regrets: Vec<f64>,
    pub cce_gap: Option<f64>,
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header(players: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "inner_iters".into(), "residual".into(), "eps_t".into()];
    h.extend((1..=players).map(|i| format!("regret_p{i}")));
    h.push("cce_gap".into());
    h
}

pub fn rows(trace: &RunTrace, game: &NormalFormGame, cadence: usize) -> Result<Vec<TraceRow>> {
    if cadence == 0 {
        return Err(CliError::Usage("--cadence must be at least 1".into()));
    }
    trace
        .iterates()
        .iter()
        .map(|it| {
            let regrets = metrics::regrets(trace, it.t)?;
            let cce_gap = if it.t % cadence == 0 { Some(metrics::cce_gap(trace, game, it.t)?) } else { None };
            Ok(TraceRow {
                t: it.t,
                inner_iters: it.inner_iterations,
                residual: it.residual,
                eps_t: it.eps,
                regrets,
                cce_gap,
            })
        })
        .collect()
}

pub fn write_rows<W: Write>(out: W, players: usize, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(players))?;
    for row in rows {
        let mut record =
            vec![row.t.to_string(), row.inner_iters.to_string(), format_real(row.residual), format_real(row.eps_t)];
        record.extend(row.regrets.iter().map(|&r| format_real(r)));
        record.push(row.cce_gap.map(format_real).unwrap_or_default());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| CliError::Input(format!("cannot write trace: {e}")))?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let players = headers.len().checked_sub(5).ok_or_else(|| CliError::Input("trace header is too short".into()))?;
    if headers.iter().collect::<Vec<_>>() != header(players) {
        return Err(CliError::Input(format!("unexpected trace header {headers:?}")));
    }
    let real =
        |s: &str| -> Result<f64> { s.parse().map_err(|_| CliError::Input(format!("bad number {s:?} in trace"))) };
    let int =
        |s: &str| -> Result<usize> { s.parse().map_err(|_| CliError::Input(format!("bad integer {s:?} in trace"))) };
    r.records()
        .map(|rec| {
            let rec = rec?;
            let gap = &rec[4 + players];
            Ok(TraceRow {
                t: int(&rec[0])?,
                inner_iters: int(&rec[1])?,
                residual: real(&rec[2])?,
                eps_t: real(&rec[3])?,
                regrets: (0..players).map(|i| real(&rec[4 + i])).collect::<Result<_>>()?,
                cce_gap: if gap.is_empty() { None } else { Some(real(gap)?) },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn rows_round_trip() {
        let rows = vec![
            TraceRow {
                t: 1,
                inner_iters: 3,
                residual: 0.1 / 3.0,
                eps_t: 1.0,
                regrets: vec![0.25, -1e-17],
                cce_gap: None,
            },
            TraceRow {
                t: 2,
                inner_iters: 5,
                residual: 1e-9,
                eps_t: 0.25,
                regrets: vec![std::f64::consts::PI, 2.0],
                cce_gap: Some(1.0 / 7.0),
            },
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, 2, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,inner_iters,residual,eps_t,regret_p1,regret_p2,cce_gap\n"));
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
    }
}
