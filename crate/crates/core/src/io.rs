//! CSV import and export for value fields, regions, switch sets and
//! simulated paths.
//!
//! Floats are written with 17 significant digits so a written field reloads
//! bit-exactly.

use crate::field::{PairIndex, ValueField};
use crate::grid::Grid;
use crate::montecarlo::{PathPayoff, PathResult};
use crate::strategy::{RegionMap, SwitchSet};
use std::io::{self, BufRead, Write};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `x,V11,…,Vqq` rows, one per node, pairs in row-major order.
pub fn write_value_csv(out: &mut dyn Write, field: &ValueField, grid: &Grid) -> io::Result<()> {
    let q = field.q();
    let mut header = String::from("x");
    for p in 0..q * q {
        header.push(',');
        header.push_str(&PairIndex(p).label(q));
    }
    writeln!(out, "{header}")?;
    for k in 0..grid.n() {
        let mut row = fmt(grid.node(k));
        for p in 0..q * q {
            row.push(',');
            row.push_str(&fmt(field.get(PairIndex(p), k)));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Reads a value CSV back into node coordinates and a field.
pub fn read_value_csv(input: &mut dyn BufRead) -> io::Result<(Vec<f64>, ValueField)> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty value CSV".into()))??;
    let columns = header.split(',').count();
    if columns < 2 {
        return Err(bad(format!("value CSV header has {columns} columns")));
    }
    let n_pairs = columns - 1;
    let q = (n_pairs as f64).sqrt().round() as usize;
    if q * q != n_pairs {
        return Err(bad(format!("{n_pairs} value columns is not a square count")));
    }

    let mut xs = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut values = Vec::with_capacity(columns);
        for token in line.split(',') {
            values.push(
                token
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("bad float {token:?}: {e}")))?,
            );
        }
        if values.len() != columns {
            return Err(bad(format!(
                "row has {} columns, expected {columns}",
                values.len()
            )));
        }
        xs.push(values[0]);
        rows.push(values[1..].to_vec());
    }

    let n = xs.len();
    let field = ValueField::from_fn(q, n, |pair, k| rows[k][pair.0]);
    Ok((xs, field))
}

/// Writes `x,pair,label,target` rows for every non-trivial region triple,
/// plus continuation rows, one per `(node, pair)`.
pub fn write_regions_csv(out: &mut dyn Write, regions: &RegionMap, grid: &Grid) -> io::Result<()> {
    writeln!(out, "x,pair,label,target")?;
    let q = regions.q();
    for k in 0..grid.n() {
        for p in 0..q * q {
            let pair = PairIndex(p);
            let (i, j) = pair.split(q);
            let target = regions
                .target(pair, k)
                .map(|(ti, tj)| format!("{}{}", ti.get(), tj.get()))
                .unwrap_or_default();
            writeln!(
                out,
                "{},{}{},{},{}",
                fmt(grid.node(k)),
                i.get(),
                j.get(),
                regions.label(pair, k).short(),
                target
            )?;
        }
    }
    Ok(())
}

/// Writes `from,to,lo,hi` rows, one per switch-set interval.
pub fn write_switch_sets_csv(out: &mut dyn Write, sets: &[SwitchSet]) -> io::Result<()> {
    writeln!(out, "from,to,lo,hi")?;
    for set in sets {
        for &(lo, hi) in &set.intervals {
            writeln!(
                out,
                "{}{},{}{},{},{}",
                set.from.0.get(),
                set.from.1.get(),
                set.to.0.get(),
                set.to.1.get(),
                fmt(lo),
                fmt(hi)
            )?;
        }
    }
    Ok(())
}

/// Aligned text table of switch sets, with grid-boundary intervals rendered
/// as unbounded.
pub fn format_switch_sets(sets: &[SwitchSet], grid: &Grid) -> String {
    let mut out = String::new();
    out.push_str("from  to    intervals\n");
    for set in sets {
        let (unb_left, unb_right) = set.touches_boundary(grid);
        let rendered: Vec<String> = set
            .intervals
            .iter()
            .enumerate()
            .map(|(idx, &(lo, hi))| {
                let left = if idx == 0 && unb_left {
                    "(-inf".to_string()
                } else {
                    format!("[{lo:.3}")
                };
                let right = if idx + 1 == set.intervals.len() && unb_right {
                    "+inf)".to_string()
                } else {
                    format!("{hi:.3}]")
                };
                format!("{left}, {right}")
            })
            .collect();
        out.push_str(&format!(
            "{}{}    {}{}    {}\n",
            set.from.0.get(),
            set.from.1.get(),
            set.to.0.get(),
            set.to.1.get(),
            rendered.join("  ")
        ));
    }
    out
}

/// Writes per-path rows `path,total,discounted_running,switches_i,switches_ii,valid`.
pub fn write_paths_csv(out: &mut dyn Write, results: &[PathResult]) -> io::Result<()> {
    writeln!(out, "path,total,discounted_running,switches_i,switches_ii,valid")?;
    for (idx, result) in results.iter().enumerate() {
        match result {
            PathResult::Valid(p) => {
                let (si, sii) = count_switches(p);
                writeln!(
                    out,
                    "{idx},{},{},{si},{sii},1",
                    fmt(p.total),
                    fmt(p.discounted_running)
                )?;
            }
            PathResult::Diverged { .. } => {
                writeln!(out, "{idx},nan,nan,0,0,0")?;
            }
        }
    }
    Ok(())
}

fn count_switches(p: &PathPayoff) -> (usize, usize) {
    let si = p
        .cost_ledger
        .iter()
        .filter(|e| e.player == crate::montecarlo::Player::I)
        .count();
    (si, p.cost_ledger.len() - si)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::BufReader;

    #[test]
    fn value_csv_round_trips_bit_exactly() {
        let grid = Grid::new(-1.0, 2.0, 17).unwrap();
        let field = ValueField::from_fn(2, grid.n(), |p, k| {
            (p.0 as f64 + 1.0) * ((k as f64) * 0.37).sin() / 3.0
        });
        let mut buf = Vec::new();
        write_value_csv(&mut buf, &field, &grid).unwrap();
        let (xs, reloaded) = read_value_csv(&mut BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(reloaded, field, "field must reload bit-exactly");
        for (k, &x) in xs.iter().enumerate() {
            assert_eq!(x.to_bits(), grid.node(k).to_bits());
        }
    }

    #[test]
    fn malformed_value_csv_is_rejected() {
        let mut r = BufReader::new("x,V11,V12\n0.0,1.0,2.0\n".as_bytes());
        assert!(read_value_csv(&mut r).is_err(), "3 pair columns is not square");
        let mut r = BufReader::new("x,V11,V12,V21,V22\n0.0,oops,2.0,3.0,4.0\n".as_bytes());
        assert!(read_value_csv(&mut r).is_err());
    }
}
