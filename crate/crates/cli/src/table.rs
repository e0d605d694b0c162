//! Largest provable rank for `m x n x n` shapes.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;
use tensorid::{check_generic, kruskal_generic_bound, GenericConfig, Shape, VerdictKind};

use crate::reference;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableCell {
    pub m: usize,
    pub n: usize,
    /// `(m, n, n)` sorted in non-increasing order.
    pub shape: Vec<usize>,
    pub rbar: usize,
    pub perfect: bool,
    /// Largest rank proved by the Hessian criterion, if any.
    pub proved: Option<usize>,
    pub kruskal: usize,
    /// Static value of the earlier criterion, where tabulated.
    pub reference: Option<usize>,
    /// Verdict tag of every rank tried, from `r̄` down.
    pub tried: Vec<(usize, String)>,
}

impl TableCell {
    /// The cell reached `r̄` itself, so only the shape limits it.
    pub fn limited_by_shape(&self) -> bool {
        self.proved == Some(self.rbar)
    }

    /// Proved at `r̄` on a perfect shape, where `r̄ + 1` is out of reach of
    /// the criterion.
    pub fn perfect_limited(&self) -> bool {
        self.perfect && self.limited_by_shape()
    }
}

pub fn parse_range(s: &str) -> Option<RangeInclusive<usize>> {
    let (a, b) = s.split_once("..")?;
    let a: usize = a.trim().parse().ok()?;
    let b: usize = b.trim_start_matches('=').trim().parse().ok()?;
    (a <= b).then_some(a..=b)
}

/// Descends from `r̄` and stops at the first proved rank.
pub fn compute_cell(
    m: usize,
    n: usize,
    config: &GenericConfig,
) -> Result<TableCell, tensorid::generic_id::GenericError> {
    let shape = Shape::normalized(vec![m, n, n]).expect("dimensions are at least 2");
    let rbar = shape.rbar();
    let mut tried = Vec::new();
    let mut proved = None;
    for r in (1..=rbar).rev() {
        let v = check_generic(&shape, r, config)?;
        tried.push((r, v.kind.tag().to_string()));
        if v.kind.is_proved() {
            proved = Some(r);
            break;
        }
        if let VerdictKind::KnownException { .. } = v.kind {
            tracing::debug!(m, n, r, "known exception, descending");
        }
    }
    Ok(TableCell {
        m,
        n,
        shape: shape.dims().to_vec(),
        rbar,
        perfect: shape.is_perfect(),
        proved,
        kruskal: kruskal_generic_bound(&shape).expect("order three"),
        reference: reference::lookup(m, n),
        tried,
    })
}

/// Cells in row-major order, computed on the current rayon pool.
pub fn compute_table(
    rows: RangeInclusive<usize>,
    cols: RangeInclusive<usize>,
    config: &GenericConfig,
) -> Result<Vec<TableCell>, tensorid::generic_id::GenericError> {
    let pairs: Vec<(usize, usize)> = rows.flat_map(|m| cols.clone().map(move |n| (m, n))).collect();
    pairs.par_iter().map(|&(m, n)| compute_cell(m, n, config)).collect()
}

pub fn render(cells: &[TableCell]) -> String {
    use std::fmt::Write;
    let mut cols: Vec<usize> = cells.iter().map(|c| c.n).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut rows: Vec<usize> = cells.iter().map(|c| c.m).collect();
    rows.sort_unstable();
    rows.dedup();

    let mut s = String::new();
    let _ = write!(s, "{:>4} |", "m\\n");
    for n in &cols {
        let _ = write!(s, " {:>14}", n);
    }
    s.push('\n');
    let _ = writeln!(s, "{}", "-".repeat(6 + 15 * cols.len()));
    for m in &rows {
        let _ = write!(s, "{:>4} |", m);
        for n in &cols {
            let text = match cells.iter().find(|c| c.m == *m && c.n == *n) {
                Some(c) => {
                    let proved = c.proved.map_or("-".to_string(), |r| r.to_string());
                    let mark = match (c.limited_by_shape(), c.perfect) {
                        (true, true) => "p",
                        (true, false) => "*",
                        _ => "",
                    };
                    let reference = c.reference.map_or("-".to_string(), |r| r.to_string());
                    format!("{proved}{mark} ({reference}/{})", c.kruskal)
                }
                None => String::new(),
            };
            let _ = write!(s, " {:>14}", text);
        }
        s.push('\n');
    }
    s.push_str("cell: proved (reference/kruskal); * = proved at r-bar, p = proved at r-bar of a perfect shape\n");
    s
}
