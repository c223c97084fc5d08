//! The all-equal output set `{ g(m_i, …, m_i) }` of a built-in function on
//! `m` midpoint levels, used by majority sampling.

use crate::error::{Error, Result};
use crate::symfunc::{FunctionKind, FunctionSpec};

#[derive(Debug, Clone)]
pub struct DiagonalRange {
    f: FunctionSpec,
    k: u32,
    levels: usize,
    /// Values sorted ascending with their level index; `None` when `m` is
    /// above the table cap and lookups invert the diagonal analytically.
    table: Option<Vec<(f64, usize)>>,
}

impl DiagonalRange {
    pub fn new(f: &FunctionSpec, k: u32, levels: usize, table_cap: u64) -> Result<Self> {
        if levels < 2 {
            return Err(Error::Argument(format!("need at least two levels, got {levels}")));
        }
        if f.kind() == FunctionKind::Tabular {
            return Err(Error::Unsupported("majority sampling needs a built-in function".into()));
        }
        let mut d = DiagonalRange { f: f.clone(), k, levels, table: None };
        if levels as u64 <= table_cap {
            let mut t: Vec<(f64, usize)> = (0..levels).map(|i| (d.value(i), i)).collect();
            t.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.table = Some(t);
        }
        Ok(d)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn is_tabulated(&self) -> bool {
        self.table.is_some()
    }

    fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.levels as f64
    }

    /// `g(m_i, …, m_i)`.
    pub fn value(&self, i: usize) -> f64 {
        self.f.eval_diagonal(self.midpoint(i), self.k).expect("built-in diagonal")
    }

    /// Index of the level whose all-equal output is nearest to `t`; ties
    /// go to the smaller output.
    pub fn nearest(&self, t: f64) -> usize {
        match &self.table {
            Some(table) => {
                let pos = table.partition_point(|&(v, _)| v < t);
                if pos == 0 {
                    return table[0].1;
                }
                if pos == table.len() {
                    return table[pos - 1].1;
                }
                let (lo, hi) = (table[pos - 1], table[pos]);
                // step back to the first entry with the lower value
                let lo = table[table.partition_point(|&(v, _)| v < lo.0)];
                if t - lo.0 <= hi.0 - t {
                    lo.1
                } else {
                    hi.1
                }
            }
            None => self.nearest_analytic(t),
        }
    }

    /// Every built-in is strictly increasing on the diagonal for positive
    /// levels, so inverting it locates the candidates directly.
    fn nearest_analytic(&self, t: f64) -> usize {
        let a = match self.f.kind() {
            FunctionKind::Sum => t / self.k as f64,
            FunctionKind::Product => t.max(0.0).powf(1.0 / self.k as f64),
            _ => t,
        };
        let m = self.levels;
        let guess = (a * m as f64).floor().clamp(0.0, (m - 1) as f64) as usize;
        let mut best = (guess, f64::INFINITY);
        for i in guess.saturating_sub(1)..=(guess + 1).min(m - 1) {
            let d = (self.value(i) - t).abs();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}
