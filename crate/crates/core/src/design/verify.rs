//! Overlap checks on superimposed constellation points.

use num_complex::Complex64;
use serde::Serialize;

use super::constraints::Constraint;
use crate::constellation::Constellation;
use crate::error::{argument, Result};
use crate::sampling::SamplingSet;
use crate::symfunc::{exact_levels, same_output, FunctionSpec, Histogram};
use crate::Limits;

/// Two histograms with different outputs whose superpositions lie closer
/// than the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlap {
    pub left: Histogram,
    pub right: Histogram,
    pub left_value: f64,
    pub right_value: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapReport {
    pub tolerance: f64,
    /// Number of superimposed points examined.
    pub points: usize,
    pub overlaps: Vec<Overlap>,
}

impl OverlapReport {
    pub fn is_clean(&self) -> bool {
        self.overlaps.is_empty()
    }

    /// Whether the histogram pair (in either order) is reported.
    pub fn contains(&self, a: &Histogram, b: &Histogram) -> bool {
        self.overlaps.iter().any(|o| (&o.left == a && &o.right == b) || (&o.left == b && &o.right == a))
    }
}

/// Checks every pair of histograms in Ω_p with different outputs for
/// `|r_h - r_h'| < tol`.
pub fn verify_no_overlap(
    c: &Constellation,
    f: &FunctionSpec,
    k: u32,
    p: u32,
    levels: &[f64],
    tol: f64,
    limits: &Limits,
) -> Result<OverlapReport> {
    let set = SamplingSet::enumerate(k, c.len(), p, limits)?;
    let entries = set
        .histograms()
        .iter()
        .map(|h| Ok((h.clone(), f.eval_on_histogram(h, levels)?)))
        .collect::<Result<Vec<_>>>()?;
    verify_superpositions(c.points(), &entries, tol, exact_levels(f, levels))
}

/// Overlap check on explicit `(histogram, output)` entries.
///
/// Points are swept in order of their real part so only pairs within
/// `tol` horizontally are compared.
pub fn verify_superpositions(
    points: &[Complex64],
    entries: &[(Histogram, f64)],
    tol: f64,
    exact: bool,
) -> Result<OverlapReport> {
    if !(tol >= 0.0) {
        return argument(format!("tolerance must be nonnegative, got {tol}"));
    }
    if let Some((h, _)) = entries.iter().find(|(h, _)| h.levels() != points.len()) {
        return argument(format!("histogram {h} does not match {} points", points.len()));
    }
    let sums: Vec<Complex64> = entries.iter().map(|(h, _)| Constraint::superposition(h.counts(), points)).collect();
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_by(|&a, &b| sums[a].re.total_cmp(&sums[b].re).then(a.cmp(&b)));
    let mut found = Vec::new();
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if sums[b].re - sums[a].re >= tol {
                break;
            }
            let d = (sums[a] - sums[b]).norm();
            if d < tol && !same_output(entries[a].1, entries[b].1, exact) {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                found.push((i, j, d));
            }
        }
    }
    found.sort_by_key(|x| (x.0, x.1));
    let overlaps = found
        .into_iter()
        .map(|(i, j, d)| Overlap {
            left: entries[i].0.clone(),
            right: entries[j].0.clone(),
            left_value: entries[i].1,
            right_value: entries[j].1,
            distance: d,
        })
        .collect();
    Ok(OverlapReport { tolerance: tol, points: entries.len(), overlaps })
}
