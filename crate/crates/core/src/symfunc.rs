//! Symmetric aggregation functions evaluated through their histogram
//! representation.
//!
//! A symmetric function of `K` quantized inputs depends only on how many
//! nodes picked each of the `q` levels, so every function here is evaluated
//! on a [`Histogram`] together with the real values the level indices stand
//! for. Passing the level values explicitly lets the same evaluator serve
//! raw index values `{0, …, q-1}` and quantizer midpoints alike.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::sampling::SamplingSet;
use crate::Limits;

/// Per-level node counts. Entry `j` is the number of nodes whose input was
/// quantized to level `j`; the counts sum to the number of nodes `K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Histogram(Vec<u32>);

impl Histogram {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return argument("a histogram needs at least one level");
        }
        if counts.iter().all(|&c| c == 0) {
            return argument("a histogram must count at least one node");
        }
        Ok(Histogram(counts))
    }

    /// Histogram of a sequence of level indices.
    pub fn from_indices(indices: &[usize], q: usize) -> Result<Self> {
        let mut counts = vec![0u32; q];
        for &i in indices {
            if i >= q {
                return argument(format!("level index {i} out of range for q = {q}"));
            }
            counts[i] += 1;
        }
        Histogram::new(counts)
    }

    /// `K · e_j`: all `k` nodes on level `j`.
    pub fn unanimous(k: u32, q: usize, j: usize) -> Self {
        let mut counts = vec![0; q];
        counts[j] = k;
        Histogram(counts)
    }

    pub(crate) fn from_counts_unchecked(counts: Vec<u32>) -> Self {
        Histogram(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    /// Number of nodes `K`.
    pub fn nodes(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of levels `q`.
    pub fn levels(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Histogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    Sum,
    Product,
    Max,
    ArithmeticMean,
    GeometricMean,
    Tabular,
}

/// A function given by an explicit table over every histogram of a fixed
/// `(K, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularFunction {
    nodes: u32,
    levels: usize,
    table: BTreeMap<Histogram, f64>,
}

impl TabularFunction {
    /// Builds a table and checks that it covers all of Ω for its `(K, q)`.
    pub fn new(table: BTreeMap<Histogram, f64>) -> Result<Self> {
        let first = match table.keys().next() {
            Some(h) => h,
            None => return argument("a tabular function needs at least one entry"),
        };
        let (nodes, levels) = (first.nodes(), first.levels());
        for h in table.keys() {
            if h.nodes() != nodes || h.levels() != levels {
                return argument(format!("histogram {h} does not match K = {nodes}, q = {levels} of the first entry"));
            }
        }
        let expected = crate::combinatorics::binomial(nodes as u64 + levels as u64 - 1, levels as u64 - 1);
        if num_bigint::BigUint::from(table.len()) != expected {
            return Err(Error::Domain(format!(
                "table has {} entries but Ω has {expected} histograms for K = {nodes}, q = {levels}",
                table.len()
            )));
        }
        Ok(TabularFunction { nodes, levels, table })
    }

    /// Parses the text format: one histogram per line, comma-separated
    /// counts followed by the output value. Blank lines and lines starting
    /// with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < 2 {
                return Err(Error::Parse(format!("line {}: expected counts followed by a value", lineno + 1)));
            }
            let (counts, value) = fields.split_at(fields.len() - 1);
            let counts = counts
                .iter()
                .map(|c| c.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: bad count: {e}", lineno + 1)))?;
            let value: f64 =
                value[0].parse().map_err(|e| Error::Parse(format!("line {}: bad value: {e}", lineno + 1)))?;
            let h = Histogram::new(counts)?;
            if table.insert(h.clone(), value).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate histogram {h}", lineno + 1)));
            }
        }
        TabularFunction::new(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        TabularFunction::parse(&std::fs::read_to_string(path)?)
    }

    pub fn nodes(&self) -> u32 {
        self.nodes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, h: &Histogram) -> Option<f64> {
        self.table.get(h).copied()
    }
}

/// A named symmetric function.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    name: String,
    kind: FunctionKind,
    table: Option<TabularFunction>,
}

impl FunctionSpec {
    fn builtin(kind: FunctionKind, name: &str) -> Self {
        FunctionSpec { name: name.to_string(), kind, table: None }
    }

    pub fn sum() -> Self {
        Self::builtin(FunctionKind::Sum, "sum")
    }

    pub fn product() -> Self {
        Self::builtin(FunctionKind::Product, "product")
    }

    pub fn max() -> Self {
        Self::builtin(FunctionKind::Max, "max")
    }

    pub fn arithmetic_mean() -> Self {
        Self::builtin(FunctionKind::ArithmeticMean, "mean")
    }

    pub fn geometric_mean() -> Self {
        Self::builtin(FunctionKind::GeometricMean, "geomean")
    }

    pub fn tabular(name: impl Into<String>, table: TabularFunction) -> Self {
        FunctionSpec { name: name.into(), kind: FunctionKind::Tabular, table: Some(table) }
    }

    /// A tabular function taking the same value on every histogram.
    pub fn constant(k: u32, q: usize, value: f64) -> Result<Self> {
        let table = SamplingSet::enumerate(k, q, 1, &Limits::default())?
            .histograms()
            .iter()
            .map(|h| (h.clone(), value))
            .collect();
        Ok(FunctionSpec::tabular("constant", TabularFunction::new(table)?))
    }

    /// Looks up a built-in by name (`sum`, `product`, `max`, `mean`,
    /// `geomean`, plus a few long-form aliases).
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "sum" => Self::sum(),
            "product" | "prod" => Self::product(),
            "max" => Self::max(),
            "mean" | "arithmetic-mean" => Self::arithmetic_mean(),
            "geomean" | "geometric-mean" => Self::geometric_mean(),
            other => return argument(format!("unknown function '{other}'")),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn table(&self) -> Option<&TabularFunction> {
        self.table.as_ref()
    }

    /// Evaluates `g(h)` with level `j` standing for the real value
    /// `levels[j]`.
    pub fn eval_on_histogram(&self, h: &Histogram, levels: &[f64]) -> Result<f64> {
        if let Some(t) = &self.table {
            return t
                .get(h)
                .ok_or_else(|| Error::Domain(format!("tabular function '{}' has no entry for {h}", self.name)));
        }
        if levels.len() != h.levels() {
            return argument(format!(
                "histogram has {} levels but {} level values were given",
                h.levels(),
                levels.len()
            ));
        }
        let k = h.nodes() as f64;
        let occupied = h.counts().iter().zip(levels).filter(|(&c, _)| c > 0);
        Ok(match self.kind {
            FunctionKind::Sum => occupied.map(|(&c, &v)| c as f64 * v).sum(),
            FunctionKind::Product => product(h, levels),
            FunctionKind::Max => occupied.map(|(_, &v)| v).fold(f64::NEG_INFINITY, f64::max),
            FunctionKind::ArithmeticMean => occupied.map(|(&c, &v)| c as f64 * v).sum::<f64>() / k,
            FunctionKind::GeometricMean => geometric(product(h, levels), k),
            FunctionKind::Tabular => unreachable!("tabular functions always carry a table"),
        })
    }

    /// Evaluates the function on unquantized real inputs.
    pub fn eval_on_values(&self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return argument("no input values");
        }
        let k = values.len() as f64;
        Ok(match self.kind {
            FunctionKind::Sum => values.iter().sum(),
            FunctionKind::Product => values.iter().product(),
            FunctionKind::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            FunctionKind::ArithmeticMean => values.iter().sum::<f64>() / k,
            FunctionKind::GeometricMean => geometric(values.iter().product(), k),
            FunctionKind::Tabular => {
                return Err(Error::Unsupported(format!(
                    "tabular function '{}' is only defined on quantized inputs",
                    self.name
                )))
            }
        })
    }

    /// `g(a, …, a)` for `k` copies of the value `a`. Not defined for tabular
    /// functions, whose diagonal is indexed by level rather than value.
    pub fn eval_diagonal(&self, a: f64, k: u32) -> Result<f64> {
        Ok(match self.kind {
            FunctionKind::Sum => k as f64 * a,
            FunctionKind::Product => a.powi(k as i32),
            FunctionKind::Max | FunctionKind::ArithmeticMean | FunctionKind::GeometricMean => a,
            FunctionKind::Tabular => {
                return Err(Error::Unsupported("diagonal of a tabular function must be evaluated on histograms".into()))
            }
        })
    }

    /// `g` on the diagonal histogram `k · e_j`.
    pub fn eval_unanimous(&self, j: usize, k: u32, levels: &[f64]) -> Result<f64> {
        self.eval_on_histogram(&Histogram::unanimous(k, levels.len(), j), levels)
    }
}

fn product(h: &Histogram, levels: &[f64]) -> f64 {
    h.counts().iter().zip(levels).filter(|(&c, _)| c > 0).map(|(&c, &v)| v.powi(c as i32)).product()
}

fn geometric(prod: f64, k: f64) -> f64 {
    if prod == 0.0 {
        0.0
    } else {
        prod.powf(1.0 / k)
    }
}

/// Quantizer reconstruction values `(i + 0.5) / q` for inputs in `(0, 1]`.
pub fn midpoint_levels(q: usize) -> Result<Vec<f64>> {
    if q < 2 {
        return argument(format!("need at least two levels, got q = {q}"));
    }
    Ok((0..q).map(|i| (i as f64 + 0.5) / q as f64).collect())
}

/// The raw level indices `0, 1, …, q-1` as reals.
pub fn index_levels(q: usize) -> Vec<f64> {
    (0..q).map(|i| i as f64).collect()
}

fn all_integral(levels: &[f64]) -> bool {
    levels.iter().all(|v| v.fract() == 0.0)
}

/// Sorts and removes duplicates. With `exact` only bitwise-equal values
/// merge; otherwise values within `1e-12` relative merge into the first.
pub(crate) fn sort_dedup(mut values: Vec<f64>, exact: bool) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(&last) if same_output(last, v, exact) => {}
            _ => out.push(v),
        }
    }
    out
}

pub(crate) fn same_output(a: f64, b: f64, exact: bool) -> bool {
    if exact {
        a == b
    } else {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
    }
}

/// Whether outputs computed on these levels can be compared exactly.
pub(crate) fn exact_levels(f: &FunctionSpec, levels: &[f64]) -> bool {
    match f.kind() {
        FunctionKind::Tabular => true,
        FunctionKind::ArithmeticMean | FunctionKind::GeometricMean => false,
        _ => all_integral(levels),
    }
}

/// The output range `{ g(h) : h ∈ Ω_p }`, sorted ascending without
/// duplicates.
pub fn output_range(f: &FunctionSpec, k: u32, q: usize, p: u32, levels: &[f64], limits: &Limits) -> Result<Vec<f64>> {
    let set = SamplingSet::enumerate(k, q, p, limits)?;
    let values = set.histograms().iter().map(|h| f.eval_on_histogram(h, levels)).collect::<Result<Vec<_>>>()?;
    Ok(sort_dedup(values, exact_levels(f, levels)))
}

/// Lipschitz constant of `g` under the ℓ∞ norm on index-valued inputs.
///
/// Arithmetic mean, max and geometric mean use the tabulated constants
/// `1/K`, `1` and `q - 1`. Every other function is measured by brute force
/// over all pairs of input sequences, which requires `q^K` to stay within
/// `limits.lipschitz_cap`.
pub fn lipschitz_inf(f: &FunctionSpec, q: usize, k: u32, limits: &Limits) -> Result<f64> {
    match f.kind() {
        FunctionKind::ArithmeticMean => return Ok(1.0 / k as f64),
        FunctionKind::Max => return Ok(1.0),
        FunctionKind::GeometricMean => return Ok(q as f64 - 1.0),
        _ => {}
    }
    let total = (q as f64).powi(k as i32);
    if total > limits.lipschitz_cap as f64 {
        return Err(Error::Capacity {
            what: format!("input space q^K for q = {q}, K = {k}"),
            size: format!("{total:.0}"),
            cap: limits.lipschitz_cap,
        });
    }
    let levels = index_levels(q);
    let n = total as usize;
    let mut inputs = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for code in 0..n {
        let mut seq = Vec::with_capacity(k as usize);
        let mut c = code;
        for _ in 0..k {
            seq.push(c % q);
            c /= q;
        }
        values.push(f.eval_on_histogram(&Histogram::from_indices(&seq, q)?, &levels)?);
        inputs.push(seq);
    }
    let mut best = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            let dist = inputs[a].iter().zip(&inputs[b]).map(|(&x, &y)| x.abs_diff(y)).max().unwrap_or(0);
            best = best.max((values[a] - values[b]).abs() / dist as f64);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(c: &[u32]) -> Histogram {
        Histogram::new(c.to_vec()).unwrap()
    }

    #[test]
    fn product_of_two_threes() {
        let g = FunctionSpec::product();
        assert_eq!(g.eval_on_histogram(&h(&[0, 0, 0, 2]), &index_levels(4)).unwrap(), 9.0);
    }

    #[test]
    fn sum_of_zeros() {
        let g = FunctionSpec::sum();
        for k in 1..6 {
            let v = g.eval_on_histogram(&Histogram::unanimous(k, 3, 0), &index_levels(3)).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn geometric_mean_of_identical_inputs() {
        let g = FunctionSpec::geometric_mean();
        let levels = [0.25, 0.5, 0.75];
        let v = g.eval_on_histogram(&h(&[0, 3, 0]), &levels).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // zero input gives zero
        assert_eq!(g.eval_on_histogram(&h(&[1, 2]), &[0.0, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn max_and_mean() {
        let levels = index_levels(4);
        assert_eq!(FunctionSpec::max().eval_on_histogram(&h(&[1, 0, 2, 0]), &levels).unwrap(), 2.0);
        let m = FunctionSpec::arithmetic_mean().eval_on_histogram(&h(&[0, 2, 1, 0]), &levels).unwrap();
        assert!((m - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn level_count_mismatch_is_an_argument_error() {
        let err = FunctionSpec::sum().eval_on_histogram(&h(&[1, 1]), &[0.0, 1.0, 2.0]);
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn output_range_examples() {
        let lim = Limits::default();
        let r = output_range(&FunctionSpec::product(), 2, 4, 2, &index_levels(4), &lim).unwrap();
        assert_eq!(r, vec![0.0, 1.0, 4.0, 9.0]);
        let r = output_range(&FunctionSpec::sum(), 2, 2, 1, &index_levels(2), &lim).unwrap();
        assert_eq!(r, vec![0.0, 1.0, 2.0]);
        let c = FunctionSpec::constant(3, 3, 7.5).unwrap();
        assert_eq!(output_range(&c, 3, 3, 1, &index_levels(3), &lim).unwrap(), vec![7.5]);
    }

    #[test]
    fn dedup_tolerance_for_real_levels() {
        let v = sort_dedup(vec![0.1 * 3.0, 0.3, 0.2], false);
        assert_eq!(v.len(), 2);
        let v = sort_dedup(vec![0.1 * 3.0, 0.3, 0.2], true);
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn midpoints() {
        let m = midpoint_levels(16).unwrap();
        assert_eq!(m[0], 0.03125);
        assert_eq!(midpoint_levels(2).unwrap(), vec![0.25, 0.75]);
        for q in 2..70 {
            let m = midpoint_levels(q).unwrap();
            assert!((m[q - 1] - (1.0 - 0.5 / q as f64)).abs() < 1e-15);
        }
        assert!(matches!(midpoint_levels(1), Err(Error::Argument(_))));
    }

    #[test]
    fn tabulated_lipschitz_constants() {
        let lim = Limits::default();
        assert_eq!(lipschitz_inf(&FunctionSpec::arithmetic_mean(), 4, 100, &lim).unwrap(), 0.01);
        assert_eq!(lipschitz_inf(&FunctionSpec::max(), 4, 100, &lim).unwrap(), 1.0);
        assert_eq!(lipschitz_inf(&FunctionSpec::geometric_mean(), 4, 3, &lim).unwrap(), 3.0);
    }

    #[test]
    fn brute_force_lipschitz() {
        let lim = Limits::default();
        // sum of K index values changes by at most K per unit ℓ∞ step
        assert_eq!(lipschitz_inf(&FunctionSpec::sum(), 3, 3, &lim).unwrap(), 3.0);
        let c = FunctionSpec::constant(2, 3, 1.0).unwrap();
        assert_eq!(lipschitz_inf(&c, 3, 2, &lim).unwrap(), 0.0);
        let tight = Limits { lipschitz_cap: 10, ..Limits::default() };
        assert!(matches!(lipschitz_inf(&FunctionSpec::sum(), 4, 3, &tight), Err(Error::Capacity { .. })));
    }

    #[test]
    fn tabular_parse_and_lookup() {
        let text = "# K=2 q=2\n2,0,1.5\n1,1, 2.5\n0,2,-1\n";
        let t = TabularFunction::parse(text).unwrap();
        assert_eq!((t.nodes(), t.levels()), (2, 2));
        let g = FunctionSpec::tabular("t", t);
        assert_eq!(g.eval_on_histogram(&h(&[1, 1]), &[0.0, 1.0]).unwrap(), 2.5);
        let missing = g.eval_on_histogram(&h(&[3, 0]), &[0.0, 1.0]);
        assert!(matches!(missing, Err(Error::Domain(_))));
    }

    #[test]
    fn tabular_must_be_total() {
        let err = TabularFunction::parse("2,0,1\n1,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        let err = TabularFunction::parse("2,0,1\n1,x,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }
}
