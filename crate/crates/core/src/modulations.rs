//! Standard constellations at unit average power.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{argument, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationKind {
    Pam,
    Qam,
    Hex,
    Psk,
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModulationKind::Pam => "pam",
            ModulationKind::Qam => "qam",
            ModulationKind::Hex => "hex",
            ModulationKind::Psk => "psk",
        })
    }
}

impl FromStr for ModulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pam" => Ok(ModulationKind::Pam),
            "qam" => Ok(ModulationKind::Qam),
            "hex" | "hexagonal" => Ok(ModulationKind::Hex),
            "psk" => Ok(ModulationKind::Psk),
            other => argument(format!("unknown modulation '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub kind: ModulationKind,
    pub q: usize,
}

impl ModulationSpec {
    pub fn new(kind: ModulationKind, q: usize) -> Self {
        ModulationSpec { kind, q }
    }
}

impl fmt::Display for ModulationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind, self.q)
    }
}

/// Generates the constellation in canonical order: PAM ascending, QAM and
/// hexagonal row-major by imaginary then real part, PSK by ascending angle.
pub fn generate(spec: ModulationSpec) -> Result<Constellation> {
    let q = spec.q;
    if q < 2 {
        return argument(format!("{} needs q ≥ 2, got {q}", spec.kind));
    }
    let points = match spec.kind {
        ModulationKind::Pam => pam(q),
        ModulationKind::Psk => {
            return Constellation::normalized(
                (0..q).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / q as f64)).collect(),
            )
        }
        ModulationKind::Qam => qam(q)?,
        ModulationKind::Hex => hex(q),
    };
    Constellation::normalized(points)
}

/// Smallest pairwise distance of a constellation.
pub fn min_distance(c: &Constellation) -> f64 {
    c.min_distance()
}

fn pam(q: usize) -> Vec<Complex64> {
    (0..q).map(|k| Complex64::new(2.0 * k as f64 - (q as f64 - 1.0), 0.0)).collect()
}

fn odd_axis(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| 2.0 * k as f64 - (n as f64 - 1.0))
}

fn sort_row_major(points: &mut [Complex64]) {
    points.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

fn qam(q: usize) -> Result<Vec<Complex64>> {
    let side = (q as f64).sqrt().round() as usize;
    let mut points: Vec<Complex64> = if side * side == q {
        odd_axis(side).flat_map(|y| odd_axis(side).map(move |x| Complex64::new(x, y))).collect()
    } else if q.is_power_of_two() && q.trailing_zeros() % 2 == 1 {
        let m = q.trailing_zeros();
        if q < 32 {
            // 2 and 8 points: plain rectangle, wider than tall
            let (cols, rows) = (1usize << m.div_ceil(2), 1usize << ((m - 1) / 2));
            odd_axis(rows).flat_map(|y| odd_axis(cols).map(move |x| Complex64::new(x, y))).collect()
        } else {
            // cross: a square of side 3·2^(n-1) with 2^(n-2)-sized corners removed
            let n = (m - 1) / 2;
            let side = 3usize << (n - 1);
            let corner = 1usize << (n - 2);
            let mut pts = Vec::with_capacity(q);
            for r in 0..side {
                for c in 0..side {
                    let edge_r = r < corner || r >= side - corner;
                    let edge_c = c < corner || c >= side - corner;
                    if !(edge_r && edge_c) {
                        pts.push(Complex64::new(
                            2.0 * c as f64 - (side as f64 - 1.0),
                            2.0 * r as f64 - (side as f64 - 1.0),
                        ));
                    }
                }
            }
            pts
        }
    } else {
        return argument(format!("QAM needs q to be a perfect square or an odd power of two, got {q}"));
    };
    sort_row_major(&mut points);
    Ok(points)
}

/// The `q` triangular-lattice points (unit spacing) closest to the origin,
/// ties broken by angle, then recentred on their centroid.
fn hex(q: usize) -> Vec<Complex64> {
    let radius = (q as f64).sqrt().ceil() as i64 + 2;
    let mut cands: Vec<(i64, f64, Complex64)> = Vec::new();
    for a in -radius..=radius {
        for b in -radius..=radius {
            let norm = a * a + a * b + b * b;
            let z = Complex64::new(a as f64 + 0.5 * b as f64, b as f64 * 3f64.sqrt() / 2.0);
            let mut angle = z.im.atan2(z.re);
            if angle < 0.0 {
                angle += 2.0 * PI;
            }
            cands.push((norm, angle, z));
        }
    }
    cands.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut points: Vec<Complex64> = cands.into_iter().take(q).map(|c| c.2).collect();
    let centroid = points.iter().sum::<Complex64>() / q as f64;
    for p in points.iter_mut() {
        *p -= centroid;
    }
    sort_row_major(&mut points);
    points
}
