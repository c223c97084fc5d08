use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};

/// How a constellation's power is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerConvention {
    /// `Σ |x_i|² ≤ 1`, the constraint of the design problem.
    UnitVectorNorm,
    /// `Σ |x_i|² / q = 1`, the usual modulation normalization.
    UnitAveragePower,
}

const POWER_TOL: f64 = 1e-9;

/// An ordered set of `q` complex symbols; symbol `i` carries level `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    points: Vec<Complex64>,
    power: PowerConvention,
}

impl Constellation {
    /// Checks the declared power convention to `1e-9` relative.
    pub fn new(points: Vec<Complex64>, power: PowerConvention) -> Result<Self> {
        if points.len() < 2 {
            return argument(format!("a constellation needs at least two points, got {}", points.len()));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return argument("constellation points must be finite");
        }
        let energy = total_energy(&points);
        let ok = match power {
            PowerConvention::UnitVectorNorm => energy <= 1.0 + POWER_TOL,
            PowerConvention::UnitAveragePower => (energy / points.len() as f64 - 1.0).abs() <= POWER_TOL,
        };
        if !ok {
            return argument(format!("points with total energy {energy} violate the {power:?} convention"));
        }
        Ok(Constellation { points, power })
    }

    /// Scales arbitrary points to unit average power.
    pub fn normalized(points: Vec<Complex64>) -> Result<Self> {
        let q = points.len() as f64;
        let energy = total_energy(&points);
        if energy <= 0.0 {
            return argument("cannot normalize an all-zero constellation");
        }
        let s = (q / energy).sqrt();
        Constellation::new(points.into_iter().map(|p| p * s).collect(), PowerConvention::UnitAveragePower)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn power(&self) -> PowerConvention {
        self.power
    }

    /// `Σ |x_i|² / q`.
    pub fn average_power(&self) -> f64 {
        total_energy(&self.points) / self.points.len() as f64
    }

    /// Rescales to unit average power and returns the factor applied.
    pub fn to_unit_average_power(&self) -> Result<(Constellation, f64)> {
        let p = self.average_power();
        if p <= 0.0 {
            return argument("cannot rescale an all-zero constellation");
        }
        let s = 1.0 / p.sqrt();
        let c = Constellation::new(self.points.iter().map(|x| x * s).collect(), PowerConvention::UnitAveragePower)?;
        Ok((c, s))
    }

    /// Smallest pairwise Euclidean distance.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }
}

pub(crate) fn total_energy(points: &[Complex64]) -> f64 {
    points.iter().map(|p| p.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_conventions_are_checked() {
        let pts = vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)];
        assert!(Constellation::new(pts.clone(), PowerConvention::UnitVectorNorm).is_ok());
        assert!(Constellation::new(pts, PowerConvention::UnitAveragePower).is_err());
        let unit = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(Constellation::new(unit, PowerConvention::UnitVectorNorm).is_err());
    }

    #[test]
    fn rescaling_reports_factor() {
        let pts = vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)];
        let c = Constellation::new(pts, PowerConvention::UnitVectorNorm).unwrap();
        let (u, s) = c.to_unit_average_power().unwrap();
        assert!((s - 2.0).abs() < 1e-15);
        assert!((u.average_power() - 1.0).abs() < 1e-15);
        assert!((u.min_distance() - 2.0).abs() < 1e-15);
    }
}
