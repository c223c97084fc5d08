//! JSON form of a designed constellation.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::constraints::ConstraintForm;
use super::solver::{DesignResult, SolverConfig};
use crate::constellation::{Constellation, PowerConvention};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for PointRecord {
    fn from(z: Complex64) -> Self {
        PointRecord { re: z.re, im: z.im }
    }
}

impl From<PointRecord> for Complex64 {
    fn from(p: PointRecord) -> Self {
        Complex64::new(p.re, p.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct DesignDocument {
    pub q: usize,
    #[serde(rename = "K")]
    pub k: u32,
    pub p: u32,
    pub function: String,
    pub levels: Vec<f64>,
    pub constraints: ConstraintForm,
    pub power_convention: PowerConvention,
    pub points: Vec<PointRecord>,
    pub lambda_star: f64,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl DesignDocument {
    pub fn from_result(
        result: &DesignResult,
        k: u32,
        function: &str,
        levels: &[f64],
        form: ConstraintForm,
        solver: &SolverConfig,
    ) -> Self {
        let p = match form {
            ConstraintForm::Full { p, .. } | ConstraintForm::Reduced { p } => p,
        };
        DesignDocument {
            q: result.constellation.len(),
            k,
            p,
            function: function.to_string(),
            levels: levels.to_vec(),
            constraints: form,
            power_convention: result.constellation.power(),
            points: result.constellation.points().iter().map(|&z| z.into()).collect(),
            lambda_star: result.lambda_star,
            seed: solver.seed,
            solver: solver.clone(),
        }
    }

    pub fn constellation(&self) -> Result<Constellation> {
        if self.points.len() != self.q {
            return crate::error::argument(format!(
                "document declares q = {} but lists {} points",
                self.q,
                self.points.len()
            ));
        }
        Constellation::new(self.points.iter().map(|&p| p.into()).collect(), self.power_convention)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
