use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Lin,
    #[default]
    Log,
}

/// Grid of normalized frequency offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: 1e-2,
            max: 1e2,
            points: 25,
            scale: GridScale::Log,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(domain("grid bounds must be finite"));
        }
        if self.min < 0.0 {
            return Err(domain(format!("grid minimum must be >= 0, got {}", self.min)));
        }
        if self.points == 0 {
            return Err(domain("grid needs at least one point"));
        }
        if self.points > 1 && self.max <= self.min {
            return Err(domain(format!(
                "grid maximum {} must exceed minimum {}",
                self.max, self.min
            )));
        }
        if self.scale == GridScale::Log && self.min <= 0.0 {
            return Err(domain("logarithmic grid needs a positive minimum"));
        }
        Ok(())
    }

    /// Strictly increasing offsets from `min` to `max` inclusive.
    pub fn offsets(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let last = (self.points - 1) as f64;
        let mut xs: Vec<f64> = (0..self.points)
            .map(|i| {
                let u = i as f64 / last;
                match self.scale {
                    GridScale::Lin => self.min + (self.max - self.min) * u,
                    GridScale::Log => self.min * (self.max / self.min).powf(u),
                }
            })
            .collect();
        xs[0] = self.min;
        xs[self.points - 1] = self.max;
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("grid is too fine to be strictly increasing in double precision"));
        }
        Ok(xs)
    }

    /// Offsets with the reference point `x = 0` prepended when absent.
    pub fn offsets_with_origin(&self) -> Result<Vec<f64>> {
        let mut xs = self.offsets()?;
        if xs[0] > 0.0 {
            xs.insert(0, 0.0);
        }
        Ok(xs)
    }
}
