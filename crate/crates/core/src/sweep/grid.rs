//! Parameter grids, system sizes and presets.

use std::fmt;
use std::str::FromStr;

use crate::error::SweepError;
use crate::sim::check_prob;

/// Lattice size of every realization in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimDims {
    pub n_sites: usize,
    pub n_steps: usize,
}

impl SimDims {
    pub fn new(n_sites: usize, n_steps: usize) -> Self {
        Self { n_sites, n_steps }
    }
}

/// Standard sweep budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 50 x 500, 256 realizations.
    Desk,
    /// 50 x 2000, 1024 realizations.
    Paper,
}

impl Preset {
    pub fn dims(self) -> SimDims {
        match self {
            Preset::Desk => SimDims::new(50, 500),
            Preset::Paper => SimDims::new(50, 2000),
        }
    }

    pub fn realizations(self) -> usize {
        match self {
            Preset::Desk => 256,
            Preset::Paper => 1024,
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(format!("unknown preset {other:?} (expected desk or paper)")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        })
    }
}

/// Inclusive grid `min, min + step, ...` up to `max`, tolerant of rounding.
///
/// Points are computed as `min + k * step` and rounded to 12 decimals so
/// that grids print cleanly.
pub fn linear_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, SweepError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(SweepError::Grid("grid bounds must be finite".into()));
    }
    if step <= 0.0 {
        return Err(SweepError::Grid(format!("step must be positive, got {step}")));
    }
    if max < min {
        return Err(SweepError::Grid(format!("max {max} < min {min}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(SweepError::Grid(format!("grid of {count} points is too large")));
    }
    Ok((0..count)
        .map(|k| ((min + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Nonempty, strictly increasing probabilities.
pub fn check_probability_grid(grid: &[f64]) -> Result<(), SweepError> {
    if grid.is_empty() {
        return Err(SweepError::Grid("grid is empty".into()));
    }
    for &v in grid {
        check_prob("grid point", v)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SweepError::Grid("grid must be strictly increasing".into()));
    }
    Ok(())
}
