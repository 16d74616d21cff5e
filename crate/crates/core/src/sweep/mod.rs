//! Monte Carlo sweeps, crossings and phase maps.

mod crossing;
mod curve;
mod grid;
mod phase;
mod scores;
mod stats;

pub use crossing::{band_width, crossings, estimate_crossing, find_crossings, CriticalEstimate, CrossingMethod, Flank};
pub use curve::{bernoulli_control, sweep_fixed_q, sweep_from_scores, SweepPoint, SweepResult, SweepSource};
pub use grid::{check_probability_grid, linear_grid, Preset, SimDims};
pub use phase::{assign_class, phase_map, phase_map_from_scores, PhaseCell, PhaseMap};
pub use scores::{OrdF64, ScoreRow, ScoreTable, Thresholds, SCORE_HEADER};
pub use stats::{mean_half_width, wilson, wilson_half_width, Z95};
