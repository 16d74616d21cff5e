//! Threshold crossings of spanning-probability curves.

use std::fmt;

use crate::pattern::PatternKind;

use super::curve::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flank {
    /// Curve goes from at-or-below to above the threshold.
    Rising,
    /// Curve goes from above to at-or-below the threshold.
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingMethod {
    InterpolatedCrossing,
}

impl fmt::Display for CrossingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("interpolated-crossing")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalEstimate {
    pub pattern: PatternKind,
    pub q: Option<f64>,
    pub p_c: f64,
    pub method: CrossingMethod,
    pub threshold: f64,
    /// Adjacent grid points enclosing `p_c`.
    pub bracket: (f64, f64),
    pub flank: Flank,
}

/// Every sign change of `value > threshold` between adjacent grid points,
/// located by linear interpolation, as `(p_c, bracket, flank)`.
pub fn find_crossings(grid: &[f64], values: &[f64], threshold: f64) -> Vec<(f64, (f64, f64), Flank)> {
    assert_eq!(grid.len(), values.len(), "grid and curve lengths differ");
    let mut out = Vec::new();
    for i in 1..grid.len() {
        let (p0, p1) = (grid[i - 1], grid[i]);
        let (v0, v1) = (values[i - 1], values[i]);
        let (a0, a1) = (v0 > threshold, v1 > threshold);
        if a0 == a1 {
            continue;
        }
        let t = (threshold - v0) / (v1 - v0);
        let p_c = (p0 + t * (p1 - p0)).clamp(p0, p1);
        let flank = if a1 { Flank::Rising } else { Flank::Falling };
        out.push((p_c, (p0, p1), flank));
    }
    out
}

/// All crossings of `pattern` in `sweep`.
pub fn crossings(sweep: &SweepResult, pattern: PatternKind, threshold: f64) -> Vec<CriticalEstimate> {
    find_crossings(&sweep.grid(), &sweep.curve(pattern), threshold)
        .into_iter()
        .map(|(p_c, bracket, flank)| CriticalEstimate {
            pattern,
            q: sweep.q,
            p_c,
            method: CrossingMethod::InterpolatedCrossing,
            threshold,
            bracket,
            flank,
        })
        .collect()
}

/// The crossing that defines the critical point of `pattern`.
///
/// PL appears as `p` grows, so its onset is the first rising crossing. All
/// other flags vanish as `p` grows, so their exit is the last falling one.
pub fn estimate_crossing(sweep: &SweepResult, pattern: PatternKind, threshold: f64) -> Option<CriticalEstimate> {
    let all = crossings(sweep, pattern, threshold);
    if pattern == PatternKind::PL {
        all.into_iter().find(|c| c.flank == Flank::Rising)
    } else {
        all.into_iter().rev().find(|c| c.flank == Flank::Falling)
    }
}

/// Total `p`-length on which the piecewise-linear curve lies strictly inside `(lo, hi)`.
pub fn band_width(grid: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    assert_eq!(grid.len(), values.len(), "grid and curve lengths differ");
    let mut width = 0.0;
    for i in 1..grid.len() {
        let (p0, p1) = (grid[i - 1], grid[i]);
        let (v0, v1) = (values[i - 1], values[i]);
        if v0 == v1 {
            if lo < v0 && v0 < hi {
                width += p1 - p0;
            }
            continue;
        }
        // parameter range t in [0, 1] where v0 + t (v1 - v0) lies in (lo, hi)
        let ta = (lo - v0) / (v1 - v0);
        let tb = (hi - v0) / (v1 - v0);
        let (t_min, t_max) = (ta.min(tb).max(0.0), ta.max(tb).min(1.0));
        if t_max > t_min {
            width += (t_max - t_min) * (p1 - p0);
        }
    }
    width
}
