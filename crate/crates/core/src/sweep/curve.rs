//! Spanning-probability curves over a one-dimensional parameter grid.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::SweepError;
use crate::pattern::{Labeler, MultiHotTarget, PatternKind};
use crate::rng::derive_seed;
use crate::sim::{bernoulli_field, check_prob, simulate, SimParams};

use super::grid::{check_probability_grid, SimDims};
use super::scores::ScoreTable;
use super::stats::{mean_half_width, wilson_half_width};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepSource {
    /// Fractions of deterministic automaton labels.
    DeterministicLabels,
    /// Mean calibrated head scores.
    NnScores,
    /// Fractions of isotropic labels on i.i.d. Bernoulli fields.
    BernoulliControl,
}

impl SweepSource {
    pub fn name(self) -> &'static str {
        match self {
            SweepSource::DeterministicLabels => "deterministic-labels",
            SweepSource::NnScores => "nn-scores",
            SweepSource::BernoulliControl => "bernoulli-control",
        }
    }
}

impl fmt::Display for SweepSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepSource {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic-labels" => Ok(SweepSource::DeterministicLabels),
            "nn-scores" => Ok(SweepSource::NnScores),
            "bernoulli-control" => Ok(SweepSource::BernoulliControl),
            other => Err(SweepError::Table(format!("unknown source {other:?}"))),
        }
    }
}

/// Estimates at one grid point, canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub trials: usize,
    pub prob: [f64; 6],
    /// 95% confidence half-widths.
    pub half_width: [f64; 6],
}

impl SweepPoint {
    /// Fractions of `targets` carrying each flag, with Wilson half-widths.
    pub fn from_targets(p: f64, targets: &[MultiHotTarget]) -> Self {
        let n = targets.len();
        let mut counts = [0usize; 6];
        for t in targets {
            for (c, f) in counts.iter_mut().zip(t.flags()) {
                *c += usize::from(f);
            }
        }
        Self {
            p,
            trials: n,
            prob: counts.map(|k| if n == 0 { 0.0 } else { k as f64 / n as f64 }),
            half_width: counts.map(|k| wilson_half_width(k, n)),
        }
    }

    /// Mean scores with normal-approximation half-widths.
    pub fn from_scores(p: f64, scores: &[[f64; 6]]) -> Self {
        let n = scores.len();
        let column = |k: usize| scores.iter().map(|s| s[k]).collect::<Vec<_>>();
        Self {
            p,
            trials: n,
            prob: std::array::from_fn(|k| {
                if n == 0 {
                    0.0
                } else {
                    column(k).iter().sum::<f64>() / n as f64
                }
            }),
            half_width: std::array::from_fn(|k| mean_half_width(&column(k))),
        }
    }

    pub fn get(&self, kind: PatternKind) -> f64 {
        self.prob[kind.index()]
    }
}

/// `P_k(p)` for the six canonical flags along a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Fixed `q`; `None` for Bernoulli controls where the axis is the fill fraction.
    pub q: Option<f64>,
    pub source: SweepSource,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.p).collect()
    }

    pub fn curve(&self, kind: PatternKind) -> Vec<f64> {
        self.points.iter().map(|pt| pt.get(kind)).collect()
    }

    pub const CSV_HEADER: &'static str =
        "p,q,source,trials,A,A_hw,PL,PL_hw,Qplus,Qplus_hw,Dplus,Dplus_hw,Q,Q_hw,D,D_hw";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        let q = self.q.map(|q| q.to_string()).unwrap_or_default();
        for pt in &self.points {
            let _ = write!(out, "{},{q},{},{}", pt.p, self.source, pt.trials);
            for k in 0..6 {
                let _ = write!(out, ",{},{}", pt.prob[k], pt.half_width[k]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SweepError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, SweepError> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn from_csv(text: &str) -> Result<Self, SweepError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == Self::CSV_HEADER => {}
            _ => return Err(SweepError::Table(format!("expected header {:?}", Self::CSV_HEADER))),
        }
        let mut q = None;
        let mut source = None;
        let mut points = Vec::new();
        for (i, line) in lines {
            let err = |m: String| SweepError::Table(format!("line {}: {m}", i + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 16 {
                return Err(err(format!("expected 16 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("{s:?} is not a number")));
            let row_q = if f[1].is_empty() { None } else { Some(num(f[1])?) };
            let row_source: SweepSource = f[2].parse()?;
            if points.is_empty() {
                q = row_q;
                source = Some(row_source);
            } else if row_q != q || Some(row_source) != source {
                return Err(err("q and source must be constant".into()));
            }
            let trials = f[3].parse().map_err(|_| err(format!("bad trial count {:?}", f[3])))?;
            let mut prob = [0.0; 6];
            let mut half_width = [0.0; 6];
            for k in 0..6 {
                prob[k] = num(f[4 + 2 * k])?;
                half_width[k] = num(f[5 + 2 * k])?;
                if !(0.0..=1.0).contains(&prob[k]) {
                    return Err(err(format!("probability {} outside [0, 1]", prob[k])));
                }
            }
            points.push(SweepPoint {
                p: num(f[0])?,
                trials,
                prob,
                half_width,
            });
        }
        let source = source.ok_or_else(|| SweepError::Table("no rows".into()))?;
        let result = Self { q, source, points };
        check_probability_grid(&result.grid())?;
        Ok(result)
    }
}

fn check_sweep_args(p_grid: &[f64], n_real: usize) -> Result<(), SweepError> {
    check_probability_grid(p_grid)?;
    if n_real == 0 {
        return Err(SweepError::Grid("need at least one realization".into()));
    }
    Ok(())
}

/// Labels `n_real` automaton realizations at each `(p, q)`; realization `r`
/// at grid index `i` uses seed `derive_seed(master_seed, i, r)`.
pub fn sweep_fixed_q(
    q: f64,
    p_grid: &[f64],
    n_real: usize,
    dims: SimDims,
    labeler: &Labeler,
    master_seed: u64,
) -> Result<SweepResult, SweepError> {
    check_prob("q", q)?;
    check_sweep_args(p_grid, n_real)?;
    let points = p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let targets = label_point(p, q, i as u64, n_real, dims, labeler, master_seed)?;
            Ok(SweepPoint::from_targets(p, &targets))
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(SweepResult {
        q: Some(q),
        source: SweepSource::DeterministicLabels,
        points,
    })
}

pub(crate) fn label_point(
    p: f64,
    q: f64,
    point: u64,
    n_real: usize,
    dims: SimDims,
    labeler: &Labeler,
    master_seed: u64,
) -> Result<Vec<MultiHotTarget>, SweepError> {
    let base = SimParams::new(dims.n_sites, dims.n_steps, p, q, 0)?;
    (0..n_real)
        .into_par_iter()
        .map(|r| {
            let field = simulate(&base.with_seed(derive_seed(master_seed, point, r as u64)));
            Ok(labeler.label(&field)?)
        })
        .collect()
}

/// Spanning fractions on i.i.d. Bernoulli fields of `dims.n_steps + 1` rows,
/// with survival replaced by site-lattice spanning.
pub fn bernoulli_control(
    pb_grid: &[f64],
    n_real: usize,
    dims: SimDims,
    labeler: &Labeler,
    master_seed: u64,
) -> Result<SweepResult, SweepError> {
    check_sweep_args(pb_grid, n_real)?;
    let points = pb_grid
        .iter()
        .enumerate()
        .map(|(i, &pb)| {
            let targets = (0..n_real)
                .into_par_iter()
                .map(|r| {
                    let seed = derive_seed(master_seed, i as u64, r as u64);
                    let field = bernoulli_field(dims.n_sites, dims.n_steps + 1, pb, seed)?;
                    Ok(labeler.label_isotropic(&field)?)
                })
                .collect::<Result<Vec<_>, SweepError>>()?;
            Ok(SweepPoint::from_targets(pb, &targets))
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(SweepResult {
        q: None,
        source: SweepSource::BernoulliControl,
        points,
    })
}

/// Mean head scores of the rows at `q` (matched within `1e-9`), one point per distinct `p`.
pub fn sweep_from_scores(table: &ScoreTable, q: f64) -> Result<SweepResult, SweepError> {
    let mut points = Vec::new();
    for ((row_q, p), rows) in table.by_point() {
        if (row_q.0 - q).abs() > 1e-9 {
            continue;
        }
        let scores: Vec<[f64; 6]> = rows.iter().map(|r| r.scores).collect();
        points.push(SweepPoint::from_scores(p.0, &scores));
    }
    if points.is_empty() {
        return Err(SweepError::Scores(format!("no rows with q = {q}")));
    }
    Ok(SweepResult {
        q: Some(q),
        source: SweepSource::NnScores,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rates_are_absorbing() {
        let r = sweep_fixed_q(0.0, &[0.0], 16, SimDims::new(10, 20), &Labeler::default(), 1).unwrap();
        assert_eq!(r.points[0].prob, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.points[0].trials, 16);
    }

    #[test]
    fn deterministic_and_order_independent() {
        let dims = SimDims::new(12, 40);
        let l = Labeler::default();
        let a = sweep_fixed_q(0.9, &[0.2, 0.4], 20, dims, &l, 5).unwrap();
        let b = sweep_fixed_q(0.9, &[0.2, 0.4], 20, dims, &l, 5).unwrap();
        assert_eq!(a, b);
        let c = sweep_fixed_q(0.9, &[0.4], 20, dims, &l, 5).unwrap();
        // grid index enters the seed, so a point moved to index 0 sees other seeds
        assert_eq!(c.points[0].trials, 20);
    }

    #[test]
    fn bernoulli_extremes() {
        let l = Labeler::default();
        let r = bernoulli_control(&[0.0, 1.0], 4, SimDims::new(10, 19), &l, 3).unwrap();
        assert_eq!(r.points[0].prob, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let full = r.points[1];
        assert_eq!(full.get(PatternKind::PL), 1.0);
        assert_eq!(full.get(PatternKind::D), 0.0);
        assert_eq!(full.get(PatternKind::Q), 0.0);
        assert_eq!(r.q, None);
    }

    #[test]
    fn csv_round_trip() {
        let r = sweep_fixed_q(0.9, &[0.1, 0.3], 8, SimDims::new(10, 30), &Labeler::default(), 9).unwrap();
        assert_eq!(SweepResult::from_csv(&r.to_csv()).unwrap(), r);
        let b = bernoulli_control(&[0.5], 2, SimDims::new(10, 9), &Labeler::default(), 1).unwrap();
        assert_eq!(SweepResult::from_csv(&b.to_csv()).unwrap(), b);
        assert!(SweepResult::from_csv("p,q\n").is_err());
    }

    #[test]
    fn invalid_sweeps() {
        let l = Labeler::default();
        let d = SimDims::new(10, 10);
        assert!(sweep_fixed_q(0.9, &[], 1, d, &l, 0).is_err());
        assert!(sweep_fixed_q(0.9, &[0.3, 0.2], 1, d, &l, 0).is_err());
        assert!(sweep_fixed_q(0.9, &[0.2], 0, d, &l, 0).is_err());
        assert!(sweep_fixed_q(1.9, &[0.2], 1, d, &l, 0).is_err());
        assert!(sweep_fixed_q(0.9, &[0.2], 1, SimDims::new(2, 10), &l, 0).is_err());
    }

    #[test]
    fn score_sweep_means() {
        let text = "p,q,realization,A,PL,Qplus,Dplus,Q,D\n\
                    0.2,0.9,0,0,0,0,0,0,1\n0.2,0.9,1,0,0,0,0,0,0\n\
                    0.1,0.9,0,0,0,0,0,1,1\n0.1,0.5,0,1,0,0,0,0,0\n";
        let t = ScoreTable::parse(text).unwrap();
        let r = sweep_from_scores(&t, 0.9).unwrap();
        assert_eq!(r.grid(), vec![0.1, 0.2]);
        assert_eq!(r.curve(PatternKind::D), vec![1.0, 0.5]);
        assert_eq!(r.points[1].trials, 2);
        assert!(sweep_from_scores(&t, 0.3).is_err());
    }
}
