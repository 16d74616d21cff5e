//! Single-class phase maps over the `(p, q)` plane.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::SweepError;
use crate::pattern::{Labeler, PatternKind, PhaseClass};

use super::curve::{label_point, SweepPoint};
use super::grid::{check_probability_grid, SimDims};
use super::scores::{ScoreTable, Thresholds};

/// Fixed-order decision: the last pattern in canonical order whose
/// probability exceeds its threshold, else `A` if it exceeds its threshold,
/// else percolating without a pattern.
pub fn assign_class(probs: &[f64; 6], thresholds: &Thresholds) -> PhaseClass {
    let above = |k: PatternKind| probs[k.index()] > thresholds.get(k);
    if let Some(kind) = PatternKind::PATTERNS.iter().rev().copied().find(|&k| above(k)) {
        return PhaseClass::Pattern(kind);
    }
    if above(PatternKind::A) {
        PhaseClass::Absorbing
    } else {
        PhaseClass::PercolatingOnly
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCell {
    pub p: f64,
    pub q: f64,
    pub trials: usize,
    pub probs: [f64; 6],
    pub class: PhaseClass,
}

/// Cells stored `q`-major: cell `(ip, iq)` sits at `iq * p_grid.len() + ip`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub cells: Vec<PhaseCell>,
}

impl PhaseMap {
    pub fn cell(&self, ip: usize, iq: usize) -> &PhaseCell {
        &self.cells[iq * self.p_grid.len() + ip]
    }

    /// Cell whose grid coordinates are closest to `(p, q)`.
    pub fn nearest(&self, p: f64, q: f64) -> &PhaseCell {
        let closest = |grid: &[f64], v: f64| {
            (0..grid.len())
                .min_by(|&a, &b| (grid[a] - v).abs().total_cmp(&(grid[b] - v).abs()))
                .expect("grids are nonempty")
        };
        self.cell(closest(&self.p_grid, p), closest(&self.q_grid, q))
    }

    /// Same probabilities, classes recomputed under `thresholds`.
    pub fn reclassify(&self, thresholds: &Thresholds) -> PhaseMap {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.class = assign_class(&c.probs, thresholds);
        }
        out
    }

    /// 4-connected components of cells with class `class`, as `(ip, iq)` lists.
    pub fn regions(&self, class: PhaseClass) -> Vec<Vec<(usize, usize)>> {
        let (np, nq) = (self.p_grid.len(), self.q_grid.len());
        let mut seen = vec![false; np * nq];
        let mut regions = Vec::new();
        for start in 0..np * nq {
            if seen[start] || self.cells[start].class != class {
                continue;
            }
            let mut region = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                let (ip, iq) = (k % np, k / np);
                region.push((ip, iq));
                let mut visit = |jp: usize, jq: usize| {
                    let j = jq * np + jp;
                    if !seen[j] && self.cells[j].class == class {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if ip > 0 {
                    visit(ip - 1, iq);
                }
                if ip + 1 < np {
                    visit(ip + 1, iq);
                }
                if iq > 0 {
                    visit(ip, iq - 1);
                }
                if iq + 1 < nq {
                    visit(ip, iq + 1);
                }
            }
            region.sort_unstable();
            regions.push(region);
        }
        regions
    }

    pub const CSV_HEADER: &'static str = "p,q,trials,A,PL,Qplus,Dplus,Q,D,class";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = write!(out, "{},{},{}", c.p, c.q, c.trials);
            for v in c.probs {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{}", c.class);
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

    /// Parses [`PhaseMap::to_csv`] output; rows must cover the full grid in `q`-major order.
    pub fn from_csv(text: &str) -> Result<Self, SweepError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == Self::CSV_HEADER => {}
            _ => return Err(SweepError::Table(format!("expected header {:?}", Self::CSV_HEADER))),
        }
        let mut cells = Vec::new();
        for (i, line) in lines {
            let err = |m: String| SweepError::Table(format!("line {}: {m}", i + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 10 {
                return Err(err(format!("expected 10 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("{s:?} is not a number")));
            let mut probs = [0.0; 6];
            for (k, v) in probs.iter_mut().enumerate() {
                *v = num(f[3 + k])?;
            }
            cells.push(PhaseCell {
                p: num(f[0])?,
                q: num(f[1])?,
                trials: f[2].parse().map_err(|_| err(format!("bad trial count {:?}", f[2])))?,
                probs,
                class: PhaseClass::parse(f[9]).ok_or_else(|| err(format!("unknown class {:?}", f[9])))?,
            });
        }
        let mut p_grid: Vec<f64> = Vec::new();
        for c in &cells {
            if p_grid.contains(&c.p) {
                break;
            }
            p_grid.push(c.p);
        }
        let mut q_grid: Vec<f64> = cells.iter().step_by(p_grid.len().max(1)).map(|c| c.q).collect();
        q_grid.dedup();
        let map = PhaseMap { p_grid, q_grid, cells };
        map.check_layout()?;
        Ok(map)
    }

    fn check_layout(&self) -> Result<(), SweepError> {
        check_probability_grid(&self.p_grid)?;
        check_probability_grid(&self.q_grid)?;
        if self.cells.len() != self.p_grid.len() * self.q_grid.len() {
            return Err(SweepError::Table("cells do not cover the p x q grid".into()));
        }
        for (iq, &q) in self.q_grid.iter().enumerate() {
            for (ip, &p) in self.p_grid.iter().enumerate() {
                let c = self.cell(ip, iq);
                if c.p != p || c.q != q {
                    return Err(SweepError::Table(format!("cell ({p}, {q}) missing or out of order")));
                }
            }
        }
        Ok(())
    }
}

/// Labels `n_real` realizations per cell and classifies the averaged flags.
/// Cell `(ip, iq)` uses point index `iq * p_grid.len() + ip` in the seed derivation.
pub fn phase_map(
    p_grid: &[f64],
    q_grid: &[f64],
    n_real: usize,
    dims: SimDims,
    labeler: &Labeler,
    thresholds: &Thresholds,
    master_seed: u64,
) -> Result<PhaseMap, SweepError> {
    check_probability_grid(p_grid)?;
    check_probability_grid(q_grid)?;
    if n_real == 0 {
        return Err(SweepError::Grid("need at least one realization".into()));
    }
    let mut cells = Vec::with_capacity(p_grid.len() * q_grid.len());
    for (iq, &q) in q_grid.iter().enumerate() {
        for (ip, &p) in p_grid.iter().enumerate() {
            let point = (iq * p_grid.len() + ip) as u64;
            let targets = label_point(p, q, point, n_real, dims, labeler, master_seed)?;
            let summary = SweepPoint::from_targets(p, &targets);
            cells.push(PhaseCell {
                p,
                q,
                trials: n_real,
                probs: summary.prob,
                class: assign_class(&summary.prob, thresholds),
            });
        }
    }
    Ok(PhaseMap {
        p_grid: p_grid.to_vec(),
        q_grid: q_grid.to_vec(),
        cells,
    })
}

/// Phase map from mean head scores; every `(p, q)` of the full grid spanned
/// by the table must be present.
pub fn phase_map_from_scores(table: &ScoreTable, thresholds: &Thresholds) -> Result<PhaseMap, SweepError> {
    let groups = table.by_point();
    let mut p_grid: Vec<f64> = groups.keys().map(|(_, p)| p.0).collect();
    p_grid.sort_by(f64::total_cmp);
    p_grid.dedup();
    let mut q_grid: Vec<f64> = groups.keys().map(|(q, _)| q.0).collect();
    q_grid.dedup();
    if groups.len() != p_grid.len() * q_grid.len() {
        return Err(SweepError::Scores(format!(
            "score table covers {} of {} grid cells",
            groups.len(),
            p_grid.len() * q_grid.len()
        )));
    }
    let cells = groups
        .into_iter()
        .map(|((q, p), rows)| {
            let scores: Vec<[f64; 6]> = rows.iter().map(|r| r.scores).collect();
            let summary = SweepPoint::from_scores(p.0, &scores);
            PhaseCell {
                p: p.0,
                q: q.0,
                trials: rows.len(),
                probs: summary.prob,
                class: assign_class(&summary.prob, thresholds),
            }
        })
        .collect();
    let map = PhaseMap { p_grid, q_grid, cells };
    map.check_layout()?;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_match_rule() {
        let t = Thresholds::default();
        assert_eq!(
            assign_class(&[0.0, 0.0, 0.9, 0.9, 0.9, 0.9], &t),
            PhaseClass::Pattern(PatternKind::D)
        );
        assert_eq!(assign_class(&[0.99, 0.0, 0.0, 0.0, 0.0, 0.0], &t), PhaseClass::Absorbing);
        assert_eq!(
            assign_class(&[0.0, 0.94, 0.1, 0.2, 0.3, 0.4], &t),
            PhaseClass::Pattern(PatternKind::PL)
        );
        assert_eq!(assign_class(&[0.3, 0.1, 0.1, 0.1, 0.1, 0.1], &t), PhaseClass::PercolatingOnly);
        // equality is not "exceeds"
        assert_eq!(assign_class(&[0.0, 0.5, 0.0, 0.0, 0.0, 0.0], &t), PhaseClass::PercolatingOnly);
    }

    #[test]
    fn small_map_round_trip() {
        let grid = [0.0, 0.5, 1.0];
        let m = phase_map(&grid, &grid, 4, SimDims::new(8, 16), &Labeler::default(), &Thresholds::default(), 2)
            .unwrap();
        assert_eq!(m.cell(0, 0).class, PhaseClass::Absorbing);
        assert_eq!(m.cell(2, 2).class, PhaseClass::Pattern(PatternKind::PL));
        assert_eq!(m.nearest(0.9, 0.9).class, PhaseClass::Pattern(PatternKind::PL));
        let back = PhaseMap::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.reclassify(&Thresholds::default()), m);
    }

    #[test]
    fn regions_are_four_connected() {
        let a = PhaseClass::Absorbing;
        let b = PhaseClass::PercolatingOnly;
        let layout = [a, b, a, a, b, b, b, b, a];
        let grid = [0.0, 0.5, 1.0];
        let cells = layout
            .iter()
            .enumerate()
            .map(|(k, &class)| PhaseCell {
                p: grid[k % 3],
                q: grid[k / 3],
                trials: 1,
                probs: [0.0; 6],
                class,
            })
            .collect();
        let m = PhaseMap {
            p_grid: grid.to_vec(),
            q_grid: grid.to_vec(),
            cells,
        };
        let regions = m.regions(a);
        assert_eq!(regions, vec![vec![(0, 0), (0, 1)], vec![(2, 0)], vec![(2, 2)]]);
        assert_eq!(m.regions(b).len(), 1);
    }

    #[test]
    fn score_maps() {
        let text = "p,q,realization,A,PL,Qplus,Dplus,Q,D\n\
                    0.1,0.1,0,1,0,0,0,0,0\n0.9,0.1,0,0,1,0,0,0,0\n\
                    0.1,0.9,0,0,0,0,0,1,1\n0.9,0.9,0,0,1,0,0,0,0\n";
        let m = phase_map_from_scores(&ScoreTable::parse(text).unwrap(), &Thresholds::default()).unwrap();
        assert_eq!(m.p_grid, vec![0.1, 0.9]);
        assert_eq!(m.cell(0, 0).class, PhaseClass::Absorbing);
        assert_eq!(m.cell(0, 1).class, PhaseClass::Pattern(PatternKind::D));
        let partial = "p,q,realization,A,PL,Qplus,Dplus,Q,D\n0.1,0.1,0,1,0,0,0,0,0\n0.9,0.9,0,0,1,0,0,0,0\n";
        assert!(phase_map_from_scores(&ScoreTable::parse(partial).unwrap(), &Thresholds::default()).is_err());
    }
}
