//! Ingest of per-realization head scores and per-head decision thresholds.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::SweepError;
use crate::pattern::PatternKind;

pub const SCORE_HEADER: &str = "p,q,realization,A,PL,Qplus,Dplus,Q,D";

/// Calibrated head probabilities of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRow {
    pub p: f64,
    pub q: f64,
    pub realization: u64,
    pub scores: [f64; 6],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn read(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SweepError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| SweepError::Scores("empty score table".into()))?;
        let header: String = header.split(',').map(str::trim).collect::<Vec<_>>().join(",");
        if header != SCORE_HEADER {
            return Err(SweepError::Scores(format!(
                "header {header:?} does not match {SCORE_HEADER:?}"
            )));
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 9 {
                return Err(SweepError::Scores(format!(
                    "line {line_no}: expected 9 fields, found {}",
                    fields.len()
                )));
            }
            let num = |k: usize| -> Result<f64, SweepError> {
                let v: f64 = fields[k]
                    .parse()
                    .map_err(|_| SweepError::Scores(format!("line {line_no}: {:?} is not a number", fields[k])))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(SweepError::Scores(format!(
                        "line {line_no}: column {} = {v} outside [0, 1]",
                        k + 1
                    )));
                }
                Ok(v)
            };
            let realization = fields[2]
                .parse()
                .map_err(|_| SweepError::Scores(format!("line {line_no}: bad realization {:?}", fields[2])))?;
            let mut scores = [0.0; 6];
            for (k, s) in scores.iter_mut().enumerate() {
                *s = num(3 + k)?;
            }
            rows.push(ScoreRow {
                p: num(0)?,
                q: num(1)?,
                realization,
                scores,
            });
        }
        Ok(Self { rows })
    }

    pub fn render(&self) -> String {
        let mut out = String::from(SCORE_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.p, r.q, r.realization));
            for s in r.scores {
                out.push_str(&format!(",{s}"));
            }
            out.push('\n');
        }
        out
    }

    /// Rows grouped by exact `(p, q)`, in increasing `(q, p)` order.
    pub fn by_point(&self) -> BTreeMap<(OrdF64, OrdF64), Vec<&ScoreRow>> {
        let mut groups: BTreeMap<(OrdF64, OrdF64), Vec<&ScoreRow>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry((OrdF64(r.q), OrdF64(r.p))).or_default().push(r);
        }
        groups
    }
}

/// Total order over finite floats, used as a map key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Per-head decision thresholds in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds(pub [f64; 6]);

impl Default for Thresholds {
    /// 0.5 for every head.
    fn default() -> Self {
        Self::uniform(0.5)
    }
}

impl Thresholds {
    pub fn uniform(t: f64) -> Self {
        Self([t; 6])
    }

    pub fn get(&self, kind: PatternKind) -> f64 {
        self.0[kind.index()]
    }

    pub fn read(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// `pattern=value` lines; blank lines and `#` comments are skipped. All six heads are required.
    pub fn parse(text: &str) -> Result<Self, SweepError> {
        let mut values: [Option<f64>; 6] = [None; 6];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| SweepError::Thresholds(format!("line {}: {msg}", i + 1));
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected pattern=value, found {line:?}")))?;
            let kind: PatternKind = name.trim().parse().map_err(|_| err(format!("unknown pattern {:?}", name.trim())))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("{:?} is not a number", value.trim())))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(format!("threshold {v} outside [0, 1]")));
            }
            if values[kind.index()].replace(v).is_some() {
                return Err(err(format!("duplicate threshold for {kind}")));
            }
        }
        let missing: Vec<&str> = PatternKind::ALL
            .iter()
            .filter(|k| values[k.index()].is_none())
            .map(|k| k.name())
            .collect();
        if !missing.is_empty() {
            return Err(SweepError::Thresholds(format!("missing thresholds for {}", missing.join(", "))));
        }
        Ok(Self(values.map(|v| v.expect("checked above"))))
    }

    pub fn render(&self) -> String {
        PatternKind::ALL
            .iter()
            .map(|k| format!("{k}={}\n", self.get(*k)))
            .collect()
    }
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = PatternKind::ALL.iter().map(|k| format!("{k}={}", self.get(*k))).collect();
        f.write_str(&parts.join(" "))
    }
}
