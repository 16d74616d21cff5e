//! Dataset generation regimes and the text manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ParamError, StoreError};
use crate::pattern::{Labeler, MultiHotTarget, PatternKind, PhaseClass};
use crate::rng::{derive_seed, mix64};
use crate::sim::{check_prob, simulate, SimParams};

use super::io::{encode_record, DatasetWriter};

/// Systems simulated in parallel before their records are appended.
const CHUNK: usize = 256;

/// Dominant-class fraction at which a point counts as deep inside a phase.
pub const DEEP_PHASE_FRACTION: f64 = 0.99;

const POINT_SALT: u64 = 0x05EE_D0F9_01A7;
const SIZE_SALT: u64 = 0x005E_ED0F_512E;

#[derive(Debug, Clone, PartialEq)]
pub enum GenerationMode {
    /// Explicit `(p, q)` points.
    SpecialPoints(Vec<(f64, f64)>),
    /// `count` points drawn uniformly from the unit square.
    RandomPoints { count: usize },
    /// `count` systems, each at its own uniformly drawn point.
    TestSet { count: usize },
}

impl GenerationMode {
    pub fn name(&self) -> &'static str {
        match self {
            GenerationMode::SpecialPoints(_) => "special-points",
            GenerationMode::RandomPoints { .. } => "random-points",
            GenerationMode::TestSet { .. } => "test-set",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSpec {
    pub mode: GenerationMode,
    /// Ignored in test-set mode, where every point holds one system.
    pub systems_per_point: usize,
    /// Inclusive range of `n_sites`.
    pub n_range: (usize, usize),
    /// Inclusive range of `n_steps`; fields hold `n_steps + 1` rows.
    pub t_range: (usize, usize),
    pub master_seed: u64,
    pub compress: bool,
}

impl GenerationSpec {
    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |msg: String| Err(ParamError::Scheme(msg));
        match &self.mode {
            GenerationMode::SpecialPoints(points) => {
                if points.is_empty() {
                    return bad("special-points mode needs at least one (p, q) point".into());
                }
                for &(p, q) in points {
                    check_prob("p", p)?;
                    check_prob("q", q)?;
                }
            }
            GenerationMode::RandomPoints { count } | GenerationMode::TestSet { count } => {
                if *count == 0 {
                    return bad(format!("{} mode needs a positive count", self.mode.name()));
                }
            }
        }
        if self.systems_per_point == 0 && !matches!(self.mode, GenerationMode::TestSet { .. }) {
            return bad("systems_per_point must be positive".into());
        }
        let (n0, n1) = self.n_range;
        let (t0, t1) = self.t_range;
        if n0 < 3 {
            return Err(ParamError::TooFewSites(n0));
        }
        if t0 < 1 {
            return Err(ParamError::NoSteps);
        }
        if n0 > n1 || t0 > t1 {
            return bad(format!("empty size range N {n0}..={n1}, T {t0}..={t1}"));
        }
        Ok(())
    }

    /// The `(p, q)` of every point, in point-index order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match &self.mode {
            GenerationMode::SpecialPoints(points) => points.clone(),
            GenerationMode::RandomPoints { count } | GenerationMode::TestSet { count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix64(self.master_seed ^ POINT_SALT));
                (0..*count).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect()
            }
        }
    }

    pub fn systems_at_each_point(&self) -> usize {
        match self.mode {
            GenerationMode::TestSet { .. } => 1,
            _ => self.systems_per_point,
        }
    }

    pub fn total_systems(&self) -> usize {
        self.points().len() * self.systems_at_each_point()
    }

    /// Parameters of one system; sizes are drawn from a stream separate from the dynamics.
    pub fn system_params(&self, point: usize, (p, q): (f64, f64), realization: usize) -> Result<SimParams, ParamError> {
        let seed = derive_seed(self.master_seed, point as u64, realization as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ SIZE_SALT));
        let n = rng.random_range(self.n_range.0..=self.n_range.1);
        let t = rng.random_range(self.t_range.0..=self.t_range.1);
        SimParams::new(n, t, p, q, seed)
    }
}

/// Output locations of one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub data: PathBuf,
    pub index: PathBuf,
    pub manifest: PathBuf,
}

impl DatasetPaths {
    /// `<dir>/<stem>.dpds`, `.dpix` and `.manifest.txt`.
    pub fn in_dir(dir: &Path, stem: &str) -> Self {
        Self {
            data: dir.join(format!("{stem}.dpds")),
            index: dir.join(format!("{stem}.dpix")),
            manifest: dir.join(format!("{stem}.manifest.txt")),
        }
    }
}

/// Label counts over a set of systems.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prevalence {
    pub systems: usize,
    /// Systems with each canonical flag set.
    pub flags: [usize; 6],
    /// Systems per class, indexed as [`PhaseClass::ALL`].
    pub classes: [usize; 7],
}

impl Prevalence {
    pub fn add(&mut self, target: &MultiHotTarget) {
        self.systems += 1;
        for (count, flag) in self.flags.iter_mut().zip(target.flags()) {
            *count += usize::from(flag);
        }
        let class = target.class();
        let k = PhaseClass::ALL.iter().position(|c| *c == class).expect("class is listed");
        self.classes[k] += 1;
    }

    pub fn merge(&mut self, other: &Prevalence) {
        self.systems += other.systems;
        for k in 0..6 {
            self.flags[k] += other.flags[k];
        }
        for k in 0..7 {
            self.classes[k] += other.classes[k];
        }
    }

    pub fn fraction(&self, kind: PatternKind) -> f64 {
        ratio(self.flags[kind.index()], self.systems)
    }

    /// Most frequent class and its share; ties go to the earlier class.
    pub fn dominant(&self) -> Option<(PhaseClass, f64)> {
        if self.systems == 0 {
            return None;
        }
        let (k, &n) = self
            .classes
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|(_, n)| **n)
            .expect("seven classes");
        Some((PhaseClass::ALL[k], ratio(n, self.systems)))
    }

    pub fn is_deep_phase(&self) -> bool {
        self.dominant().is_some_and(|(_, f)| f >= DEEP_PHASE_FRACTION)
    }
}

fn ratio(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub index: usize,
    pub p: f64,
    pub q: f64,
    pub prevalence: Prevalence,
}

/// Audit record of one generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub spec: GenerationSpec,
    pub complete: bool,
    pub records: usize,
    pub expected_records: usize,
    /// Per point; empty in test-set mode where the totals stand in.
    pub points: Vec<PointSummary>,
    pub totals: Prevalence,
    pub error: Option<String>,
}

impl Manifest {
    /// Mean N over mean T of the size ranges.
    pub fn n_t_ratio(&self) -> f64 {
        let (n0, n1) = self.spec.n_range;
        let (t0, t1) = self.spec.t_range;
        (n0 + n1) as f64 / (t0 + t1) as f64
    }

    pub fn render(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "# dataset manifest");
        let _ = writeln!(out, "status: {}", if self.complete { "complete" } else { "incomplete" });
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
        }
        let _ = writeln!(out, "mode: {}", s.mode.name());
        let _ = writeln!(out, "master_seed: {}", s.master_seed);
        let _ = writeln!(out, "seed_derivation: derive_seed(master_seed, point_index, realization_index), SplitMix64 chain");
        let _ = writeln!(out, "systems_per_point: {}", s.systems_at_each_point());
        let _ = writeln!(out, "n_sites: {}..={}", s.n_range.0, s.n_range.1);
        let _ = writeln!(out, "n_steps: {}..={}", s.t_range.0, s.t_range.1);
        let _ = writeln!(out, "n_t_ratio: 1:{:.2}", 1.0 / self.n_t_ratio());
        let _ = writeln!(out, "compression: {}", if s.compress { "deflate" } else { "none" });
        let _ = writeln!(out, "records: {} of {}", self.records, self.expected_records);
        let _ = writeln!(out, "deep_phase_fraction: {DEEP_PHASE_FRACTION}");
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", table_header());
        for point in &self.points {
            let _ = writeln!(out, "{}", table_row(&point.index.to_string(), point.p, point.q, &point.prevalence));
        }
        let _ = writeln!(out, "{}", table_row("all", f64::NAN, f64::NAN, &self.totals));
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), StoreError> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn table_header() -> String {
    let mut h = String::from("point,p,q,systems");
    for k in PatternKind::ALL {
        let _ = write!(h, ",{k}");
    }
    h.push_str(",dominant,dominant_fraction,deep");
    h
}

fn table_row(label: &str, p: f64, q: f64, prev: &Prevalence) -> String {
    let coord = |v: f64| if v.is_nan() { String::new() } else { format!("{v:.6}") };
    let mut row = format!("{label},{},{},{}", coord(p), coord(q), prev.systems);
    for k in PatternKind::ALL {
        let _ = write!(row, ",{:.4}", prev.fraction(k));
    }
    match prev.dominant() {
        Some((class, f)) => {
            let _ = write!(row, ",{class},{f:.4},{}", if prev.is_deep_phase() { "yes" } else { "no" });
        }
        None => row.push_str(",,,"),
    }
    row
}

/// Simulates, labels and stores every system of `spec`, then writes the manifest.
///
/// Output is byte-identical for equal specs regardless of thread count. On
/// failure the records written so far stay valid and the manifest is marked
/// incomplete.
pub fn generate(spec: &GenerationSpec, labeler: &Labeler, paths: &DatasetPaths) -> Result<Manifest, StoreError> {
    spec.validate()?;
    let points = spec.points();
    let per_point = spec.systems_at_each_point();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|pt| (0..per_point).map(move |r| (pt, r)))
        .collect();

    let mut manifest = Manifest {
        spec: spec.clone(),
        complete: false,
        records: 0,
        expected_records: jobs.len(),
        points: Vec::new(),
        totals: Prevalence::default(),
        error: None,
    };
    let mut per_point_prev = vec![Prevalence::default(); points.len()];
    let mut writer = DatasetWriter::create(&paths.data, &paths.index, spec.compress)?;

    let mut result = Ok(());
    for chunk in jobs.chunks(CHUNK) {
        let encoded: Result<Vec<(usize, MultiHotTarget, Vec<u8>)>, StoreError> = chunk
            .par_iter()
            .map(|&(pt, r)| {
                let params = spec.system_params(pt, points[pt], r)?;
                let field = simulate(&params);
                let target = labeler.label(&field)?;
                Ok((pt, target, encode_record(&field, &params, &target, spec.compress)?))
            })
            .collect();
        let step = encoded.and_then(|records| {
            for (pt, target, bytes) in records {
                writer.append_encoded(&bytes)?;
                per_point_prev[pt].add(&target);
                manifest.records += 1;
            }
            Ok(())
        });
        if let Err(e) = step {
            result = Err(e);
            break;
        }
    }
    let flushed = writer.finish();

    for prev in &per_point_prev {
        manifest.totals.merge(prev);
    }
    if !matches!(spec.mode, GenerationMode::TestSet { .. }) {
        manifest.points = points
            .iter()
            .zip(per_point_prev)
            .enumerate()
            .map(|(index, (&(p, q), prevalence))| PointSummary { index, p, q, prevalence })
            .collect();
    }
    let result = result.and(flushed.map(|_| ()));
    match &result {
        Ok(()) => manifest.complete = true,
        Err(e) => manifest.error = Some(e.to_string()),
    }
    manifest.write(&paths.manifest)?;
    result.map(|_| manifest)
}
