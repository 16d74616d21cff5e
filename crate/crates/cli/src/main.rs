//! `percolab`: simulate, label, generate datasets, sweep and map phases.

mod render;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use percolab_core::pattern::{format_scheme, parse_scheme_overrides, PatternKind};
use percolab_core::store::{generate, DatasetPaths, GenerationMode, GenerationSpec, verify_index};
use percolab_core::sweep::{
    bernoulli_control, crossings, estimate_crossing, linear_grid, phase_map, phase_map_from_scores, sweep_fixed_q,
    sweep_from_scores, Preset, ScoreTable,
};
use percolab_core::{
    simulate, DatasetIndex, DatasetReader, Labeler, ParamError, SimDims, SimParams, SpaceTimeField, StoreError,
    SweepError, SweepResult, Thresholds,
};

#[derive(Debug, Parser)]
#[command(name = "percolab", version, about = "Replication automaton workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one realization and print it as 0/1 rows.
    Simulate(SimulateArgs),
    /// Label a field read from a file or simulated from parameters.
    Label(LabelArgs),
    /// Generate an indexed dataset with a manifest.
    Gen(GenArgs),
    /// Spanning probabilities along p at fixed q.
    Sweep(SweepArgs),
    /// Classify every cell of a (p, q) grid.
    PhaseMap(PhaseMapArgs),
    /// Isotropic Bernoulli control fields over a fill-fraction grid.
    Bernoulli(BernoulliArgs),
    /// Critical points from threshold crossings.
    CritEst(CritEstArgs),
    /// Rebuild a dataset index by scanning record headers.
    Reindex(ReindexArgs),
}

#[derive(Debug, Args)]
struct SizeArgs {
    /// Budget preset supplying defaults for --n, --t and --reals.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Number of sites.
    #[arg(long)]
    n: Option<usize>,
    /// Number of time steps (fields hold t + 1 rows).
    #[arg(long)]
    t: Option<usize>,
    /// Realizations per grid point.
    #[arg(long)]
    reals: Option<usize>,
}

impl SizeArgs {
    fn resolve(&self, fallback: Preset) -> (SimDims, usize) {
        let preset = self.preset.unwrap_or(fallback);
        let d = preset.dims();
        (
            SimDims::new(self.n.unwrap_or(d.n_sites), self.t.unwrap_or(d.n_steps)),
            self.reals.unwrap_or(preset.realizations()),
        )
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

#[derive(Debug, Args)]
struct PGridArgs {
    #[arg(long, default_value_t = 0.01)]
    p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    p_max: f64,
    #[arg(long, default_value_t = 0.01)]
    p_step: f64,
    /// Explicit comma-separated p values; overrides the range.
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
}

impl PGridArgs {
    fn grid(&self) -> Result<Vec<f64>, CliError> {
        match &self.p_list {
            Some(list) => Ok(list.clone()),
            None => Ok(linear_grid(self.p_min, self.p_max, self.p_step)?),
        }
    }
}

#[derive(Debug, Args)]
struct QGridArgs {
    #[arg(long, default_value_t = 0.01)]
    q_min: f64,
    #[arg(long, default_value_t = 1.0)]
    q_max: f64,
    #[arg(long, default_value_t = 0.01)]
    q_step: f64,
    /// Explicit comma-separated q values; overrides the range.
    #[arg(long, value_delimiter = ',')]
    q_list: Option<Vec<f64>>,
}

impl QGridArgs {
    fn grid(&self) -> Result<Vec<f64>, CliError> {
        match &self.q_list {
            Some(list) => Ok(list.clone()),
            None => Ok(linear_grid(self.q_min, self.q_max, self.q_step)?),
        }
    }
}

#[derive(Debug, Args)]
struct SchemeArgs {
    /// TOML file overriding pattern schemes.
    #[arg(long)]
    scheme_file: Option<PathBuf>,
}

impl SchemeArgs {
    fn labeler(&self) -> Result<Labeler, CliError> {
        match &self.scheme_file {
            None => Ok(Labeler::default()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                let overrides =
                    parse_scheme_overrides(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                Ok(Labeler::with_overrides(&overrides)?)
            }
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    t: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Occupation probability of the initial row.
    #[arg(long, default_value_t = 0.5)]
    init_density: f64,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LabelArgs {
    /// Field file in the `simulate` text format.
    #[arg(long, conflicts_with_all = ["p", "q"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    t: usize,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Decide survival by site-lattice spanning instead of the last row.
    #[arg(long)]
    isotropic: bool,
    /// Print the active schemes; alone, prints only the schemes.
    #[arg(long)]
    show_schemes: bool,
    #[command(flatten)]
    schemes: SchemeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenMode {
    Special,
    Random,
    Test,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    mode: GenMode,
    /// Special points as `p:q` pairs, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_point)]
    points: Vec<(f64, f64)>,
    /// Number of random points, or of systems in test mode.
    #[arg(long)]
    count: Option<usize>,
    /// Systems per point.
    #[arg(long, default_value_t = 4096)]
    systems: usize,
    /// Fixed number of sites; shorthand for --n-min = --n-max.
    #[arg(long)]
    n: Option<usize>,
    /// Fixed number of steps; shorthand for --t-min = --t-max.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 50)]
    n_min: usize,
    #[arg(long, default_value_t = 50)]
    n_max: usize,
    #[arg(long, default_value_t = 500)]
    t_min: usize,
    #[arg(long, default_value_t = 500)]
    t_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// File stem for the .dpds, .dpix and .manifest.txt files.
    #[arg(long, default_value = "dataset")]
    name: String,
    /// Store payloads uncompressed.
    #[arg(long)]
    no_compress: bool,
    #[command(flatten)]
    schemes: SchemeArgs,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (p, q) = s.split_once(':').ok_or_else(|| format!("expected p:q, found {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("{v:?} is not a number"));
    Ok((num(p)?, num(q)?))
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    q: f64,
    #[command(flatten)]
    grid: PGridArgs,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Score table exported by the classifier; replaces simulation.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[command(flatten)]
    schemes: SchemeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhaseMapArgs {
    #[command(flatten)]
    p_grid: PGridArgs,
    #[command(flatten)]
    q_grid: QGridArgs,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `pattern=value` threshold file; 0.5 for every head if absent.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// Score table exported by the classifier; replaces simulation.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Reclassify a stored phase-map table instead of simulating.
    #[arg(long, conflicts_with = "scores")]
    from_table: Option<PathBuf>,
    #[command(flatten)]
    schemes: SchemeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the classes as a PNG.
    #[arg(long)]
    png: Option<PathBuf>,
    /// Pixels per cell in the PNG.
    #[arg(long, default_value_t = 8)]
    png_scale: u32,
}

#[derive(Debug, Args)]
struct BernoulliArgs {
    /// Fill-fraction grid.
    #[command(flatten)]
    grid: PGridArgs,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    schemes: SchemeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CritEstArgs {
    /// Stored sweep table; otherwise a sweep is run.
    #[arg(long, conflicts_with = "scores")]
    input: Option<PathBuf>,
    /// Score table exported by the classifier.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Fixed q of the sweep (required unless --input).
    #[arg(long)]
    q: Option<f64>,
    #[command(flatten)]
    grid: PGridArgs,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Patterns to report; all five by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_pattern)]
    pattern: Vec<PatternKind>,
    /// Crossing level for every pattern.
    #[arg(long, default_value_t = 0.5, conflicts_with = "thresholds")]
    threshold: f64,
    /// Per-head `pattern=value` thresholds.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// List every crossing instead of the critical one.
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    schemes: SchemeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pattern(s: &str) -> Result<PatternKind, String> {
    s.parse().map_err(|_| format!("unknown pattern {s:?}"))
}

#[derive(Debug, Args)]
struct ReindexArgs {
    /// Data file to scan.
    #[arg(long)]
    data: PathBuf,
    /// Index file to write.
    #[arg(long)]
    out: PathBuf,
    /// Compare against an existing index instead of only writing.
    #[arg(long)]
    check: Option<PathBuf>,
}

/// Failure classes mapped to exit codes 1 (usage) and 2 (data).
#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Grid(_) | SweepError::Param(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Param(p) => p.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn read_scores(path: &Path) -> Result<ScoreTable, CliError> {
    ScoreTable::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_thresholds(path: &Path) -> Result<Thresholds, CliError> {
    Thresholds::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn run_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let params = SimParams::new(a.n, a.t, a.p, a.q, a.seed)?.with_init_density(a.init_density)?;
    let field = simulate(&params);
    let text = format!(
        "# n_sites={} n_steps={} p={} q={} seed={} init_density={}\n{field}",
        a.n, a.t, a.p, a.q, a.seed, a.init_density
    );
    emit(a.out.as_deref(), &text)
}

fn run_label(a: &LabelArgs) -> Result<(), CliError> {
    let labeler = a.schemes.labeler()?;
    let mut schemes = String::new();
    if a.show_schemes {
        for kind in PatternKind::PATTERNS {
            let scheme = labeler.scheme(kind).expect("patterns have schemes");
            schemes.push_str(&format!("\n{}", format_scheme(kind, scheme)));
        }
        if a.input.is_none() && a.p.is_none() && a.q.is_none() {
            return emit(a.out.as_deref(), schemes.trim_start());
        }
    }
    let field: SpaceTimeField = match (&a.input, a.p, a.q) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            text.parse().map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        }
        (None, Some(p), Some(q)) => simulate(&SimParams::new(a.n, a.t, p, q, a.seed)?),
        _ => return Err(CliError::Usage("give --input or both --p and --q".into())),
    };
    let target = if a.isotropic {
        labeler.label_isotropic(&field)?
    } else {
        labeler.label(&field)?
    };
    let mut out = format!("target,{target}\nclass,{}\n", target.class());
    for kind in PatternKind::ALL {
        out.push_str(&format!("{kind},{}\n", u8::from(target.get(kind))));
    }
    out.push_str(&schemes);
    emit(a.out.as_deref(), &out)
}

fn run_gen(a: &GenArgs) -> Result<(), CliError> {
    let count = || a.count.ok_or_else(|| CliError::Usage("--count is required for this mode".into()));
    let mode = match a.mode {
        GenMode::Special => {
            if a.points.is_empty() {
                return Err(CliError::Usage("--points is required for special mode".into()));
            }
            GenerationMode::SpecialPoints(a.points.clone())
        }
        GenMode::Random => GenerationMode::RandomPoints { count: count()? },
        GenMode::Test => GenerationMode::TestSet { count: count()? },
    };
    let spec = GenerationSpec {
        mode,
        systems_per_point: a.systems,
        n_range: a.n.map_or((a.n_min, a.n_max), |n| (n, n)),
        t_range: a.t.map_or((a.t_min, a.t_max), |t| (t, t)),
        master_seed: a.seed,
        compress: !a.no_compress,
    };
    spec.validate()?;
    let labeler = a.schemes.labeler()?;
    fs::create_dir_all(&a.out)?;
    let paths = DatasetPaths::in_dir(&a.out, &a.name);
    let manifest = generate(&spec, &labeler, &paths)?;
    emit(
        None,
        &format!(
            "wrote {} records to {}\nindex {}\nmanifest {}\n",
            manifest.records,
            paths.data.display(),
            paths.index.display(),
            paths.manifest.display()
        ),
    )
}

fn run_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let result = match &a.scores {
        Some(path) => sweep_from_scores(&read_scores(path)?, a.q)?,
        None => {
            let (dims, reals) = a.size.resolve(Preset::Paper);
            sweep_fixed_q(a.q, &a.grid.grid()?, reals, dims, &a.schemes.labeler()?, a.seed)?
        }
    };
    emit(a.out.as_deref(), &result.to_csv())
}

fn run_phase_map(a: &PhaseMapArgs) -> Result<(), CliError> {
    let thresholds = match &a.thresholds {
        Some(path) => read_thresholds(path)?,
        None => Thresholds::default(),
    };
    let map = if let Some(path) = &a.from_table {
        percolab_core::PhaseMap::read_csv(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
            .reclassify(&thresholds)
    } else if let Some(path) = &a.scores {
        phase_map_from_scores(&read_scores(path)?, &thresholds)?
    } else {
        let (dims, reals) = a.size.resolve(Preset::Paper);
        phase_map(
            &a.p_grid.grid()?,
            &a.q_grid.grid()?,
            reals,
            dims,
            &a.schemes.labeler()?,
            &thresholds,
            a.seed,
        )?
    };
    if let Some(png) = &a.png {
        if a.png_scale == 0 {
            return Err(CliError::Usage("--png-scale must be positive".into()));
        }
        render::write_png(&map, a.png_scale, png).map_err(|e| CliError::Data(format!("{}: {e}", png.display())))?;
    }
    emit(a.out.as_deref(), &map.to_csv())
}

fn run_bernoulli(a: &BernoulliArgs) -> Result<(), CliError> {
    let (dims, reals) = a.size.resolve(Preset::Paper);
    let result = bernoulli_control(&a.grid.grid()?, reals, dims, &a.schemes.labeler()?, a.seed)?;
    emit(a.out.as_deref(), &result.to_csv())
}

fn run_crit_est(a: &CritEstArgs) -> Result<(), CliError> {
    let sweep = if let Some(path) = &a.input {
        SweepResult::read_csv(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
    } else {
        let q = a.q.ok_or_else(|| CliError::Usage("--q is required unless --input is given".into()))?;
        match &a.scores {
            Some(path) => sweep_from_scores(&read_scores(path)?, q)?,
            None => {
                let (dims, reals) = a.size.resolve(Preset::Paper);
                sweep_fixed_q(q, &a.grid.grid()?, reals, dims, &a.schemes.labeler()?, a.seed)?
            }
        }
    };
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::Usage(format!("--threshold {} outside [0, 1]", a.threshold)));
    }
    let thresholds = match &a.thresholds {
        Some(path) => read_thresholds(path)?,
        None => Thresholds::uniform(a.threshold),
    };
    let patterns: Vec<PatternKind> = if a.pattern.is_empty() {
        PatternKind::PATTERNS.to_vec()
    } else {
        a.pattern.clone()
    };
    let q = sweep.q.map(|q| q.to_string()).unwrap_or_default();
    let mut out = String::from("pattern,q,p_c,threshold,bracket_lo,bracket_hi,flank,method\n");
    for kind in patterns {
        let tau = thresholds.get(kind);
        let found = if a.all {
            crossings(&sweep, kind, tau)
        } else {
            estimate_crossing(&sweep, kind, tau).into_iter().collect()
        };
        if found.is_empty() {
            out.push_str(&format!("{kind},{q},,{tau},,,,\n"));
        }
        for c in found {
            out.push_str(&format!(
                "{kind},{q},{:.6},{tau},{},{},{},{}\n",
                c.p_c,
                c.bracket.0,
                c.bracket.1,
                format!("{:?}", c.flank).to_lowercase(),
                c.method
            ));
        }
    }
    emit(a.out.as_deref(), &out)
}

fn run_reindex(a: &ReindexArgs) -> Result<(), CliError> {
    let mut reader = DatasetReader::open(&a.data)?;
    let index = reader.rebuild_index()?;
    verify_index(&mut reader, &index)?;
    if let Some(existing) = &a.check {
        let old = DatasetIndex::read(existing)?;
        if old != index {
            return Err(CliError::Data(format!(
                "{} differs from the rebuilt index ({} vs {} entries)",
                existing.display(),
                old.len(),
                index.len()
            )));
        }
    }
    index.write(&a.out)?;
    emit(None, &format!("{} records indexed into {}\n", index.len(), a.out.display()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Label(a) => run_label(a),
        Command::Gen(a) => run_gen(a),
        Command::Sweep(a) => run_sweep(a),
        Command::PhaseMap(a) => run_phase_map(a),
        Command::Bernoulli(a) => run_bernoulli(a),
        Command::CritEst(a) => run_crit_est(a),
        Command::Reindex(a) => run_reindex(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
