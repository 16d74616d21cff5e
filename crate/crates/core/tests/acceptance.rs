//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::time::Instant;

use percolab_core::pattern::{parse_scheme_overrides, spanning, RenormField, DIAGONAL, NEAREST};
use percolab_core::rng::derive_seed;
use percolab_core::sim::step;
use percolab_core::store::{DatasetIndex, DatasetReader, DatasetWriter};
use percolab_core::sweep::{band_width, estimate_crossing, linear_grid, phase_map, sweep_fixed_q, Preset};
use percolab_core::{
    simulate, Labeler, MultiHotTarget, PatternKind, PhaseClass, SimDims, SimParams, SpaceTimeField, Thresholds,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_901;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn reference_labeler() -> Labeler {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemes/reference.toml");
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Labeler::with_overrides(&parse_scheme_overrides(&text).expect("reference schemes parse")).expect("valid overrides")
}

/// Probability that site `n_{i,t+1}` is occupied, straight from the rule table.
fn table_prob(left: bool, center: bool, right: bool, p: f64, q: f64) -> f64 {
    if center {
        return p;
    }
    match u8::from(left) + u8::from(right) {
        0 => 0.0,
        1 => q,
        _ => q * (2.0 - q),
    }
}

fn rule_fidelity() -> Outcome {
    // cyclic de Bruijn word: every (left, center, right) triple appears once
    let row: Vec<bool> = [0, 0, 0, 1, 0, 1, 1, 1].iter().map(|&b| b == 1).collect();
    let n = row.len();
    let trials = 100_000usize;
    let probs = [0.1, 0.5, 0.9];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for &p in &probs {
        for &q in &probs {
            let params = SimParams::new(n, 1, p, q, 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, (p * 10.0) as u64, (q * 10.0) as u64));
            let mut hits = [0usize; 8];
            for _ in 0..trials {
                let next = step(&row, &params, &mut rng);
                for (h, &v) in hits.iter_mut().zip(&next) {
                    *h += usize::from(v);
                }
            }
            for i in 0..n {
                let (l, c, r) = (row[(i + n - 1) % n], row[i], row[(i + 1) % n]);
                let expect = table_prob(l, c, r, p, q);
                let freq = hits[i] as f64 / trials as f64;
                let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
                let z = if sigma == 0.0 {
                    if freq == expect {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (freq - expect).abs() / sigma
                };
                worst = worst.max(z);
                if z > 3.0 {
                    failures.push(format!("({l:?},{c:?},{r:?}) p={p} q={q}: {freq:.5} vs {expect:.5}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("72 cells x 1e5 trials, max |z| = {worst:.2}; {}", failures.join("; ")),
    )
}

fn causality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut orphans = 0;
    let mut resurrections = 0;
    for k in 0..1000u64 {
        let n = rng.random_range(3..=64);
        let t = rng.random_range(1..=300);
        let params = SimParams::new(n, t, rng.random(), rng.random(), derive_seed(SEED, 1, k))
            .unwrap()
            .with_init_density(rng.random())
            .unwrap();
        let field = simulate(&params);
        // exhaustive cell check against the three-site parent rule
        for t in 1..field.n_rows() {
            for i in 0..n {
                if field.get(t, i) {
                    let parent = (-1isize..=1).any(|d| field.get_wrapped(t - 1, i as isize + d));
                    orphans += usize::from(!parent);
                }
            }
        }
        if let Some(t0) = (0..field.n_rows()).find(|&t| field.row_is_empty(t)) {
            resurrections += (t0..field.n_rows()).filter(|&t| !field.row_is_empty(t)).count();
        }
    }
    outcome(
        orphans == 0 && resurrections == 0,
        format!("1000 fields: {orphans} orphan cells, {resurrections} rows revived after extinction"),
    )
}

const REFERENCE: [(PatternKind, f64); 5] = [
    (PatternKind::D, 0.120),
    (PatternKind::Q, 0.165),
    (PatternKind::Dplus, 0.315),
    (PatternKind::Qplus, 0.330),
    (PatternKind::PL, 0.510),
];

fn crossings_at_q09(labeler: &Labeler, grid: &[f64]) -> Vec<Option<f64>> {
    let preset = Preset::Desk;
    let sweep = sweep_fixed_q(0.9, grid, preset.realizations(), preset.dims(), labeler, SEED).unwrap();
    REFERENCE
        .iter()
        .map(|(kind, _)| estimate_crossing(&sweep, *kind, 0.5).map(|c| c.p_c))
        .collect()
}

fn fmt_crossings(values: &[Option<f64>]) -> String {
    REFERENCE
        .iter()
        .zip(values)
        .map(|((k, _), v)| match v {
            Some(v) => format!("{k}={v:.3}"),
            None => format!("{k}=none"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn critical_table() -> Outcome {
    let grid = linear_grid(0.02, 0.62, 0.01).unwrap();
    let tol = 0.07;

    let defaults = crossings_at_q09(&Labeler::default(), &grid);
    println!("  info: builtin schemes, desk preset: {}", fmt_crossings(&defaults));

    let fitted = crossings_at_q09(&reference_labeler(), &grid);
    let all_found = fitted.iter().all(Option::is_some);
    let values: Vec<f64> = fitted.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let ordered = all_found && values.windows(2).all(|w| w[0] < w[1]);
    let deviations: Vec<f64> = values.iter().zip(&REFERENCE).map(|(v, (_, r))| (v - r).abs()).collect();
    let within = all_found && deviations.iter().all(|d| *d <= tol);
    let max_dev = deviations.iter().copied().fold(0.0, f64::max);
    outcome(
        ordered && within,
        format!(
            "reference schemes, q=0.9, 50x500, 256 reals: {} | ordered={ordered} max|dev|={max_dev:.3} (tol {tol})",
            fmt_crossings(&fitted)
        ),
    )
}

fn phase_topology() -> Outcome {
    let coarse = [0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let preset = Preset::Desk;
    let map = phase_map(&coarse, &coarse, 128, preset.dims(), &Labeler::default(), &Thresholds::default(), SEED)
        .unwrap();
    let origin = map.cell(0, 0).class;
    let corner = map.cell(9, 9).class;
    let a_regions = map.regions(PhaseClass::Absorbing);
    let connected = a_regions.len() == 1;
    let anchored = a_regions.first().is_some_and(|r| r.contains(&(0, 0)));
    let header: String = coarse.iter().map(|p| format!("{p:>6}")).collect();
    let mut rows = format!("    p ->    {header}\n");
    for iq in (0..coarse.len()).rev() {
        let line: Vec<String> = (0..coarse.len()).map(|ip| format!("{:>6}", map.cell(ip, iq).class.name())).collect();
        rows.push_str(&format!("    q={:<6}{}\n", coarse[iq], line.join("")));
    }
    print!("{rows}");
    outcome(
        origin == PhaseClass::Absorbing
            && corner == PhaseClass::Pattern(PatternKind::PL)
            && connected
            && anchored,
        format!(
            "(0.01,0.01)={origin} (0.9,0.9)={corner}; A regions={} anchored at origin={anchored}",
            a_regions.len()
        ),
    )
}

fn reachable_oracle(rf: &RenormField, periodic: bool) -> bool {
    let (w, h) = (rf.width() as isize, rf.height() as isize);
    let mut seen = vec![false; (w * h) as usize];
    let mut queue = VecDeque::new();
    for x in 0..w {
        if rf.get(x as usize, 0) {
            seen[x as usize] = true;
            queue.push_back((x, 0isize));
        }
    }
    while let Some((x, t)) = queue.pop_front() {
        if t == h - 1 {
            return true;
        }
        for &(dx, dt) in rf.adjacency() {
            let (mut nx, nt) = (x + dx, t + dt);
            if nt < 0 || nt >= h {
                continue;
            }
            if nx < 0 || nx >= w {
                if !periodic {
                    continue;
                }
                nx = nx.rem_euclid(w);
            }
            let k = (nt * w + nx) as usize;
            if !seen[k] && rf.get(nx as usize, nt as usize) {
                seen[k] = true;
                queue.push_back((nx, nt));
            }
        }
    }
    false
}

fn spanning_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x5);
    let shells: Vec<Vec<(isize, isize)>> = vec![
        NEAREST.to_vec(),
        [NEAREST.as_slice(), DIAGONAL.as_slice()].concat(),
        DIAGONAL.to_vec(),
        [NEAREST.as_slice(), &[(2, 0), (-2, 0), (0, 2), (0, -2)]].concat(),
    ];
    let mut mismatches = 0;
    let mut spanning_count = 0;
    for _ in 0..1000 {
        let w = rng.random_range(1..=8);
        let h = rng.random_range(1..=8);
        let density: f64 = rng.random_range(0.2..0.8);
        let cells = (0..w * h).map(|_| rng.random_bool(density)).collect();
        let periodic = rng.random_bool(0.5);
        let adj = shells[rng.random_range(0..shells.len())].clone();
        let rf = RenormField::from_cells(w, h, cells, periodic, adj).unwrap();
        let fast = spanning(&rf, periodic);
        spanning_count += usize::from(fast);
        mismatches += usize::from(fast != reachable_oracle(&rf, periodic));
    }
    outcome(
        mismatches == 0,
        format!("1000 grids up to 8x8 ({spanning_count} spanning): {mismatches} mismatches"),
    )
}

fn dataset_format() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (data, index_path) = (dir.path().join("acc.dpds"), dir.path().join("acc.dpix"));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x6);
    let mut writer = DatasetWriter::create(&data, &index_path, true).unwrap();
    let mut originals = Vec::new();
    for k in 0..1000u64 {
        let n = rng.random_range(3..=128);
        let t = rng.random_range(1..=256);
        let params = SimParams::new(n, t, rng.random(), rng.random(), derive_seed(SEED, 6, k)).unwrap();
        // half simulated, half arbitrary bit patterns
        let field = if k % 2 == 0 {
            simulate(&params)
        } else {
            let rows: Vec<Vec<bool>> = (0..=t).map(|_| (0..n).map(|_| rng.random_bool(0.5)).collect()).collect();
            SpaceTimeField::from_rows(&rows)
        };
        let target = if rng.random_bool(0.3) {
            MultiHotTarget::ABSORBING
        } else {
            let mut flags: [bool; 6] = std::array::from_fn(|_| rng.random_bool(0.5));
            flags[0] = false;
            MultiHotTarget::new(flags).unwrap()
        };
        writer.append_record(&field, &params, &target).unwrap();
        originals.push((field, params, target));
    }
    let index = writer.finish().unwrap();
    let stored_index = DatasetIndex::read(&index_path).unwrap();
    let mut reader = DatasetReader::open(&data).unwrap();

    let mut roundtrip_bad = 0;
    for (entry, (field, params, target)) in stored_index.entries.iter().zip(&originals) {
        let rec = reader.read_record(*entry).unwrap();
        roundtrip_bad += usize::from(rec.field != *field || rec.params != *params || rec.target != *target);
    }
    let scan = reader.scan().unwrap();
    let mut order: Vec<usize> = (0..scan.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut random_bad = 0;
    for &k in &order {
        let rec = reader.read_record(stored_index.entries[k]).unwrap();
        random_bad += usize::from(rec != scan[k].1);
    }
    let rebuilt = reader.rebuild_index().unwrap();
    let index_ok = rebuilt == stored_index && rebuilt == index && stored_index.len() == 1000;
    outcome(
        roundtrip_bad == 0 && random_bad == 0 && index_ok,
        format!(
            "1000 records: {roundtrip_bad} round-trip mismatches, {random_bad} random-vs-scan mismatches, rebuilt index equal={index_ok}"
        ),
    )
}

fn boundary_sharpening() -> Outcome {
    let grid = linear_grid(0.0, 0.4, 0.01).unwrap();
    let reals = 256;
    let mut parts = Vec::new();
    let mut gate = true;
    for (name, labeler, gating) in [("reference", reference_labeler(), true), ("builtin", Labeler::default(), false)] {
        let widths: Vec<f64> = [500, 2000]
            .iter()
            .map(|&t| {
                let sweep = sweep_fixed_q(0.9, &grid, reals, SimDims::new(50, t), &labeler, SEED).unwrap();
                band_width(&grid, &sweep.curve(PatternKind::Q), 0.1, 0.9)
            })
            .collect();
        let ok = widths[1] <= widths[0];
        if gating {
            gate &= ok;
        }
        parts.push(format!(
            "{name}: width T=500 {:.4}, T=2000 {:.4} ({})",
            widths[0],
            widths[1],
            if ok { "sharper" } else { "wider" }
        ));
    }
    outcome(gate, format!("q=0.9, N=50, {reals} reals, fixed seeds; {}", parts.join("; ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("rule fidelity", rule_fidelity),
        ("no spontaneous creation / absorbing permanence", causality),
        ("critical-point table at q=0.9 (desk preset)", critical_table),
        ("phase-map topology", phase_topology),
        ("spanning oracle equivalence", spanning_oracle),
        ("dataset format", dataset_format),
        ("boundary sharpening", boundary_sharpening),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {name}: {} [{secs:.1}s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
