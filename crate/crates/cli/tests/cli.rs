use std::path::Path;
use std::process::{Command, Output};

fn percolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_percolab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes_for_usage() {
    assert_eq!(percolab(&["--help"]).status.code(), Some(0));
    assert_eq!(percolab(&["--version"]).status.code(), Some(0));
    assert_eq!(percolab(&[]).status.code(), Some(1));
    assert_eq!(percolab(&["sweep", "--bogus"]).status.code(), Some(1));
    assert_eq!(percolab(&["simulate", "--p", "0.5", "--q", "1.5"]).status.code(), Some(1));
    assert_eq!(percolab(&["simulate", "--n", "2", "--p", "0.5", "--q", "0.5"]).status.code(), Some(1));
    let o = percolab(&["sweep", "--q", "0.9", "--p-min", "0.5", "--p-max", "0.1", "--reals", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_then_label() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.txt");
    let o = percolab(&["simulate", "--n", "20", "--t", "60", "--p", "0.95", "--q", "0.95", "--seed", "4", "--out", path(&field)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&field).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 61);

    let o = percolab(&["label", "--input", path(&field)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("target,[0,1,"), "{out}");
    assert!(out.contains("class,"));

    let direct = percolab(&["label", "--n", "20", "--t", "60", "--p", "0.95", "--q", "0.95", "--seed", "4"]);
    assert_eq!(stdout(&direct), out);

    let empty = percolab(&["label", "--n", "20", "--t", "60", "--p", "0", "--q", "0"]);
    assert!(stdout(&empty).contains("target,[1,0,0,0,0,0]\nclass,A"));
}

#[test]
fn label_rejects_bad_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0101\n01\n").unwrap();
    assert_eq!(percolab(&["label", "--input", path(&bad)]).status.code(), Some(2));
    assert_eq!(percolab(&["label"]).status.code(), Some(1));
}

#[test]
fn sweep_and_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = percolab(&[
        "sweep", "--q", "0.9", "--p-min", "0.02", "--p-max", "0.4", "--p-step", "0.04", "--n", "30", "--t", "100",
        "--reals", "24", "--out", path(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("p,q,source,trials,A,A_hw"));
    assert_eq!(table.lines().count(), 11);

    let o = percolab(&["crit-est", "--input", path(&csv), "--pattern", "D,Q"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("pattern,q,p_c,threshold,bracket_lo,bracket_hi,flank,method\n"));
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().nth(1).unwrap().starts_with("D,0.9,"));
}

#[test]
fn score_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    let mut table = String::from("p,q,realization,A,PL,Qplus,Dplus,Q,D\n");
    for (k, p) in [0.1, 0.2, 0.3].iter().enumerate() {
        let d = [0.9, 0.6, 0.1][k];
        for r in 0..4 {
            table.push_str(&format!("{p},0.9,{r},0,0,0,0,0,{d}\n"));
        }
    }
    std::fs::write(&scores, &table).unwrap();
    let tau = dir.path().join("tau.txt");
    std::fs::write(&tau, "A=0.5\nPL=0.5\nQplus=0.5\nDplus=0.5\nQ=0.5\nD=0.35\n").unwrap();

    let o = percolab(&["crit-est", "--scores", path(&scores), "--q", "0.9", "--thresholds", path(&tau), "--pattern", "D"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    // 0.6 at 0.2 and 0.1 at 0.3 cross 0.35 at 0.25
    assert!(row.starts_with("D,0.9,0.250000,0.35,0.2,0.3,falling"), "{row}");

    let o = percolab(&["sweep", "--q", "0.9", "--scores", path(&scores)]);
    assert!(stdout(&o).contains("nn-scores"));

    std::fs::write(&scores, "p,q,A\n0.1,0.9,0\n").unwrap();
    assert_eq!(percolab(&["sweep", "--q", "0.9", "--scores", path(&scores)]).status.code(), Some(2));
    std::fs::write(&tau, "A=0.5\n").unwrap();
    let o = percolab(&["phase-map", "--thresholds", path(&tau), "--p-list", "0.5", "--q-list", "0.5", "--reals", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn phase_map_png_and_reclassify() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("map.csv");
    let png = dir.path().join("map.png");
    let o = percolab(&[
        "phase-map", "--p-list", "0.01,0.5,0.9", "--q-list", "0.01,0.5,0.9", "--n", "20", "--t", "80", "--reals", "16",
        "--out", path(&csv), "--png", path(&png), "--png-scale", "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 10);
    assert!(table.lines().nth(1).unwrap().ends_with(",A"));
    let bytes = std::fs::read(&png).unwrap();
    assert_eq!(&bytes[1..4], b"PNG");

    let again = percolab(&["phase-map", "--from-table", path(&csv)]);
    assert!(again.status.success());
    assert_eq!(stdout(&again), table);
}

#[test]
fn bernoulli_controls() {
    let o = percolab(&["bernoulli", "--p-list", "0,1", "--n", "10", "--t", "19", "--reals", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert!(rows[1].starts_with("0,,bernoulli-control,3,1,"));
    assert!(rows[2].starts_with("1,,bernoulli-control,3,0,"));
}

#[test]
fn gen_and_reindex() {
    let dir = tempfile::tempdir().unwrap();
    let o = percolab(&[
        "gen", "--mode", "special", "--points", "0.1:0.9,0.9:0.9", "--systems", "6", "--n", "12", "--t", "30",
        "--seed", "5", "--out", path(dir.path()), "--name", "ds",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = dir.path().join("ds.dpds");
    let index = dir.path().join("ds.dpix");
    let manifest = std::fs::read_to_string(dir.path().join("ds.manifest.txt")).unwrap();
    assert!(manifest.contains("records: 12 of 12"));

    let rebuilt = dir.path().join("rebuilt.dpix");
    let o = percolab(&["reindex", "--data", path(&data), "--out", path(&rebuilt), "--check", path(&index)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&rebuilt).unwrap(), std::fs::read(&index).unwrap());

    let bytes = std::fs::read(&data).unwrap();
    std::fs::write(&data, &bytes[..bytes.len() - 5]).unwrap();
    assert_eq!(percolab(&["reindex", "--data", path(&data), "--out", path(&rebuilt)]).status.code(), Some(2));

    assert_eq!(percolab(&["gen", "--mode", "special", "--out", path(dir.path())]).status.code(), Some(1));
    assert_eq!(percolab(&["gen", "--mode", "random", "--out", path(dir.path())]).status.code(), Some(1));
}

#[test]
fn show_schemes_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let reference = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemes/reference.toml");
    let o = percolab(&["label", "--show-schemes", "--scheme-file", reference]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let shown = stdout(&o);
    assert!(shown.starts_with("[PL]"), "{shown}");
    let copy = dir.path().join("schemes.toml");
    std::fs::write(&copy, &shown).unwrap();
    let again = percolab(&["label", "--show-schemes", "--scheme-file", path(&copy)]);
    assert_eq!(stdout(&again), shown);
}
