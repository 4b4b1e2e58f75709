use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_aligntilt");

fn aligntilt(args: &[&str], out_env: &Path) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .env("ALIGN_OUT_DIR", out_env)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn example1_without_flags_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = aligntilt(&["example1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "example1_joint.csv");
    assert!(csv.starts_with("y1,y2,probability,published,abs_error\n"));
    assert!(read(dir.path(), "example1.json").contains("\"seed\": 0"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aligntilt(&["bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(aligntilt(&[], dir.path()).status.code(), Some(2));
    assert_eq!(aligntilt(&["example1", "--n", "x"], dir.path()).status.code(), Some(2));
    // Infeasible budget is an error, not a failed check.
    let out = aligntilt(&["ternary-figure", "--delta", "50"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = aligntilt(&["equivalence-scan", "--m-grid", "5,10"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equivalence_scan_writes_schema_to_out() {
    let env_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let target = out_dir.path().join("d");
    let out = aligntilt(
        &["equivalence-scan", "--delta", "0.11", "--out", target.to_str().unwrap()],
        env_dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = read(&target, "equivalence_scan.csv");
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "m,logN,kl_rate_to_optimal,kl_to_reference,kl_bound,reward_gap,type_l1");
    assert_eq!(csv.lines().count(), 7);
    assert!(!env_dir.path().join("equivalence_scan.csv").exists());
}

#[test]
fn ternary_files_share_schema() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aligntilt(&["ternary-figure"], dir.path()).status.code(), Some(0));
    for name in ["kl_contour", "reward_contour", "aligned_family", "points"] {
        let csv = read(dir.path(), &format!("ternary_{name}.csv"));
        assert!(csv.starts_with("x_bary1,x_bary2,x_bary3,curve_tag\n"), "{name}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["closeness-bound", "--trials", "200", "--seed", "17"];
    let names = ["closeness_bound.csv", "closeness_bound.json"];
    assert_eq!(aligntilt(&args, dir.path()).status.code(), Some(0));
    let first: Vec<String> = names.iter().map(|n| read(dir.path(), n)).collect();
    assert_eq!(aligntilt(&args, dir.path()).status.code(), Some(0));
    for (name, before) in names.iter().zip(&first) {
        assert_eq!(&read(dir.path(), name), before, "{name}");
    }
    let json = &first[1];
    assert!(json.contains("\"seed\": 17"));
    assert!(!json.contains("wall_clock"));
    assert!(read(dir.path(), "closeness_bound.timing.json").contains("wall_clock_seconds"));
}

#[test]
fn different_seeds_differ() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    aligntilt(&["random-alphabet", "--k", "8", "--seeds", "3", "--seed", "1"], a.path());
    aligntilt(&["random-alphabet", "--k", "8", "--seeds", "3", "--seed", "2"], b.path());
    assert_ne!(read(a.path(), "random_alphabet.csv"), read(b.path(), "random_alphabet.csv"));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    std::fs::write(&cfg, "experiment = \"equivalence_scan\"\nm_grid = [5, 10]\nseed = 3\n").unwrap();
    let out = aligntilt(
        &["equivalence-scan", "--config", cfg.to_str().unwrap(), "--m-grid", "5,40"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let json = read(dir.path(), "equivalence_scan.json");
    assert!(json.contains("\"seed\": 3"));
    let csv = read(dir.path(), "equivalence_scan.csv");
    assert!(csv.lines().nth(2).unwrap().starts_with("40,"));

    std::fs::write(&cfg, "mystery = 1\n").unwrap();
    let out = aligntilt(&["equivalence-scan", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // A config written for another experiment is rejected.
    std::fs::write(&cfg, "experiment = \"example1\"\n").unwrap();
    let out = aligntilt(&["equivalence-scan", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ldp_probe_reports_undefined_cells() {
    let dir = tempfile::tempdir().unwrap();
    // Few trials in a tail whose exact rate (about 0.92) is below the Monte
    // Carlo ceiling: the empty window is written as undefined and counts as
    // a failed check.
    let out = aligntilt(
        &["ldp-probe", "--m", "200", "--trials", "200", "--t-grid", "1.19,2.0"],
        dir.path(),
    );
    let csv = read(dir.path(), "ldp_probe.csv");
    assert!(csv.lines().nth(2).unwrap().contains(",undefined,0,200"), "{csv}");
    assert_eq!(out.status.code(), Some(1), "{csv}");
}
