use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cpm_cli::summary::RunSummary;
use cpm_cli::trace_csv;
use tempfile::TempDir;

const MATCHING_PENNIES: &str =
    r#"{"players": 2, "actions": [2, 2], "V": 1, "payoffs": [[1, -1, -1, 1], [-1, 1, 1, -1]]}"#;
const NULL_GAME: &str =
    r#"{"players": 2, "actions": [3, 2], "V": 1, "payoffs": [[0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0]]}"#;

fn cpm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpm")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_matching_pennies_meets_bound() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "mp.json", MATCHING_PENNIES);
    let out = dir.path().join("trace.csv");
    let o = cpm(&["run", "--game", s(&game), "--T", "100", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let rows = trace_csv::read_rows(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 100);
    assert_eq!(rows.iter().filter(|r| r.cce_gap.is_some()).count(), 10);
    assert!(rows[8].cce_gap.is_none() && rows[9].cce_gap.is_some());

    let summary: RunSummary =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace.summary.json")).unwrap()).unwrap();
    let closed_form = 2.0 * 2f64.sqrt() * (1.0 + 2f64.ln());
    let bounds = summary.bounds.unwrap();
    for (r, b) in summary.final_regrets.iter().zip(&bounds.regret) {
        assert!(r <= b && *b <= closed_form);
    }
    assert_eq!(summary.outer_iterations, 100);
    assert!(!summary.eta_clamped);
}

#[test]
fn trace_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let o = cpm(&["run", "--random", "3:2,3,2:1:5", "--T", "40", "--cadence", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let rows = trace_csv::read_rows(text.as_bytes()).unwrap();
    let mut again = Vec::new();
    trace_csv::write_rows(&mut again, 3, &rows).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
    assert!(text.starts_with("t,inner_iters,residual,eps_t,regret_p1,regret_p2,regret_p3,cce_gap\n"));
}

#[test]
fn missing_game_file_is_input_error() {
    let o = cpm(&["run", "--game", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_game_file_is_input_error() {
    let dir = TempDir::new().unwrap();
    let game = write(
        &dir,
        "bad.json",
        r#"{"players": 2, "actions": [2, 2], "V": 0.5, "payoffs": [[1, -1, -1, 1], [-1, 1, 1, -1]]}"#,
    );
    assert_eq!(cpm(&["run", "--game", s(&game)]).status.code(), Some(1));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = cpm(&["run", "--random", "2:3,3:2:11", "--T", "60", "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.summary.json")).unwrap(),
        fs::read(dir.path().join("b.summary.json")).unwrap()
    );
}

#[test]
fn convergence_failure_has_its_own_exit_code() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let o = cpm(&[
        "run",
        "--random",
        "2:3,3:1:2",
        "--eps-schedule",
        "const:1e-9",
        "--max-inner",
        "2",
        "--T",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    // the steps completed before the failure are kept
    assert!(trace_csv::read_rows(fs::File::open(&out).unwrap()).unwrap().len() < 5);
}

#[test]
fn bench_without_solvers_is_usage_error() {
    assert_eq!(cpm(&["bench", "--random", "2:2,2:1:1"]).status.code(), Some(1));
    assert_eq!(cpm(&["bench", "--random", "2:2,2:1:1", "--solver", ""]).status.code(), Some(1));
}

#[test]
fn bench_rows_are_solvers_times_grid() {
    let o =
        cpm(&["bench", "--random", "2:2,2:1:4", "--solver", "cpm,mwu,omwu", "--eps-grid", "0.1,0.01", "--T", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("solver,eps,iterations,prox_evals,reached"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn cpm_reaches_small_gap_with_fewer_prox_evaluations_than_mwu() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let out = dir.path().join(format!("bench{seed}.csv"));
        let random = format!("2:2,2:1:{seed}");
        let o = cpm(&[
            "bench",
            "--random",
            &random,
            "--solver",
            "cpm,mwu",
            "--eps-grid",
            "0.01",
            "--T",
            "3000",
            "--out",
            s(&out),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let mut r = csv::Reader::from_path(&out).unwrap();
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        let evals = |solver: &str| -> (usize, bool) {
            let row = rows.iter().find(|x| &x[0] == solver).unwrap();
            (row[3].parse().unwrap(), &row[4] == "true")
        };
        let (cpm_evals, cpm_reached) = evals("cpm");
        let (mwu_evals, mwu_reached) = evals("mwu");
        assert!(cpm_reached, "seed {seed}");
        assert!(!mwu_reached || cpm_evals < mwu_evals, "seed {seed}: cpm {cpm_evals} mwu {mwu_evals}");
    }
}

#[test]
fn verify_matching_pennies_passes() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "mp.json", MATCHING_PENNIES);
    let o = cpm(&["verify", "--game", s(&game), "--T", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn verify_random_game_passes() {
    let o = cpm(&["verify", "--random", "3:2,3,2:1:9", "--T", "100", "--samples", "300", "--comparators", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_flags_step_size_beyond_contraction() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "mp.json", MATCHING_PENNIES);
    let o = cpm(&["verify", "--game", s(&game), "--eta", "10/L", "--T", "50"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL  inner contraction")));

    let o = cpm(&["verify", "--random", "2:3,3:1:3", "--eta", "10/L", "--T", "50"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn verify_null_game_passes() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "null.json", NULL_GAME);
    let o = cpm(&["verify", "--game", s(&game), "--T", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn every_solver_runs() {
    for solver in ["cpm", "cpm-decentralized", "cmwu", "mwu", "omwu", "mirror-prox"] {
        let o = cpm(&["run", "--random", "2:2,3:1:8", "--solver", solver, "--T", "20", "--inner-mode", "budget"]);
        assert_eq!(o.status.code(), Some(0), "{solver}");
        assert_eq!(stdout(&o).lines().count(), 21);
    }
}
