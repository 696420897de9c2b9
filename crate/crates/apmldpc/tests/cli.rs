//! Black-box tests for the command-line interface, run against a small
//! two-code catalog so every invocation finishes in seconds.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_apmldpc");

const TOY_CATALOG: &str = r#"
[[code]]
id = "T1"
p = 6
j = 2
l = 4
f = [[1, 1], [1, 2]]
g = [[1, 3], [1, 5]]

[[code]]
id = "TX"
p = 6
j = 1
l = 4
f = [[1, 0], [1, 1]]
g = [[5, 0], [1, 0]]
"#;

const TOY_CONFIG: &str = r#"
codes = ["T1"]
methods = ["dir", "ets", "blk"]
seed = 11

[dir]
sizes = [8, 12]
trials = 40

[ets]
max_stage = 6
cycle_budget = 100000
frontier_cap = 4096
"#;

struct Workdir {
    _tmp: tempfile::TempDir,
    root: PathBuf,
    catalog: PathBuf,
    config: PathBuf,
}

fn workdir() -> Workdir {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let catalog = root.join("catalog.toml");
    let config = root.join("run.toml");
    std::fs::write(&catalog, TOY_CATALOG).unwrap();
    std::fs::write(&config, TOY_CONFIG).unwrap();
    Workdir {
        _tmp: tmp,
        root,
        catalog,
        config,
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn search_into(w: &Workdir, out_dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "search",
        "--catalog",
        w.catalog.to_str().unwrap(),
        "--config",
        w.config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn build_prints_code_summary() {
    let w = workdir();
    let out = run(&["build", "--catalog", w.catalog.to_str().unwrap(), "--code", "T1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("T1  P=6 (J, L)=(2, 4)"), "{text}");
    assert!(text.contains("constrained residues: {0, 1}"), "{text}");
    assert!(text.contains("psi: vanishes on all constrained residues"), "{text}");
    assert!(
        text.contains("n=24  k=2  rank_x=11  rank_z=11  girth_x=8  girth_z=8"),
        "{text}"
    );
}

#[test]
fn build_rejects_unknown_code() {
    let w = workdir();
    let out = run(&["build", "--catalog", w.catalog.to_str().unwrap(), "--code", "T9"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn certify_on_own_store_always_succeeds() {
    let w = workdir();
    let dir = w.root.join("run");
    let out = search_into(&w, &dir, &[]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let store = dir.join("witnesses.jsonl");
    assert!(store.exists());
    assert!(dir.join("report.txt").exists());
    assert!(dir.join("report.csv").exists());

    let out = run(&[
        "certify",
        "--catalog",
        w.catalog.to_str().unwrap(),
        store.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("all confirmed"), "{}", stdout(&out));
}

#[test]
fn certify_fails_on_tampered_store() {
    let w = workdir();
    let dir = w.root.join("run");
    assert_eq!(code(&search_into(&w, &dir, &[])), 0);
    let store = dir.join("witnesses.jsonl");
    let text = std::fs::read_to_string(&store).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut record: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    let claimed = record["weight"].as_u64().unwrap();
    record["weight"] = serde_json::Value::from(claimed + 1);
    lines[0] = serde_json::to_string(&record).unwrap();
    let tampered = dir.join("tampered.jsonl");
    std::fs::write(&tampered, lines.join("\n") + "\n").unwrap();

    let out = run(&[
        "certify",
        "--catalog",
        w.catalog.to_str().unwrap(),
        tampered.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", stdout(&out));
}

#[test]
fn exact_reports_latent_distance() {
    let w = workdir();
    let cnf = w.root.join("cnf");
    let out = run(&[
        "exact",
        "--catalog",
        w.catalog.to_str().unwrap(),
        "--code",
        "TX",
        "-m",
        "3",
        "--tau",
        "4",
        "--out",
        cnf.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("latent distance = 12").count(), 2, "{text}");
    assert!(text.contains("proved by exhaustive sweep"), "{text}");
}

#[test]
fn exact_rejects_non_dividing_block_factor() {
    let w = workdir();
    let out = run(&[
        "exact",
        "--catalog",
        w.catalog.to_str().unwrap(),
        "--code",
        "TX",
        "-m",
        "5",
        "--tau",
        "4",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn report_renders_csv_from_store() {
    let w = workdir();
    let dir = w.root.join("run");
    assert_eq!(code(&search_into(&w, &dir, &[])), 0);
    let out = run(&[
        "report",
        "--catalog",
        w.catalog.to_str().unwrap(),
        dir.join("witnesses.jsonl").to_str().unwrap(),
        "--csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(
        text.starts_with("code,p,n,k,d_bound,side,lat,blk,fib,crt,dir,ets,ets_stage,dec"),
        "{text}"
    );
    assert!(text.contains("T1"), "{text}");
}

#[test]
fn unknown_flag_is_usage_error() {
    let w = workdir();
    let out = run(&["search", "--catalog", w.catalog.to_str().unwrap(), "--bogus"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn repeat_runs_are_byte_identical_across_worker_counts() {
    let w = workdir();
    let solo_a = w.root.join("solo-a");
    let solo_b = w.root.join("solo-b");
    let multi = w.root.join("multi");
    assert_eq!(code(&search_into(&w, &solo_a, &["--workers", "1"])), 0);
    assert_eq!(code(&search_into(&w, &solo_b, &["--workers", "1"])), 0);
    assert_eq!(code(&search_into(&w, &multi, &["--workers", "3"])), 0);
    for name in ["witnesses.jsonl", "report.txt", "report.csv"] {
        let a = std::fs::read(solo_a.join(name)).unwrap();
        let b = std::fs::read(solo_b.join(name)).unwrap();
        let m = std::fs::read(multi.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert_eq!(a, m, "{name} differs at 3 workers");
    }
}
