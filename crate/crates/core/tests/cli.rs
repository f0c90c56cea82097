use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gpclass"))
}

fn bcw() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/bcw.csv")
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn missing_dataset_is_a_usage_error() {
    let out = bin().args(["run", "--strategy", "both"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dataset"));
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let out = bin()
        .args(["run", "--strategy", "tiny"])
        .arg("--dataset")
        .arg(bcw())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn incomplete_rows_are_rejected_by_default() {
    let out = bin()
        .arg("run")
        .arg("--dataset")
        .arg(bcw())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("missing"), "{err}");
}

#[test]
fn run_prints_one_record() {
    let out = ok(bin()
        .arg("run")
        .arg("--dataset")
        .arg(bcw())
        .args([
            "--drop-incomplete",
            "--strategy",
            "both",
            "--fold",
            "3",
            "--pop",
            "30",
            "--gens",
            "3",
        ])
        .output()
        .unwrap());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(fields[0], "bcw");
    assert_eq!(fields[1], "both");
    assert_eq!(fields[2], "3");
}

#[test]
fn fold_out_of_range() {
    let out = bin()
        .arg("run")
        .arg("--dataset")
        .arg(bcw())
        .args(["--drop-incomplete", "--fold", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn summarize_reproduces_experiment_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("exp");
    ok(bin()
        .arg("experiment")
        .arg("--dataset")
        .arg(bcw())
        .args([
            "--drop-incomplete",
            "--folds",
            "3",
            "--repeats",
            "2",
            "--pop",
            "20",
            "--gens",
            "2",
            "--out",
        ])
        .arg(&out_dir)
        .output()
        .unwrap());
    let again = dir.path().join("again.tsv");
    ok(bin()
        .arg("summarize")
        .arg("--records")
        .arg(out_dir.join("records.tsv"))
        .arg("--out")
        .arg(&again)
        .output()
        .unwrap());
    assert_eq!(
        std::fs::read(out_dir.join("summary.tsv")).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn imported_fold_plan_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path, extra: &[&std::ffi::OsStr]| {
        ok(bin()
            .arg("experiment")
            .arg("--dataset")
            .arg(bcw())
            .args([
                "--drop-incomplete",
                "--strategies",
                "baseline",
                "--folds",
                "5",
                "--repeats",
                "1",
            ])
            .args(["--pop", "20", "--gens", "2", "--seed", "9", "--out"])
            .arg(out)
            .args(extra)
            .output()
            .unwrap());
    };
    let first = dir.path().join("first");
    run(&first, &[]);
    let plan = first.join("fold_plan.tsv");
    let second = dir.path().join("second");
    run(&second, &["--fold-plan".as_ref(), plan.as_os_str()]);
    for file in ["fold_plan.tsv", "records.tsv"] {
        assert_eq!(
            std::fs::read(first.join(file)).unwrap(),
            std::fs::read(second.join(file)).unwrap()
        );
    }
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    ok(bin()
        .arg("experiment")
        .arg("--dataset")
        .arg(bcw())
        .args([
            "--drop-incomplete",
            "--strategies",
            "parsimony",
            "--folds",
            "2",
            "--repeats",
            "1",
        ])
        .args(["--pop", "10", "--gens", "1", "--csv", "--out"])
        .arg(dir.path())
        .output()
        .unwrap());
    let records = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .find(|n| n.starts_with("records"))
        .unwrap();
    assert!(records.ends_with(".csv"), "{records}");
    let text = std::fs::read_to_string(dir.path().join(records)).unwrap();
    assert!(text.lines().next().unwrap().contains(','));
}
