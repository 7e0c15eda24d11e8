use std::path::Path;
use std::process::{Command, Output};

fn dsscn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsscn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
}

#[test]
fn generate_writes_requested_rows_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate",
        "sea",
        "--samples",
        "3000",
        "--drift-every",
        "1500",
        "--seed",
        "7",
    ];
    let a = dsscn(&[&args[..], &["--out", "a.csv"]].concat(), dir.path());
    let b = dsscn(&[&args[..], &["--out", "b.csv"]].concat(), dir.path());
    assert!(a.status.success() && b.status.success());
    assert!(stdout(&a).starts_with("3000 rows"));
    let fa = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(fa, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(fa).unwrap().lines().count(), 3001);
}

#[test]
fn missing_out_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dsscn(&["generate", "sea"], dir.path()).status.code(), Some(2));
}

#[test]
fn unknown_flags_and_checks_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        dsscn(&["run", "--dataset", "sea", "--frobnicate"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dsscn(&["oracle", "entropy"], dir.path()).status.code(), Some(2));
    assert_eq!(dsscn(&["run"], dir.path()).status.code(), Some(2));
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "stack.alpha = \"high\"\n").unwrap();
    let o = dsscn(&["run", "--dataset", "sea", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = dsscn(&["run", "--dataset", "sea", "--set", "escn.q=1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = dsscn(&["run", "--dataset", "sea", "--config", "absent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreadable_data_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.csv"), "1.0,2.0,1\n1.0,x,2\n").unwrap();
    let o = dsscn(&["run", "--data", "broken.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 2"));
}

#[test]
fn holdout_run_honours_split_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dsscn(
        &[
            "generate",
            "sea",
            "--samples",
            "6000",
            "--drift-every",
            "3000",
            "--out",
            "s.csv",
            "--seed",
            "2",
        ],
        dir.path(),
    );
    assert!(gen.status.success());
    std::fs::write(dir.path().join("engine.toml"), "stack.alpha = 0.25\nscn.t_max = 10\n").unwrap();
    let o = dsscn(
        &[
            "run",
            "--data",
            "s.csv",
            "--protocol",
            "holdout",
            "--chunk",
            "1000",
            "--train-fraction",
            "0.8",
            "--config",
            "engine.toml",
            "--set",
            "escn.q=0.4",
            "--trace-out",
            "trace.csv",
            "--summary-out",
            "summary.txt",
            "--json-out",
            "summary.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(text, stdout(&o));
    for line in [
        "# alpha = 0.25",
        "# t_max = 10",
        "# q = 0.4",
        "# protocol = \"holdout\"",
    ] {
        assert!(text.contains(line), "missing {line}");
    }
    assert_eq!(summary_value(&text, "stamps"), Some("6"));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let header: Vec<&str> = trace.lines().next().unwrap().split(',').collect();
    let (tr, te) = (
        header.iter().position(|h| *h == "train_samples").unwrap(),
        header.iter().position(|h| *h == "test_samples").unwrap(),
    );
    for row in trace.lines().skip(1) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!((cells[tr], cells[te]), ("800", "200"));
    }
    assert!(std::fs::read_to_string(dir.path().join("summary.json"))
        .unwrap()
        .contains("accuracy_mean"));
}

#[test]
fn sea_preset_model_and_trace_can_be_inspected() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsscn(
        &[
            "run",
            "--dataset",
            "sea",
            "--seed",
            "3",
            "--quiet",
            "--trace-out",
            "t.csv",
            "--model-out",
            "m.json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let summary = stdout(&o);
    assert!(!summary.contains('#'));
    let acc = summary_value(&summary, "accuracy").unwrap();
    let mean: f64 = acc.split(" +- ").next().unwrap().parse().unwrap();
    assert!(mean >= 0.85, "accuracy {mean}");

    let model = stdout(&dsscn(&["inspect", "m.json", "--layer", "1"], dir.path()));
    let layers = summary_value(&model, "layers").unwrap();
    assert_eq!(Some(layers), summary_value(&summary, "final_layers"));
    assert!(model.contains("\"birth_stamp\":1"));

    let trace = stdout(&dsscn(&["inspect", "t.csv"], dir.path()));
    assert_eq!(summary_value(&trace, "accuracy"), Some(acc));
    assert_eq!(
        summary_value(&trace, "drift_stamps"),
        summary_value(&summary, "drift_stamps")
    );
    assert_eq!(
        dsscn(&["inspect", "m.json", "--layer", "99"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn seed_sweep_writes_one_trace_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    dsscn(&["generate", "sea", "--samples", "4000", "--out", "s.csv"], dir.path());
    let o = dsscn(
        &[
            "run",
            "--data",
            "s.csv",
            "--seed",
            "5",
            "--seeds",
            "3",
            "--jobs",
            "2",
            "--quiet",
            "--trace-out",
            "t.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    for s in 5..8 {
        assert!(dir.path().join(format!("t.seed{s}.csv")).is_file());
    }
    assert!(stdout(&o).contains("## across 3 seeds"));
    let o = dsscn(
        &["run", "--data", "s.csv", "--seeds", "2", "--model-out", "m.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracles_pass_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for check in [
        vec!["mici", "--n", "1000", "--seed", "3"],
        vec!["density", "--samples", "10000"],
        vec!["fwgrls"],
        vec!["hoeffding"],
    ] {
        let mut args = vec!["oracle"];
        args.extend(&check);
        let o = dsscn(&args, dir.path());
        assert!(o.status.success(), "{check:?}");
        let out = stdout(&o);
        let dev: f64 = summary_value(&out, "max_deviation").unwrap().parse().unwrap();
        let tol: f64 = summary_value(&out, "tolerance").unwrap().parse().unwrap();
        assert!(dev <= tol);
        assert!(out.ends_with("PASS\n"));
    }
}
