use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quantcls(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantcls"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_fit_predict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = quantcls(
        &[
            "simulate",
            "--scenario",
            "lognormal",
            "--n",
            "60",
            "--p",
            "8",
            "--seed",
            "4",
            "--out",
            "data",
        ],
        d,
    );
    assert!(o.status.success(), "{o:?}");
    let header = fs::read_to_string(d.join("data/train.csv")).unwrap();
    assert!(header.starts_with("y,x1,x2,x3,x4,x5,x6,x7,x8\n"));

    let o = quantcls(
        &[
            "fit",
            "--train",
            "data/train.csv",
            "--skew",
            "moment",
            "--out",
            "model.txt",
        ],
        d,
    );
    assert!(o.status.success(), "{o:?}");
    assert!(fs::read_to_string(d.join("model.txt"))
        .unwrap()
        .contains("skew_mode = moment"));

    let o = quantcls(
        &["predict", "--model", "model.txt", "--data", "data/test.csv"],
        d,
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 61);
    assert_eq!(text.lines().next(), Some("y_pred"));
}

#[test]
fn cv_on_separated_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("y,x1\n");
    for i in 0..10 {
        csv.push_str(if i < 5 { "0,1.0\n" } else { "1,5.0\n" });
    }
    fs::write(dir.path().join("toy.csv"), csv).unwrap();
    let o = quantcls(&["cv", "--data", "toy.csv", "--folds", "loo"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0,0,"));
}

#[test]
fn theory_curve_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = quantcls(&["theory", "--problem", "chisq"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 200);
    assert!(String::from_utf8_lossy(&o.stderr).contains("optimal theta = 0.235"));
}

#[test]
fn curve_emits_grid_and_references() {
    let dir = tempfile::tempdir().unwrap();
    let o = quantcls(
        &[
            "curve",
            "--scenario",
            "t3",
            "--n",
            "40",
            "--p",
            "5",
            "--grid",
            "9",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("curve,")).count(), 9);
    for series in ["selected,", "centroid,", "median,"] {
        assert_eq!(text.lines().filter(|l| l.starts_with(series)).count(), 1);
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("run.ini"),
        "[fit]\nskew = galton\n\n[scenario]\nname = t3\nn = 30\np = 4\n\n[experiment]\nreps = 3\nseed = 9\nbaselines = median\n",
    )
    .unwrap();
    let from_file = quantcls(&["experiment", "--config", "run.ini"], d);
    assert!(from_file.status.success(), "{from_file:?}");
    let text = stdout(&from_file);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(3), Some("3"));

    let overridden = quantcls(
        &[
            "experiment",
            "--config",
            "run.ini",
            "--reps",
            "2",
            "--baselines",
            "",
        ],
        d,
    );
    assert!(overridden.status.success());
    assert_eq!(stdout(&overridden).lines().count(), 2);
}

#[test]
fn experiment_on_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(quantcls(
        &[
            "simulate",
            "--scenario",
            "beta",
            "--n",
            "40",
            "--p",
            "3",
            "--out",
            "."
        ],
        d
    )
    .status
    .success());
    let o = quantcls(
        &[
            "experiment",
            "--train",
            "train.csv",
            "--test",
            "test.csv",
            "--reps",
            "1",
        ],
        d,
    );
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn group_file_for_standardization() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(quantcls(
        &[
            "simulate",
            "--scenario",
            "mixed",
            "--n",
            "40",
            "--p",
            "4",
            "--out",
            "."
        ],
        d
    )
    .status
    .success());
    fs::write(d.join("groups.txt"), "0 0 1 1\n").unwrap();
    let o = quantcls(
        &[
            "fit",
            "--train",
            "train.csv",
            "--standardize",
            "groups:groups.txt",
            "--out",
            "m.txt",
        ],
        d,
    );
    assert!(o.status.success(), "{o:?}");
    assert!(fs::read_to_string(d.join("m.txt"))
        .unwrap()
        .contains("standardization = groups:0,0,1,1"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| quantcls(args, d).status.code();
    assert_eq!(
        code(&["experiment", "--scenario", "t3", "--n", "31", "--p", "2"]),
        Some(2)
    );
    assert_eq!(
        code(&[
            "experiment",
            "--scenario",
            "t3",
            "--n",
            "30",
            "--p",
            "2",
            "--skew",
            "sideways"
        ]),
        Some(2)
    );
    assert_eq!(
        code(&["fit", "--train", "x.csv", "--tau", "0.7", "--out", "m"]),
        Some(2)
    );
    assert_eq!(code(&["theory", "--problem", "cauchy"]), Some(2));
    assert_eq!(code(&["bogus"]), Some(2));
    assert_eq!(
        code(&["fit", "--train", "missing.csv", "--out", "m"]),
        Some(3)
    );
    fs::write(d.join("bad.csv"), "y,x1\n0,1\n1,oops\n").unwrap();
    let o = quantcls(&["cv", "--data", "bad.csv"], d);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv:3"));
    fs::write(d.join("model.txt"), "# quantcls model\nversion = 7\n").unwrap();
    assert_eq!(
        code(&["predict", "--model", "model.txt", "--data", "bad.csv"]),
        Some(3)
    );
}
