use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_medmarket");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("MEDMARKET_FIXTURES")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["regress", "table3", "nope", "device_revenue"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["regress", "tableZ", "x", "y"]).status.code(), Some(2));
    assert_eq!(
        run(&["sweep", "--hidden-min", "8", "--hidden-max", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["forecast", "--horizon", "0"]).status.code(), Some(2));
    assert_eq!(run(&["rank", "city", "2007"]).status.code(), Some(2));
    assert_eq!(run(&["report", "fig1"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_map_to_three() {
    use medmarket::cli::exit_code;
    use medmarket::Error;
    assert_eq!(exit_code(&Error::AllRestartsDiverged { restarts: 3 }), 3);
    assert_eq!(
        exit_code(&Error::NonFinitePrediction {
            step: 0,
            year: 2011
        }),
        3
    );
    assert_eq!(exit_code(&Error::MissingYear(1999)), 2);
}

#[test]
fn positional_and_flag_forms_agree() {
    let a = run(&[
        "--format",
        "csv",
        "regress",
        "table3",
        "hospital_visits",
        "device_revenue",
    ]);
    let b = run(&[
        "--format",
        "csv",
        "regress",
        "--table",
        "table3",
        "--x",
        "hospital_visits",
        "--y",
        "device_revenue",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("beta1,116.048"));
}

#[test]
fn forecast_is_byte_identical_serial_and_parallel() {
    for fmt in ["csv", "json", "text"] {
        let par = run(&[
            "--format", fmt, "forecast", "tableB", "pop65", "--seed", "11",
        ]);
        let ser = run(&[
            "--format", fmt, "forecast", "tableB", "pop65", "--seed", "11", "--serial",
        ]);
        assert_eq!(par.status.code(), Some(0));
        assert_eq!(par.stdout, ser.stdout, "{fmt}");
    }
}

#[test]
fn different_seeds_are_recorded() {
    let a = run(&["forecast", "--seed", "1", "--restarts", "3"]);
    let err = String::from_utf8(a.stderr).unwrap();
    assert!(err.contains("\"base_seed\":1"), "{err}");
}

#[test]
fn out_file_manifest_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "tableB",
        "pop_total",
        "5",
        "4",
        "6",
        "--restarts",
        "4",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(o.stdout.is_empty());
    let body = std::fs::read_to_string(&out).unwrap();
    assert!(body.starts_with("neurons,error\n4,"));
    assert_eq!(body.lines().count(), 4);

    let manifest = dir.path().join("sweep.csv.manifest.json");
    let again = dir.path().join("again.csv");
    let r = run(&[
        "--out",
        again.to_str().unwrap(),
        "replay",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    assert_eq!(std::fs::read_to_string(&again).unwrap(), body);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("again.csv.manifest.json")).unwrap(),
        std::fs::read_to_string(&manifest).unwrap()
    );
}

fn copy_fixtures(to: &Path) {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for e in std::fs::read_dir(src).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
}

#[test]
fn fixture_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixtures(dir.path());
    let args = [
        "--format",
        "csv",
        "regress",
        "table3",
        "hospital_visits",
        "device_revenue",
    ];
    let base = run(&args);
    let same = Command::new(BIN)
        .args(args)
        .env("MEDMARKET_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(base.stdout, same.stdout);

    // change one revenue value: the fit moves and old manifests stop replaying
    let manifest = dir.path().join("m.json");
    let o = Command::new(BIN)
        .args([
            "--out",
            dir.path().join("r.txt").to_str().unwrap(),
            "regress",
            "table3",
            "hospital_visits",
            "device_revenue",
        ])
        .env("MEDMARKET_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    std::fs::rename(dir.path().join("r.txt.manifest.json"), &manifest).unwrap();

    let t3 = dir.path().join("table3.csv");
    let text = std::fs::read_to_string(&t3).unwrap();
    let last = text.trim_end().rsplit_once(',').unwrap().0.to_string();
    std::fs::write(&t3, format!("{last},999\n")).unwrap();
    let moved = Command::new(BIN)
        .args(args)
        .env("MEDMARKET_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(moved.status.code(), Some(0));
    assert_ne!(moved.stdout, base.stdout);

    let replay = Command::new(BIN)
        .args(["replay", manifest.to_str().unwrap()])
        .env("MEDMARKET_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(replay.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&replay.stderr).contains("changed"));

    std::fs::write(&t3, "year,bogus\n").unwrap();
    let bad = Command::new(BIN)
        .args(args)
        .env("MEDMARKET_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn json_output_parses() {
    let o = run(&["--format", "json", "drivers"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["manifest"]["command"], "drivers");
    assert_eq!(v["table"]["rows"].as_array().unwrap().len(), 5);
    assert!(v["summary"]["caveat"].as_str().unwrap().contains("rounded"));
}

#[test]
fn report_figures() {
    let fig4 = stdout(&run(&["--format", "csv", "report", "fig4"]));
    assert!(
        fig4.trim_end().ends_with("2010,8.191824954694946,8.19"),
        "{fig4}"
    );
    let fig11 = stdout(&run(&["--format", "csv", "report", "fig11"]));
    assert!(fig11.starts_with("cause,2003,2004,2005,2006,2008,2009,2011\n"));
    let fig3 = stdout(&run(&["--format", "csv", "report", "fig3"]));
    assert_eq!(fig3.lines().count(), 32);
    let fig9 = run(&["--format", "csv", "report", "fig9", "--restarts", "4"]);
    assert_eq!(fig9.status.code(), Some(0));
    assert!(stdout(&fig9).contains("\n2020,,"));
}

#[test]
fn save_model_flag_writes_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    let o = run(&[
        "forecast",
        "--restarts",
        "2",
        "--save-model",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let model: medmarket::NarModel =
        medmarket::nar::load_model(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(model.config.restarts, 2);
}
