use std::path::Path;
use std::process::{Command, Output};

fn jdrsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jdrsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
baud_grid = [1e11, 2e11]
orders = [4]
noise_model_kinds = ["von-mises"]
phase_samples = 50
mi_samples = 2000
repetitions = 1
mi_partitions = 2
seed = 7
"#;

#[test]
fn selftest_exits_cleanly() {
    let out = jdrsim(&["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("selftest passed"));
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}

#[test]
fn sweep_baud_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out_arg = out_dir.to_string_lossy().into_owned();
    let out = jdrsim(&["sweep-baud", "--config", &cfg, "--out", &out_arg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = std::fs::read_to_string(out_dir.join("baud_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(csv.starts_with("baud_rate,order_n,model_kind,"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("baud_sweep.json")).unwrap())
            .unwrap();
    assert_eq!(meta["config"]["seed"], 7);
    assert_eq!(meta["command"], "sweep-baud");

    let again = jdrsim(&["sweep-baud", "--config", &cfg, "--out", &out_arg]);
    assert!(!again.status.success());
    assert!(String::from_utf8_lossy(&again.stderr).contains("--append"));
    assert_eq!(
        std::fs::read_to_string(out_dir.join("baud_sweep.csv")).unwrap(),
        csv
    );

    let appended = jdrsim(&[
        "sweep-baud",
        "--config",
        &cfg,
        "--out",
        &out_arg,
        "--append",
    ]);
    assert!(appended.status.success());
    let csv2 = std::fs::read_to_string(out_dir.join("baud_sweep.csv")).unwrap();
    assert_eq!(csv2.lines().count(), 1 + 2 * 4);
    assert!(csv2.starts_with(&csv));
}

#[test]
fn flags_override_config_and_worker_count_does_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |name: &str, extra: &[&str]| {
        let out_dir = dir.path().join(name);
        let out_arg = out_dir.to_string_lossy().into_owned();
        let mut args = vec![
            "sweep-order",
            "--config",
            &cfg,
            "--baud",
            "1.3e11",
            "--out",
            &out_arg,
        ];
        args.extend_from_slice(extra);
        let out = jdrsim(&args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read_to_string(out_dir.join("order_sweep.csv")).unwrap()
    };
    let one = run("w1", &["--workers", "1"]);
    let four = run("w4", &["--workers", "4"]);
    assert_eq!(one, four);
    let reseeded = run("s", &["--seed", "8"]);
    assert_ne!(one, reseeded);
    let more = run("r", &["--repetitions", "3", "--orders", "2,8"]);
    assert_eq!(more.lines().count(), 1 + 3 * 2);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "orders = [4]\nfibre_length = 10\n");
    let out_arg = dir.path().join("out").to_string_lossy().into_owned();
    let out = jdrsim(&["sweep-baud", "--config", &cfg, "--out", &out_arg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fibre_length"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn threshold_prints_json() {
    let out = jdrsim(&[
        "threshold",
        "--order",
        "4",
        "--baud",
        "1e11",
        "--noise-model-kinds",
        "von-mises",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &reports[0];
    assert_eq!(r["order_n"], 4);
    let objective = r["objective"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&objective));
}

#[test]
fn concentration_prints_csv() {
    let out = jdrsim(&[
        "concentration",
        "--order",
        "16",
        "--t-grid",
        "4,8,16",
        "--kappa",
        "1e5",
        "--trials",
        "20000",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    // header + 3 t values x 2 ports x 2 models
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}
