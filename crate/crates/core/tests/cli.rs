use std::path::Path;
use std::process::{Command, Output};

use dmc_shaper_core::commands::csv_header_comment;
use dmc_shaper_core::DmcChannel;

const H: &str = r#"{"re": [[0.9, 0.3], [-0.2, 1.1]], "im": [[0.1, -0.6], [0.4, 0.2]]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmc-shaper"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(
        dir.path(),
        "ok.json",
        r#"{"M": 2, "L": 2, "P": [[0.9, 0.1], [0.2, 0.8]]}"#,
    );
    assert_eq!(run(&["validate", &ok]).status.code(), Some(0));

    let short = write(
        dir.path(),
        "s.json",
        r#"{"M": 2, "L": 2, "P": [[0.9, 0.1], [0.5, 0.4]]}"#,
    );
    let out = run(&["validate", &short]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1"));

    let neg = write(
        dir.path(),
        "n.json",
        r#"{"M": 2, "L": 2, "P": [[1.1, -0.1], [0.5, 0.5]]}"#,
    );
    let out = run(&["validate", &neg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 0"));

    let dims = write(
        dir.path(),
        "d.json",
        r#"{"M": 3, "L": 2, "P": [[0.5, 0.5], [0.5, 0.5]]}"#,
    );
    assert_eq!(run(&["validate", &dims]).status.code(), Some(1));

    let broken = write(dir.path(), "b.json", "{\"M\": 2,\n\"L\": ");
    let out = run(&["validate", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn build_select_and_code() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", H);
    let ch = dir.path().join("ch.json");
    let ch = ch.to_str().unwrap();
    stdout_of(&[
        "channel",
        "build-mimo",
        "--h-matrix",
        &h,
        "--snr-db",
        "6",
        "--out",
        ch,
    ]);
    let channel = DmcChannel::load(ch).unwrap();
    assert_eq!((channel.num_inputs(), channel.num_outputs()), (16, 16));

    let sel = stdout_of(&["select", "sdp", "--channel", ch, "--k", "4", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&sel).unwrap();
    for key in [
        "mask",
        "cutoff_rate_bits",
        "sdp_objective",
        "residuals",
        "iterations",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let mask: Vec<usize> = serde_json::from_value(v["mask"].clone()).unwrap();
    assert_eq!(mask.len(), 4);
    assert!(mask.windows(2).all(|w| w[0] < w[1]));

    let mask_file = write(dir.path(), "mask.json", &sel);
    let csv = stdout_of(&[
        "coded-ber",
        "--h-matrix",
        &h,
        "--mask",
        &mask_file,
        "--snr-db",
        "4",
        "--n",
        "100",
        "--total-rate",
        "1",
        "--max-frames",
        "200",
        "--seed",
        "1",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), csv_header_comment());
    assert!(lines.next().unwrap().starts_with("# labeling"));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("snr_db,k,code_rate,frames,bit_errors,ber"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], &["4", "4", "0.5"]);
}

#[test]
fn build_mimo_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid");
    stdout_of(&[
        "channel",
        "build-mimo",
        "--paper",
        "--snr-db",
        "-5,5",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    for db in ["-5", "5"] {
        let ch = DmcChannel::load(out.join(format!("channel_{db}dB.json"))).unwrap();
        assert_eq!(ch.num_inputs(), 256);
    }
    assert!(
        !run(&["channel", "build-mimo", "--paper", "--snr-db", "-5,5"])
            .status
            .success()
    );
}

#[test]
fn sweep_full_columns_and_dominance() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", H);
    let csv = stdout_of(&[
        "sweep",
        "--h-matrix",
        &h,
        "--snr-db",
        "10",
        "--k",
        "4",
        "--methods",
        "sdp,bsa,exhaustive,full",
        "--seed",
        "2",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], csv_header_comment());
    let header: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(
        &header[..3],
        &["snr_db", "capacity_ba", "rate_uniform_full"]
    );
    let values: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    let col = |name: &str| values[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("k4_full_rate"), col("rate_uniform_full"));
    for m in ["sdp", "bsa"] {
        assert!(col("k4_exhaustive_rate") >= col(&format!("k4_{m}_rate")) - 1e-12);
        assert!(col("k4_exhaustive_cutoff") >= col(&format!("k4_{m}_cutoff")) - 1e-12);
        assert!(col("k4_exhaustive_ser") <= col(&format!("k4_{m}_ser")) + 1e-12);
    }
    assert!(col("capacity_ba") >= col("k4_exhaustive_rate") - 1e-9);
}

#[test]
fn sweep_of_channel_file_has_empty_snr() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(
        dir.path(),
        "c.json",
        r#"{"M": 3, "L": 3, "P": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]]}"#,
    );
    let csv = stdout_of(&[
        "sweep",
        "--channel",
        &ch,
        "--k",
        "2",
        "--methods",
        "exhaustive",
    ]);
    let row = csv.lines().nth(2).unwrap();
    assert!(row.starts_with(','));
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", H);
    let ch_text = stdout_of(&["channel", "build-mimo", "--h-matrix", &h, "--snr-db", "0"]);
    let ch = write(dir.path(), "ch.json", &ch_text);
    for args in [
        vec!["select", "sdp", "--channel", ch.as_str(), "--k", "40"],
        vec!["select", "bsa", "--channel", ch.as_str(), "--k", "1"],
        vec![
            "select",
            "exhaustive",
            "--channel",
            ch.as_str(),
            "--k",
            "4",
            "--criterion",
            "speed",
        ],
        vec!["select", "sdp", "--h-matrix", h.as_str(), "--k", "4"],
        vec![
            "sweep",
            "--h-matrix",
            h.as_str(),
            "--snr-db",
            "0",
            "--k",
            "17",
        ],
        vec![
            "coded-ber",
            "--h-matrix",
            h.as_str(),
            "--mask",
            "full",
            "--snr-db",
            "0",
            "--total-rate",
            "5",
        ],
        vec!["capacity", "ba", "--channel", "/nonexistent.json"],
    ] {
        let out = run(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
}
