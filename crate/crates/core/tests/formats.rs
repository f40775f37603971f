use dmc_shaper_core::commands::{load_mask, validate_channel_text};
use dmc_shaper_core::{paper_channel_matrix, ComplexChannelMatrix, DmcChannel};

#[test]
fn channel_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let ch = DmcChannel::from_rows(&[vec![0.7, 0.2, 0.1], vec![0.05, 0.9, 0.05]]).unwrap();
    ch.save(&path).unwrap();
    let back = DmcChannel::load(&path).unwrap();
    for x in 0..2 {
        assert_eq!(back.row(x), ch.row(x));
    }
    let raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(raw["M"], 2);
    assert_eq!(raw["L"], 3);
}

#[test]
fn loader_renormalizes_small_deviations_only() {
    let nearly = r#"{"M": 2, "L": 2, "P": [[0.6000004, 0.4], [0.5, 0.5]]}"#;
    let ch = DmcChannel::from_json(nearly).unwrap();
    assert!((ch.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(validate_channel_text(nearly).unwrap().is_empty());

    let off = r#"{"M": 2, "L": 2, "P": [[0.61, 0.4], [0.5, 0.5]]}"#;
    assert!(DmcChannel::from_json(off).is_err());
    let issues = validate_channel_text(off).unwrap();
    assert_eq!(issues.len(), 1);
    assert_eq!(issues[0].row, Some(0));
    assert!(validate_channel_text("[1, 2").is_err());
}

#[test]
fn matrix_file_round_trip() {
    let h = paper_channel_matrix();
    assert_eq!((h.n_rx(), h.n_tx()), (4, 4));
    let text = serde_json::to_string(&h.to_file()).unwrap();
    assert_eq!(ComplexChannelMatrix::from_json(&text).unwrap(), h);
    assert!(ComplexChannelMatrix::from_json(r#"{"re": [[1, 2]], "im": [[1]]}"#).is_err());
}

#[test]
fn mask_files() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("l.json");
    std::fs::write(&list, "[7, 2, 4, 0]").unwrap();
    assert_eq!(load_mask(&list, 8).unwrap().indices(), vec![0, 2, 4, 7]);
    let report = dir.path().join("r.json");
    std::fs::write(
        &report,
        r#"{"mask": [1, 3], "ser": 0.2, "truncated": false}"#,
    )
    .unwrap();
    assert_eq!(load_mask(&report, 4).unwrap().indices(), vec![1, 3]);
    assert!(load_mask(&list, 4).is_err());
}
