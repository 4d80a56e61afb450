use std::fs;
use std::path::Path;

use biphoton::io::{
    emit_config, load_config, load_preset, parse_config, preset_names, run, Output, PRESETS,
};
use biphoton::physics::ExperimentParams;
use biphoton::{Error, ExperimentConfigF64};

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn preset_files_on_disk_match_the_bundled_text() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    for (name, text) in PRESETS {
        let on_disk = load_config(dir.join(format!("{name}.conf"))).unwrap();
        assert_eq!(on_disk, parse_config(text).unwrap());
    }
}

#[test]
fn emitted_config_round_trips_through_a_file() {
    let tmp = tempfile::tempdir().unwrap();
    for name in preset_names() {
        let m = load_preset(name)
            .unwrap()
            .with_outputs(&Output::ALL)
            .unwrap();
        let path = tmp.path().join(format!("{name}.conf"));
        fs::write(&path, emit_config(&m)).unwrap();
        assert_eq!(load_config(&path).unwrap(), m);
    }
    match load_config(tmp.path().join("missing.conf")) {
        Err(e @ Error::Io { .. }) => assert_eq!(e.exit_code(), 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut m = load_preset("scheme1-nondegenerate")
        .unwrap()
        .with_outputs(&Output::ALL)
        .unwrap();
    m.sampler.as_mut().unwrap().n_events = 200_000;
    m.output_dir = tmp.path().join("run");
    let first = run(&m).unwrap();
    assert_eq!(first.exit_code(), 0, "{:?}", first.summary.self_checks);
    let a = read_dir_sorted(&m.output_dir);
    let second = run(&m).unwrap();
    assert_eq!(second.exit_code(), 0);
    assert_eq!(a, read_dir_sorted(&m.output_dir));
    assert!(a.iter().any(|(n, _)| n == "summary.json"));
    assert!(a.iter().any(|(n, _)| n == "cut_histogram_co-moving.dat"));
}

#[test]
fn every_file_carries_version_and_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let mut m = load_preset("scheme2-degenerate-800nm")
        .unwrap()
        .with_outputs(&[
            Output::Surface,
            Output::Histogram,
            Output::Cuts,
            Output::Summary,
        ])
        .unwrap();
    m.sampler.as_mut().unwrap().n_events = 20_000;
    m.output_dir = tmp.path().to_path_buf();
    run(&m).unwrap();
    for (name, bytes) in read_dir_sorted(tmp.path()) {
        let text = String::from_utf8(bytes).unwrap();
        if name.ends_with(".json") {
            let json: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(json["format_version"], "1.0.0");
            assert_eq!(json["schema_version"], "1.0.0");
            assert_eq!(json["config"]["distance"], "0.303m");
            assert_eq!(json["config"]["events"], "20000");
        } else {
            assert!(
                text.starts_with("# biphoton format_version=1.0.0\n"),
                "{name}"
            );
            assert!(text.contains("# config: slit_spacing = 400um\n"), "{name}");
        }
    }
    let surface = fs::read_to_string(tmp.path().join("surface.csv")).unwrap();
    let rows: Vec<&str> = surface.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 64 * 64);
    assert!(surface.contains("\n# x1_m,x2_m,value\n"));
    // Row-major with x1 as the slow index.
    assert!(rows[0].starts_with("-2.95312500e-3,-2.95312500e-3,"));
    assert!(rows[1].starts_with("-2.95312500e-3,-2.85937500e-3,"));
}

#[test]
fn failed_stage_leaves_partial_files() {
    // A window narrower than two stripe periods leaves the tilt stage nothing to measure.
    let experiment = ExperimentConfigF64::new(ExperimentParams {
        window_halfwidth: 0.4e-3,
        envelope: false,
        ..*load_preset("scheme1-degenerate-800nm")
            .unwrap()
            .experiment
            .params()
    })
    .unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let mut m = biphoton::io::RunManifest::new(
        experiment,
        &[Output::Surface, Output::Tilt, Output::Summary],
    )
    .unwrap();
    m.output_dir = tmp.path().to_path_buf();
    let err = run(&m).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    assert!(tmp.path().join("surface.csv.partial").exists());
    assert!(!tmp.path().join("surface.csv").exists());
    assert!(!tmp.path().join("summary.json").exists());
}

#[test]
fn unwritable_output_dir_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let mut m = load_preset("scheme1-degenerate-800nm").unwrap();
    m.output_dir = blocker.join("sub");
    assert_eq!(run(&m).unwrap_err().exit_code(), 3);
}
