use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const GRAHAM: &str = r#"{"alphas": ["1"], "betas": ["0"]}"#;
const TWO_POLES: &str = r#"{"alphas": ["1", "2"], "betas": ["-1", "2"]}"#;

fn poledyn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poledyn"))
        .current_dir(dir)
        .env_remove("POLEDYN_DEFAULT_BITS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("graham.json"), GRAHAM).unwrap();
    fs::write(dir.path().join("two.json"), TWO_POLES).unwrap();
    dir
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn rational_orbit_of_two() {
    let dir = workspace();
    let out = poledyn(dir.path(), &["orbit", "--map", "graham.json", "--x0", "2", "--n", "3", "--mode", "rational"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(read(dir.path(), "out/orbit.csv"), "step,value\n0,2\n1,3/2\n2,5/6\n3,-11/30\n");
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "out/manifest.json")).unwrap();
    assert_eq!(manifest["subcommand"], "orbit");
    assert_eq!(manifest["outputs"], serde_json::json!(["orbit.csv", "orbit.json"]));
}

#[test]
fn pullback_measures_stay_at_two_eps() {
    let dir = workspace();
    let out = poledyn(dir.path(), &["pullback", "--map", "graham.json", "--eps", "0.1", "--k", "5", "--bits", "256"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "out/pullback.json")).unwrap();
    let levels = json["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 6);
    for (k, level) in levels.iter().enumerate() {
        let measure: f64 = level["measure"].as_str().unwrap().parse().unwrap();
        assert!((measure - 0.2).abs() < 1e-20, "level {k}: {measure}");
        assert_eq!(level["intervals"], 1u64 << k);
    }
}

#[test]
fn pole_seed_is_rejected() {
    let dir = workspace();
    let out = poledyn(dir.path(), &["orbit", "--map", "graham.json", "--x0", "0", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("pole"), "{}", stderr(&out));
}

#[test]
fn orbit_into_a_pole_keeps_the_prefix() {
    let dir = workspace();
    let out = poledyn(dir.path(), &["orbit", "--map", "graham.json", "--x0", "1", "--n", "3", "--mode", "rational"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(read(dir.path(), "out/orbit.csv"), "step,value\n0,1\n1,0\n");
}

#[test]
fn malformed_maps_exit_with_two() {
    let dir = workspace();
    let cases = [
        (r#"{"alphas": ["-1"], "betas": ["0"]}"#, "positive"),
        (r#"{"alphas": ["1", "1"], "betas": ["0", "0"]}"#, "duplicate"),
        (r#"{"alphas": ["1", "1"], "betas": ["2", "0"]}"#, "sorted order"),
        (r#"{"alphas": ["1"]}"#, "betas"),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let name = format!("bad{i}.json");
        fs::write(dir.path().join(&name), body).unwrap();
        let out = poledyn(dir.path(), &["orbit", "--map", &name, "--x0", "1", "--n", "2"]);
        assert_eq!(out.status.code(), Some(2), "{body}");
        assert!(stderr(&out).contains(needle), "{body}: {}", stderr(&out));
    }
    let out = poledyn(dir.path(), &["orbit", "--map", "missing.json", "--x0", "1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = workspace();
    let budget = poledyn(dir.path(), &["pullback", "--map", "graham.json", "--eps", "0.1", "--k", "30"]);
    assert_eq!(budget.status.code(), Some(4), "{}", stderr(&budget));
    let eps = poledyn(dir.path(), &["disjoint", "--map", "graham.json", "--eps", "0.3", "--k-max", "3"]);
    assert_eq!(eps.status.code(), Some(2), "{}", stderr(&eps));
    let parse = poledyn(dir.path(), &["hit", "--map", "graham.json", "--x0", "abc", "--eps", "0.1", "--n-max", "5"]);
    assert_eq!(parse.status.code(), Some(2), "{}", stderr(&parse));
}

#[test]
fn help_names_the_result_each_command_exercises() {
    let dir = workspace();
    let cases = [
        ("orbit", "angle doubling"),
        ("hit", "positive-density theorem"),
        ("pullback", "measure-preservation lemma"),
        ("glasser", "Glasser's master theorem"),
        ("density", "positive-density theorem"),
        ("scaling", "quadratic descent"),
        ("disjoint", "separation lemma"),
        ("conjugacy", "topological conjugacy"),
        ("probe-logsq", "(ln |x|)²"),
    ];
    for (command, needle) in cases {
        let out = poledyn(dir.path(), &[command, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains(needle), "{command} --help lacks {needle:?}");
    }
}

#[test]
fn default_bits_come_from_the_environment() {
    let dir = workspace();
    let out = Command::new(env!("CARGO_BIN_EXE_poledyn"))
        .current_dir(dir.path())
        .env("POLEDYN_DEFAULT_BITS", "99")
        .args(["orbit", "--map", "graham.json", "--x0", "2", "--n", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "out/orbit.json")).unwrap();
    assert_eq!(json["policy"]["mode"]["big_float"]["bits"], 99);
}

fn data_files(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn artifacts_are_reproducible_across_thread_counts() {
    let dir = workspace();
    let runs: [&[&str]; 4] = [
        &["density", "--map", "two.json", "--y", "4", "--y", "8", "--samples", "40"],
        &["glasser", "--map", "two.json", "--random-sets", "4"],
        &["disjoint", "--map", "graham.json", "--eps", "0.1", "--eps", "0.05", "--k-max", "5"],
        &["conjugacy", "--samples", "6", "--steps", "60"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let out_dir = format!("run{threads}");
            let mut full = args.to_vec();
            full.extend(["--threads", threads, "--out", &out_dir]);
            let out = poledyn(dir.path(), &full);
            assert!(out.status.success(), "{args:?}: {}", stderr(&out));
            assert!(dir.path().join(&out_dir).join("manifest.json").exists());
            outputs.push(data_files(&dir.path().join(&out_dir)));
        }
        assert!(!outputs[0].is_empty());
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}

#[test]
fn scaling_and_probe_write_tables() {
    let dir = workspace();
    let out = poledyn(dir.path(), &["scaling", "--map", "graham.json", "--x0", "10", "--x0", "20", "--out", "s"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "s/scaling.csv");
    assert_eq!(csv.lines().count(), 3);
    let out = poledyn(dir.path(), &["probe-logsq", "--map", "graham.json", "--y", "10", "--samples", "20", "--out", "p"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "p/probe-logsq.json")).unwrap();
    assert_eq!(json["experiment"], "probe-logsq");
}
