use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(cache: &Path, cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gl2ext"))
        .args(args)
        .env("GL2EXT_CACHE_DIR", cache)
        .current_dir(cwd)
        .output()
        .expect("spawn gl2ext")
}

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Env {
        Env { dir: tempfile::tempdir().unwrap() }
    }
    fn cache(&self) -> std::path::PathBuf {
        self.dir.path().join("cache")
    }
    fn run(&self, args: &[&str]) -> Output {
        run(&self.cache(), self.dir.path(), args)
    }
    fn stdout(&self, args: &[&str]) -> String {
        let o = self.run(args);
        assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    }
}

#[test]
fn oracle_examples() {
    let e = Env::new();
    for (p, i, total) in [("3", "-1", 19), ("2", "-2", 12), ("3", "0", 9)] {
        let out = e.stdout(&["--format", "json", "oracle", "-p", p, "-i", i]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["total"], total, "p={p} i={i}: {out}");
    }
    let text = e.stdout(&["oracle", "-p", "3", "-i", "-1"]);
    assert!(text.contains("total 19"), "{text}");
}

#[test]
fn calibrate_is_idempotent() {
    let e = Env::new();
    let first = e.stdout(&["calibrate"]);
    assert!(first.starts_with("wrote"), "{first}");
    let rec1 = std::fs::read(e.cache().join("calibration.json")).unwrap();
    let second = e.stdout(&["calibrate"]);
    assert!(second.starts_with("unchanged"), "{second}");
    let rec2 = std::fs::read(e.cache().join("calibration.json")).unwrap();
    assert_eq!(rec1, rec2);
    assert!(first.contains("1 of 32 candidates pass"));
    assert!(first.contains("psi-reading j-plus-k"), "{first}");
}

#[test]
fn forced_flag_fails_verification() {
    let e = Env::new();
    let o = e.run(&["calibrate", "--override", "psi-reading=j-minus-k"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("forced conventions fail: p=2 i=-2"), "{text}");

    // The forced record stays in the cache and poisons `verify`.
    let o = e.run(&["verify", "-p", "3", "-q", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("criterion 2 FAIL"), "{text}");

    // An honest re-calibration restores it.
    assert!(e.stdout(&["calibrate"]).starts_with("wrote"));
    let o = e.run(&["verify", "-p", "3", "-q", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn build_writes_nine_vertices() {
    let e = Env::new();
    e.stdout(&["build", "-p", "3", "-q", "2", "-o", "block.json", "--format", "json"]);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(e.dir.path().join("block.json")).unwrap()).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 9);
    assert_eq!(v["p"], 3);
    assert_eq!(v["q"], 2);
}

#[test]
fn ext_example() {
    let e = Env::new();
    assert_eq!(e.stdout(&["ext", "-p", "3", "-q", "2", "--from", "2", "--to", "1", "--k", "1"]).trim(), "1");
    // Same pair by tuple.
    assert_eq!(e.stdout(&["ext", "-p", "3", "-q", "2", "--from", "1,2", "--to", "1,1", "--k", "1"]).trim(), "1");
    assert_eq!(e.stdout(&["ext", "-p", "3", "-q", "2", "--from", "1,1", "--to", "1,2", "--k", "1"]).trim(), "0");
}

#[test]
fn verify_example_passes() {
    let e = Env::new();
    let o = e.run(&["verify", "-p", "3", "-q", "2", "--reference", "ref_p3_q2.csv"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    for id in 1..=6 {
        assert!(text.contains(&format!("criterion {id} PASS")), "{text}");
    }
    assert!(text.contains("all criteria pass"));
}

#[test]
fn verbatim_reference_fails_golden_match() {
    let e = Env::new();
    let o = e.run(&["verify", "--no-errata", "--triples", "200"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert!(text.contains("criterion 1 FAIL"), "{text}");
    assert!(text.contains("column 7"), "{text}");
}

#[test]
fn quiver_formats() {
    let e = Env::new();
    let text = e.stdout(&["quiver", "-p", "3", "-q", "2"]);
    assert!(text.starts_with("9 vertices, 24 arrows"), "{text}");
    let dot = e.stdout(&["--format", "dot", "quiver", "-p", "3", "-q", "2"]);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 24);
    assert!(dot.contains("label=\"j="));
}

#[test]
fn outputs_are_deterministic() {
    let a = Env::new();
    let b = Env::new();
    for args in [
        &["--format", "json", "build", "-p", "3", "-q", "2", "--products"][..],
        &["--format", "csv", "cartan", "-p", "3", "-q", "2"][..],
        &["--format", "dot", "quiver", "-p", "2", "-q", "2"][..],
        &["--format", "csv", "oracle", "-p", "3", "-i", "-2"][..],
    ] {
        let x = a.stdout(args);
        assert_eq!(x, a.stdout(args), "{args:?} differs between runs");
        assert_eq!(x, b.stdout(args), "{args:?} differs between caches");
    }
}

#[test]
fn usage_errors_exit_2() {
    let e = Env::new();
    for args in [
        &["build", "-p", "3", "--bogus"][..],
        &["oracle", "-p", "3", "-i", "-9"][..],
        &["oracle", "-p", "3", "-i", "2"][..],
        &["build", "-p", "3", "-q", "0"][..],
        &["calibrate", "--override", "top=nonsense"][..],
        &["ext", "-p", "3", "-q", "2", "--from", "7,7", "--to", "1,1", "--k", "0"][..],
    ] {
        assert_eq!(e.run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn json_output_parses() {
    let e = Env::new();
    for args in [
        &["oracle", "-p", "2", "-i", "-1"][..],
        &["calibrate"][..],
        &["build", "-p", "2", "-q", "2", "--products"][..],
        &["cartan", "-p", "3", "-q", "1"][..],
        &["ext", "-p", "3", "-q", "1", "--from", "2", "--to", "1", "--k", "1"][..],
        &["quiver", "-p", "3", "-q", "1"][..],
    ] {
        let mut full = vec!["--format", "json"];
        full.extend_from_slice(args);
        let out = e.stdout(&full);
        assert!(serde_json::from_str::<serde_json::Value>(&out).is_ok(), "{args:?}: {out}");
    }
}

#[test]
fn too_few_random_triples_fail() {
    let e = Env::new();
    let o = e.run(&["verify", "--triples", "200"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert!(text.contains("criterion 5 FAIL"), "{text}");
}
