use std::path::Path;
use std::process::{Command, Output};

use projein_cli::{run_manifest, Overrides, Report, Ring};

fn projein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projein")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run_to_report(dir: &Path, manifest: &str, extra: &[&str]) -> (i32, Option<Report>, String) {
    let m = write(dir, "m.toml", manifest);
    let out = dir.join("r.json");
    let _ = std::fs::remove_file(&out);
    let mut args = vec!["run", m.as_str(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = projein(&args);
    let report = std::fs::read_to_string(&out).ok().map(|t| Report::from_json(&t).unwrap());
    (o.status.code().unwrap(), report, String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn flat_space_is_projectively_ricci_flat() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = run_to_report(
        dir.path(),
        "[chart]\ndimension = 3\n[connection]\nbuiltin = \"flat\"\n[analyses]\neinstein_check = \"pseudo-inverse\"\n",
        &[],
    );
    assert_eq!(code, 0);
    assert_eq!(r.unwrap().verdict.unwrap().classification, "PROJECTIVELY_RICCI_FLAT");
}

#[test]
fn product_of_spheres_is_einstein() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = run_to_report(
        dir.path(),
        "[connection]\nbuiltin = \"s2xs2\"\n[chart]\ncount = 2\n[analyses]\neinstein_check = \"pseudo-inverse\"\n",
        &[],
    );
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert!(r.points.iter().all(|p| p.einstein.as_ref().unwrap().genericity.ok));
    assert_eq!(r.verdict.unwrap().classification, "EINSTEIN_NONZERO");
}

#[test]
fn malformed_expression_exits_with_manifest_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, err) = run_to_report(
        dir.path(),
        "[chart]\ndimension = 2\n[connection]\nkind = \"metric\"\nmetric = [\"1 + x1^\", \"0\", \"0\", \"1\"]\n",
        &[],
    );
    assert_eq!(code, 2);
    assert!(r.is_none());
    assert!(err.contains("metric[0]"), "{err}");
}

#[test]
fn metric_analysis_on_connection_only_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_to_report(
        dir.path(),
        "[connection]\nbuiltin = \"prescribed-weyl\"\n[analyses]\nconformal_bridge = true\n",
        &[],
    );
    assert_eq!(code, 2);
    assert!(err.contains("needs a metric"), "{err}");
}

#[test]
fn pole_at_a_sample_point_exits_with_singularity() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_to_report(
        dir.path(),
        "[chart]\ndimension = 2\npoints = [[0, 0]]\ncount = 0\n[connection]\nkind = \"metric\"\nmetric = [\"1/x1\", \"0\", \"0\", \"1\"]\n[analyses]\ninvariants = true\n",
        &[],
    );
    assert_eq!(code, 3, "{err}");
}

#[test]
fn exact_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.toml",
        "[connection]\nbuiltin = \"s2xs2\"\nshift = [\"x1^2\", \"x2 - x4\", \"1/2\", \"x3*x1\"]\n[chart]\ncount = 3\nseed = 99\n[analyses]\ninvariants = true\nchern = [2]\neinstein_check = \"pseudo-inverse\"\n",
    );
    let a = projein(&["run", &m]);
    let b = projein(&["run", &m]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reports_round_trip() {
    let exact = run_manifest(
        "[connection]\nbuiltin = \"sphere\"\n[chart]\ndimension = 4\ncount = 2\n[analyses]\ninvariants = true\nchern = [1, 2]\ntractor_verify = \"einstein\"\nconformal_bridge = true\nwedge_obstruction = true\neinstein_check = \"natural-q\"\n",
        &Overrides::default(),
        true,
    )
    .unwrap();
    let float = run_manifest(
        "[connection]\nbuiltin = \"s2xs2\"\n[chart]\ncount = 2\n[analyses]\ninvariants = true\neinstein_check = \"pseudo-inverse\"\nconformal_bridge = true\n",
        &Overrides { ring: Some(Ring::Float), ..Default::default() },
        false,
    )
    .unwrap();
    for r in [exact, float] {
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }
}

#[test]
fn explain_names_the_cotton_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_to_report(
        dir.path(),
        "[connection]\nbuiltin = \"prescribed-weyl\"\n[chart]\ncount = 2\n[analyses]\neinstein_check = \"pseudo-inverse\"\n",
        &[],
    );
    assert_eq!(code, 0);
    let o = projein(&["explain", dir.path().join("r.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("verdict: NOT_EINSTEIN"), "{text}");
    assert!(text.contains("2E_[ij]k ≠ 0 ⇒ no Cotton-flat connection in class"), "{text}");
}

#[test]
fn explain_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "r.json", "{ not json");
    assert_eq!(projein(&["explain", &p]).status.code(), Some(2));
}

#[test]
fn seed_override_changes_sample_points() {
    let text = "[chart]\ndimension = 2\n[connection]\nbuiltin = \"flat\"\n[analyses]\ninvariants = true\n";
    let a = run_manifest(text, &Overrides::default(), false).unwrap();
    let b = run_manifest(text, &Overrides { seed: Some(7), ..Default::default() }, false).unwrap();
    assert_eq!(b.seed, 7);
    assert_ne!(a.points[0].coordinates, b.points[0].coordinates);
}

#[test]
fn list_builtins_names_the_catalog() {
    let o = projein(&["list-builtins"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["flat", "sphere", "hyperbolic", "s2xs2", "schwarzschild", "prescribed-weyl"] {
        assert!(text.contains(name));
    }
}
