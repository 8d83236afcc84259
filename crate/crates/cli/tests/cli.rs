//! End-to-end checks of the binary: exit codes, report formats, and
//! byte-determinism.

use std::path::Path;
use std::process::{Command, Output};

const TREFOIL: &str = "degree 3\nx: 0 0 1 0 2 0 0\ny: 0 1 0 -2 0 0 0\nz: 0 0 0 0 0 0 -1\n";
const CIRCLE: &str = "degree 1\nx: 0 1 0\ny: 0 0 1\nz: 0 0 0\n";
/// Vertical tangent at u = 0: fails condition 1 by construction.
const CUSPY: &str = "degree 2\nx: 0 -1 0 0 0\ny: 0 0 -2 0 1\nz: 0 0 1 0 0\n";
const FIG8_PD: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)\n";

/// Curl-removal isotopy: one crossing at t=0, a cusp at t=1/2, round at
/// t=1.
const CURL_REMOVAL: &str = "keyframe t=0\ndegree 2\nx: 0 -1 0 0 0\ny: 0 0 -1.5 0 1\nz: 0 0 1 0 0\nkeyframe t=1\ndegree 2\nx: 0 -1 0 0 0\ny: 0 0 -2.5 0 1\nz: 0 0 1 0 0\n";

/// Trefoil to its mirror: strands must pass through each other in 3D.
const TREFOIL_TO_MIRROR: &str = "keyframe t=0\ndegree 3\nx: 0 0 1 0 2 0 0\ny: 0 1 0 -2 0 0 0\nz: 0 0 0 0 0 0 -1\nkeyframe t=1\ndegree 3\nx: 0 0 1 0 2 0 0\ny: 0 1 0 -2 0 0 0\nz: 0 0 0 0 0 0 1\n";

fn knotter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotter"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn validate_exit_codes_and_kv() {
    let dir = tempfile::tempdir().unwrap();
    let trefoil = write(dir.path(), "trefoil.txt", TREFOIL);
    let out = knotter(dir.path(), &["validate", &trefoil, "--format", "kv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("crossings=3"));
    assert!(text.contains("verdict=PASS"));

    let circle = write(dir.path(), "circle.txt", CIRCLE);
    let out = knotter(dir.path(), &["validate", &circle, "--format", "kv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("crossings=0"));

    // Truncated file: parse error with a line number, exit 2.
    let broken = write(dir.path(), "broken.txt", "degree 2\nx: 0 1 0 0 0\n");
    let out = knotter(dir.path(), &["validate", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    // Genericity failure: exit 1.
    let cuspy = write(dir.path(), "cuspy.txt", CUSPY);
    let out = knotter(dir.path(), &["validate", &cuspy]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extract_gauss_code() {
    let dir = tempfile::tempdir().unwrap();
    let trefoil = write(dir.path(), "trefoil.txt", TREFOIL);
    let out = knotter(dir.path(), &["extract", &trefoil]);
    assert_eq!(out.status.code(), Some(0));
    let code = stdout(&out);
    assert_eq!(code.split_whitespace().count(), 6);

    let circle = write(dir.path(), "circle.txt", CIRCLE);
    let out = knotter(dir.path(), &["extract", &circle]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "");

    // Non-generic input without --perturb: exit 1 and a hint.
    let cuspy = write(dir.path(), "cuspy.txt", CUSPY);
    let out = knotter(dir.path(), &["extract", &cuspy]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--perturb"));

    // With --perturb it goes through.
    let out = knotter(
        dir.path(),
        &["extract", &cuspy, "--perturb", "--perturb-magnitude", "1e-2"],
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn invariants_from_knot_and_codes() {
    let dir = tempfile::tempdir().unwrap();
    let trefoil = write(dir.path(), "trefoil.txt", TREFOIL);
    let out = knotter(dir.path(), &["invariants", &trefoil, "--n", "3,5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("colorings_3=9"));
    assert!(text.contains("colorings_5=5"));

    let fig8 = write(dir.path(), "fig8.txt", FIG8_PD);
    let out = knotter(dir.path(), &["invariants", &fig8, "--n", "3,5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("colorings_3=3"));
    assert!(text.contains("colorings_5=25"));

    let unknot = write(dir.path(), "unknot.txt", "\n");
    let out = knotter(dir.path(), &["invariants", &unknot, "--n", "2,3,5,7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for n in [2u64, 3, 5, 7] {
        assert!(text.contains(&format!("colorings_{n}={n}")));
    }

    let malformed = write(dir.path(), "bad.txt", "O1+ O1+ U2+ U2+\n");
    let out = knotter(dir.path(), &["invariants", &malformed]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let curl = write(dir.path(), "curl.txt", CURL_REMOVAL);
    let out = knotter(dir.path(), &["trace", &curl, "--time-samples", "192"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("event t=").count(), 1);
    assert!(text.contains("kind=R1"));
    assert!(text.contains("verdict PASS"));

    let mirror = write(dir.path(), "mirror.txt", TREFOIL_TO_MIRROR);
    let out = knotter(dir.path(), &["trace", &mirror, "--time-samples", "64"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not an isotopy"));
}

#[test]
fn render_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let trefoil = write(dir.path(), "trefoil.txt", TREFOIL);
    let out_a = dir.path().join("a.svg");
    let out_b = dir.path().join("b.svg");
    for out in [&out_a, &out_b] {
        let res = knotter(
            dir.path(),
            &["render", &trefoil, "-o", &out.to_string_lossy()],
        );
        assert_eq!(res.status.code(), Some(0));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b);
    // Three under-strand gaps: three open path elements.
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.matches("<path").count(), 3);

    // Unknot: a single closed shape.
    let circle = write(dir.path(), "circle.txt", CIRCLE);
    let out_c = dir.path().join("c.svg");
    let res = knotter(
        dir.path(),
        &["render", &circle, "-o", &out_c.to_string_lossy()],
    );
    assert_eq!(res.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_c).unwrap();
    assert_eq!(text.matches("<path").count(), 1);

    // Unwritable output path: exit 2.
    let res = knotter(
        dir.path(),
        &["render", &trefoil, "-o", "/nonexistent-dir/x.svg"],
    );
    assert_eq!(res.status.code(), Some(2));
}
