mod common;

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use common::*;

fn qtkz(args: &[&str], cwd: Option<&Path>, stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qtkz"));
    cmd.args(args).env_remove("QTKZ_STYLES");
    cmd.current_dir(cwd.map_or_else(|| dir("corpus"), Path::to_path_buf));
    cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8(b.to_vec()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn render_svg_to_stdout() {
    let f = dir("corpus").join("multiple_qubits.qtz");
    let out = qtkz(&["render", path_str(&f)], None, None);
    assert_eq!(out.status.code(), Some(0));
    roxmltree::Document::parse(&text(&out.stdout)).unwrap();
}

#[test]
fn json_output_matches_golden() {
    for name in ["global_styles", "slice_titles", "ebit"] {
        let f = dir("corpus").join(format!("{name}.qtz"));
        let out = qtkz(&["render", path_str(&f), "--format", "json"], None, None);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(text(&out.stdout), std::fs::read_to_string(golden_path(&f)).unwrap(), "{name}");
    }
}

#[test]
fn stdin_is_read_when_no_input() {
    let out = qtkz(&["render", "--format", "json"], None, Some(r"\begin{quantikz} & \gate{H} & \qw \end{quantikz}"));
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["primitives"].as_array().unwrap().iter().any(|p| p["kind"] == "rect"));
}

#[test]
fn lint_fixtures_exit_two_and_name_their_code() {
    for (code, status) in [("L1", 2), ("L2", 2), ("L3", 2), ("L4", 0), ("L5", 2)] {
        let f = dir("fixtures").join(format!("lint_{}.qtz", code.to_lowercase()));
        let out = qtkz(&["lint", path_str(&f)], None, None);
        assert_eq!(out.status.code(), Some(status), "{code}");
        let stdout = text(&out.stdout);
        let lines: Vec<&str> = stdout.lines().collect();
        assert_eq!(lines.len(), 1, "{stdout}");
        let (loc, rest) = lines[0].split_once(' ').unwrap();
        assert!(rest.starts_with(code), "{}", lines[0]);
        let mut parts = loc.rsplitn(3, ':');
        let col: usize = parts.next().unwrap().parse().unwrap();
        let row: usize = parts.next().unwrap().parse().unwrap();
        assert!(row >= 1 && col >= 1);
    }
}

#[test]
fn clean_circuit_lints_clean() {
    let f = dir("corpus").join("multiple_qubits.qtz");
    let out = qtkz(&["lint", path_str(&f)], None, None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_circuit_exits_one_with_location() {
    let out = qtkz(&["render"], None, Some("\\begin{quantikz}\n\\ctrl{9} & \\qw \\\\\n\\qw & \\qw\n\\end{quantikz}"));
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("error") && err.contains("row 1, column 1"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn strict_render_fails_on_warnings() {
    let f = dir("fixtures").join("lint_l1.qtz");
    assert_eq!(qtkz(&["render", path_str(&f)], None, None).status.code(), Some(0));
    assert_eq!(qtkz(&["render", path_str(&f), "--strict"], None, None).status.code(), Some(2));
}

#[test]
fn missing_file_and_bad_flags_exit_three() {
    assert_eq!(qtkz(&["render", "no/such/file.qtz"], None, None).status.code(), Some(3));
    assert_eq!(qtkz(&["render", "--scale", "-1"], None, None).status.code(), Some(3));
}

#[test]
fn convert_writes_parseable_quantikz() {
    let tmp = tempfile::tempdir().unwrap();
    let out_file = tmp.path().join("teleport.qtz");
    let f = dir("fixtures").join("teleport.qcircuit");
    let out = qtkz(&["convert", path_str(&f), "-o", path_str(&out_file)], None, None);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stderr).contains("ghost"));
    let converted = std::fs::read_to_string(&out_file).unwrap();
    assert!(converted.contains(r"\gate[2]{U}"));
    assert_eq!(qtkz(&["render", path_str(&out_file)], None, None).status.code(), Some(0));
}

#[test]
fn batch_renders_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, output) = (tmp.path().join("in"), tmp.path().join("out"));
    std::fs::create_dir_all(&input).unwrap();
    for name in ["bundle", "wave", "noise", "global_styles"] {
        std::fs::copy(dir("corpus").join(format!("{name}.qtz")), input.join(format!("{name}.qtz"))).unwrap();
    }
    std::fs::copy(dir("corpus").join("global_styles.styles.json"), input.join("global_styles.styles.json")).unwrap();
    let out = qtkz(&["render", path_str(&input), "-o", path_str(&output), "--format", "json"], None, None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    for name in ["bundle", "wave", "noise", "global_styles"] {
        let got = std::fs::read_to_string(output.join(format!("{name}.json"))).unwrap();
        let want = std::fs::read_to_string(dir("golden").join(format!("{name}.json"))).unwrap();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join(".qtkzrc.json"), r#"{"format": "json"}"#).unwrap();
    let src = r"\begin{quantikz} & \gate{H} & \qw \end{quantikz}";
    let out = qtkz(&["render"], Some(tmp.path()), Some(src));
    assert!(text(&out.stdout).starts_with('{'));
    let out = qtkz(&["render", "--format", "svg"], Some(tmp.path()), Some(src));
    assert!(text(&out.stdout).starts_with("<?xml"));
    std::fs::write(tmp.path().join(".qtkzrc.json"), r#"{"colour": "red"}"#).unwrap();
    assert_eq!(qtkz(&["render"], Some(tmp.path()), Some(src)).status.code(), Some(3));
}
