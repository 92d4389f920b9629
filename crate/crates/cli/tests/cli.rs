use std::fs;
use std::path::Path;
use std::process::{Command, Output};

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

fn ppiped(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppiped"))
        .args(args)
        .output()
        .expect("run ppiped")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stats_line(o: &Output) -> serde_json::Value {
    let err = stderr(o);
    let last = err.lines().last().expect("diagnostics");
    serde_json::from_str(
        last.strip_prefix("STATS ")
            .expect("STATS prefix on last line"),
    )
    .unwrap()
}

fn search_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let out = dir.join(name);
    let mut all = vec!["search", "-o", out.to_str().unwrap()];
    all.extend_from_slice(args);
    let o = ppiped(&all);
    (o, fs::read_to_string(out).unwrap_or_default())
}

#[test]
fn search_50_finds_nothing_and_reports_stats() {
    let dir = tempfile::tempdir().unwrap();
    let (o, text) = search_to(dir.path(), "out.jsonl", &["--max-edge", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text.is_empty());
    let stats = stats_line(&o);
    assert_eq!(stats["realizable"], 0);
    assert_eq!(stats["complete"], true);
    assert!(oracle::search(1, 50, false).realizable.is_empty());
}

#[test]
fn search_output_verifies_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["line", "csv"] {
        let name = format!("out.{format}");
        let (o, text) = search_to(
            dir.path(),
            &name,
            &["--max-edge", "560", "--min-edge", "260", "--format", format],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(text.lines().filter(|l| !l.starts_with('#')).count() >= 2);
        let v = ppiped(&["verify", dir.path().join(&name).to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
        assert!(!stdout(&v).contains("invalid ("));
    }
}

#[test]
fn verify_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ppiped"))
        .args(["verify", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"271,106,103,255,266,101,323,312,183,272,278,300,374\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1 valid"));
}

#[test]
fn verify_inline_reconstructs() {
    let o = ppiped(&[
        "verify",
        "--edges",
        "271,106,103",
        "--minors",
        "255,266,101",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("major diagonals: 323 312 183"), "{s}");
    assert!(s.contains("body diagonals: 272 278 300 374"), "{s}");
    assert!(s.contains("verdict: valid"));

    let o = ppiped(&["verify", "--edges", "115,106,83", "--minors", "31,58,75"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("gram_det: -"), "{s}");
    assert!(s.contains("not realizable"), "{s}");

    let o = ppiped(&["verify", "--edges", "5,5,5", "--minors", "5,5,5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("sqrt(75)"));
}

#[test]
fn verify_names_failed_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tampered.csv");
    fs::write(
        &path,
        "271,106,103,255,266,101,323,312,183,272,278,300,375\n",
    )
    .unwrap();
    let o = ppiped(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("body-diagonal identity fails for m4"));

    fs::write(&path, "{not json\n").unwrap();
    let o = ppiped(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("invalid (parse"));
}

#[test]
fn parallelogram_dump() {
    let o = ppiped(&["parallelograms", "--max-edge", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let expected: String = oracle::parallelograms(5)
        .iter()
        .map(|p| format!("{} {} {} {}\n", p[0], p[1], p[2], p[3]))
        .collect();
    assert_eq!(stdout(&o), expected);

    let o = ppiped(&["parallelograms", "--max-edge", "271"]);
    assert!(stdout(&o).lines().any(|l| l == "271 106 255 323"));

    let o = ppiped(&["parallelograms", "--max-edge", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn stats_from_logs_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.log");

    let (o, _) = search_to(dir.path(), "a", &["--max-edge", "115", "--min-edge", "100"]);
    fs::write(&log, &o.stderr).unwrap();
    let s = ppiped(&["stats", log.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(
        stdout(&s)
            .lines()
            .last()
            .unwrap()
            .strip_prefix("STATS ")
            .unwrap(),
    )
    .unwrap();
    assert!(rec["pass_all4"].as_u64().unwrap() >= 1);
    assert_eq!(rec["realizable"], 0);
    assert!(stdout(&s).contains("satisfied all four"));

    let ckpt = dir.path().join("run.ckpt");
    let (o, _) = search_to(
        dir.path(),
        "b",
        &[
            "--max-edge",
            "271",
            "--min-edge",
            "260",
            "--checkpoint",
            ckpt.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let s = ppiped(&["stats", ckpt.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(0));
    assert!(stdout(&s).contains("\"realizable\":1"));

    let (o, _) = search_to(dir.path(), "c", &["--max-edge", "3"]);
    fs::write(&log, &o.stderr).unwrap();
    let s = ppiped(&["stats", log.to_str().unwrap()]);
    assert!(stdout(&s).contains("\"configs_tested\":0,\"pass_ge1\":0,\"pass_ge2\":0,\"pass_ge3\":0,\"pass_all4\":0,\"realizable\":0"));

    fs::write(&log, "garbage\n").unwrap();
    assert_eq!(
        ppiped(&["stats", log.to_str().unwrap()]).status.code(),
        Some(3)
    );
    assert_eq!(
        ppiped(&["stats", "/nonexistent/file"]).status.code(),
        Some(3)
    );
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["search", "--max-edge", "0"][..],
        &["search", "--max-edge", "10", "--min-edge", "11"],
        &["search", "--max-edge", "10", "--workers", "0"],
        &["search", "--max-edge", "10", "--resume"],
        &["search"],
        &["parallelograms", "--max-edge", "0"],
        &["verify", "--edges", "1,2,3"],
        &["verify", "--edges", "1,2", "--minors", "1,2,3"],
        &[
            "verify", "file.txt", "--edges", "1,2,3", "--minors", "1,2,3",
        ],
        &["frobnicate"],
    ] {
        let o = ppiped(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn io_and_budget_errors_exit_3() {
    let o = ppiped(&["search", "--max-edge", "10", "-o", "/nonexistent/dir/out"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cannot write"));
    let o = ppiped(&["search", "--max-edge", "200000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));
    let o = ppiped(&["verify", "/nonexistent/file"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn mismatched_resume_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("run.ckpt");
    let c = ckpt.to_str().unwrap();
    let (o, _) = search_to(
        dir.path(),
        "a",
        &["--max-edge", "60", "--checkpoint", c, "--halt-after", "5"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("halted"));
    let (o, _) = search_to(
        dir.path(),
        "b",
        &["--max-edge", "61", "--checkpoint", c, "--resume"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not match"));
}
