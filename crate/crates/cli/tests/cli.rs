use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn subsume(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subsume"))
        .args(args)
        .output()
        .expect("spawn subsume")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example() -> String {
    fixtures().join("example.sub").display().to_string()
}

fn rooms() -> String {
    fixtures().join("rooms.json").display().to_string()
}

#[test]
fn check_exit_codes() {
    let ok = subsume(&["check", &example()]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(stdout(&ok).contains("ok (8 modules"));

    let v4 = fixtures().join("validation/v4_fail.sub");
    let bad = subsume(&["check", path_str(&v4)]);
    assert_eq!(code(&bad), 1);
    assert!(stderr(&bad).contains("error[V4]"), "{}", stderr(&bad));
    assert!(stderr(&bad).contains("v4_fail.sub:14:3"), "{}", stderr(&bad));

    let missing = subsume(&["check", "/nonexistent/model.sub"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn check_reports_parse_errors_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.sub");
    fs::write(&p, "system s {\n  module m layer x { }\n}\n").unwrap();
    let o = subsume(&["check", path_str(&p)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("broken.sub:2:"), "{}", stderr(&o));
}

#[test]
fn every_validation_fixture_pair() {
    let dir = fixtures().join("validation");
    let mut pairs = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        let Some(stem) = name.strip_suffix("_fail.sub") else { continue };
        let rule = stem.split('_').next().unwrap().to_uppercase();
        let pass = dir.join(format!("{stem}_pass.sub"));
        assert_eq!(code(&subsume(&["check", path_str(&pass)])), 0, "{stem} pass");
        let o = subsume(&["check", path_str(&dir.join(&name))]);
        assert_eq!(code(&o), 1, "{stem} fail");
        assert!(stderr(&o).contains(&format!("error[{rule}]")), "{}", stderr(&o));
        pairs += 1;
    }
    assert_eq!(pairs, 10);
}

#[test]
fn fmt_check_and_write() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.sub");
    let src = fs::read_to_string(fixtures().join("example.sub")).unwrap();
    fs::write(&p, &src).unwrap();

    // the fixture carries a comment, so it is not canonical
    let printed = subsume(&["fmt", path_str(&p)]);
    assert_eq!(code(&printed), 0);
    let canonical = stdout(&printed);
    assert_eq!(code(&subsume(&["fmt", "--check", path_str(&p)])), 1);

    assert_eq!(code(&subsume(&["fmt", "--write", path_str(&p)])), 0);
    assert_eq!(fs::read_to_string(&p).unwrap(), canonical);
    assert_eq!(code(&subsume(&["fmt", "--check", path_str(&p)])), 0);

    // re-indenting breaks canonical form again
    fs::write(&p, canonical.replace("\n  ", "\n    ")).unwrap();
    assert_eq!(code(&subsume(&["fmt", "--check", path_str(&p)])), 1);

    fs::write(&p, "system {").unwrap();
    assert_eq!(code(&subsume(&["fmt", path_str(&p)])), 2);
}

#[test]
fn gen_writes_and_preserves_regions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("app");
    let o = subsume(&["gen", &example(), "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let units = fs::read_dir(out.join("src/modules")).unwrap().count();
    assert_eq!(units, 8);
    assert!(out.join("Cargo.toml").exists());
    assert!(!out.join("docs").exists());

    let unit = out.join("src/modules/sonar.rs");
    let text = fs::read_to_string(&unit).unwrap();
    let filled = text.replace(
        "    // USER CODE BEGIN sonar.state\n",
        "    // USER CODE BEGIN sonar.state\n    scans: u32,\n",
    );
    assert_ne!(filled, text);
    fs::write(&unit, &filled).unwrap();

    let again = subsume(&["gen", &example(), "--out", path_str(&out), "--docs", "--tests"]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert!(fs::read_to_string(&unit).unwrap().contains("    scans: u32,\n"));
    assert!(out.join("docs/index.md").exists());
    assert_eq!(fs::read_dir(out.join("src/tests")).unwrap().count(), 8);

    // edits outside the regions block regeneration unless forced
    let edited = fs::read_to_string(&unit).unwrap().replace("pub const LAYER", "pub const LEVEL");
    fs::write(&unit, &edited).unwrap();
    let conflict = subsume(&["gen", &example(), "--out", path_str(&out)]);
    assert_eq!(code(&conflict), 2);
    assert!(stderr(&conflict).contains("sonar.rs"), "{}", stderr(&conflict));
    assert_eq!(fs::read_to_string(&unit).unwrap(), edited);

    let forced = subsume(&["gen", &example(), "--out", path_str(&out), "--force"]);
    assert_eq!(code(&forced), 0);
    let reset = fs::read_to_string(&unit).unwrap();
    assert!(reset.contains("pub const LAYER") && !reset.contains("scans: u32"));
}

#[test]
fn gen_refuses_invalid_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("app");
    let bad = fixtures().join("validation/v7_fail.sub");
    let o = subsume(&["gen", path_str(&bad), "--out", path_str(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("error[V7]"));
    assert!(!out.exists());
}

#[test]
fn dot_output() {
    let o = subsume(&["dot", &example()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("digraph \"brooks\" {"));
    assert_eq!(text.matches("\" [shape=box];").count(), 8);
    assert_eq!(text.matches("label=\"S\"").count(), 1);
    assert_eq!(stdout(&subsume(&["dot", &example()])), text);

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("e.sub");
    fs::write(&empty, "system e { }\n").unwrap();
    let file = dir.path().join("e.dot");
    let o = subsume(&["dot", path_str(&empty), "--out", path_str(&file)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(&file).unwrap(), "digraph \"e\" {\n}\n");
}

fn coverage(o: &Output) -> u64 {
    assert_eq!(code(o), 0, "{}", stderr(o));
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("coverage_cells: "))
        .expect("coverage line")
        .parse()
        .unwrap()
}

#[test]
fn sim_layers_and_outputs() {
    let low = coverage(&subsume(&["sim", &rooms(), "--layers", "0", "--ticks", "10000"]));
    let both = coverage(&subsume(&["sim", &rooms(), "--layers", "0,1", "--ticks", "10000"]));
    assert!(both > low, "{both} <= {low}");
    assert_eq!(coverage(&subsume(&["sim", &rooms(), "--ticks", "0"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let svg = dir.path().join("p.svg");
    subsume(&["sim", &rooms(), "--ticks", "2000", "--seed", "3", "--csv", path_str(&a)]);
    let o = subsume(&[
        "sim", &rooms(), "--ticks", "2000", "--seed", "3", "--csv", path_str(&b), "--svg",
        path_str(&svg), "--compare",
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(&a).unwrap();
    assert!(csv.starts_with("t_ms,x,y\n"));
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn sim_rejects_bad_world() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    fs::write(&w, r#"{"size":[10,-1],"start":[1,1,0],"obstacles":[]}"#).unwrap();
    let o = subsume(&["sim", path_str(&w)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("/size"), "{}", stderr(&o));
}
