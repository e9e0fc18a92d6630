use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn gesturec<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gesturec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build(experiment: &str, out: &Path, extra: &[&str]) -> Output {
    let d = data();
    let mut args: Vec<String> = vec![
        "build".into(),
        "--experiment".into(),
        experiment.into(),
        "--stories".into(),
        s(&d.join("stories")).into(),
        "--timings".into(),
        s(&d.join("timings")).into(),
        "--catalog".into(),
        s(&d.join("catalog.txt")).into(),
        "--out".into(),
        s(out).into(),
    ];
    args.extend(extra.iter().map(|a| a.to_string()));
    gesturec(&args)
}

#[test]
fn build_writes_manifest() {
    for (experiment, bundles) in [("personality", 8), ("adaptation", 16)] {
        let dir = tempfile::tempdir().unwrap();
        let out = build(experiment, dir.path(), &["--strict"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
        assert_eq!(v["bundles"].as_array().unwrap().len(), bundles, "{experiment}");
    }
}

#[test]
fn build_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(build("personality", a.path(), &[]).status.success());
    assert!(build("personality", b.path(), &[]).status.success());
    let read = |d: &Path| std::fs::read(d.join("manifest.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn build_rejects_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = gesturec(&[
        "build",
        "--experiment",
        "personality",
        "--stories",
        s(&dir.path().join("nowhere")),
        "--timings",
        s(&dir.path().join("nowhere")),
        "--catalog",
        s(&data().join("catalog.txt")),
        "--out",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("out/manifest.json").exists());
}

#[test]
fn compile_adapted_pair() {
    let dir = tempfile::tempdir().unwrap();
    let d = data();
    let out = gesturec(&[
        "compile",
        "--dialog",
        s(&d.join("stories/protest.gdl")),
        "--timings",
        s(&d.join("timings/protest.tsv")),
        "--catalog",
        s(&d.join("catalog.txt")),
        "--variant",
        "adapted",
        "--responder",
        "A",
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["A.json", "A.txt", "B.json", "B.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let check = gesturec(&["check", s(&dir.path().join("A.json"))]);
    assert!(check.status.success());

    // the protest response is A's turn
    let wrong = gesturec(&[
        "compile",
        "--dialog",
        s(&d.join("stories/protest.gdl")),
        "--catalog",
        s(&d.join("catalog.txt")),
        "--variant",
        "nonadapted",
        "--responder",
        "B",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn argument_errors() {
    let d = data();
    let dialog = d.join("stories/protest.gdl");
    let catalog = d.join("catalog.txt");
    let with = |extra: &[&str]| {
        let mut a = vec![
            "compile",
            "--dialog",
            s(&dialog),
            "--catalog",
            s(&catalog),
            "--out",
            "/nonexistent/never-written",
        ];
        a.extend_from_slice(extra);
        gesturec(&a)
    };
    assert!(!with(&["--responder", "A"]).status.success());
    assert!(!with(&["--extraversion", "A=9"]).status.success());
    assert!(!with(&["--extraversion", "C=3"]).status.success());
    assert!(!with(&["--extraversion", "A"]).status.success());
    assert!(!with(&["--variant", "sideways"]).status.success());
}

#[test]
fn check_flags_broken_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"format\": \"gesture-script/1\"}").unwrap();
    assert_eq!(gesturec(&["check", s(&path)]).status.code(), Some(1));
}

#[test]
fn analyze_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = data().join("judgments/adaptation.csv");
    let json = dir.path().join("report.json");
    let out = gesturec(&["analyze", "--in", s(&csv), "--report", s(&json)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let t = &v["preference_ttest"];
    assert!((t["value"].as_f64().unwrap() - 2.147).abs() < 5e-3, "{t}");
    assert!((t["p_value"].as_f64().unwrap() - 0.069).abs() < 5e-3, "{t}");

    let txt = dir.path().join("report.txt");
    let out = gesturec(&["analyze", "--in", s(&csv), "--report", s(&txt)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&txt).unwrap();
    assert!(text.contains("t(7) = 2.147"), "{text}");
    assert_eq!(String::from_utf8_lossy(&out.stdout), text);
}

#[test]
fn analyze_rejects_bad_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "subject_id,stimulus_id,kind,payload\ns1,x,tipi,1;2;3\n").unwrap();
    let out = gesturec(&["analyze", "--in", s(&csv), "--report", s(&dir.path().join("r.txt"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
