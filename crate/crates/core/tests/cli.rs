use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_permres"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn permres")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn build_trivial_c2() {
    let tmp = tempfile::tempdir().unwrap();
    let input = data("trivial_c2.json");
    let o = run(&["build", input.to_str().unwrap(), "--m", "0", "--out", "res.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("term dims: (2,2,1)"), "{out}");
    assert!(out.contains("verdict: PASS"));
    let v = read_json(tmp.path(), "res.json");
    assert_eq!(v["terms"].as_array().unwrap().len(), 3);
    let committed = std::fs::read_to_string(data("trivial_c2_res.json")).unwrap();
    assert_eq!(std::fs::read_to_string(tmp.path().join("res.json")).unwrap(), committed);
}

#[test]
fn build_free_module_is_single_term() {
    let tmp = tempfile::tempdir().unwrap();
    let free = write(tmp.path(), "free.json", r#"{"dim":2,"generators":[[[0,1],[1,0]]],"p":2,"rank":1}"#);
    for m in ["0", "3"] {
        let o = run(&["build", &free, "--m", m, "--out", "res.json"], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("term dims: (2)"), "{}", stdout(&o));
    }
}

#[test]
fn noncommuting_input_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = data("noncommuting.json");
    let o = run(&["build", bad.to_str().unwrap(), "--out", "res.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("commutativity i=1 j=2"), "{}", stderr(&o));
    assert!(!tmp.path().join("res.json").exists());
}

#[test]
fn malformed_and_missing_files_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let junk = write(tmp.path(), "junk.json", "{not json");
    assert_eq!(run(&["info", &junk], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["info", "absent.json"], tmp.path()).status.code(), Some(2));
    let entry = write(tmp.path(), "entry.json", r#"{"dim":1,"generators":[[[2]]],"p":2,"rank":1}"#);
    assert_eq!(run(&["info", &entry], tmp.path()).status.code(), Some(2));
}

#[test]
fn caps_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let input = data("random_3_2_5.json");
    let o = run(&["--cap-order", "4", "info", input.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = run(&["--cap-dim", "20", "build", input.to_str().unwrap(), "--out", "r.json"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn verify_accepts_built_output() {
    let tmp = tempfile::tempdir().unwrap();
    let res = data("trivial_c2_res.json");
    let o = run(&["verify", res.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: PASS"));
}

#[test]
fn verify_names_corrupted_degree() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = read_json(&data(""), "trivial_c2_res.json");
    // Flip the first stored entry of d_1.
    let entries = v["differentials"][0]["entries"].as_array_mut().unwrap();
    entries[2] = Value::from(1 - entries[2].as_u64().unwrap());
    if entries[2] == 0 {
        entries.drain(0..3);
    }
    let f = write(tmp.path(), "corrupt.json", &v.to_string());
    let o = run(&["verify", &f], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("verdict: FAIL"), "{out}");
    assert!(out.contains("first violation: degree 1:"), "{out}");
}

#[test]
fn verify_reports_euler_characteristic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = read_json(&data(""), "trivial_c2_res.json");
    for key in ["terms", "differentials", "tags"] {
        v[key].as_array_mut().unwrap().pop();
    }
    v.as_object_mut().unwrap().remove("meta");
    let f = write(tmp.path(), "short.json", &v.to_string());
    let o = run(&["verify", &f], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("euler characteristic: 0"), "{out}");
    assert!(out.contains("euler characteristic 0 != dim target 1"), "{out}");
}

#[test]
fn verify_detects_stale_digest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = read_json(&data(""), "trivial_c2_res.json");
    v["meta"]["digest"] = Value::from("0".repeat(64));
    let f = write(tmp.path(), "stale.json", &v.to_string());
    let o = run(&["verify", &f], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("digest"), "{}", stdout(&o));
}

#[test]
fn omega_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let k3 = write(tmp.path(), "k3.json", r#"{"dim":1,"generators":[[[1]]],"p":3,"rank":1}"#);
    let o = run(&["omega", &k3, "--n", "1", "--out", "o.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dim 2"), "{}", stdout(&o));
    assert_eq!(read_json(tmp.path(), "o.json")["dim"], 2);

    let free = write(tmp.path(), "free.json", r#"{"dim":2,"generators":[[[0,1],[1,0]]],"p":2,"rank":1}"#);
    let o = run(&["omega", &free], tmp.path());
    assert_eq!(serde_json::from_str::<Value>(&stdout(&o)).unwrap()["dim"], 0);
    assert!(stderr(&o).contains("dim 0, free rank 0"), "{}", stderr(&o));

    let k2 = data("trivial_c2.json");
    let k2 = k2.to_str().unwrap();
    let o = run(&["omega", k2, "--n", "2", "--compare", k2], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let report = stderr(&o);
    assert!(report.contains("dim 1") && report.contains("iso probe: Iso"), "{report}");
}

#[test]
fn tensor_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let free = write(dir, "free.json", r#"{"p":2,"parts":[[]],"rank":2}"#);
    let o = run(&["tensor", &free, &free, "--out", "ff.json"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_json(dir, "ff.json")["parts"].as_array().unwrap().len(), 4);

    let h1 = write(dir, "h1.json", r#"{"p":2,"parts":[[[0,1]]],"rank":2}"#);
    let h2 = write(dir, "h2.json", r#"{"p":2,"parts":[[[1,0]]],"rank":2}"#);
    run(&["tensor", &h1, &h2, "--out", "h12.json"], dir);
    assert_eq!(read_json(dir, "h12.json")["parts"], serde_json::json!([[]]));

    run(&["tensor", &h1, &h1, "--out", "h11.json"], dir);
    assert_eq!(read_json(dir, "h11.json")["parts"], serde_json::json!([[[0, 1]], [[0, 1]]]));
}

#[test]
fn random_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    for name in ["a.json", "b.json"] {
        let o = run(&["random", "--p", "2", "--r", "1", "--dim", "2", "--seed", "7", "--out", name], dir);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(dir.join("a.json")).unwrap(), std::fs::read(dir.join("b.json")).unwrap());
    let o = run(&["random", "--p", "3", "--r", "2", "--dim", "5", "--seed", "1"], dir);
    let committed = std::fs::read_to_string(data("random_3_2_5.json")).unwrap();
    assert_eq!(stdout(&o), committed);
}

#[test]
fn trim_removes_free_summand() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // The trivial module plus a free summand, over C_2.
    let m = write(dir, "m.json", r#"{"dim":3,"generators":[[[1,0,0],[0,0,1],[0,1,0]]],"p":2,"rank":1}"#);
    assert_eq!(run(&["build", &m, "--m", "1", "--out", "res.json"], dir).status.code(), Some(0));
    let o = run(&["trim", "res.json", "--out", "trimmed.json"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["verify", "trimmed.json"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(read_json(dir, "trimmed.json")["augmentation"]["target"]["dim"], 1);
}

#[test]
fn golden_info_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (input, expected) in [
        ("random_3_2_5.json", "info_module.txt"),
        ("desc.json", "info_descriptor.txt"),
        ("trivial_c2_res.json", "info_complex.txt"),
    ] {
        let o = run(&["info", data(input).to_str().unwrap()], tmp.path());
        assert_eq!(o.status.code(), Some(0));
        let want = std::fs::read_to_string(golden.join(expected)).unwrap();
        assert_eq!(stdout(&o), want, "{input}");
    }
}
