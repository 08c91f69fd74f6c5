use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

struct Lab {
    dir: TempDir,
}

impl Lab {
    fn new() -> Lab {
        Lab { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pseudoarc-lab"));
        cmd.current_dir(self.dir.path())
            .env_remove("PSEUDOARC_LAB_WORKSPACE")
            .env_remove("PSEUDOARC_LAB_MAX_VERTICES")
            .args(args);
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, &[])
    }

    /// Runs a command expected to succeed and returns its stdout.
    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn generation_is_deterministic() {
    let (a, b) = (Lab::new(), Lab::new());
    for lab in [&a, &b] {
        lab.ok(&["gen", "tower", "--depth", "3", "--root", "1", "--seed", "7", "-o", "t.json"]);
        lab.ok(&["gen", "tangled", "--target", "3", "--seed", "2", "-o", "r.json"]);
        lab.ok(&["gen", "digraph", "--path", "2", "--seed", "1", "-o", "d.json"]);
    }
    for f in ["t.json", "r.json", "d.json"] {
        assert_eq!(read(&a.path(f)), read(&b.path(f)), "{f}");
    }
    let h1 = a.ok(&["gen", "tower", "--depth", "2", "--seed", "3"]);
    let h2 = a.ok(&["gen", "tower", "--depth", "2", "--seed", "3"]);
    assert_eq!(h1, h2);
    assert_eq!(h1.trim().len(), 64);
}

#[test]
fn root_zero_is_a_usage_error() {
    let lab = Lab::new();
    let out = lab.run(&["gen", "tower", "--depth", "2", "--root", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("𝖾(ℙ_0) ≥ 1"), "{}", stderr(&out));
}

#[test]
fn generated_objects_pass_their_checks() {
    let lab = Lab::new();
    lab.ok(&["gen", "tangled", "--target", "2", "--seed", "1", "-o", "r.json"]);
    assert_eq!(lab.ok(&["check", "tangled", "r.json"]).trim(), r#"{"tangled":true}"#);
    let report: serde_json::Value = serde_json::from_str(&lab.ok(&["check", "morphism", "r.json"])).unwrap();
    assert_eq!(report["co_bijective"], true);
    assert_eq!(report["edge_witnessing"], true);
    lab.ok(&["gen", "digraph", "--path", "2", "--seed", "1", "-o", "d.json"]);
    let report = lab.ok(&["check", "digraph", "d.json"]);
    assert!(report.contains(r#""strict":true"#));
    lab.ok(&["gen", "tower", "--depth", "2", "-o", "t.json"]);
    assert!(lab.ok(&["check", "tower", "t.json"]).contains(r#""tangled":true"#));
}

#[test]
fn failed_checks_exit_three() {
    let lab = Lab::new();
    lab.write("id.json", r#"{"dom":{"path":2},"cod":{"path":2},"pairs":[[0,0],[1,1],[2,2]]}"#);
    let out = lab.run(&["check", "tangled", "id.json"]);
    assert_eq!(code(&out), 3);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"tangled":false}"#);
    // morphism passes, tangledness does not
    assert_eq!(code(&lab.run(&["check", "morphism", "id.json"])), 0);
    let out = lab.run(&["construct", "end-move", "id.json", "--vertex", "0"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn parse_and_usage_errors_exit_one() {
    let lab = Lab::new();
    lab.write("bad.json", "{\"pairs\": 3}");
    assert_eq!(code(&lab.run(&["check", "morphism", "bad.json"])), 1);
    assert_eq!(code(&lab.run(&["check", "morphism", "missing.json"])), 1);
    assert_eq!(code(&lab.run(&["frobnicate"])), 1);
    lab.ok(&["gen", "digraph", "--path", "1", "-o", "d.json"]);
    assert_eq!(code(&lab.run(&["check", "tangled", "d.json"])), 1);
    assert_eq!(code(&lab.run(&["export", "svg", "d.json"])), 1);
    assert_eq!(code(&lab.run(&["--help"])), 0);
}

#[test]
fn resource_limits_exit_two() {
    let lab = Lab::new();
    let out = lab.run_env(
        &["gen", "tower", "--depth", "3"],
        &[("PSEUDOARC_LAB_MAX_VERTICES", "100")],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("size limit"));
    let out = lab.run(&["gen", "tower", "--depth", "4"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("level 4"));
}

#[test]
fn back_and_forth_certificate_rechecks() {
    let lab = Lab::new();
    lab.ok(&["gen", "tower", "--depth", "3", "--seed", "7", "-o", "p.json"]);
    lab.ok(&["gen", "tower", "--depth", "3", "--seed", "8", "-o", "q.json"]);
    let hash = lab.ok(&["construct", "back-and-forth", "p.json", "q.json", "--rounds", "1", "-o", "c.json"]);
    // towers resolved from the store by hash, or given explicitly
    let report = lab.ok(&["check", "certificate", "c.json"]);
    assert!(report.contains(r#""forward_subequality":true"#));
    lab.ok(&["check", "certificate", "c.json", "p.json", "q.json"]);
    assert_eq!(code(&lab.run(&["check", "certificate", "c.json", "q.json", "p.json"])), 3);
    // stored objects can be named by a hash prefix
    lab.ok(&["check", "certificate", &hash.trim()[..10]]);
    // a round the towers cannot support
    let out = lab.run(&["construct", "back-and-forth", "p.json", "q.json", "--rounds", "2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("partial certificate"));
}

#[test]
fn constructions_store_checked_objects() {
    let lab = Lab::new();
    lab.ok(&["gen", "tangled", "--target", "2", "--seed", "1", "-o", "t.json"]);
    lab.ok(&["construct", "end-move", "t.json", "--vertex", "3", "-o", "em.json"]);
    lab.ok(&["check", "end-move", "em.json"]);

    lab.write("f.json", r#"{"dom":{"path":4},"cod":{"path":2},"pairs":[[0,0],[1,1],[2,2],[1,3],[2,4]]}"#);
    assert_eq!(lab.ok(&["classify", "f.json"]).trim(), r#"{"tag":"ImproperSnake","turning":2}"#);
    lab.ok(&["construct", "decompose", "f.json", "-o", "dec.json"]);
    let dec: serde_json::Value = serde_json::from_str(&read(&lab.path("dec.json"))).unwrap();
    let tags: Vec<&str> = dec["factors"].as_array().unwrap().iter().map(|f| f["tag"].as_str().unwrap()).collect();
    assert!(tags.iter().all(|t| ["Simple", "Hook", "ProperSnake"].contains(t)), "{tags:?}");
    lab.ok(&["check", "decomposition", "dec.json"]);

    lab.write("s.json", r#"{"dom":{"path":3},"cod":{"path":2},"pairs":[[0,0],[1,1],[1,2],[2,3]]}"#);
    lab.ok(&["construct", "subfactor", "--kind", "simple", "s.json", "t.json", "-o", "sf.json"]);
    lab.ok(&["check", "subfactor", "sf.json"]);
    assert_eq!(code(&lab.run(&["construct", "subfactor", "--kind", "snake", "s.json", "t.json"])), 3);

    lab.ok(&["gen", "tower", "--depth", "3", "-o", "tw.json"]);
    lab.ok(&["construct", "subabsorb", "tw.json", "s.json", "--level", "1", "-o", "ab.json"]);
    lab.ok(&["check", "subabsorb", "ab.json"]);

    lab.ok(&["gen", "digraph", "--path", "2", "--seed", "1", "-o", "a.json"]);
    lab.ok(&["gen", "digraph", "--path", "1", "--seed", "3", "-o", "b.json"]);
    lab.ok(&["construct", "join", "a.json", "b.json", "-o", "j.json"]);
    assert!(lab.ok(&["check", "join", "j.json"]).contains(r#""length":5"#));
    let h = lab.ok(&["construct", "strictify", "a.json"]);
    assert!(lab.ok(&["check", "digraph", h.trim()]).contains(r#""strict":true"#));
}

#[test]
fn improper_simple_over_two_steps() {
    let lab = Lab::new();
    lab.ok(&["gen", "tangled", "--target", "1", "-o", "a.json"]);
    lab.ok(&["gen", "tangled", "--target", "2", "--seed", "2", "-o", "b.json"]);
    lab.write("s.json", r#"{"dom":{"path":2},"cod":{"path":1},"pairs":[[0,0],[0,1],[1,2]]}"#);
    lab.ok(&["construct", "subfactor", "--kind", "improper-simple", "s.json", "a.json", "--inner", "b.json", "-o", "m.json"]);
    lab.ok(&["check", "object", "m.json"]);
}

#[test]
fn export_formats() {
    let lab = Lab::new();
    lab.ok(&["gen", "tower", "--depth", "2", "-o", "t.json"]);
    let dot = lab.ok(&["export", "dot", "t.json"]);
    assert!(dot.starts_with("digraph \"tower\"") && dot.contains("level_2"));
    let json = lab.ok(&["export", "json", "t.json"]);
    assert_eq!(json, read(&lab.path("t.json")));
    lab.write("r.json", r#"{"dom":{"path":1},"cod":{"path":1},"pairs":[[0,0],[1,1]]}"#);
    assert!(lab.ok(&["export", "dot", "r.json"]).contains("d1 -> c1;"));
    // a bare relation comes back tagged, and re-imports to the same object
    lab.write("r2.json", &lab.ok(&["export", "json", "r.json"]));
    assert_eq!(lab.ok(&["export", "json", "r2.json"]), read(&lab.path("r2.json")));
}

#[test]
fn run_log_records_commands() {
    let lab = Lab::new();
    let hash = lab.ok(&["gen", "digraph", "--path", "1"]);
    let _ = lab.run(&["gen", "tower", "--depth", "1", "--root", "0"]);
    let log = read(&lab.path(".pseudoarc-lab/runs.jsonl"));
    let lines: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["outputs"][0], hash.trim());
    assert_eq!(lines[1]["exit"], 1);
    let stored = lab.path(&format!(".pseudoarc-lab/objects/{}.json", hash.trim()));
    assert!(stored.is_file());
}

fn schema(kind: &str) -> serde_json::Value {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas");
    serde_json::from_str(&read(&dir.join(format!("{kind}.json")))).unwrap()
}

fn keys(v: &serde_json::Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn published_schemas_match_emitted_objects() {
    for kind in [
        "graph", "relation", "tower", "tangled_tower", "certificate", "digraph", "partition", "join",
        "decomposition", "end_move", "subfactor", "absorption",
    ] {
        let s = schema(kind);
        assert_eq!(s["properties"]["kind"]["const"], kind);
        assert_eq!(keys(&s["properties"]), {
            let mut r: Vec<String> = s["required"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
            r.sort();
            r
        });
    }
    let lab = Lab::new();
    lab.ok(&["gen", "tower", "--depth", "3", "-o", "p.json"]);
    lab.ok(&["gen", "tangled", "--target", "2", "-o", "t.json"]);
    lab.ok(&["gen", "digraph", "--path", "1", "-o", "d.json"]);
    lab.ok(&["construct", "back-and-forth", "p.json", "p.json", "-o", "c.json"]);
    lab.ok(&["construct", "end-move", "t.json", "--vertex", "0", "-o", "e.json"]);
    lab.ok(&["construct", "join", "d.json", "d.json", "-o", "j.json"]);
    lab.write("s.json", r#"{"dom":{"path":3},"cod":{"path":2},"pairs":[[0,0],[1,1],[1,2],[2,3]]}"#);
    lab.ok(&["construct", "subabsorb", "p.json", "s.json", "--level", "1", "-o", "a.json"]);
    for (file, kind) in [
        ("p.json", "tangled_tower"),
        ("t.json", "relation"),
        ("d.json", "digraph"),
        ("c.json", "certificate"),
        ("e.json", "end_move"),
        ("j.json", "join"),
        ("a.json", "absorption"),
    ] {
        let v: serde_json::Value = serde_json::from_str(&read(&lab.path(file))).unwrap();
        assert_eq!(v["kind"], kind);
        assert_eq!(keys(&v), keys(&schema(kind)["properties"]), "{kind}");
    }
}
