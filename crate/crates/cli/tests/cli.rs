use std::path::Path;
use std::process::{Command, Output};

use cloth_grasp::classifier::ClassificationResult;
use cloth_grasp::corpus::{Corpus, Diagnostic, GRASP_INSTANCES_FILE};
use cloth_grasp::planner::{FeasibilityEntry, Plan};
use cloth_grasp::stats::{CoverageReport, TallyReport};
use cloth_grasp::{GraspState, PrimitiveType};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clothgrasp")).args(args).env_remove("GRASP_CORPUS_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_corpus(dir: &Path) {
    for d in Corpus::reference_documents() {
        std::fs::write(dir.join(&d.name), d.content).unwrap();
    }
}

#[test]
fn parse_echoes_canonical_form() {
    let o = run(&["parse", "2PP + Πe"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("2PP+Pie"));
    assert!(text.contains("environment"));
}

#[test]
fn print_is_canonical() {
    let o = run(&["print", "Π_e+ 2 PP"]);
    assert_eq!(stdout(&o), "2PP+Pie\n");
}

#[test]
fn classify_grasp_from_table() {
    let o = run(&["classify", "--pre", "Pie", "--post", "2PP+Pie"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "G");
    let o = run(&["classify", "--pre", "PP+Pie", "--post", "PP", "--explain"]);
    assert!(stdout(&o).contains("removed extrinsic Pie"));
}

#[test]
fn classify_flags() {
    let o = run(&["classify", "--pre", "PP", "--post", "PP", "--sliding"]);
    assert_eq!(stdout(&o).trim(), "S");
    let o = run(&["classify", "--pre", "2PP", "--post", "2PP", "--point-changed"]);
    assert_eq!(stdout(&o).trim(), "RG");
    let o = run(&["classify", "--pre", "2PP", "--post", "2PP"]);
    assert_eq!(stdout(&o).trim(), "GM");
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let o = run(&["classify", "--pre", "PP", "--post", "2PP", "--sliding"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn primitive_totals_line() {
    let o = run(&["stats", "--report", "primitives"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "Ex=10 G=13 R=12 RG=12 GM=11 S=4 total=62"));
}

#[test]
fn bad_grasp_is_a_diagnostic() {
    let o = run(&["parse", "PPX"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset 2"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--pre", "PP"]).status.code(), Some(2));
    assert_eq!(run(&["stats", "--report", "nothing"]).status.code(), Some(2));
    let o = run(&["plan", "--start", "Pie", "--goal", "PP", "--gripper", "H1=zz"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = run(&["plan", "--start", "Pie", "--goal", "PP", "--gripper", "u", "--weights", "Ex=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--max-vfs", "0"]).status.code(), Some(2));
}

#[test]
fn validate_reference_corpus() {
    let o = run(&["validate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 errors"));
    let o = run(&["--format", "json", "validate", "--task", "10"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let d: Vec<Diagnostic> = serde_json::from_value(v["diagnostics"].clone()).unwrap();
    assert_eq!(d.len(), 1);
}

#[test]
fn corpus_directory_and_environment_fallback() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let path = dir.path().to_str().unwrap();
    assert_eq!(run(&["--corpus", path, "validate"]).status.code(), Some(0));

    // a capability violation makes validation fail
    let file = dir.path().join(GRASP_INSTANCES_FILE);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let rec = v.as_array_mut().unwrap().iter_mut().find(|r| r["gripper_id"] == "b").unwrap();
    rec["grasp"] = "LL".into();
    std::fs::write(&file, serde_json::to_string(&v).unwrap()).unwrap();
    let o =
        Command::new(env!("CARGO_BIN_EXE_clothgrasp")).arg("validate").env("GRASP_CORPUS_DIR", path).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("capability"));

    std::fs::write(&file, "[{\"citation\": ").unwrap();
    let o = run(&["--corpus", path, "stats", "--report", "grasps"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(GRASP_INSTANCES_FILE));
}

#[test]
fn plan_in_task_style() {
    let o = run(&["plan", "--start", "Pie", "--goal", "2PP+Pie", "--gripper", "H1=d,H2=d", "--env", "table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("1) (Both) (G) Pie -> 2PP+Pie\n"), "{text}");
    assert!(text.contains("cost: 1"));
    let o = run(&["plan", "--start", "Pie", "--goal", "Pe", "--gripper", "d"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_outputs_reparse_as_library_types() {
    let j = |args: &[&str]| -> Vec<u8> {
        let mut full = vec!["--format", "json"];
        full.extend_from_slice(args);
        let o = run(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let v: Value = serde_json::from_slice(&j(&["parse", "sh 2PPie"])).unwrap();
    let _: GraspState = serde_json::from_value(v["canonical"].clone()).unwrap();
    let _: GraspState = serde_json::from_slice(&j(&["print", "PP"])).unwrap();
    let r: ClassificationResult = serde_json::from_slice(&j(&["classify", "--pre", "PP", "--post", "PP+Pie"])).unwrap();
    assert_eq!(r.primitive, PrimitiveType::Ex);
    let p: Plan = serde_json::from_slice(&j(&["plan", "--start", "Pie", "--goal", "PP", "--gripper", "u"])).unwrap();
    assert_eq!(p.cost, 2.0);
    let t: TallyReport = serde_json::from_slice(&j(&["stats", "--report", "grasps"])).unwrap();
    assert_eq!(t.total, 63);
    let v: Value = serde_json::from_slice(&j(&["stats", "--report", "tasks"])).unwrap();
    let by_task: TallyReport = serde_json::from_value(v["by_task"].clone()).unwrap();
    assert_eq!(by_task.get("2"), 8);
    let v: Value = serde_json::from_slice(&j(&["stats", "--report", "primitives"])).unwrap();
    let by_type: TallyReport = serde_json::from_value(v["by_type"].clone()).unwrap();
    assert_eq!(by_type.total, 62);
    let c: CoverageReport =
        serde_json::from_slice(&j(&["stats", "--report", "coverage", "--max-vfs", "2", "--max-units", "2"])).unwrap();
    assert_eq!(c.used.len() + c.unused.len(), c.enumerated);
    let e: Vec<GraspState> =
        serde_json::from_slice(&j(&["enumerate", "--max-vfs", "1", "--max-units", "1", "--hands", "1"])).unwrap();
    assert_eq!(e.iter().map(|s| s.to_string()).collect::<Vec<_>>(), ["Le", "Pe", "Pie"]);
    let f: Vec<FeasibilityEntry> = serde_json::from_slice(&j(&["feasible", "--task", "3a"])).unwrap();
    assert_eq!(f.len(), 22);
    let feasible: Vec<&str> = f.iter().filter(|e| e.result.feasible).map(|e| e.gripper_id.as_str()).collect();
    assert_eq!(feasible, ["m", "o", "p"]);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["enumerate", "--max-vfs", "2", "--max-units", "2"][..],
        &["plan", "--start", "Pie", "--goal", "PP", "--gripper", "H1=u,H2=v"][..],
        &["feasible"][..],
        &["--sequential", "feasible"][..],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
    assert_eq!(run(&["feasible"]).stdout, run(&["--sequential", "feasible"]).stdout);
}
