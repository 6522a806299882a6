use std::io::Write;
use std::process::{Command, Stdio};

use pohammer_core::normalize::to_nnf;
use pohammer_core::reductions::{build_phi_star, Variant};
use pohammer_core::text::{infer_signature, parse_formula, parse_structure, serialize_formula, serialize_structure};
use pohammer_core::transforms::{csp_hammer, HammerOptions};
use pohammer_core::Formula;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

fn data(name: &str) -> String {
    format!("{DATA}/{name}")
}

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_with(args: &[&str], stdin: Option<&str>) -> Out {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pohammer"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    }
    let out = child.wait_with_output().unwrap();
    Out {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Out {
    run_with(args, None)
}

fn formula_file(name: &str) -> Formula {
    let text = std::fs::read_to_string(data(name)).unwrap();
    parse_formula(&text, &infer_signature(&text).unwrap()).unwrap()
}

#[test]
fn mc_exit_codes_follow_the_truth_value() {
    let yes = run(&["mc", "--structure", &data("cycle3.st"), "--formula", &data("cycle.sof")]);
    assert_eq!((yes.code, yes.stdout.as_str()), (0, "true\n"));
    let no = run(&["mc", "--structure", &data("path3.st"), "--formula", &data("cycle.sof")]);
    assert_eq!((no.code, no.stdout.as_str()), (1, "false\n"));
}

#[test]
fn copy_sentence_classes() {
    for (class, code) in [("forall-restricted", 0), ("negative", 0), ("positive", 1), ("exists-guarded", 1)] {
        let out = run(&["classify", "--class", class, &data("copy.sof")]);
        assert_eq!(out.code, code, "{class}: {}", out.stdout);
    }
    let bad = run(&["classify", "--class", "monotone", &data("copy.sof")]);
    assert_eq!(bad.code, 2);
}

#[test]
fn hammered_copy_sentence_is_closed_under_unions() {
    let dir = tempfile::tempdir().unwrap();
    let hammered = dir.path().join("hammered.sof");
    let out = run(&["transform", "--kind", "hammer", &data("copy.sof")]);
    assert_eq!(out.code, 0);
    std::fs::write(&hammered, &out.stdout).unwrap();
    let out = run(&["verify-closure", "--kind", "disjoint-unions", "--max-size", "2", hammered.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.contains("no counterexample up to bound"));
}

#[test]
fn copy_sentence_counterexample_for_inverse_surjective_homs() {
    let out = run(&[
        "verify-closure",
        "--kind",
        "inverse-surjective-homs",
        "--max-size",
        "3",
        &data("copy.sof"),
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("counterexample"));
    let json = run(&[
        "verify-closure",
        "--kind",
        "inverse-injective-homs",
        "--max-size",
        "3",
        "--json",
        &data("copy.sof"),
    ]);
    assert_eq!(json.code, 0);
    let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(v["verdict"], "no_counterexample_up_to_bound");
    assert_eq!(v["report"]["structures_examined"], 531);
}

#[test]
fn outputs_match_library_serialization() {
    let g = run(&["parse", &data("g.st")]);
    let text = std::fs::read_to_string(data("g.st")).unwrap();
    assert_eq!(g.stdout, serialize_structure(&parse_structure(&text).unwrap()));

    let copy = formula_file("copy.sof");
    let nnf = run(&["normalize", "--nnf", &data("copy.sof")]);
    assert_eq!(nnf.stdout, format!("{}\n", serialize_formula(&to_nnf(&copy))));

    let hammer = run(&["transform", "--kind", "hammer", &data("copy.sof")]);
    let expected = csp_hammer(&copy, HammerOptions::default(), &[]).unwrap();
    assert_eq!(hammer.stdout, format!("{}\n", serialize_formula(&expected.formula)));

    let phi = run(&["build-phistar", "--n", "1"]);
    let kit = build_phi_star(1, Variant::Repaired).unwrap();
    assert_eq!(phi.stdout, format!("{}\n", serialize_formula(&kit.phi_star)));
}

#[test]
fn stdin_input() {
    let text = std::fs::read_to_string(data("k2.st")).unwrap();
    let out = run_with(&["parse", "--as", "structure", "-"], Some(&text));
    assert_eq!((out.code, out.stdout.as_str()), (0, text.as_str()));
}

#[test]
fn parse_errors_carry_a_span() {
    let out = run(&["normalize", "--nnf", &data("bad.sof")]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("bad.sof:2:"), "{}", out.stderr);
    let json = run(&["normalize", "--nnf", "--json", &data("bad.sof")]);
    let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["span"]["line"], 2);
    assert_eq!(v["exit_code"], 2);
}

#[test]
fn budget_exhaustion_exits_3() {
    let out = run(&["mc", "--budget", "5", "--structure", &data("g.st"), "--formula", &data("copy.sof")]);
    assert_eq!(out.code, 3, "{}", out.stderr);
    let json = run(&["mc", "--budget", "5", "--json", "--structure", &data("g.st"), "--formula", &data("copy.sof")]);
    let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "budget");
}

#[test]
fn solvers() {
    assert_eq!(run(&["solve-qbf3", &data("yes.qdimacs")]).code, 0);
    assert_eq!(run(&["solve-qbf3", &data("no.qdimacs")]).code, 1);
    let t = data("template.st");
    assert_eq!(run(&["solve-qcsp", "--template", &t, &data("forall_exists.qcsp")]).code, 0);
    assert_eq!(run(&["solve-qcsp", "--template", &t, &data("forall_forall.qcsp")]).code, 1);
}

#[test]
fn pipelines() {
    let yes = run(&["pipeline", "--qbf3", &data("yes.qdimacs")]);
    assert_eq!(yes.code, 0);
    assert_eq!(yes.stdout, "direct true\nvia_phi_star true\nvia_hammer false\nconsistent\n");
    let no = run(&["pipeline", "--qbf3", &data("no.qdimacs"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&no.stdout).unwrap();
    assert_eq!(v["direct"], false);
    assert_eq!(v["via_phi_star"]["value"], false);
    assert_eq!(v["via_hammer"]["value"], true);
    // The literal construction accepts the false instance.
    assert_eq!(run(&["pipeline", "--qbf3", &data("no.qdimacs"), "--verbatim"]).code, 1);
    let t = data("template.st");
    for inst in ["forall_exists.qcsp", "forall_forall.qcsp"] {
        let out = run(&["pipeline", "--qcsp", &data(inst), "--template", &t]);
        assert_eq!(out.code, 0, "{inst}: {}", out.stdout);
    }
}

#[test]
fn kits_and_encodings() {
    let dir = tempfile::tempdir().unwrap();
    let kit = dir.path().join("kit");
    let out = run(&[
        "build-phib",
        "--template",
        &data("template.st"),
        "--prefix",
        "AE",
        "--out",
        kit.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    for f in ["phi_B.sof", "hammered.sof", "template.st", "signature.txt"] {
        assert!(kit.join(f).exists(), "{f}");
    }
    let hammered = kit.join("hammered.sof");
    let reparsed = run(&["parse", hammered.to_str().unwrap()]);
    assert_eq!(reparsed.stdout, std::fs::read_to_string(&hammered).unwrap());

    let enc = run(&["encode", "--qbf3", &data("yes.qdimacs")]);
    assert_eq!(enc.code, 0);
    assert!(enc.stdout.starts_with("signature R/2 Rbar/2 Succ/2 S/1 T/1 E1/1 A1/1\ndomain 4\n"));
    let enc = run(&["encode", "--qcsp", &data("forall_exists.qcsp"), "--template", &data("template.st")]);
    assert_eq!(enc.stdout, "signature R/2 A1/1 E2/1\ndomain 2\nR: (0,1)\nA1: (0)\nE2: (1)\n");
}

#[test]
fn sampling_needs_a_seed_and_is_reproducible() {
    assert_eq!(run(&["sample", "--what", "sentence"]).code, 2);
    let a = run(&["sample", "--what", "qbf3", "--count", "3", "--seed", "4"]);
    let b = run(&["sample", "--what", "qbf3", "--count", "3", "--seed", "4"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn jobs_do_not_change_output() {
    let args = ["verify-closure", "--kind", "inverse-surjective-homs", "--max-size", "3", &data("copy.sof")];
    let one = run(&args);
    let mut more = args.to_vec();
    more.extend(["--jobs", "3"]);
    assert_eq!(one.stdout, run(&more).stdout);
    let mc = ["mc", "--structure", &data("g.st"), "--formula", &data("copy.sof"), "--json"];
    let mut mc_more = mc.to_vec();
    mc_more.extend(["--jobs", "2"]);
    let (a, b) = (run(&mc), run(&mc_more));
    let (a, b): (serde_json::Value, serde_json::Value) =
        (serde_json::from_str(&a.stdout).unwrap(), serde_json::from_str(&b.stdout).unwrap());
    assert_eq!(a["value"], b["value"]);
}
