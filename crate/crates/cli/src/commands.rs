use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use pohammer_core::classes::{classify, Class};
use pohammer_core::hom::{check_closure, enumerate_structures, ClosureKind, EnumMode, Family, HomError, Verdict};
use pohammer_core::model_check::{solve_qbf3, solve_qcsp, Checker, McConfig, McError, Qbf3Instance};
use pohammer_core::normalize::{clause_form, dual_negate, to_nnf, to_prenex, ClauseMode, NormalizeError};
use pohammer_core::reductions::{
    build_phi_b, build_phi_star, encode_qbf3_instance, encode_qcsp_instance, Leg, Qbf3PipelineRunner,
    QcspPipelineRunner, ReductionError, Variant,
};
use pohammer_core::suite;
use pohammer_core::text::{
    infer_signature, parse_formula, parse_qcsp, parse_qdimacs3, parse_structure, serialize_formula, serialize_qcsp,
    serialize_qdimacs3, serialize_structure, ParseError,
};
use pohammer_core::transforms::{csp_hammer, restrict, shom_transform, sup_transform, HammerOptions, RestrictTarget, TransformError};
use pohammer_core::{FiniteStructure, Formula, Prefix, Signature};

use crate::{Cli, Command, InputKind, SampleKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{error}")]
    Parse { path: String, error: ParseError },
    #[error("model-checking budget exhausted after {0} nodes")]
    Budget(u64),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Failed(String),
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::BudgetExhausted { nodes } => CliError::Budget(nodes),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<NormalizeError> for CliError {
    fn from(e: NormalizeError) -> Self {
        match e {
            NormalizeError::BlowUp { .. } => CliError::Cap(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Indeterminate(_) => CliError::Cap(e.to_string()),
            TransformError::NotCnf(n) => n.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<HomError> for CliError {
    fn from(e: HomError) -> Self {
        match e {
            HomError::Mc(m) => m.into(),
            HomError::CeilingExceeded { .. } => CliError::Cap(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Mc(m) => m.into(),
            ReductionError::Transform(t) => t.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

/// What a subcommand prints: text, the JSON mirror, and the exit code.
pub struct Report {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

impl Report {
    fn new(command: &str, text: String, mut fields: Value, code: u8) -> Self {
        fields["command"] = json!(command);
        fields["exit_code"] = json!(code);
        Report { text, json: fields, code }
    }

    pub fn from_error(command: &str, e: &CliError) -> Self {
        let (kind, span) = match e {
            CliError::Usage(_) => ("usage", None),
            CliError::Io { .. } => ("io", None),
            CliError::Parse { error, .. } => ("parse", Some(json!({"line": error.span.line, "column": error.span.column}))),
            CliError::Budget(_) => ("budget", None),
            CliError::Cap(_) => ("size_cap", None),
            CliError::Failed(_) => ("failed", None),
        };
        let code = crate::exit_code(e);
        let mut err = json!({"kind": kind, "message": e.to_string()});
        if let Some(span) = span {
            err["span"] = span;
        }
        if let CliError::Budget(nodes) = e {
            err["nodes"] = json!(nodes);
        }
        Report::new(command, String::new(), json!({ "error": err }), code)
    }
}

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Parse { .. } => "parse",
        Command::Normalize { .. } => "normalize",
        Command::Classify { .. } => "classify",
        Command::Transform { .. } => "transform",
        Command::Mc { .. } => "mc",
        Command::SolveQcsp { .. } => "solve-qcsp",
        Command::SolveQbf3 { .. } => "solve-qbf3",
        Command::BuildPhib { .. } => "build-phib",
        Command::BuildPhistar { .. } => "build-phistar",
        Command::Encode { .. } => "encode",
        Command::Pipeline { .. } => "pipeline",
        Command::VerifyClosure { .. } => "verify-closure",
        Command::Sample { .. } => "sample",
    }
}

fn read(path: &str) -> Result<String, CliError> {
    let io = |source| CliError::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn parsed<T>(path: &str, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|error| CliError::Parse {
        path: path.to_string(),
        error,
    })
}

fn load_structure(path: &str) -> Result<FiniteStructure, CliError> {
    parsed(path, parse_structure(&read(path)?))
}

/// A sentence file, over the symbols it mentions (or `sig` when given).
fn load_formula(path: &str, sig: Option<&Signature>) -> Result<Formula, CliError> {
    let text = read(path)?;
    let sig = match sig {
        Some(s) => s.clone(),
        None => parsed(path, infer_signature(&text))?,
    };
    parsed(path, parse_formula(&text, &sig))
}

fn load_qbf3(path: &str) -> Result<Qbf3Instance, CliError> {
    parsed(path, parse_qdimacs3(&read(path)?))
}

fn verdict(value: bool) -> (&'static str, u8) {
    if value {
        ("true", 0)
    } else {
        ("false", 1)
    }
}

fn leg_json(leg: Leg) -> Value {
    match leg {
        Leg::Value(v) => json!({ "value": v }),
        Leg::Exhausted { nodes } => json!({ "exhausted": { "nodes": nodes } }),
    }
}

fn leg_text(leg: Leg) -> String {
    match leg {
        Leg::Value(v) => v.to_string(),
        Leg::Exhausted { nodes } => format!("exhausted after {nodes} nodes"),
    }
}

fn variant(verbatim: bool) -> Variant {
    if verbatim {
        Variant::Verbatim
    } else {
        Variant::Repaired
    }
}

fn guess_kind(path: &str) -> Option<InputKind> {
    match Path::new(path).extension()?.to_str()? {
        "st" => Some(InputKind::Structure),
        "sof" => Some(InputKind::Formula),
        "qcsp" => Some(InputKind::Qcsp),
        "qdimacs" | "cnf" => Some(InputKind::Qbf3),
        _ => None,
    }
}

fn sig_arg(s: &Option<String>) -> Result<Option<Signature>, CliError> {
    s.as_deref()
        .map(|s| s.parse::<Signature>().map_err(CliError::Usage))
        .transpose()
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    let cfg = McConfig {
        budget: g.budget,
        jobs: g.jobs.max(1),
    };
    let cmd = name(&cli.command);
    let formula_report = |f: &Formula, extra: Value| {
        let text = serialize_formula(f);
        let mut fields = extra;
        fields["formula"] = json!(text);
        Report::new(cmd, format!("{text}\n"), fields, 0)
    };
    match &cli.command {
        Command::Parse { file, kind, template } => {
            let kind = kind
                .or_else(|| guess_kind(file))
                .ok_or_else(|| CliError::Usage(format!("cannot tell the format of `{file}`; pass --as")))?;
            let (label, text) = match kind {
                InputKind::Structure => ("structure", serialize_structure(&load_structure(file)?)),
                InputKind::Formula => ("formula", format!("{}\n", serialize_formula(&load_formula(file, None)?))),
                InputKind::Qcsp => {
                    let t = template.as_deref().ok_or_else(|| CliError::Usage("QCSP parsing needs --template".into()))?;
                    let b = load_structure(t)?;
                    ("qcsp", serialize_qcsp(&parsed(file, parse_qcsp(&read(file)?, b.signature()))?))
                }
                InputKind::Qbf3 => ("qbf3", serialize_qdimacs3(&load_qbf3(file)?)),
            };
            Ok(Report::new(cmd, text.clone(), json!({"kind": label, "text": text}), 0))
        }
        Command::Normalize {
            file,
            nnf,
            prenex,
            cnf,
            dnf,
            dual,
        } => {
            let f = load_formula(file, None)?;
            let (mode, out) = if *nnf {
                ("nnf", to_nnf(&f))
            } else if *prenex {
                ("prenex", to_prenex(&f).formula)
            } else if *cnf {
                ("cnf", clause_form(&f, ClauseMode::Cnf, g.size_cap)?.to_formula())
            } else if *dnf {
                ("dnf", clause_form(&f, ClauseMode::Dnf, g.size_cap)?.to_formula())
            } else {
                debug_assert!(*dual);
                ("dual", dual_negate(&f)?)
            };
            Ok(formula_report(&out, json!({ "mode": mode })))
        }
        Command::Classify { file, class } => {
            let cls: Class = class.parse().map_err(CliError::Usage)?;
            let f = load_formula(file, None)?;
            let v = classify(&f, cls, g.size_cap).map_err(|e| CliError::Failed(e.to_string()))?;
            let (word, code) = if v.accepted {
                ("accepted", 0)
            } else if v.indeterminate {
                ("indeterminate", 3)
            } else {
                ("rejected", 1)
            };
            let mut text = format!("{cls}: {word}\n");
            if let Some(fc) = &v.failing_clause {
                let _ = writeln!(text, "failing clause: {}", fc.clause);
            }
            if let Some(note) = &v.note {
                let _ = writeln!(text, "note: {note}");
            }
            let fields = serde_json::to_value(&v).expect("serializable");
            Ok(Report::new(cmd, text, json!({ "verdict": word, "report": fields }), code))
        }
        Command::Transform { file, kind, force } => {
            let f = load_formula(file, None)?;
            if let Some(u) = kind.strip_prefix("restrict:") {
                let out = restrict(&f, &RestrictTarget::Symbol(u.to_string()))?;
                return Ok(formula_report(&out, json!({ "kind": "restrict", "symbol": u })));
            }
            match kind.as_str() {
                "sup" => Ok(formula_report(&sup_transform(&f)?, json!({ "kind": "sup" }))),
                "shom" => Ok(formula_report(&shom_transform(&f)?, json!({ "kind": "shom" }))),
                "hammer" => {
                    let opts = HammerOptions {
                        force: *force,
                        size_cap: g.size_cap,
                    };
                    let h = csp_hammer(&f, opts, &[])?;
                    Ok(formula_report(&h.formula, json!({ "kind": "hammer", "n_symbol": h.n_symbol })))
                }
                other => Err(CliError::Usage(format!("unknown transformation `{other}`"))),
            }
        }
        Command::Mc { structure, formula } => {
            let a = load_structure(structure)?;
            let f = load_formula(formula, Some(a.signature()))?;
            let ev = Checker::new(&f).map_err(McError::from)?.check(&a, &cfg)?;
            let (word, code) = verdict(ev.value);
            Ok(Report::new(cmd, format!("{word}\n"), json!({"value": ev.value, "nodes": ev.nodes}), code))
        }
        Command::SolveQcsp { file, template } => {
            let b = load_structure(template)?;
            let inst = parsed(file, parse_qcsp(&read(file)?, b.signature()))?;
            let value = solve_qcsp(&b, &inst)?;
            let (word, code) = verdict(value);
            Ok(Report::new(cmd, format!("{word}\n"), json!({ "value": value }), code))
        }
        Command::SolveQbf3 { file } => {
            let value = solve_qbf3(&load_qbf3(file)?);
            let (word, code) = verdict(value);
            Ok(Report::new(cmd, format!("{word}\n"), json!({ "value": value }), code))
        }
        Command::BuildPhib {
            template,
            prefix,
            verbatim,
            out,
        } => {
            let b = load_structure(template)?;
            let p = Prefix::parse(prefix).ok_or_else(|| CliError::Usage(format!("bad prefix `{prefix}`")))?;
            let kit = build_phi_b(&b, &p, variant(*verbatim))?;
            if let Some(dir) = out {
                kit.write_dir(Path::new(dir)).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
            }
            let fields = json!({
                "variant": kit.variant,
                "prefix": kit.prefix.to_string(),
                "markers": kit.markers,
                "relation_conjuncts": kit.relation_conjuncts,
                "hammered": serialize_formula(&kit.hammered.formula),
                "n_symbol": kit.hammered.n_symbol,
            });
            Ok(formula_report(&kit.phi_b, fields))
        }
        Command::BuildPhistar { n, verbatim, out } => {
            let kit = build_phi_star(*n, variant(*verbatim))?;
            if let Some(dir) = out {
                kit.write_dir(Path::new(dir)).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
            }
            let fields = json!({
                "variant": kit.variant,
                "n": kit.n,
                "dual_hammered": serialize_formula(&kit.dual_hammered.formula),
                "n_symbol": kit.dual_hammered.n_symbol,
            });
            Ok(formula_report(&kit.phi_star, fields))
        }
        Command::Encode { qcsp, qbf3, template } => {
            let a = if let Some(file) = qcsp {
                let b = load_structure(template.as_deref().expect("required by clap"))?;
                let inst = parsed(file, parse_qcsp(&read(file)?, b.signature()))?;
                let prefix = Prefix::new(inst.pattern()).ok_or_else(|| CliError::Usage("instance has no blocks".into()))?;
                let kit = build_phi_b(&b, &prefix, Variant::Repaired)?;
                encode_qcsp_instance(&inst, &kit)?
            } else {
                let file = qbf3.as_deref().expect("group is required");
                let inst = load_qbf3(file)?;
                encode_qbf3_instance(&inst, inst.blocks().len() / 2)?
            };
            let text = serialize_structure(&a);
            Ok(Report::new(cmd, text.clone(), json!({ "structure": text }), 0))
        }
        Command::Pipeline {
            qcsp,
            qbf3,
            template,
            verbatim,
        } => {
            let (direct, legs, agrees) = if let Some(file) = qcsp {
                let t = template.as_deref().ok_or_else(|| CliError::Usage("--qcsp needs --template".into()))?;
                let b = load_structure(t)?;
                let inst = parsed(file, parse_qcsp(&read(file)?, b.signature()))?;
                let prefix = Prefix::new(inst.pattern()).ok_or_else(|| CliError::Usage("instance has no blocks".into()))?;
                let kit = build_phi_b(&b, &prefix, variant(*verbatim))?;
                let p = QcspPipelineRunner::new(&kit)?.run(&inst, &cfg)?;
                (p.direct, [("via_phi_b", p.via_phi_b), ("via_hammer", p.via_hammer)], p.agrees())
            } else {
                let file = qbf3.as_deref().expect("group is required");
                let inst = load_qbf3(file)?;
                let kit = build_phi_star(inst.blocks().len() / 2, variant(*verbatim))?;
                let p = Qbf3PipelineRunner::new(&kit)?.run(&inst, &cfg)?;
                (p.direct, [("via_phi_star", p.via_phi_star), ("via_hammer", p.via_hammer)], p.contract_holds())
            };
            let exhausted = legs.iter().any(|(_, l)| l.value().is_none());
            let code = if exhausted {
                3
            } else if agrees {
                0
            } else {
                1
            };
            let mut text = format!("direct {direct}\n");
            let mut fields = json!({ "direct": direct, "consistent": agrees });
            for (label, leg) in legs {
                let _ = writeln!(text, "{label} {}", leg_text(leg));
                fields[label] = leg_json(leg);
            }
            let _ = writeln!(text, "{}", if agrees { "consistent" } else { "inconsistent" });
            Ok(Report::new(cmd, text, fields, code))
        }
        Command::VerifyClosure {
            file,
            kind,
            max_size,
            min_size,
            random,
            sig,
            dedup,
        } => {
            let kind: ClosureKind = kind.parse().map_err(CliError::Usage)?;
            let sig = sig_arg(sig)?;
            let f = load_formula(file, sig.as_ref())?;
            let sig = match sig {
                Some(s) => s,
                None => parsed(file, infer_signature(&read(file)?))?,
            };
            let mut fam = Family::exhaustive(sig, *max_size);
            fam.min_size = *min_size;
            fam.dedup_iso = *dedup;
            if let Some(r) = random {
                fam.mode = EnumMode::Random {
                    seed: r[0],
                    count: r[1] as usize,
                };
            }
            let structures = enumerate_structures(&fam)?;
            let rep = check_closure(&f, kind, &structures, &cfg)?;
            let (word, code) = match rep.verdict {
                Verdict::NoCounterexampleUpToBound => ("no counterexample up to bound", 0),
                Verdict::Counterexample => ("counterexample", 1),
                Verdict::Indeterminate => ("indeterminate", 3),
            };
            let mut text = format!(
                "{kind}: {word} ({} structures, {} pairs)\n",
                rep.structures_examined, rep.pairs_examined
            );
            if let Some(w) = &rep.witness {
                let _ = write!(
                    text,
                    "source (value {}):\n{}target (value {}):\n{}map {:?}\n",
                    w.source_value,
                    serialize_structure(&w.source),
                    w.target_value,
                    serialize_structure(&w.target),
                    w.map
                );
            }
            let fields = serde_json::to_value(&rep).expect("serializable");
            Ok(Report::new(cmd, text, json!({ "verdict": rep.verdict, "report": fields }), code))
        }
        Command::Sample { what, count, sig } => {
            let seed = g
                .seed
                .ok_or_else(|| CliError::Usage("sampling needs an explicit --seed".into()))?;
            let sig = sig_arg(sig)?.unwrap_or_else(suite::pe_signature);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let items: Vec<String> = match what {
                SampleKind::Sentence => (0..*count)
                    .map(|_| format!("{}\n", serialize_formula(&suite::random_sentence(&mut rng, &sig, 5, 2))))
                    .collect(),
                SampleKind::Structure => {
                    let fam = Family::random(sig, 3, seed, *count);
                    enumerate_structures(&fam)?.iter().map(serialize_structure).collect()
                }
                SampleKind::Qcsp => (0..*count).map(|_| serialize_qcsp(&suite::random_qcsp(&mut rng, 4))).collect(),
                SampleKind::Qbf3 => (0..*count)
                    .map(|_| serialize_qdimacs3(&suite::random_qbf3(&mut rng, 2, 5)))
                    .collect(),
            };
            let text = items.join("\n");
            Ok(Report::new(cmd, text, json!({ "seed": seed, "items": items }), 0))
        }
    }
}
