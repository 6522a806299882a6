//! The two encodings: bounded-alternation QCSP into model checking for the
//! MSO sentence `Φ_B`, and `(∀∃)^n` 3-CNF into model checking for `Φ*`,
//! together with three-way pipelines that run every leg through an
//! independent oracle.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{FoVar, Formula, Prefix, Quant, SoVar};
use crate::model_check::{solve_qbf3, solve_qcsp, Checker, McConfig, McError, Qbf3Instance, QcspInstance};
use crate::normalize::{dual_negate, to_nnf, NormalizeError};
use crate::signature::Signature;
use crate::structure::{FiniteStructure, StructureError, Tuple};
use crate::text::{serialize_formula, serialize_structure};
use crate::transforms::{csp_hammer, relativize, restrict, Hammered, HammerOptions, RestrictTarget, TransformError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("the template needs at least two elements, found {0}")]
    TemplateTooSmall(usize),
    #[error("the prefix needs at least one universal block")]
    NoUniversalBlock,
    #[error("n must be at least 1")]
    ZeroAlternations,
    #[error("instance prefix {found} does not match the kit prefix {expected}")]
    PrefixMismatch { expected: String, found: String },
    #[error("instance has no clauses")]
    NoClauses,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Mc(#[from] McError),
}

/// Which version of a construction to build. `Verbatim` follows the
/// displayed formulas symbol for symbol. `Repaired` adds the constraints
/// the pipelines need to agree with the direct oracle: at most one value per
/// existential variable in `Φ_B`; in `Φ*`, chain endpoints exempt from the
/// successor condition and no vacuous empty-`V` disjunct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Repaired,
    Verbatim,
}

/// Outcome of one pipeline leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    Value(bool),
    Exhausted { nodes: u64 },
}

impl Leg {
    pub fn value(self) -> Option<bool> {
        match self {
            Leg::Value(v) => Some(v),
            Leg::Exhausted { .. } => None,
        }
    }

    fn run(checker: &Checker, a: &FiniteStructure, cfg: &McConfig) -> Result<Leg, McError> {
        match checker.check(a, cfg) {
            Ok(ev) => Ok(Leg::Value(ev.value)),
            Err(McError::BudgetExhausted { nodes }) => Ok(Leg::Exhausted { nodes }),
            Err(e) => Err(e),
        }
    }
}

fn unary(name: &str, x: &FoVar) -> Formula {
    Formula::rel(name, &[x])
}

fn so1(v: &SoVar, x: &FoVar) -> Formula {
    Formula::so_atom(v, &[x])
}

fn neg(f: Formula) -> Formula {
    Formula::not(f)
}

fn write_file(dir: &Path, name: &str, text: &str) -> io::Result<()> {
    fs::write(dir.join(name), text)
}

fn manifest(sig: &Signature, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in extra {
        out.push_str(&format!("{k} {v}\n"));
    }
    for s in sig.symbols() {
        out.push_str(&format!("symbol {}/{}\n", s.name, s.arity));
    }
    out
}

// ---------------------------------------------------------------------------
// QCSP

#[derive(Debug, Clone)]
pub struct QcspReductionKit {
    pub template: FiniteStructure,
    pub prefix: Prefix,
    pub variant: Variant,
    /// Unary marker symbol of each block (`A{i}` or `E{i}`, 1-based).
    pub markers: Vec<String>,
    /// `τ` extended by the markers.
    pub signature: Signature,
    /// `so_vars[i][b]`: the SO variable standing for "block `i` variable set to `b`".
    pub so_vars: Vec<Vec<SoVar>>,
    pub phi_b: Formula,
    /// Number of conjuncts of the relation part (one per symbol and index tuple).
    pub relation_conjuncts: usize,
    pub hammered: Hammered,
}

/// Builds `Φ_B = Q1 Q̃_{1,b1} … Qn Q̃_{n,bℓ} (Ψ∀ ∨ (Ψ∃ ∧ Ψ_B))` and its hammered form.
pub fn build_phi_b(b: &FiniteStructure, prefix: &Prefix, variant: Variant) -> Result<QcspReductionKit, ReductionError> {
    if b.size() < 2 {
        return Err(ReductionError::TemplateTooSmall(b.size()));
    }
    if !prefix.has_universal() {
        return Err(ReductionError::NoUniversalBlock);
    }
    let tau = b.signature();
    let quants = prefix.quants();
    let mut signature = tau.clone();
    let mut markers = Vec::new();
    for (i, q) in quants.iter().enumerate() {
        let base = format!("{}{}", if *q == Quant::Forall { "A" } else { "E" }, i + 1);
        let name = signature.fresh_name(&base);
        signature = signature.with(&name, 1)?;
        markers.push(name);
    }
    let so_vars: Vec<Vec<SoVar>> = markers
        .iter()
        .map(|m| (0..b.size()).map(|e| SoVar::fresh(&format!("{m}_{e}"), 1)).collect())
        .collect();
    let universal: Vec<usize> = (0..quants.len()).filter(|&i| quants[i] == Quant::Forall).collect();
    let existential: Vec<usize> = (0..quants.len()).filter(|&i| quants[i] == Quant::Exists).collect();

    // Ψ∀: the universal player broke the rules.
    let mut psi_forall = Vec::new();
    for &i in &universal {
        let mut disj = Vec::new();
        for e in 0..b.size() {
            for c in (0..b.size()).filter(|&c| c != e) {
                let x = FoVar::fresh("x");
                disj.push(Formula::exists(
                    x.clone(),
                    Formula::and([neg(unary(&markers[i], &x)), so1(&so_vars[i][e], &x)]),
                ));
                let y = FoVar::fresh("x");
                disj.push(Formula::exists(
                    y.clone(),
                    Formula::and([so1(&so_vars[i][e], &y), so1(&so_vars[i][c], &y)]),
                ));
            }
        }
        psi_forall.push(Formula::or(disj));
    }

    // Ψ∃: the existential player gave every variable of its blocks a value
    // (and, repaired, at most one).
    let mut psi_exists = Vec::new();
    for &i in &existential {
        let x = FoVar::fresh("x");
        let mut disj = vec![neg(unary(&markers[i], &x))];
        disj.extend(so_vars[i].iter().map(|v| so1(v, &x)));
        psi_exists.push(Formula::forall(x, Formula::or(disj)));
        if variant == Variant::Repaired {
            for e in 0..b.size() {
                for c in e + 1..b.size() {
                    let x = FoVar::fresh("x");
                    let clause = Formula::or([neg(so1(&so_vars[i][e], &x)), neg(so1(&so_vars[i][c], &x))]);
                    psi_exists.push(Formula::forall(x, clause));
                }
            }
        }
    }

    // Ψ_B: every constraint atom is satisfied by the chosen values.
    let mut psi_b = Vec::new();
    for (r, sym) in tau.symbols().iter().enumerate() {
        let m = sym.arity;
        for idx in index_tuples(quants.len(), m) {
            let xs: Vec<FoVar> = (1..=m).map(|k| FoVar::fresh(&format!("x{k}"))).collect();
            let refs: Vec<&FoVar> = xs.iter().collect();
            let mut disj = vec![neg(Formula::rel(&sym.name, &refs))];
            disj.extend(idx.iter().zip(&xs).map(|(&i, x)| neg(unary(&markers[i], x))));
            for (k, &i) in idx.iter().enumerate() {
                if quants[i] == Quant::Forall {
                    disj.push(Formula::and(so_vars[i].iter().map(|v| neg(so1(v, &xs[k])))));
                }
            }
            for t in &b.relations()[r] {
                disj.push(Formula::and(idx.iter().zip(t).zip(&xs).map(|((&i, &e), x)| so1(&so_vars[i][e], x))));
            }
            psi_b.push(Formula::fo_block(Quant::Forall, xs, Formula::or(disj)));
        }
    }
    let relation_conjuncts = psi_b.len();

    let body = Formula::or([
        Formula::and(psi_forall),
        Formula::and([Formula::and(psi_exists), Formula::and(psi_b)]),
    ]);
    let so_prefix: Vec<(Quant, SoVar)> = quants
        .iter()
        .zip(&so_vars)
        .flat_map(|(q, vs)| vs.iter().map(move |v| (*q, v.clone())))
        .collect();
    let phi_b = Formula::with_so_prefix(&so_prefix, body);
    let hammered = csp_hammer(&phi_b, HammerOptions::default(), &[])?;
    Ok(QcspReductionKit {
        template: b.clone(),
        prefix: prefix.clone(),
        variant,
        markers,
        signature,
        so_vars,
        phi_b,
        relation_conjuncts,
        hammered,
    })
}

/// All `m`-tuples over `0..n` in lexicographic order.
fn index_tuples(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn pattern_string(qs: &[Quant]) -> String {
    qs.iter().map(|q| q.symbol()).collect()
}

/// The instance as a structure: elements are the variables, the block
/// marker holds on the block's variables, relation tuples are the atoms.
pub fn encode_qcsp_instance(inst: &QcspInstance, kit: &QcspReductionKit) -> Result<FiniteStructure, ReductionError> {
    if inst.pattern() != kit.prefix.quants() {
        return Err(ReductionError::PrefixMismatch {
            expected: pattern_string(kit.prefix.quants()),
            found: pattern_string(&inst.pattern()),
        });
    }
    let mut rels: Vec<(String, Vec<Tuple>)> = kit
        .template
        .signature()
        .symbols()
        .iter()
        .map(|s| (s.name.to_string(), Vec::new()))
        .collect();
    for (sym, args) in inst.atoms() {
        if let Some(entry) = rels.iter_mut().find(|(n, _)| **n == **sym) {
            entry.1.push(args.clone());
        } else {
            return Err(StructureError::UnknownSymbol(sym.to_string()).into());
        }
    }
    for ((_, vars), marker) in inst.blocks().iter().zip(&kit.markers) {
        rels.push((marker.clone(), vars.iter().map(|&v| vec![v]).collect()));
    }
    Ok(FiniteStructure::new(kit.signature.clone(), inst.num_vars(), rels)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QcspPipeline {
    pub direct: bool,
    pub via_phi_b: Leg,
    pub via_hammer: Leg,
}

impl QcspPipeline {
    /// All decided legs agree with the direct oracle and none ran out of budget.
    pub fn agrees(&self) -> bool {
        self.via_phi_b == Leg::Value(self.direct) && self.via_hammer == Leg::Value(self.direct)
    }
}

/// Compiled sentences of a kit, reusable across instances.
pub struct QcspPipelineRunner<'a> {
    kit: &'a QcspReductionKit,
    phi_b: Checker,
    hammered: Checker,
}

impl<'a> QcspPipelineRunner<'a> {
    pub fn new(kit: &'a QcspReductionKit) -> Result<Self, ReductionError> {
        Ok(Self {
            kit,
            phi_b: Checker::new(&kit.phi_b)?,
            hammered: Checker::new(&kit.hammered.formula)?,
        })
    }

    pub fn run(&self, inst: &QcspInstance, cfg: &McConfig) -> Result<QcspPipeline, ReductionError> {
        let direct = solve_qcsp(&self.kit.template, inst)?;
        let a = encode_qcsp_instance(inst, self.kit)?;
        let via_phi_b = Leg::run(&self.phi_b, &a, cfg)?;
        let expanded = a.expand_with_neq_as(&self.kit.hammered.n_symbol)?;
        let via_hammer = Leg::run(&self.hammered, &expanded, cfg)?;
        Ok(QcspPipeline {
            direct,
            via_phi_b,
            via_hammer,
        })
    }
}

pub fn run_qcsp_pipeline(inst: &QcspInstance, kit: &QcspReductionKit, cfg: &McConfig) -> Result<QcspPipeline, ReductionError> {
    QcspPipelineRunner::new(kit)?.run(inst, cfg)
}

impl QcspReductionKit {
    /// Writes `phi_B.sof`, `hammered.sof`, `template.st` and `signature.txt`.
    pub fn write_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        write_file(dir, "phi_B.sof", &format!("{}\n", serialize_formula(&self.phi_b)))?;
        write_file(dir, "hammered.sof", &format!("{}\n", serialize_formula(&self.hammered.formula)))?;
        write_file(dir, "template.st", &serialize_structure(&self.template))?;
        let extra = [
            ("prefix", self.prefix.to_string()),
            ("markers", self.markers.join(" ")),
            ("neq", self.hammered.n_symbol.clone()),
        ];
        write_file(dir, "signature.txt", &manifest(&self.signature, &extra))
    }
}

// ---------------------------------------------------------------------------
// Quantified 3-CNF

pub const RBAR: &str = "Rbar";
pub const SUCC: &str = "Succ";

/// The fixed signature: `R`, `Rbar`, `Succ` binary; `S`, `T`, `E1..En`, `A1..An` unary.
pub fn qbf3_signature(n: usize) -> Signature {
    let mut syms: Vec<(String, usize)> = vec![("R".into(), 2), (RBAR.into(), 2), (SUCC.into(), 2), ("S".into(), 1), ("T".into(), 1)];
    syms.extend((1..=n).map(|k| (format!("E{k}"), 1)));
    syms.extend((1..=n).map(|k| (format!("A{k}"), 1)));
    Signature::new(syms).expect("fixed names are distinct")
}

#[derive(Debug, Clone)]
pub struct Qbf3ReductionKit {
    pub n: usize,
    pub variant: Variant,
    pub signature: Signature,
    /// `A_{k,0}` for `k = 1..n`.
    pub a_vars: Vec<SoVar>,
    /// `E_{k,1}` for `k = 1..n`.
    pub e_vars: Vec<SoVar>,
    pub v_var: SoVar,
    pub phi_star: Formula,
    pub dual: Formula,
    pub dual_hammered: Hammered,
}

/// Builds `Φ* = ∀A_{1,0} ∃E_{1,1} … ∀A_{n,0} ∃E_{n,1} ∃V (¬Ψ∀ ∨ (Ψ∃ ∧ Ψ|V))`
/// and the hammered dual `(¬Φ*)^CSP`.
pub fn build_phi_star(n: usize, variant: Variant) -> Result<Qbf3ReductionKit, ReductionError> {
    if n == 0 {
        return Err(ReductionError::ZeroAlternations);
    }
    let signature = qbf3_signature(n);
    let a_vars: Vec<SoVar> = (1..=n).map(|k| SoVar::fresh(&format!("A{k}_0"), 1)).collect();
    let e_vars: Vec<SoVar> = (1..=n).map(|k| SoVar::fresh(&format!("E{k}_1"), 1)).collect();
    let v_var = SoVar::fresh("V", 1);
    let a_sym = |k: usize| format!("A{}", k + 1);
    let e_sym = |k: usize| format!("E{}", k + 1);
    let last = n - 1;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).collect();

    let mut psi_forall = Vec::new();
    for &(k, l) in &pairs {
        let x = FoVar::fresh("x");
        psi_forall.push(Formula::forall(x.clone(), Formula::or([neg(so1(&a_vars[k], &x)), so1(&a_vars[l], &x)])));
    }
    for &(k, l) in &pairs {
        let x = FoVar::fresh("x");
        psi_forall.push(Formula::forall(
            x.clone(),
            Formula::or([neg(so1(&a_vars[l], &x)), neg(unary(&a_sym(k), &x)), so1(&a_vars[k], &x)]),
        ));
    }
    for &(k, l) in &pairs {
        let x = FoVar::fresh("x");
        psi_forall.push(Formula::forall(x.clone(), Formula::or([neg(so1(&a_vars[k], &x)), neg(unary(&a_sym(l), &x))])));
    }
    for k in 0..n {
        let x = FoVar::fresh("x");
        psi_forall.push(Formula::forall(x.clone(), Formula::or([neg(so1(&a_vars[last], &x)), neg(unary(&e_sym(k), &x))])));
    }
    {
        let (x, y) = (FoVar::fresh("x"), FoVar::fresh("y"));
        let clause = Formula::or([
            neg(so1(&a_vars[last], &x)),
            neg(so1(&a_vars[last], &y)),
            neg(Formula::rel(RBAR, &[&x, &y])),
        ]);
        psi_forall.push(Formula::fo_block(Quant::Forall, [x, y], clause));
    }
    let psi_forall = Formula::and(psi_forall);

    let mut psi_exists = Vec::new();
    if !pairs.is_empty() {
        let x = FoVar::fresh("x");
        let conj = pairs
            .iter()
            .map(|&(k, l)| Formula::or([neg(so1(&e_vars[k], &x)), so1(&e_vars[l], &x)]));
        psi_exists.push(Formula::forall(x.clone(), Formula::and(conj)));
    }
    {
        let y = FoVar::fresh("y");
        let conj = (0..n).map(|k| {
            let mut disj = vec![neg(so1(&e_vars[k], &y))];
            disj.extend((0..=k).map(|j| unary(&e_sym(j), &y)));
            Formula::or(disj)
        });
        psi_exists.push(Formula::forall(y.clone(), Formula::and(conj)));
    }
    {
        let (w, z) = (FoVar::fresh("w"), FoVar::fresh("z"));
        let clause = Formula::or([
            neg(so1(&e_vars[last], &w)),
            neg(so1(&e_vars[last], &z)),
            Formula::rel("R", &[&w, &z]),
        ]);
        psi_exists.push(Formula::fo_block(Quant::Forall, [w, z], clause));
    }
    let psi_exists = Formula::and(psi_exists);

    let mut psi = Vec::new();
    {
        let (x, y) = (FoVar::fresh("x"), FoVar::fresh("y"));
        psi.push(Formula::fo_block(Quant::Forall, [x.clone(), y.clone()], Formula::rel("R", &[&x, &y])));
    }
    {
        let (x, y) = (FoVar::fresh("x"), FoVar::fresh("y"));
        psi.push(Formula::fo_block(
            Quant::Exists,
            [x.clone(), y.clone()],
            Formula::and([unary("S", &x), unary("T", &y)]),
        ));
    }
    {
        let x = FoVar::fresh("x");
        let mut disj = vec![neg(so1(&a_vars[last], &x))];
        disj.extend(e_vars.iter().map(|v| so1(v, &x)));
        psi.push(Formula::forall(x.clone(), Formula::or(disj)));
    }
    {
        let (x, y, a, b) = (FoVar::fresh("x"), FoVar::fresh("y"), FoVar::fresh("a"), FoVar::fresh("b"));
        let step = Formula::and([Formula::rel(SUCC, &[&x, &a]), Formula::rel(SUCC, &[&b, &y])]);
        let matrix = match variant {
            Variant::Verbatim => Formula::or([Formula::eq(&x, &y), step]),
            // The endpoints of the clause chain have no successor / predecessor.
            Variant::Repaired => Formula::or([Formula::eq(&x, &y), unary("T", &x), unary("S", &y), step]),
        };
        let inner = Formula::fo_block(Quant::Exists, [a, b], matrix);
        psi.push(Formula::fo_block(Quant::Forall, [x, y], inner));
    }
    let psi = Formula::and(psi);
    let target = RestrictTarget::SoVar(v_var.clone());
    let psi_v = match variant {
        Variant::Verbatim => restrict(&psi, &target)?,
        // The vacuous disjunct `∀z ¬V(z)` would let the EP win with V = ∅.
        Variant::Repaired => relativize(&psi, &target)?,
    };

    let body = Formula::or([to_nnf(&neg(psi_forall)), Formula::and([psi_exists, psi_v])]);
    let mut so_prefix = Vec::new();
    for k in 0..n {
        so_prefix.push((Quant::Forall, a_vars[k].clone()));
        so_prefix.push((Quant::Exists, e_vars[k].clone()));
    }
    so_prefix.push((Quant::Exists, v_var.clone()));
    let phi_star = Formula::with_so_prefix(&so_prefix, body);
    let dual = dual_negate(&phi_star)?;
    let dual_hammered = csp_hammer(&dual, HammerOptions::default(), &[])?;
    Ok(Qbf3ReductionKit {
        n,
        variant,
        signature,
        a_vars,
        e_vars,
        v_var,
        phi_star,
        dual,
        dual_hammered,
    })
}

/// One element per (literal, clause) occurrence, clause-major.
pub fn qbf3_elements(inst: &Qbf3Instance) -> Vec<(i32, usize)> {
    let mut out = Vec::new();
    for (i, c) in inst.clauses().iter().enumerate() {
        let mut seen = BTreeSet::new();
        for &l in c {
            if seen.insert(l) {
                out.push((l, i));
            }
        }
    }
    out
}

/// The structure over the elements `(λ, i)` with `λ` a literal of clause `i`.
pub fn encode_qbf3_instance(inst: &Qbf3Instance, n: usize) -> Result<FiniteStructure, ReductionError> {
    if !inst.has_forall_exists_shape(n) {
        let found: Vec<Quant> = inst.blocks().iter().map(|(q, _)| *q).collect();
        return Err(ReductionError::PrefixMismatch {
            expected: "∀∃".repeat(n),
            found: pattern_string(&found),
        });
    }
    let m = inst.clauses().len();
    if m == 0 {
        return Err(ReductionError::NoClauses);
    }
    let elems = qbf3_elements(inst);
    let mut rels: Vec<(String, Vec<Tuple>)> = Vec::new();
    let pairs = |pred: &dyn Fn(&(i32, usize), &(i32, usize)) -> bool| -> Vec<Tuple> {
        let mut out = Vec::new();
        for (p, e) in elems.iter().enumerate() {
            for (q, f) in elems.iter().enumerate() {
                if pred(e, f) {
                    out.push(vec![p, q]);
                }
            }
        }
        out
    };
    rels.push(("R".into(), pairs(&|e, f| e.0 != -f.0)));
    rels.push((RBAR.into(), pairs(&|e, f| e.0 == -f.0)));
    rels.push((SUCC.into(), pairs(&|e, f| f.1 == e.1 + 1)));
    let where_ = |pred: &dyn Fn(&(i32, usize)) -> bool| -> Vec<Tuple> {
        elems.iter().enumerate().filter(|(_, e)| pred(e)).map(|(p, _)| vec![p]).collect()
    };
    rels.push(("S".into(), where_(&|e| e.1 == 0)));
    rels.push(("T".into(), where_(&|e| e.1 == m - 1)));
    for k in 0..n {
        rels.push((format!("E{}", k + 1), where_(&|e| inst.block_of(e.0.unsigned_abs()) == Some(2 * k + 1))));
        rels.push((format!("A{}", k + 1), where_(&|e| inst.block_of(e.0.unsigned_abs()) == Some(2 * k))));
    }
    Ok(FiniteStructure::new(qbf3_signature(n), elems.len(), rels)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Qbf3Pipeline {
    pub direct: bool,
    pub via_phi_star: Leg,
    pub via_hammer: Leg,
}

impl Qbf3Pipeline {
    /// `via_phi_star = direct` and `via_hammer = ¬direct`.
    pub fn contract_holds(&self) -> bool {
        self.via_phi_star == Leg::Value(self.direct) && self.via_hammer == Leg::Value(!self.direct)
    }
}

pub struct Qbf3PipelineRunner<'a> {
    kit: &'a Qbf3ReductionKit,
    phi_star: Checker,
    hammered: Checker,
}

impl<'a> Qbf3PipelineRunner<'a> {
    pub fn new(kit: &'a Qbf3ReductionKit) -> Result<Self, ReductionError> {
        Ok(Self {
            kit,
            phi_star: Checker::new(&kit.phi_star)?,
            hammered: Checker::new(&kit.dual_hammered.formula)?,
        })
    }

    pub fn run(&self, inst: &Qbf3Instance, cfg: &McConfig) -> Result<Qbf3Pipeline, ReductionError> {
        let direct = solve_qbf3(inst);
        let a = encode_qbf3_instance(inst, self.kit.n)?;
        let via_phi_star = Leg::run(&self.phi_star, &a, cfg)?;
        let expanded = a.expand_with_neq_as(&self.kit.dual_hammered.n_symbol)?;
        let via_hammer = Leg::run(&self.hammered, &expanded, cfg)?;
        Ok(Qbf3Pipeline {
            direct,
            via_phi_star,
            via_hammer,
        })
    }
}

pub fn run_qbf3_pipeline(inst: &Qbf3Instance, kit: &Qbf3ReductionKit, cfg: &McConfig) -> Result<Qbf3Pipeline, ReductionError> {
    Qbf3PipelineRunner::new(kit)?.run(inst, cfg)
}

impl Qbf3ReductionKit {
    /// Writes `phi_star.sof`, `hammered.sof` and `signature.txt`.
    pub fn write_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        write_file(dir, "phi_star.sof", &format!("{}\n", serialize_formula(&self.phi_star)))?;
        write_file(dir, "hammered.sof", &format!("{}\n", serialize_formula(&self.dual_hammered.formula)))?;
        let extra = [("n", self.n.to_string()), ("neq", self.dual_hammered.n_symbol.clone())];
        write_file(dir, "signature.txt", &manifest(&self.signature, &extra))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{classify, Class};
    use crate::model_check::DEFAULT_BUDGET;
    use crate::normalize::DEFAULT_SIZE_CAP;

    fn template() -> FiniteStructure {
        let sig = Signature::new([("R", 2)]).unwrap();
        FiniteStructure::new(sig, 2, [("R", vec![vec![0, 1], vec![1, 0], vec![1, 1]])]).unwrap()
    }

    fn forall_exists() -> Prefix {
        Prefix::parse("AE").unwrap()
    }

    #[test]
    fn phi_b_shape() {
        let kit = build_phi_b(&template(), &forall_exists(), Variant::Repaired).unwrap();
        let (so, _) = kit.phi_b.split_so_prefix();
        let names: Vec<(Quant, String)> = so.iter().map(|(q, v)| (*q, v.name.to_string())).collect();
        assert_eq!(
            names,
            vec![
                (Quant::Forall, "A1_0".into()),
                (Quant::Forall, "A1_1".into()),
                (Quant::Exists, "E2_0".into()),
                (Quant::Exists, "E2_1".into()),
            ]
        );
        assert_eq!(kit.relation_conjuncts, 4);
        let (hs, _) = kit.hammered.formula.split_so_prefix();
        assert_eq!(&*hs[2].1.name, "U");
        assert_eq!(hs.len(), 5);
        for cls in [Class::ForallRestricted, Class::Negative] {
            assert!(classify(&kit.phi_b, cls, DEFAULT_SIZE_CAP).unwrap().accepted);
        }
    }

    #[test]
    fn phi_b_preconditions() {
        let one = FiniteStructure::new(Signature::new([("R", 2)]).unwrap(), 1, [("R", vec![vec![0, 0]])]).unwrap();
        assert_eq!(
            build_phi_b(&one, &forall_exists(), Variant::Repaired).unwrap_err(),
            ReductionError::TemplateTooSmall(1)
        );
        assert_eq!(
            build_phi_b(&template(), &Prefix::parse("E").unwrap(), Variant::Repaired).unwrap_err(),
            ReductionError::NoUniversalBlock
        );
    }

    #[test]
    fn qcsp_encoding() {
        let kit = build_phi_b(&template(), &forall_exists(), Variant::Repaired).unwrap();
        let inst = QcspInstance::new(
            vec![(Quant::Forall, vec!["x1".into()]), (Quant::Exists, vec!["y1".into()])],
            vec![("R".into(), vec![0, 1])],
        );
        let a = encode_qcsp_instance(&inst, &kit).unwrap();
        assert_eq!(a.size(), 2);
        assert_eq!(a.relation("A1").unwrap(), &BTreeSet::from([vec![0]]));
        assert_eq!(a.relation("E2").unwrap(), &BTreeSet::from([vec![1]]));
        assert_eq!(a.relation("R").unwrap(), &BTreeSet::from([vec![0, 1]]));
    }

    #[test]
    fn qcsp_pipeline_examples() {
        let kit = build_phi_b(&template(), &forall_exists(), Variant::Repaired).unwrap();
        let cfg = McConfig::default();
        let fe = QcspInstance::new(
            vec![(Quant::Forall, vec!["x".into()]), (Quant::Exists, vec!["y".into()])],
            vec![("R".into(), vec![0, 1])],
        );
        let p = run_qcsp_pipeline(&fe, &kit, &cfg).unwrap();
        assert!(p.direct && p.agrees(), "{p:?}");
        let ff = QcspInstance::new(
            vec![(Quant::Forall, vec!["x".into(), "y".into()]), (Quant::Exists, vec![])],
            vec![("R".into(), vec![0, 1])],
        );
        let p = run_qcsp_pipeline(&ff, &kit, &cfg).unwrap();
        assert!(!p.direct && p.agrees(), "{p:?}");
    }

    #[test]
    fn verbatim_phi_b_lets_a_variable_take_two_values() {
        // ∃y R(y,y) over R = ≠ is false, but Φ_B without the at-most-one
        // constraint lets y sit in both E_{2,0} and E_{2,1}.
        let sig = Signature::new([("R", 2)]).unwrap();
        let neq = FiniteStructure::new(sig, 2, [("R", vec![vec![0, 1], vec![1, 0]])]).unwrap();
        let inst = QcspInstance::new(
            vec![(Quant::Forall, vec![]), (Quant::Exists, vec!["y".into()])],
            vec![("R".into(), vec![0, 0])],
        );
        let cfg = McConfig::default();
        let verbatim = build_phi_b(&neq, &forall_exists(), Variant::Verbatim).unwrap();
        let p = run_qcsp_pipeline(&inst, &verbatim, &cfg).unwrap();
        assert!(!p.direct);
        assert_eq!(p.via_phi_b, Leg::Value(true));
        let repaired = build_phi_b(&neq, &forall_exists(), Variant::Repaired).unwrap();
        assert!(run_qcsp_pipeline(&inst, &repaired, &cfg).unwrap().agrees());
    }

    fn qbf(clauses: Vec<Vec<i32>>) -> Qbf3Instance {
        Qbf3Instance::new(2, vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])], clauses)
    }

    #[test]
    fn qbf3_encoding() {
        let a = encode_qbf3_instance(&qbf(vec![vec![1, 2], vec![-1, -2]]), 1).unwrap();
        assert_eq!(a.size(), 4);
        // elements: (x,1)=0 (y,1)=1 (¬x,2)=2 (¬y,2)=3
        assert_eq!(
            a.relation(RBAR).unwrap(),
            &BTreeSet::from([vec![0, 2], vec![2, 0], vec![1, 3], vec![3, 1]])
        );
        let single = encode_qbf3_instance(&qbf(vec![vec![1]]), 1).unwrap();
        assert_eq!(single.relation("S"), single.relation("T"));
        assert!(single.relation(SUCC).unwrap().is_empty());
    }

    #[test]
    fn phi_star_classes() {
        let kit = build_phi_star(1, Variant::Repaired).unwrap();
        for cls in [Class::ExistsGuarded, Class::Positive] {
            assert!(classify(&kit.phi_star, cls, DEFAULT_SIZE_CAP).unwrap().accepted, "{cls}");
        }
        for cls in [Class::ForallRestricted, Class::Negative] {
            assert!(classify(&kit.dual, cls, DEFAULT_SIZE_CAP).unwrap().accepted, "{cls}");
        }
    }

    #[test]
    fn qbf3_pipeline_examples() {
        let kit = build_phi_star(1, Variant::Repaired).unwrap();
        let cfg = McConfig::default();
        let yes = run_qbf3_pipeline(&qbf(vec![vec![1, 2], vec![-1, -2]]), &kit, &cfg).unwrap();
        assert!(yes.direct && yes.contract_holds(), "{yes:?}");
        let no = run_qbf3_pipeline(&qbf(vec![vec![1, 2], vec![-2]]), &kit, &cfg).unwrap();
        assert!(!no.direct && no.contract_holds(), "{no:?}");
    }

    #[test]
    fn verbatim_phi_star_accepts_with_empty_v() {
        // V = ∅ satisfies the restricted Ψ vacuously, so a false instance is accepted.
        let kit = build_phi_star(1, Variant::Verbatim).unwrap();
        let a = encode_qbf3_instance(&qbf(vec![vec![1, 2], vec![-2]]), 1).unwrap();
        assert!(crate::model_check::mc_so(&a, &kit.phi_star, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn verbatim_succ_fails_on_nonempty_v() {
        // Without the empty-V escape, the displayed successor condition
        // rejects every encoding with two or more clauses.
        let kit = build_phi_star(1, Variant::Verbatim).unwrap();
        let (so, body) = kit.phi_star.split_so_prefix();
        let Formula::Or(parts) = body else { panic!("{body}") };
        let (Formula::And(conj), rest) = parts.split_last().unwrap() else { panic!() };
        let (Formula::Or(restricted), exists_part) = conj.split_last().unwrap() else { panic!() };
        let mut kept = exists_part.to_vec();
        kept.push(restricted[1].clone());
        let mut disj = rest.to_vec();
        disj.push(Formula::and(kept));
        let nonempty = Formula::or(disj);
        let phi = Formula::with_so_prefix(&so, nonempty);
        let a = encode_qbf3_instance(&qbf(vec![vec![1, 2], vec![-1, -2]]), 1).unwrap();
        assert!(!crate::model_check::mc_so(&a, &phi, DEFAULT_BUDGET).unwrap());
    }
}
