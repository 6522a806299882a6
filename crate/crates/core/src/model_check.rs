//! Brute-force game evaluation.
//!
//! SO sentences are compiled into a slot-indexed tree: FO values live in a
//! `Vec<usize>`, SO values are bitmasks over the mixed-radix tuple index, and
//! signature relations are flattened into boolean tables. Before compiling,
//! the sentence is put in NNF and quantifier runs are pushed inward
//! (miniscoping), which is what keeps the hammered reductions tractable.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Assignment, FoVar, Formula, FormulaError, Quant, SoVar, VarId};
use crate::normalize::to_nnf;
use crate::signature::Signature;
use crate::structure::{FiniteStructure, StructureError, Tuple};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Largest tuple space an SO variable may range over (one bit per tuple).
pub const MAX_SO_TUPLES: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McError {
    #[error("evaluation budget exhausted after {nodes} game-tree nodes")]
    BudgetExhausted { nodes: u64 },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("variable `{0}` is free and has no value in the assignment")]
    Unassigned(String),
    #[error("SO variable `{var}` ranges over subsets of {tuples} tuples; at most {MAX_SO_TUPLES} are supported")]
    SoTooLarge { var: String, tuples: usize },
    #[error("bad value for `{var}`: {reason}")]
    BadAssignment { var: String, reason: String },
    #[error("the sentence does not start with an existential SO quantifier")]
    NoLeadingExists,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    /// Maximum number of quantifier moves.
    pub budget: u64,
    /// Worker threads for the outermost quantifier; 1 means sequential.
    pub jobs: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub value: bool,
    /// Quantifier moves made.
    pub nodes: u64,
}

/// `A ⊨ f` with the default configuration and the given budget.
pub fn mc_so(a: &FiniteStructure, f: &Formula, budget: u64) -> Result<bool, McError> {
    let cfg = McConfig { budget, jobs: 1 };
    Ok(Checker::new(f)?.check(a, &cfg)?.value)
}

pub fn evaluate(a: &FiniteStructure, f: &Formula, cfg: &McConfig) -> Result<Evaluation, McError> {
    Checker::new(f)?.check(a, cfg)
}

/// Evaluates a formula whose free variables are all valued by `asg`.
pub fn evaluate_with(a: &FiniteStructure, f: &Formula, asg: &Assignment, cfg: &McConfig) -> Result<Evaluation, McError> {
    Checker::new(f)?.check_with(a, asg, cfg)
}

/// Values for the leading maximal ∃-SO block that extend to a win, or `None`
/// when the sentence is false.
pub fn mc_so_witness(
    a: &FiniteStructure,
    f: &Formula,
    budget: u64,
) -> Result<Option<Vec<(SoVar, BTreeSet<Tuple>)>>, McError> {
    let (prefix, body) = f.split_so_prefix();
    let lead = prefix.iter().take_while(|(q, _)| *q == Quant::Exists).count();
    if lead == 0 {
        return Err(McError::NoLeadingExists);
    }
    let block: Vec<SoVar> = prefix[..lead].iter().map(|(_, v)| v.clone()).collect();
    let rest = Formula::with_so_prefix(&prefix[lead..], body.clone());
    let checker = Checker::new(&rest)?;
    if !checker.free_fo.is_empty() {
        return Err(McError::Unassigned(checker.free_fo[0].name.to_string()));
    }
    let n = a.size();
    let mut bits = Vec::new();
    for v in &block {
        bits.push(tuple_space(&v.name, n, v.arity)?);
    }
    let positions: Vec<Option<usize>> = block
        .iter()
        .map(|v| checker.free_so.iter().position(|w| w == v))
        .collect();
    let shared = AtomicU64::new(0);
    let cfg = McConfig { budget, jobs: 1 };
    let mut iters: Vec<SubsetOrder> = bits.iter().map(|&b| SubsetOrder::new(b)).collect();
    let mut current: Vec<u64> = iters.iter_mut().map(|it| it.next().expect("nonempty order")).collect();
    loop {
        let mut so_vals = vec![0u64; checker.free_so.len()];
        for (k, pos) in positions.iter().enumerate() {
            if let Some(p) = pos {
                so_vals[*p] = current[k];
            }
        }
        if checker.run(a, &[], &so_vals, &cfg, &shared)? {
            let out = block
                .iter()
                .zip(&current)
                .map(|(v, &m)| (v.clone(), mask_to_tuples(m, n, v.arity)))
                .collect();
            return Ok(Some(out));
        }
        // odometer step, last variable fastest
        let mut k = block.len();
        loop {
            if k == 0 {
                return Ok(None);
            }
            k -= 1;
            match iters[k].next() {
                Some(m) => {
                    current[k] = m;
                    break;
                }
                None => {
                    iters[k] = SubsetOrder::new(bits[k]);
                    current[k] = iters[k].next().expect("nonempty order");
                }
            }
        }
    }
}

/// Index of `tuple` in the mixed-radix order over a domain of size `n`.
pub fn tuple_index(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * n + e)
}

pub fn mask_to_tuples(mask: u64, n: usize, arity: usize) -> BTreeSet<Tuple> {
    let mut out = BTreeSet::new();
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        let mut t = vec![0; arity];
        let mut r = i;
        for slot in t.iter_mut().rev() {
            *slot = r % n;
            r /= n;
        }
        out.insert(t);
    }
    out
}

fn tuple_space(name: &str, n: usize, arity: usize) -> Result<usize, McError> {
    let tuples = n.checked_pow(arity as u32).unwrap_or(usize::MAX);
    if tuples > MAX_SO_TUPLES {
        return Err(McError::SoTooLarge {
            var: name.to_string(),
            tuples,
        });
    }
    Ok(tuples)
}

/// Subsets of a `bits`-element tuple space: by popcount, then numerically.
#[derive(Debug, Clone)]
pub struct SubsetOrder {
    bits: usize,
    popcount: usize,
    next: Option<u64>,
}

impl SubsetOrder {
    pub fn new(bits: usize) -> Self {
        assert!(bits <= MAX_SO_TUPLES);
        Self {
            bits,
            popcount: 0,
            next: Some(0),
        }
    }
}

impl Iterator for SubsetOrder {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        let limit = 1u64 << self.bits;
        let succ = if cur == 0 {
            None
        } else {
            // Gosper's hack: next larger word with the same popcount
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r).filter(|&m| m < limit)
        };
        self.next = succ.or_else(|| {
            self.popcount += 1;
            (self.popcount <= self.bits).then(|| (1u64 << self.popcount) - 1)
        });
        Some(cur)
    }
}

// ---------------------------------------------------------------------------
// Miniscoping

#[derive(Clone)]
enum Bind {
    Fo(FoVar),
    So(SoVar),
}

impl Bind {
    fn id(&self) -> VarId {
        match self {
            Bind::Fo(v) => v.id,
            Bind::So(v) => v.id,
        }
    }

    fn wrap(&self, q: Quant, body: Formula) -> Formula {
        match self {
            Bind::Fo(v) => Formula::fo(q, v.clone(), body),
            Bind::So(v) => Formula::so(q, v.clone(), body),
        }
    }
}

fn free_ids(f: &Formula) -> HashSet<VarId> {
    let mut out: HashSet<VarId> = f.free_fo_vars().into_iter().map(|v| v.id).collect();
    out.extend(f.free_so_vars().into_iter().map(|v| v.id));
    out
}

fn wrap_all(q: Quant, vars: &[Bind], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |acc, v| v.wrap(q, acc))
}

/// Pushes quantifier runs towards the atoms that use them. With `fo_ok`
/// false (empty domain) FO binders are left alone, since `∀x φ ≡ φ` and its
/// relatives need a nonempty domain.
pub(crate) fn miniscope(f: &Formula, fo_ok: bool) -> Formula {
    match f {
        Formula::Fo { q, .. } | Formula::So { q, .. } => {
            let is_fo = matches!(f, Formula::Fo { .. });
            let q = *q;
            let mut vars = Vec::new();
            let mut cur = f;
            loop {
                match cur {
                    Formula::Fo { q: q2, var, body } if is_fo && *q2 == q => {
                        vars.push(Bind::Fo(var.clone()));
                        cur = body;
                    }
                    Formula::So { q: q2, var, body } if !is_fo && *q2 == q => {
                        vars.push(Bind::So(var.clone()));
                        cur = body;
                    }
                    _ => break,
                }
            }
            let body = miniscope(cur, fo_ok);
            if is_fo && !fo_ok {
                wrap_all(q, &vars, body)
            } else {
                push_quantifiers(q, vars, body)
            }
        }
        Formula::And(gs) => Formula::And(gs.iter().map(|g| miniscope(g, fo_ok)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| miniscope(g, fo_ok)).collect()),
        Formula::Not(g) => Formula::not(miniscope(g, fo_ok)),
        _ => f.clone(),
    }
}

fn push_quantifiers(q: Quant, vars: Vec<Bind>, body: Formula) -> Formula {
    let free = free_ids(&body);
    let vars: Vec<Bind> = vars.into_iter().filter(|v| free.contains(&v.id())).collect();
    if vars.is_empty() {
        return body;
    }
    let (children, is_and) = match &body {
        Formula::And(gs) => (gs, true),
        Formula::Or(gs) => (gs, false),
        _ => return wrap_all(q, &vars, body),
    };
    let rebuild = |parts: Vec<Formula>| if is_and { Formula::and_raw(parts) } else { Formula::or_raw(parts) };
    let child_free: Vec<HashSet<VarId>> = children.iter().map(free_ids).collect();
    let distributes = (q == Quant::Forall) == is_and;
    if distributes {
        let parts = children
            .iter()
            .zip(&child_free)
            .map(|(c, fr)| {
                let vs = vars.iter().filter(|v| fr.contains(&v.id())).cloned().collect();
                push_quantifiers(q, vs, c.clone())
            })
            .collect();
        return rebuild(parts);
    }

    // Group children into components linked by shared quantified variables.
    let ids: Vec<VarId> = vars.iter().map(Bind::id).collect();
    let mut comp: Vec<Option<usize>> = vec![None; children.len()];
    let mut ncomp = 0;
    for start in 0..children.len() {
        if comp[start].is_some() || !ids.iter().any(|id| child_free[start].contains(id)) {
            continue;
        }
        comp[start] = Some(ncomp);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..children.len() {
                if comp[j].is_none() && ids.iter().any(|id| child_free[i].contains(id) && child_free[j].contains(id)) {
                    comp[j] = Some(ncomp);
                    stack.push(j);
                }
            }
        }
        ncomp += 1;
    }
    let outside = comp.iter().any(Option::is_none);
    if ncomp == 1 && !outside {
        let (common, rest): (Vec<Bind>, Vec<Bind>) = vars
            .into_iter()
            .partition(|v| child_free.iter().all(|fr| fr.contains(&v.id())));
        if common.is_empty() {
            return wrap_all(q, &rest, body);
        }
        return wrap_all(q, &common, push_quantifiers(q, rest, body));
    }
    let mut parts = Vec::new();
    for (c, k) in children.iter().zip(&comp) {
        if k.is_none() {
            parts.push(c.clone());
        }
    }
    for k in 0..ncomp {
        let members: Vec<usize> = (0..children.len()).filter(|&i| comp[i] == Some(k)).collect();
        let vs: Vec<Bind> = vars
            .iter()
            .filter(|v| members.iter().any(|&i| child_free[i].contains(&v.id())))
            .cloned()
            .collect();
        let sub = rebuild(members.iter().map(|&i| children[i].clone()).collect());
        parts.push(push_quantifiers(q, vs, sub));
    }
    rebuild(parts)
}

// ---------------------------------------------------------------------------
// Compilation

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Rel { rel: usize, args: Vec<usize> },
    SoAtom { slot: usize, args: Vec<usize> },
    Eq(usize, usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Fo { q: Quant, slot: usize, body: Box<Node> },
    So { q: Quant, slot: usize, arity: usize, name: Arc<str>, body: Box<Node> },
}

struct Compiler<'a> {
    symbols: &'a [(String, usize)],
    fo_slots: HashMap<VarId, usize>,
    so_slots: HashMap<VarId, usize>,
}

impl Compiler<'_> {
    fn fo_slot(&mut self, v: &FoVar) -> usize {
        let next = self.fo_slots.len();
        *self.fo_slots.entry(v.id).or_insert(next)
    }

    fn so_slot(&mut self, v: &SoVar) -> usize {
        let next = self.so_slots.len();
        *self.so_slots.entry(v.id).or_insert(next)
    }

    /// Compiles `f` and returns it with a rough cost estimate used to order
    /// conjunctions and disjunctions cheapest first.
    fn compile(&mut self, f: &Formula) -> (Node, f64) {
        const N: f64 = 3.0;
        match f {
            Formula::True => (Node::Const(true), 0.0),
            Formula::False => (Node::Const(false), 0.0),
            Formula::Rel { symbol, args } => {
                let rel = self.symbols.iter().position(|(s, _)| **s == **symbol).expect("symbol collected");
                let args = args.iter().map(|v| self.fo_slot(v)).collect();
                (Node::Rel { rel, args }, 1.0)
            }
            Formula::SoAtom { var, args } => {
                let slot = self.so_slot(var);
                let args = args.iter().map(|v| self.fo_slot(v)).collect();
                (Node::SoAtom { slot, args }, 1.0)
            }
            Formula::Eq(a, b) => (Node::Eq(self.fo_slot(a), self.fo_slot(b)), 1.0),
            Formula::Not(g) => {
                let (n, c) = self.compile(g);
                (Node::Not(Box::new(n)), c)
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let mut parts: Vec<(Node, f64)> = gs.iter().map(|g| self.compile(g)).collect();
                parts.sort_by(|a, b| a.1.total_cmp(&b.1));
                let cost = parts.iter().map(|p| p.1).sum();
                let nodes = parts.into_iter().map(|p| p.0).collect();
                let node = if matches!(f, Formula::And(_)) { Node::And(nodes) } else { Node::Or(nodes) };
                (node, cost)
            }
            Formula::Fo { q, var, body } => {
                let slot = self.fo_slot(var);
                let (b, c) = self.compile(body);
                (Node::Fo { q: *q, slot, body: Box::new(b) }, 1.0 + N * c)
            }
            Formula::So { q, var, body } => {
                let slot = self.so_slot(var);
                let (b, c) = self.compile(body);
                let space = N.powi(var.arity as i32);
                let node = Node::So {
                    q: *q,
                    slot,
                    arity: var.arity,
                    name: var.name.clone(),
                    body: Box::new(b),
                };
                (node, 1.0 + 2f64.powf(space) * c)
            }
        }
    }
}

fn max_so_arity(node: &Node) -> Option<(usize, Arc<str>)> {
    let own = match node {
        Node::So { arity, name, .. } => Some((*arity, name.clone())),
        _ => None,
    };
    let kids = match node {
        Node::Not(b) | Node::Fo { body: b, .. } | Node::So { body: b, .. } => max_so_arity(b),
        Node::And(gs) | Node::Or(gs) => gs.iter().filter_map(max_so_arity).max_by_key(|p| p.0),
        _ => None,
    };
    [own, kids].into_iter().flatten().max_by_key(|p| p.0)
}

/// A formula compiled once and evaluated on many structures.
#[derive(Debug, Clone)]
pub struct Checker {
    symbols: Vec<(String, usize)>,
    free_fo: Vec<FoVar>,
    free_so: Vec<SoVar>,
    fo_slots: usize,
    so_slots: usize,
    nonempty: Node,
    empty: Node,
    widest_so: Option<(usize, Arc<str>)>,
}

impl Checker {
    pub fn new(f: &Formula) -> Result<Self, McError> {
        let symbols: Vec<(String, usize)> = f.relation_symbols().into_iter().collect();
        let sig = Signature::new(symbols.iter().map(|(s, a)| (s.as_str(), *a)))
            .map_err(|e| FormulaError::UnknownSymbol(e.to_string()))?;
        f.check_atoms(&sig)?;
        let free_fo: Vec<FoVar> = f.free_fo_vars().into_iter().collect();
        let free_so: Vec<SoVar> = f.free_so_vars().into_iter().collect();
        let nnf = to_nnf(f);

        let mut comp = Compiler {
            symbols: &symbols,
            fo_slots: HashMap::new(),
            so_slots: HashMap::new(),
        };
        for v in &free_fo {
            comp.fo_slot(v);
        }
        for v in &free_so {
            comp.so_slot(v);
        }
        let (nonempty, _) = comp.compile(&miniscope(&nnf, true));
        let (empty, _) = comp.compile(&miniscope(&nnf, false));
        let widest_so = max_so_arity(&nonempty);
        Ok(Self {
            fo_slots: comp.fo_slots.len(),
            so_slots: comp.so_slots.len(),
            symbols,
            free_fo,
            free_so,
            nonempty,
            empty,
            widest_so,
        })
    }

    pub fn free_fo_vars(&self) -> &[FoVar] {
        &self.free_fo
    }

    pub fn free_so_vars(&self) -> &[SoVar] {
        &self.free_so
    }

    /// Evaluates a sentence.
    pub fn check(&self, a: &FiniteStructure, cfg: &McConfig) -> Result<Evaluation, McError> {
        self.check_with(a, &Assignment::new(), cfg)
    }

    pub fn check_with(&self, a: &FiniteStructure, asg: &Assignment, cfg: &McConfig) -> Result<Evaluation, McError> {
        let n = a.size();
        let mut fo_vals = Vec::with_capacity(self.free_fo.len());
        for v in &self.free_fo {
            let &val = asg.fo.get(&v.id).ok_or_else(|| McError::Unassigned(v.name.to_string()))?;
            if val >= n {
                return Err(McError::BadAssignment {
                    var: v.name.to_string(),
                    reason: format!("element {val} outside domain of size {n}"),
                });
            }
            fo_vals.push(val);
        }
        let mut so_vals = Vec::with_capacity(self.free_so.len());
        for v in &self.free_so {
            let set = asg.so.get(&v.id).ok_or_else(|| McError::Unassigned(v.name.to_string()))?;
            tuple_space(&v.name, n, v.arity)?;
            let mut mask = 0u64;
            for t in set {
                if t.len() != v.arity || t.iter().any(|&e| e >= n) {
                    return Err(McError::BadAssignment {
                        var: v.name.to_string(),
                        reason: format!("tuple {t:?} does not fit arity {} over domain size {n}", v.arity),
                    });
                }
                mask |= 1 << tuple_index(t, n);
            }
            so_vals.push(mask);
        }
        let shared = AtomicU64::new(0);
        let value = self.run(a, &fo_vals, &so_vals, cfg, &shared)?;
        Ok(Evaluation {
            value,
            nodes: shared.load(Ordering::Relaxed),
        })
    }

    fn run(
        &self,
        a: &FiniteStructure,
        fo_vals: &[usize],
        so_vals: &[u64],
        cfg: &McConfig,
        shared: &AtomicU64,
    ) -> Result<bool, McError> {
        let n = a.size();
        let mut rels = Vec::with_capacity(self.symbols.len());
        for (name, arity) in &self.symbols {
            let rel = a
                .relation(name)
                .ok_or_else(|| FormulaError::UnknownSymbol(name.clone()))?;
            let declared = a.signature().arity(name).unwrap_or(*arity);
            if declared != *arity {
                return Err(FormulaError::ArityMismatch {
                    symbol: name.clone(),
                    expected: declared,
                    found: *arity,
                }
                .into());
            }
            let mut table = vec![false; n.pow(*arity as u32)];
            for t in rel {
                table[tuple_index(t, n)] = true;
            }
            rels.push(table);
        }
        if let Some((arity, name)) = &self.widest_so {
            tuple_space(name, n, *arity)?;
            if *arity >= 2 && n >= 4 {
                log::warn!("SO variable `{name}` of arity {arity} over a domain of size {n}: 2^{} candidate relations", n.pow(*arity as u32));
            }
        }
        let root = if n == 0 { &self.empty } else { &self.nonempty };
        let mut fo = vec![0; self.fo_slots];
        fo[..fo_vals.len()].copy_from_slice(fo_vals);
        let mut so = vec![0; self.so_slots];
        so[..so_vals.len()].copy_from_slice(so_vals);
        let mut run = Run {
            n,
            rels: &rels,
            fo,
            so,
            local: 0,
            chunk: (cfg.budget / 64).clamp(1, 1024),
            shared,
            budget: cfg.budget,
        };
        let result = if cfg.jobs > 1 {
            run.eval_parallel(root, cfg.jobs)
        } else {
            run.eval(root)
        };
        run.flush();
        match result {
            Ok(v) => Ok(v),
            Err(Exhausted) => Err(McError::BudgetExhausted {
                nodes: shared.load(Ordering::Relaxed),
            }),
        }
    }
}

#[derive(Debug)]
struct Exhausted;

#[derive(Clone)]
struct Run<'a> {
    n: usize,
    rels: &'a [Vec<bool>],
    fo: Vec<usize>,
    so: Vec<u64>,
    local: u64,
    chunk: u64,
    shared: &'a AtomicU64,
    budget: u64,
}

impl Run<'_> {
    fn flush(&mut self) {
        self.shared.fetch_add(self.local, Ordering::Relaxed);
        self.local = 0;
    }

    #[inline]
    fn tick(&mut self) -> Result<(), Exhausted> {
        self.local += 1;
        if self.local >= self.chunk {
            let total = self.shared.fetch_add(self.local, Ordering::Relaxed) + self.local;
            self.local = 0;
            if total > self.budget {
                return Err(Exhausted);
            }
        }
        Ok(())
    }

    #[inline]
    fn index(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &s| acc * self.n + self.fo[s])
    }

    fn eval(&mut self, node: &Node) -> Result<bool, Exhausted> {
        Ok(match node {
            Node::Const(b) => *b,
            Node::Rel { rel, args } => self.rels[*rel][self.index(args)],
            Node::SoAtom { slot, args } => self.so[*slot] >> self.index(args) & 1 == 1,
            Node::Eq(a, b) => self.fo[*a] == self.fo[*b],
            Node::Not(g) => !self.eval(g)?,
            Node::And(gs) => {
                for g in gs {
                    if !self.eval(g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Node::Or(gs) => {
                for g in gs {
                    if self.eval(g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Node::Fo { q, slot, body } => {
                let want = *q == Quant::Exists;
                let saved = self.fo[*slot];
                let mut result = !want;
                for e in 0..self.n {
                    self.tick()?;
                    self.fo[*slot] = e;
                    if self.eval(body)? == want {
                        result = want;
                        break;
                    }
                }
                self.fo[*slot] = saved;
                result
            }
            Node::So { q, slot, arity, body, .. } => {
                let want = *q == Quant::Exists;
                let saved = self.so[*slot];
                let mut result = !want;
                for m in SubsetOrder::new(self.n.pow(*arity as u32)) {
                    self.tick()?;
                    self.so[*slot] = m;
                    if self.eval(body)? == want {
                        result = want;
                        break;
                    }
                }
                self.so[*slot] = saved;
                result
            }
        })
    }

    /// Splits the outermost quantifier's candidates across `jobs` workers.
    /// Every candidate is evaluated, so the value never depends on scheduling.
    fn eval_parallel(&mut self, node: &Node, jobs: usize) -> Result<bool, Exhausted> {
        let (q, body, candidates, fo_slot, so_slot): (Quant, &Node, Vec<u64>, Option<usize>, Option<usize>) = match node {
            Node::Fo { q, slot, body } => (*q, body, (0..self.n as u64).collect(), Some(*slot), None),
            Node::So { q, slot, arity, body, .. } => {
                let bits = self.n.pow(*arity as u32);
                if bits > 24 {
                    return self.eval(node);
                }
                (*q, body, SubsetOrder::new(bits).collect(), None, Some(*slot))
            }
            _ => return self.eval(node),
        };
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(p) => p,
            Err(_) => return self.eval(node),
        };
        let base = self.clone();
        let results: Vec<Result<bool, Exhausted>> = pool.install(|| {
            candidates
                .par_iter()
                .map(|&c| {
                    let mut worker = base.clone();
                    worker.local = 0;
                    worker.tick()?;
                    if let Some(s) = fo_slot {
                        worker.fo[s] = c as usize;
                    }
                    if let Some(s) = so_slot {
                        worker.so[s] = c;
                    }
                    let r = worker.eval(body);
                    worker.flush();
                    r
                })
                .collect()
        });
        let want = q == Quant::Exists;
        if results.iter().any(|r| matches!(r, Ok(v) if *v == want)) {
            return Ok(want);
        }
        if results.iter().any(Result::is_err) {
            return Err(Exhausted);
        }
        Ok(!want)
    }
}

// ---------------------------------------------------------------------------
// QCSP

/// A quantified conjunction of atoms over a template signature. Variables are
/// numbered in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QcspInstance {
    names: Vec<String>,
    blocks: Vec<(Quant, Vec<usize>)>,
    atoms: Vec<(Arc<str>, Vec<usize>)>,
}

impl QcspInstance {
    /// `blocks` lists variable names; atom arguments index the variables in
    /// the order they appear across the blocks.
    pub fn new(blocks: Vec<(Quant, Vec<String>)>, atoms: Vec<(Arc<str>, Vec<usize>)>) -> Self {
        let mut names = Vec::new();
        let blocks = blocks
            .into_iter()
            .map(|(q, vs)| {
                let idx = vs
                    .into_iter()
                    .map(|v| {
                        names.push(v);
                        names.len() - 1
                    })
                    .collect();
                (q, idx)
            })
            .collect();
        let inst = Self { names, blocks, atoms };
        debug_assert!(inst.atoms.iter().all(|(_, args)| args.iter().all(|&v| v < inst.names.len())));
        inst
    }

    pub fn blocks(&self) -> &[(Quant, Vec<usize>)] {
        &self.blocks
    }

    pub fn atoms(&self) -> &[(Arc<str>, Vec<usize>)] {
        &self.atoms
    }

    pub fn var_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// One quantifier per block.
    pub fn pattern(&self) -> Vec<Quant> {
        self.blocks.iter().map(|(q, _)| *q).collect()
    }

    /// The structure whose elements are the variables and whose tuples are the atoms.
    pub fn canonical_structure(&self, sig: &Signature) -> Result<FiniteStructure, StructureError> {
        FiniteStructure::new(
            sig.clone(),
            self.num_vars(),
            self.atoms.iter().map(|(s, args)| (s.to_string(), [args.clone()])),
        )
    }
}

/// Game-tree evaluation of a QCSP instance on the template `b`.
pub fn solve_qcsp(b: &FiniteStructure, inst: &QcspInstance) -> Result<bool, McError> {
    let mut checks: Vec<Vec<(&BTreeSet<Tuple>, &[usize])>> = Vec::new();
    let order: Vec<(Quant, usize)> = inst
        .blocks
        .iter()
        .flat_map(|(q, vs)| vs.iter().map(move |&v| (*q, v)))
        .collect();
    let position: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &(_, v))| (v, i)).collect();
    checks.resize_with(order.len(), Vec::new);
    for (sym, args) in &inst.atoms {
        let rel = b.relation(sym).ok_or_else(|| FormulaError::UnknownSymbol(sym.to_string()))?;
        let expected = b.signature().arity(sym).unwrap_or(0);
        if expected != args.len() {
            return Err(FormulaError::ArityMismatch {
                symbol: sym.to_string(),
                expected,
                found: args.len(),
            }
            .into());
        }
        let last = args.iter().map(|v| position[v]).max().expect("arity at least 1");
        checks[last].push((rel, args));
    }
    let mut values = vec![0; inst.num_vars()];
    Ok(qcsp_rec(b.size(), &order, &checks, &mut values, 0))
}

fn qcsp_rec(
    n: usize,
    order: &[(Quant, usize)],
    checks: &[Vec<(&BTreeSet<Tuple>, &[usize])>],
    values: &mut [usize],
    pos: usize,
) -> bool {
    let Some(&(q, v)) = order.get(pos) else {
        return true;
    };
    let want = q == Quant::Exists;
    let mut tuple = Vec::new();
    for e in 0..n {
        values[v] = e;
        let ok = checks[pos].iter().all(|(rel, args)| {
            tuple.clear();
            tuple.extend(args.iter().map(|&a| values[a]));
            rel.contains(&tuple)
        });
        let won = ok && qcsp_rec(n, order, checks, values, pos + 1);
        if won == want {
            return want;
        }
    }
    !want
}

// ---------------------------------------------------------------------------
// Quantified 3-CNF

/// A prenex quantified CNF with variables `1..=num_vars` and DIMACS literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Qbf3Instance {
    num_vars: u32,
    blocks: Vec<(Quant, Vec<u32>)>,
    clauses: Vec<Vec<i32>>,
}

impl Qbf3Instance {
    pub fn new(num_vars: u32, blocks: Vec<(Quant, Vec<u32>)>, clauses: Vec<Vec<i32>>) -> Self {
        Self {
            num_vars,
            blocks,
            clauses,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn blocks(&self) -> &[(Quant, Vec<u32>)] {
        &self.blocks
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// True when the prefix is exactly `(∀ ∃)^n`.
    pub fn has_forall_exists_shape(&self, n: usize) -> bool {
        self.blocks.len() == 2 * n
            && self.blocks.iter().enumerate().all(|(i, (q, _))| {
                *q == if i % 2 == 0 { Quant::Forall } else { Quant::Exists }
            })
    }

    /// Block index (0-based) of each quantified variable.
    pub fn block_of(&self, var: u32) -> Option<usize> {
        self.blocks.iter().position(|(_, vs)| vs.contains(&var))
    }
}

/// Exhaustive alternating search; unquantified variables count as outermost
/// existentials.
pub fn solve_qbf3(inst: &Qbf3Instance) -> bool {
    let quantified: HashSet<u32> = inst.blocks.iter().flat_map(|(_, vs)| vs.iter().copied()).collect();
    let mut free: Vec<u32> = inst
        .clauses
        .iter()
        .flatten()
        .map(|l| l.unsigned_abs())
        .filter(|v| !quantified.contains(v))
        .collect();
    free.sort_unstable();
    free.dedup();
    let order: Vec<(Quant, u32)> = free
        .into_iter()
        .map(|v| (Quant::Exists, v))
        .chain(inst.blocks.iter().flat_map(|(q, vs)| vs.iter().map(move |&v| (*q, v))))
        .collect();
    let max_var = order.iter().map(|p| p.1).max().unwrap_or(0).max(inst.num_vars);
    let mut values: Vec<Option<bool>> = vec![None; max_var as usize + 1];
    qbf_rec(&order, &inst.clauses, &mut values, 0)
}

fn qbf_rec(order: &[(Quant, u32)], clauses: &[Vec<i32>], values: &mut [Option<bool>], pos: usize) -> bool {
    let falsified = clauses.iter().any(|c| {
        c.iter().all(|&l| values[l.unsigned_abs() as usize] == Some(l < 0))
    });
    if falsified {
        return false;
    }
    let Some(&(q, v)) = order.get(pos) else {
        return true;
    };
    let want = q == Quant::Exists;
    for val in [false, true] {
        values[v as usize] = Some(val);
        if qbf_rec(order, clauses, values, pos + 1) == want {
            values[v as usize] = None;
            return want;
        }
    }
    values[v as usize] = None;
    !want
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_formula;

    fn sig() -> Signature {
        Signature::new([("E", 2), ("P", 1)]).unwrap()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> FiniteStructure {
        let sig = Signature::new([("E", 2)]).unwrap();
        FiniteStructure::new(sig, n, [("E", edges.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>())]).unwrap()
    }

    #[test]
    fn subset_order_by_popcount() {
        let order: Vec<u64> = SubsetOrder::new(3).collect();
        assert_eq!(order, vec![0, 1, 2, 4, 3, 5, 6, 7]);
        assert_eq!(SubsetOrder::new(0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(SubsetOrder::new(10).count(), 1024);
    }

    #[test]
    fn trivial_so_sentence() {
        let f = parse_formula("(exists2 (S 1) (true))", &sig()).unwrap();
        for n in 0..3 {
            assert!(mc_so(&graph(n, &[]), &f, DEFAULT_BUDGET).unwrap());
        }
    }

    #[test]
    fn empty_domain_quantifiers() {
        let e = graph(0, &[]);
        let all = parse_formula("(forall x (atom E (x x)))", &sig()).unwrap();
        let some = parse_formula("(exists x (eq x x))", &sig()).unwrap();
        let vacuous = parse_formula("(forall x (exists y (eq x y)))", &sig()).unwrap();
        assert!(mc_so(&e, &all, DEFAULT_BUDGET).unwrap());
        assert!(!mc_so(&e, &some, DEFAULT_BUDGET).unwrap());
        assert!(mc_so(&e, &vacuous, DEFAULT_BUDGET).unwrap());
        // ∀x (∃y E(y,y)) ∨ ... must not be miniscoped to ∃y E(y,y) on an empty domain
        let f = parse_formula("(forall x (exists y (atom E (y y))))", &sig()).unwrap();
        assert!(mc_so(&e, &f, DEFAULT_BUDGET).unwrap());
        assert!(!mc_so(&graph(1, &[]), &f, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn budget_is_reported() {
        let f = parse_formula("(forall2 (S 2) (forall2 (T 2) (forall x (or (atom S (x x)) (not (atom S (x x))) (atom T (x x))))))", &sig()).unwrap();
        let err = mc_so(&graph(2, &[]), &f, 10).unwrap_err();
        assert!(matches!(err, McError::BudgetExhausted { nodes } if nodes > 10));
    }

    #[test]
    fn oversized_so_space_is_an_error() {
        let f = parse_formula("(exists2 (S 3) (forall x (atom S (x x x))))", &sig()).unwrap();
        assert!(matches!(mc_so(&graph(4, &[]), &f, DEFAULT_BUDGET), Err(McError::SoTooLarge { tuples: 64, .. })));
    }

    #[test]
    fn witness_replays() {
        let f = parse_formula(
            "(exists2 (S 1) (and (exists x (atom S (x))) (forall x (or (not (atom S (x))) (exists y (and (atom S (y)) (atom E (x y))))))))",
            &sig(),
        )
        .unwrap();
        let cycle = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let w = mc_so_witness(&cycle, &f, DEFAULT_BUDGET).unwrap().unwrap();
        assert_eq!(w[0].1, BTreeSet::from([vec![0], vec![1], vec![2]]));
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(mc_so_witness(&path, &f, DEFAULT_BUDGET).unwrap(), None);
    }

    #[test]
    fn free_variables_from_assignment() {
        let f = parse_formula("(forall y (or (not (atom E (y y))) (atom P (y))))", &sig()).unwrap();
        let (_, body) = f.split_fo_prefix();
        let y = match &f {
            Formula::Fo { var, .. } => var.clone(),
            _ => unreachable!(),
        };
        let a = FiniteStructure::new(sig(), 2, [("E", vec![vec![1, 1]]), ("P", vec![vec![0]])]).unwrap();
        let cfg = McConfig::default();
        let at = |v| evaluate_with(&a, body, &Assignment::new().with_fo(&y, v), &cfg).unwrap().value;
        assert!(at(0));
        assert!(!at(1));
        assert!(matches!(evaluate_with(&a, body, &Assignment::new(), &cfg), Err(McError::Unassigned(_))));
    }

    #[test]
    fn parallel_matches_sequential() {
        let f = parse_formula("(exists2 (S 1) (forall x (or (atom S (x)) (atom E (x x)))))", &sig()).unwrap();
        let g = graph(3, &[(0, 0)]);
        let seq = evaluate(&g, &f, &McConfig::default()).unwrap().value;
        let par = evaluate(&g, &f, &McConfig { jobs: 4, ..Default::default() }).unwrap().value;
        assert_eq!(seq, par);
    }

    #[test]
    fn miniscoping_splits_independent_parts() {
        let f = parse_formula("(forall x (forall y (or (atom P (x)) (atom P (y)))))", &sig()).unwrap();
        let m = miniscope(&f, true);
        assert!(matches!(m, Formula::Or(_)));
    }

    #[test]
    fn qcsp_examples() {
        let s = Signature::new([("R", 2)]).unwrap();
        let b = FiniteStructure::new(s, 2, [("R", vec![vec![0, 1], vec![1, 0], vec![1, 1]])]).unwrap();
        let fe = QcspInstance::new(
            vec![(Quant::Forall, vec!["x".into()]), (Quant::Exists, vec!["y".into()])],
            vec![("R".into(), vec![0, 1])],
        );
        assert!(solve_qcsp(&b, &fe).unwrap());
        let ff = QcspInstance::new(vec![(Quant::Forall, vec!["x".into(), "y".into()])], vec![("R".into(), vec![0, 1])]);
        assert!(!solve_qcsp(&b, &ff).unwrap());
        let empty = QcspInstance::new(vec![(Quant::Forall, vec!["x".into()])], vec![]);
        assert!(solve_qcsp(&b, &empty).unwrap());
    }

    #[test]
    fn qbf_examples() {
        let blocks = vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])];
        assert!(solve_qbf3(&Qbf3Instance::new(2, blocks.clone(), vec![vec![1, 2], vec![-1, -2]])));
        assert!(!solve_qbf3(&Qbf3Instance::new(2, blocks.clone(), vec![vec![1, 2], vec![-2]])));
        assert!(solve_qbf3(&Qbf3Instance::new(2, blocks, vec![])));
    }
}
