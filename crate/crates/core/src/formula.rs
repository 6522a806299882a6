//! The second-order formula AST.
//!
//! Every binder owns a process-wide unique [`VarId`]; surface names are kept
//! only for printing. Two variables are equal iff their ids are equal, so a
//! tree built through [`FoVar::fresh`]/[`SoVar::fresh`] or the parser is
//! alpha-normalized by construction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::signature::Signature;
use crate::structure::Tuple;

pub type VarId = u32;

static NEXT_ID: AtomicU32 = AtomicU32::new(1);

pub(crate) fn fresh_id() -> VarId {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn dual(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Quant::Exists => "∃",
            Quant::Forall => "∀",
        }
    }
}

/// A first-order variable.
#[derive(Clone, Debug, Serialize)]
pub struct FoVar {
    pub id: VarId,
    pub name: Arc<str>,
}

impl FoVar {
    pub fn fresh(name: &str) -> Self {
        Self {
            id: fresh_id(),
            name: name.into(),
        }
    }
}

impl PartialEq for FoVar {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for FoVar {}
impl Hash for FoVar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}
impl PartialOrd for FoVar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FoVar {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

/// A second-order (relation) variable of fixed arity.
#[derive(Clone, Debug, Serialize)]
pub struct SoVar {
    pub id: VarId,
    pub name: Arc<str>,
    pub arity: usize,
}

impl SoVar {
    pub fn fresh(name: &str, arity: usize) -> Self {
        Self {
            id: fresh_id(),
            name: name.into(),
            arity,
        }
    }
}

impl PartialEq for SoVar {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for SoVar {}
impl Hash for SoVar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}
impl PartialOrd for SoVar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SoVar {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Rel { symbol: Arc<str>, args: Vec<FoVar> },
    SoAtom { var: SoVar, args: Vec<FoVar> },
    Eq(FoVar, FoVar),
    Not(Box<Formula>),
    /// At least two conjuncts (use [`Formula::and`]).
    And(Vec<Formula>),
    /// At least two disjuncts (use [`Formula::or`]).
    Or(Vec<Formula>),
    Fo { q: Quant, var: FoVar, body: Box<Formula> },
    So { q: Quant, var: SoVar, body: Box<Formula> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("free first-order variable `{0}`")]
    FreeFoVar(String),
    #[error("free second-order variable `{0}`")]
    FreeSoVar(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
}

impl Formula {
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Conjunction that keeps `True`/`False` operands and nested structure as given.
    pub fn and_raw(parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::True,
            1 => parts.into_iter().next().unwrap(),
            _ => Formula::And(parts),
        }
    }

    pub fn or_raw(parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.into_iter().next().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn rel(symbol: &str, args: &[&FoVar]) -> Formula {
        Formula::Rel {
            symbol: symbol.into(),
            args: args.iter().map(|v| (*v).clone()).collect(),
        }
    }

    pub fn so_atom(var: &SoVar, args: &[&FoVar]) -> Formula {
        debug_assert_eq!(var.arity, args.len());
        Formula::SoAtom {
            var: var.clone(),
            args: args.iter().map(|v| (*v).clone()).collect(),
        }
    }

    pub fn eq(a: &FoVar, b: &FoVar) -> Formula {
        Formula::Eq(a.clone(), b.clone())
    }

    pub fn fo(q: Quant, var: FoVar, body: Formula) -> Formula {
        Formula::Fo {
            q,
            var,
            body: Box::new(body),
        }
    }

    pub fn exists(var: FoVar, body: Formula) -> Formula {
        Self::fo(Quant::Exists, var, body)
    }

    pub fn forall(var: FoVar, body: Formula) -> Formula {
        Self::fo(Quant::Forall, var, body)
    }

    /// `Q v1 Q v2 ... body` over a block of first-order variables.
    pub fn fo_block(q: Quant, vars: impl IntoIterator<Item = FoVar>, body: Formula) -> Formula {
        let vars: Vec<FoVar> = vars.into_iter().collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::fo(q, v, acc))
    }

    pub fn so(q: Quant, var: SoVar, body: Formula) -> Formula {
        Formula::So {
            q,
            var,
            body: Box::new(body),
        }
    }

    /// Wraps `body` in an SO prefix, outermost first.
    pub fn with_so_prefix(prefix: &[(Quant, SoVar)], body: Formula) -> Formula {
        prefix
            .iter()
            .rev()
            .fold(body, |acc, (q, v)| Formula::so(*q, v.clone(), acc))
    }

    pub fn with_fo_prefix(prefix: &[(Quant, FoVar)], body: Formula) -> Formula {
        prefix
            .iter()
            .rev()
            .fold(body, |acc, (q, v)| Formula::fo(*q, v.clone(), acc))
    }

    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Rel { .. } | Formula::SoAtom { .. } | Formula::Eq(..) => true,
            Formula::Not(inner) => matches!(
                **inner,
                Formula::Rel { .. } | Formula::SoAtom { .. } | Formula::Eq(..)
            ),
            _ => false,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Rel { .. } | Formula::SoAtom { .. } | Formula::Eq(..))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Fo { .. } | Formula::So { .. } => false,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            _ => true,
        }
    }

    /// True when no SO binder occurs anywhere in the tree.
    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::So { .. } => false,
            Formula::Fo { body, .. } => body.is_first_order(),
            Formula::Not(f) => f.is_first_order(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_first_order),
            _ => true,
        }
    }

    /// Leading SO quantifiers and the remaining body.
    pub fn split_so_prefix(&self) -> (Vec<(Quant, SoVar)>, &Formula) {
        let mut prefix = Vec::new();
        let mut cur = self;
        while let Formula::So { q, var, body } = cur {
            prefix.push((*q, var.clone()));
            cur = body;
        }
        (prefix, cur)
    }

    /// Leading FO quantifiers and the remaining body.
    pub fn split_fo_prefix(&self) -> (Vec<(Quant, FoVar)>, &Formula) {
        let mut prefix = Vec::new();
        let mut cur = self;
        while let Formula::Fo { q, var, body } = cur {
            prefix.push((*q, var.clone()));
            cur = body;
        }
        (prefix, cur)
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Not(f) => vec![f],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Fo { body, .. } | Formula::So { body, .. } => vec![body],
            _ => vec![],
        }
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn free_fo_vars(&self) -> BTreeSet<FoVar> {
        let mut out = BTreeSet::new();
        self.collect_free_fo(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_fo(&self, bound: &mut Vec<VarId>, out: &mut BTreeSet<FoVar>) {
        let mut visit = |v: &FoVar, bound: &Vec<VarId>| {
            if !bound.contains(&v.id) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Rel { args, .. } | Formula::SoAtom { args, .. } => {
                for a in args {
                    visit(a, bound);
                }
            }
            Formula::Eq(a, b) => {
                visit(a, bound);
                visit(b, bound);
            }
            Formula::Fo { var, body, .. } => {
                bound.push(var.id);
                body.collect_free_fo(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free_fo(bound, out);
                }
            }
        }
    }

    pub fn free_so_vars(&self) -> BTreeSet<SoVar> {
        let mut out = BTreeSet::new();
        self.collect_free_so(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_so(&self, bound: &mut Vec<VarId>, out: &mut BTreeSet<SoVar>) {
        match self {
            Formula::SoAtom { var, .. } => {
                if !bound.contains(&var.id) {
                    out.insert(var.clone());
                }
            }
            Formula::So { var, body, .. } => {
                bound.push(var.id);
                body.collect_free_so(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free_so(bound, out);
                }
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_fo_vars().is_empty() && self.free_so_vars().is_empty()
    }

    /// Relation symbols occurring in atoms, with the argument count of their first use.
    pub fn relation_symbols(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.visit(&mut |f| {
            if let Formula::Rel { symbol, args } = f {
                out.entry(symbol.to_string()).or_insert(args.len());
            }
        });
        out
    }

    /// Calls `f` on every node in pre-order.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Checks that the formula is a sentence over `sig` and that every atom has the right arity.
    pub fn check_sentence(&self, sig: &Signature) -> Result<(), FormulaError> {
        if let Some(v) = self.free_fo_vars().into_iter().next() {
            return Err(FormulaError::FreeFoVar(v.name.to_string()));
        }
        if let Some(v) = self.free_so_vars().into_iter().next() {
            return Err(FormulaError::FreeSoVar(v.name.to_string()));
        }
        self.check_atoms(sig)
    }

    pub fn check_atoms(&self, sig: &Signature) -> Result<(), FormulaError> {
        let mut err = None;
        self.visit(&mut |f| {
            if err.is_some() {
                return;
            }
            match f {
                Formula::Rel { symbol, args } => match sig.arity(symbol) {
                    None => err = Some(FormulaError::UnknownSymbol(symbol.to_string())),
                    Some(a) if a != args.len() => {
                        err = Some(FormulaError::ArityMismatch {
                            symbol: symbol.to_string(),
                            expected: a,
                            found: args.len(),
                        })
                    }
                    _ => {}
                },
                Formula::SoAtom { var, args } if var.arity != args.len() => {
                    err = Some(FormulaError::ArityMismatch {
                        symbol: var.name.to_string(),
                        expected: var.arity,
                        found: args.len(),
                    })
                }
                _ => {}
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Replaces every binder by a fresh one (same surface name).
    pub fn refresh(&self) -> Formula {
        self.rename_binders(&mut |name, _| name.to_string(), &mut HashMap::new(), &mut HashMap::new())
    }

    /// Alpha-canonical form: binders renumbered and renamed by position of first
    /// occurrence (`x1, x2, ...` for FO, `S1, S2, ...` for SO). Alpha-variants map to
    /// identical trees.
    pub fn canonical(&self) -> Formula {
        let mut fo_count = 0u32;
        let mut so_count = 0u32;
        let mut fo_map = HashMap::new();
        let mut so_map = HashMap::new();
        self.canonical_rec(&mut fo_count, &mut so_count, &mut fo_map, &mut so_map)
    }

    fn canonical_rec(
        &self,
        fo_count: &mut u32,
        so_count: &mut u32,
        fo_map: &mut HashMap<VarId, FoVar>,
        so_map: &mut HashMap<VarId, SoVar>,
    ) -> Formula {
        let fo = |v: &FoVar, m: &HashMap<VarId, FoVar>| m.get(&v.id).cloned().unwrap_or_else(|| v.clone());
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Rel { symbol, args } => Formula::Rel {
                symbol: symbol.clone(),
                args: args.iter().map(|a| fo(a, fo_map)).collect(),
            },
            Formula::SoAtom { var, args } => Formula::SoAtom {
                var: so_map.get(&var.id).cloned().unwrap_or_else(|| var.clone()),
                args: args.iter().map(|a| fo(a, fo_map)).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(fo(a, fo_map), fo(b, fo_map)),
            Formula::Not(f) => Formula::not(f.canonical_rec(fo_count, so_count, fo_map, so_map)),
            Formula::And(fs) => Formula::And(
                fs.iter()
                    .map(|f| f.canonical_rec(fo_count, so_count, fo_map, so_map))
                    .collect(),
            ),
            Formula::Or(fs) => Formula::Or(
                fs.iter()
                    .map(|f| f.canonical_rec(fo_count, so_count, fo_map, so_map))
                    .collect(),
            ),
            Formula::Fo { q, var, body } => {
                *fo_count += 1;
                let nv = FoVar {
                    id: *fo_count,
                    name: format!("x{fo_count}").into(),
                };
                let prev = fo_map.insert(var.id, nv.clone());
                let body = body.canonical_rec(fo_count, so_count, fo_map, so_map);
                restore(fo_map, var.id, prev);
                Formula::fo(*q, nv, body)
            }
            Formula::So { q, var, body } => {
                *so_count += 1;
                let nv = SoVar {
                    id: 1_000_000 + *so_count,
                    name: format!("S{so_count}").into(),
                    arity: var.arity,
                };
                let prev = so_map.insert(var.id, nv.clone());
                let body = body.canonical_rec(fo_count, so_count, fo_map, so_map);
                restore(so_map, var.id, prev);
                Formula::so(*q, nv, body)
            }
        }
    }

    fn rename_binders(
        &self,
        name_of: &mut impl FnMut(&str, bool) -> String,
        fo_map: &mut HashMap<VarId, FoVar>,
        so_map: &mut HashMap<VarId, SoVar>,
    ) -> Formula {
        let fo = |v: &FoVar, m: &HashMap<VarId, FoVar>| m.get(&v.id).cloned().unwrap_or_else(|| v.clone());
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Rel { symbol, args } => Formula::Rel {
                symbol: symbol.clone(),
                args: args.iter().map(|a| fo(a, fo_map)).collect(),
            },
            Formula::SoAtom { var, args } => Formula::SoAtom {
                var: so_map.get(&var.id).cloned().unwrap_or_else(|| var.clone()),
                args: args.iter().map(|a| fo(a, fo_map)).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(fo(a, fo_map), fo(b, fo_map)),
            Formula::Not(f) => Formula::not(f.rename_binders(name_of, fo_map, so_map)),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|f| f.rename_binders(name_of, fo_map, so_map)).collect())
            }
            Formula::Or(fs) => {
                Formula::Or(fs.iter().map(|f| f.rename_binders(name_of, fo_map, so_map)).collect())
            }
            Formula::Fo { q, var, body } => {
                let nv = FoVar::fresh(&name_of(&var.name, false));
                let prev = fo_map.insert(var.id, nv.clone());
                let body = body.rename_binders(name_of, fo_map, so_map);
                restore(fo_map, var.id, prev);
                Formula::fo(*q, nv, body)
            }
            Formula::So { q, var, body } => {
                let nv = SoVar::fresh(&name_of(&var.name, true), var.arity);
                let prev = so_map.insert(var.id, nv.clone());
                let body = body.rename_binders(name_of, fo_map, so_map);
                restore(so_map, var.id, prev);
                Formula::so(*q, nv, body)
            }
        }
    }

    /// Alpha-equivalence: equal up to a consistent renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.canonical() == other.canonical()
    }

    /// Replaces every atom of the free SO variable `var` by the relation symbol `symbol`.
    pub fn substitute_so(&self, var: &SoVar, symbol: &str) -> Formula {
        self.map_atoms(&mut |f| match f {
            Formula::SoAtom { var: v, args } if v == var => Some(Formula::Rel {
                symbol: symbol.into(),
                args: args.clone(),
            }),
            _ => None,
        })
    }

    /// Rebuilds the tree, replacing atoms for which `f` returns `Some`.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Formula) -> Option<Formula>) -> Formula {
        match self {
            Formula::Rel { .. } | Formula::SoAtom { .. } | Formula::Eq(..) => {
                f(self).unwrap_or_else(|| self.clone())
            }
            Formula::True | Formula::False => self.clone(),
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Fo { q, var, body } => Formula::fo(*q, var.clone(), body.map_atoms(f)),
            Formula::So { q, var, body } => Formula::so(*q, var.clone(), body.map_atoms(f)),
        }
    }
}

fn restore<V>(map: &mut HashMap<VarId, V>, key: VarId, prev: Option<V>) {
    match prev {
        Some(p) => {
            map.insert(key, p);
        }
        None => {
            map.remove(&key);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::serialize_formula(self))
    }
}

/// A partial assignment of first-order and second-order variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub fo: HashMap<VarId, usize>,
    pub so: HashMap<VarId, BTreeSet<Tuple>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fo(mut self, var: &FoVar, value: usize) -> Self {
        self.fo.insert(var.id, value);
        self
    }

    pub fn with_so(mut self, var: &SoVar, value: BTreeSet<Tuple>) -> Self {
        self.so.insert(var.id, value);
        self
    }
}

/// A nonempty quantifier pattern, one entry per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Prefix(Vec<Quant>);

impl Prefix {
    pub fn new(quants: Vec<Quant>) -> Option<Self> {
        (!quants.is_empty()).then_some(Self(quants))
    }

    /// Parses strings such as `"AE"`, `"forall exists"` or `"∀∃"`.
    pub fn parse(s: &str) -> Option<Self> {
        let mut out = Vec::new();
        let words: Vec<&str> = s.split_whitespace().collect();
        if words.len() > 1 || matches!(words.first(), Some(&"forall") | Some(&"exists")) {
            for w in words {
                out.push(match w {
                    "forall" | "a" | "A" => Quant::Forall,
                    "exists" | "e" | "E" => Quant::Exists,
                    _ => return None,
                });
            }
        } else {
            for c in s.trim().chars() {
                out.push(match c {
                    'A' | 'a' | '∀' => Quant::Forall,
                    'E' | 'e' | '∃' => Quant::Exists,
                    _ => return None,
                });
            }
        }
        Self::new(out)
    }

    pub fn quants(&self) -> &[Quant] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn has_universal(&self) -> bool {
        self.0.contains(&Quant::Forall)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.0 {
            f.write_str(q.symbol())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smart_constructors_collapse() {
        assert_eq!(Formula::and(vec![]), Formula::True);
        assert_eq!(Formula::or(vec![]), Formula::False);
        let x = FoVar::fresh("x");
        let p = Formula::rel("P", &[&x]);
        assert_eq!(Formula::and(vec![p.clone()]), p);
        assert_eq!(Formula::and(vec![Formula::True, p.clone()]), p);
    }

    #[test]
    fn alpha_variants_are_equivalent() {
        let x = FoVar::fresh("x");
        let y = FoVar::fresh("y");
        let a = Formula::exists(x.clone(), Formula::rel("P", &[&x]));
        let b = Formula::exists(y.clone(), Formula::rel("P", &[&y]));
        assert_ne!(a, b);
        assert!(a.alpha_eq(&b));
        let c = Formula::forall(y.clone(), Formula::rel("P", &[&y]));
        assert!(!a.alpha_eq(&c));
        assert!(a.alpha_eq(&a.refresh()));
    }

    #[test]
    fn free_variables() {
        let x = FoVar::fresh("x");
        let s = SoVar::fresh("S", 1);
        let f = Formula::so_atom(&s, &[&x]);
        assert_eq!(f.free_fo_vars().len(), 1);
        assert_eq!(f.free_so_vars().len(), 1);
        let g = Formula::so(Quant::Exists, s.clone(), Formula::forall(x.clone(), f));
        assert!(g.is_sentence());
    }

    #[test]
    fn prefix_parsing() {
        assert_eq!(
            Prefix::parse("AE").unwrap().quants(),
            &[Quant::Forall, Quant::Exists]
        );
        assert_eq!(Prefix::parse("forall exists").unwrap().len(), 2);
        assert!(Prefix::parse("").is_none());
        assert!(Prefix::parse("AX").is_none());
    }
}
