//! Source-to-source transformations: the superstructure closure, the
//! surjective-hom closure, relativization to a unary predicate, and the CSP
//! hammer.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::classes::{classify, Class};
use crate::formula::{FoVar, Formula, FormulaError, Quant, SoVar, VarId};
use crate::normalize::{self, read_clause_form, ClauseMode, NormalizeError};
use crate::signature::fresh_name;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("input must be a CNF-normalized prenex sentence: {0}")]
    NotCnf(NormalizeError),
    #[error("input must be an SO prefix over a first-order body")]
    NotSoPrenex,
    #[error("restriction needs a first-order formula; found an SO quantifier")]
    SoQuantifier,
    #[error("variable `{0}` has no first-order binder")]
    FreeVariable(String),
    #[error("the recognizer does not accept the input as {0}")]
    Rejected(Class),
    #[error("{0} check was indeterminate (clause cap exceeded)")]
    Indeterminate(Class),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Adds a fresh existential SO variable `S`, a fresh existential FO variable
/// `z` with the clause `S(z)`, a clause `¬S(x1) ∨ … ∨ ¬S(xk) ∨ S(y)` per
/// existential `y`, and `¬S(x)` for every universal `x` to every clause.
pub fn sup_transform(f: &Formula) -> Result<Formula, TransformError> {
    let cf = read_clause_form(f, ClauseMode::Cnf).map_err(TransformError::NotCnf)?;
    if !f.is_sentence() {
        return Err(TransformError::FreeVariable(first_free(f)));
    }
    let s = SoVar::fresh("S", 1);
    let z = FoVar::fresh("z");
    let universals: Vec<&FoVar> = cf.fo_prefix.iter().filter(|(q, _)| *q == Quant::Forall).map(|(_, v)| v).collect();
    let existentials: Vec<&FoVar> = cf.fo_prefix.iter().filter(|(q, _)| *q == Quant::Exists).map(|(_, v)| v).collect();
    let not_s = |x: &FoVar| Formula::not(Formula::so_atom(&s, &[x]));
    let guards: Vec<Formula> = universals.iter().map(|x| not_s(x)).collect();

    let mut clauses = vec![vec![Formula::so_atom(&s, &[&z])]];
    for y in &existentials {
        let mut c = guards.clone();
        c.push(Formula::so_atom(&s, &[y]));
        clauses.push(c);
    }
    for c in &cf.clauses {
        let mut c = c.clone();
        c.extend(guards.iter().cloned());
        clauses.push(c);
    }
    let mut so = vec![(Quant::Exists, s.clone())];
    so.extend(cf.so_prefix.iter().cloned());
    let mut fo = vec![(Quant::Exists, z)];
    fo.extend(cf.fo_prefix.iter().cloned());
    let matrix = normalize::clauses_to_formula(&clauses, ClauseMode::Cnf);
    Ok(Formula::with_so_prefix(&so, Formula::with_fo_prefix(&fo, matrix)))
}

/// For every relation symbol `R` of the sentence: a fresh existential SO
/// variable `R_p`, every `R`-atom replaced by `R_p`, and the conjunct
/// `∀x̄ (¬R_p(x̄) ∨ R(x̄))`.
pub fn shom_transform(f: &Formula) -> Result<Formula, TransformError> {
    let cf = read_clause_form(f, ClauseMode::Cnf).map_err(TransformError::NotCnf)?;
    if !f.is_sentence() {
        return Err(TransformError::FreeVariable(first_free(f)));
    }
    let symbols = f.relation_symbols();
    let shrunk: Vec<(String, SoVar)> = symbols
        .iter()
        .map(|(name, &arity)| (name.clone(), SoVar::fresh(&format!("{name}_p"), arity)))
        .collect();
    let by_name: HashMap<&str, &SoVar> = shrunk.iter().map(|(n, v)| (n.as_str(), v)).collect();
    let matrix = cf.matrix().map_atoms(&mut |a| match a {
        Formula::Rel { symbol, args } => by_name.get(&**symbol).map(|v| Formula::SoAtom {
            var: (*v).clone(),
            args: args.clone(),
        }),
        _ => None,
    });
    let mut parts = vec![Formula::with_fo_prefix(&cf.fo_prefix, matrix)];
    for (name, var) in &shrunk {
        let xs: Vec<FoVar> = (1..=var.arity).map(|i| FoVar::fresh(&format!("x{i}"))).collect();
        let refs: Vec<&FoVar> = xs.iter().collect();
        let clause = Formula::Or(vec![Formula::not(Formula::so_atom(var, &refs)), Formula::rel(name, &refs)]);
        parts.push(Formula::fo_block(Quant::Forall, xs, clause));
    }
    let mut so: Vec<(Quant, SoVar)> = shrunk.into_iter().map(|(_, v)| (Quant::Exists, v)).collect();
    so.extend(cf.so_prefix.iter().cloned());
    Ok(Formula::with_so_prefix(&so, Formula::and_raw(parts)))
}

/// The unary predicate a formula is relativized to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictTarget {
    Symbol(String),
    SoVar(SoVar),
}

impl RestrictTarget {
    fn atom(&self, x: &FoVar) -> Formula {
        match self {
            RestrictTarget::Symbol(name) => Formula::rel(name, &[x]),
            RestrictTarget::SoVar(v) => Formula::so_atom(v, &[x]),
        }
    }
}

/// `(∀z ¬U(z)) ∨ Φ'`, where `Φ'` is [`relativize`]`(f)`.
pub fn restrict(f: &Formula, target: &RestrictTarget) -> Result<Formula, TransformError> {
    let body = relativize(f, target)?;
    let z = FoVar::fresh("z");
    let empty = Formula::forall(z.clone(), Formula::not(target.atom(&z)));
    Ok(Formula::or_raw(vec![empty, body]))
}

/// The NNF of `f` with every literal `L` replaced by
/// `(⋁_{universal xi} ¬U(xi)) ∨ ((⋀_{existential xi} U(xi)) ∧ L)`.
/// On a nonempty `U` this says the substructure on `U` satisfies `f`.
/// SO atoms may occur free; SO quantifiers may not.
pub fn relativize(f: &Formula, target: &RestrictTarget) -> Result<Formula, TransformError> {
    if !f.is_first_order() {
        return Err(TransformError::SoQuantifier);
    }
    if let Some(v) = f.free_fo_vars().into_iter().next() {
        return Err(TransformError::FreeVariable(v.name.to_string()));
    }
    let nnf = normalize::to_nnf(f);
    let mut binders = HashMap::new();
    Ok(guard(&nnf, target, &mut binders))
}

fn guard(f: &Formula, target: &RestrictTarget, binders: &mut HashMap<VarId, Quant>) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| guard(g, target, binders)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| guard(g, target, binders)).collect()),
        Formula::Fo { q, var, body } => {
            binders.insert(var.id, *q);
            let b = guard(body, target, binders);
            binders.remove(&var.id);
            Formula::fo(*q, var.clone(), b)
        }
        lit => {
            let mut universal: Vec<FoVar> = Vec::new();
            let mut existential: Vec<FoVar> = Vec::new();
            for v in literal_args(lit) {
                let bucket = match binders[&v.id] {
                    Quant::Forall => &mut universal,
                    Quant::Exists => &mut existential,
                };
                if !bucket.contains(&v) {
                    bucket.push(v);
                }
            }
            let mut conj: Vec<Formula> = existential.iter().map(|x| target.atom(x)).collect();
            conj.push(lit.clone());
            let mut disj: Vec<Formula> = universal.iter().map(|x| Formula::not(target.atom(x))).collect();
            disj.push(Formula::and(conj));
            Formula::or(disj)
        }
    }
}

fn literal_args(lit: &Formula) -> Vec<FoVar> {
    match lit {
        Formula::Not(inner) => literal_args(inner),
        Formula::Rel { args, .. } | Formula::SoAtom { args, .. } => args.clone(),
        Formula::Eq(a, b) => vec![a.clone(), b.clone()],
        _ => vec![],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HammerOptions {
    /// Skip the ∀-restricted/negative recognizer check.
    pub force: bool,
    pub size_cap: usize,
}

impl Default for HammerOptions {
    fn default() -> Self {
        Self {
            force: false,
            size_cap: normalize::DEFAULT_SIZE_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Hammered {
    #[serde(serialize_with = "serialize_display")]
    pub formula: Formula,
    /// Name of the fresh binary symbol interpreted as disequality.
    pub n_symbol: String,
}

fn serialize_display<S: serde::Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

/// `Q1S1…QkSk ∀U Q(k+1)S(k+1)…QnSn . restrict(Ψ¬edge ∨ (Ψ¬loop ∧ Ψ), U)`.
///
/// `U` is placed after the maximal run of universal SO quantifiers that
/// starts at the first universal one (appended when there is none). `N`
/// avoids every symbol of the input and every name in `reserved`.
pub fn csp_hammer(f: &Formula, opts: HammerOptions, reserved: &[String]) -> Result<Hammered, TransformError> {
    let (prefix, psi) = f.split_so_prefix();
    if !psi.is_first_order() {
        return Err(TransformError::NotSoPrenex);
    }
    if !f.is_sentence() {
        return Err(TransformError::FreeVariable(first_free(f)));
    }
    if !opts.force {
        for cls in [Class::ForallRestricted, Class::Negative] {
            let v = classify(f, cls, opts.size_cap)?;
            if v.indeterminate {
                return Err(TransformError::Indeterminate(cls));
            }
            if !v.accepted {
                return Err(TransformError::Rejected(cls));
            }
        }
    }
    let taken: BTreeSet<String> = f.relation_symbols().into_keys().chain(reserved.iter().cloned()).collect();
    let n_symbol = fresh_name("N", |n| taken.contains(n));
    let u = SoVar::fresh("U", 1);

    let (x, y) = (FoVar::fresh("x"), FoVar::fresh("y"));
    let no_edge = Formula::exists(
        x.clone(),
        Formula::exists(
            y.clone(),
            Formula::And(vec![Formula::not(Formula::eq(&x, &y)), Formula::not(Formula::rel(&n_symbol, &[&x, &y]))]),
        ),
    );
    let w = FoVar::fresh("x");
    let no_loop = Formula::forall(w.clone(), Formula::not(Formula::rel(&n_symbol, &[&w, &w])));
    let inner = Formula::Or(vec![no_edge, Formula::And(vec![no_loop, psi.clone()])]);
    let body = restrict(&inner, &RestrictTarget::SoVar(u.clone()))?;

    let mut pos = prefix.len();
    if let Some(first) = prefix.iter().position(|(q, _)| *q == Quant::Forall) {
        pos = first;
        while pos < prefix.len() && prefix[pos].0 == Quant::Forall {
            pos += 1;
        }
    }
    let mut new_prefix = prefix.clone();
    new_prefix.insert(pos, (Quant::Forall, u));
    Ok(Hammered {
        formula: Formula::with_so_prefix(&new_prefix, body),
        n_symbol,
    })
}

fn first_free(f: &Formula) -> String {
    f.free_fo_vars()
        .into_iter()
        .map(|v| v.name.to_string())
        .chain(f.free_so_vars().into_iter().map(|v| v.name.to_string()))
        .next()
        .unwrap_or_default()
}
