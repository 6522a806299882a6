//! Semantics-preserving rewrites: NNF, prenex form, clause normal forms of the
//! matrix, and prefix dualization.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{FoVar, Formula, Quant, SoVar, VarId};

pub const DEFAULT_SIZE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("clause normal form would need {attempted} clauses (cap {cap})")]
    BlowUp { attempted: u128, cap: usize },
    #[error("expected a prenex sentence (quantifier-free matrix)")]
    NotPrenex,
    #[error("expected an SO prefix followed by a first-order body")]
    NotSoPrenex,
    #[error("expected a clause-form matrix ({0})")]
    NotClauseForm(ClauseMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClauseMode {
    Cnf,
    Dnf,
}

impl std::fmt::Display for ClauseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClauseMode::Cnf => "CNF",
            ClauseMode::Dnf => "DNF",
        })
    }
}

/// Pushes negations down to atoms, flipping quantifiers on the way.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::True => {
            if neg {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if neg {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Rel { .. } | Formula::SoAtom { .. } | Formula::Eq(..) => {
            if neg {
                Formula::not(f.clone())
            } else {
                f.clone()
            }
        }
        Formula::Not(g) => nnf(g, !neg),
        Formula::And(gs) | Formula::Or(gs) => {
            let parts: Vec<Formula> = gs.iter().map(|g| nnf(g, neg)).collect();
            if matches!(f, Formula::And(_)) != neg {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Fo { q, var, body } => {
            let q = if neg { q.dual() } else { *q };
            Formula::fo(q, var.clone(), nnf(body, neg))
        }
        Formula::So { q, var, body } => {
            let q = if neg { q.dual() } else { *q };
            Formula::so(q, var.clone(), nnf(body, neg))
        }
    }
}

pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::Not(g) => g.is_atom(),
        _ => f.children().into_iter().all(is_nnf),
    }
}

/// Result of [`to_prenex`].
#[derive(Debug, Clone)]
pub struct Prenexed {
    pub formula: Formula,
    /// Set when an SO quantifier was hoisted out from under an FO quantifier,
    /// which is not an equivalence in general.
    pub so_reordered: bool,
}

/// Prenex form `SO-prefix . FO-prefix . matrix`. Quantifiers are hoisted in
/// left-to-right tree order, SO before FO. Negations over quantified
/// subformulas are first pushed inward.
///
/// Pulling an FO quantifier out of a conjunction or disjunction is sound on
/// nonempty domains only.
pub fn to_prenex(f: &Formula) -> Prenexed {
    let f = if has_repeated_binders(f) { f.refresh() } else { f.clone() };
    let mut so = Vec::new();
    let mut fo = Vec::new();
    let mut reordered = false;
    let matrix = hoist(&f, &mut so, &mut fo, &mut reordered, true);
    Prenexed {
        formula: Formula::with_so_prefix(&so, Formula::with_fo_prefix(&fo, matrix)),
        so_reordered: reordered,
    }
}

fn hoist(
    f: &Formula,
    so: &mut Vec<(Quant, SoVar)>,
    fo: &mut Vec<(Quant, FoVar)>,
    reordered: &mut bool,
    hoist_fo: bool,
) -> Formula {
    match f {
        Formula::Not(g) if !g.is_quantifier_free() => hoist(&to_nnf(f), so, fo, reordered, hoist_fo),
        Formula::And(gs) | Formula::Or(gs) if !f.is_quantifier_free() => {
            let parts: Vec<Formula> = gs.iter().map(|g| hoist(g, so, fo, reordered, hoist_fo)).collect();
            if matches!(f, Formula::And(_)) {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Fo { q, var, body } if hoist_fo => {
            fo.push((*q, var.clone()));
            let before = so.len();
            let m = hoist(body, so, fo, reordered, hoist_fo);
            if so.len() > before {
                *reordered = true;
            }
            m
        }
        Formula::Fo { q, var, body } => {
            let before = so.len();
            let m = hoist(body, so, fo, reordered, hoist_fo);
            if so.len() > before {
                *reordered = true;
            }
            Formula::fo(*q, var.clone(), m)
        }
        Formula::So { q, var, body } => {
            so.push((*q, var.clone()));
            hoist(body, so, fo, reordered, hoist_fo)
        }
        _ => f.clone(),
    }
}

/// Moves SO quantifiers to the front (tree order) while leaving the FO
/// structure in place. Returns the prefix and the first-order body.
pub fn hoist_so(f: &Formula) -> (Vec<(Quant, SoVar)>, Formula, bool) {
    let f = if has_repeated_binders(f) { f.refresh() } else { f.clone() };
    let mut so = Vec::new();
    let mut fo = Vec::new();
    let mut reordered = false;
    let body = hoist(&f, &mut so, &mut fo, &mut reordered, false);
    (so, body, reordered)
}

fn has_repeated_binders(f: &Formula) -> bool {
    let mut seen: HashSet<(bool, VarId)> = HashSet::new();
    let mut repeated = false;
    f.visit(&mut |g| match g {
        Formula::Fo { var, .. } => repeated |= !seen.insert((false, var.id)),
        Formula::So { var, .. } => repeated |= !seen.insert((true, var.id)),
        _ => {}
    });
    repeated
}

/// A prenex formula split into prefixes and matrix clauses.
#[derive(Debug, Clone)]
pub struct ClauseForm {
    pub so_prefix: Vec<(Quant, SoVar)>,
    pub fo_prefix: Vec<(Quant, FoVar)>,
    pub mode: ClauseMode,
    /// CNF: conjunction of disjunctions; DNF: disjunction of conjunctions.
    pub clauses: Vec<Vec<Formula>>,
}

impl ClauseForm {
    pub fn matrix(&self) -> Formula {
        clauses_to_formula(&self.clauses, self.mode)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::with_so_prefix(&self.so_prefix, Formula::with_fo_prefix(&self.fo_prefix, self.matrix()))
    }
}

pub fn clauses_to_formula(clauses: &[Vec<Formula>], mode: ClauseMode) -> Formula {
    let inner = |c: &Vec<Formula>| match mode {
        ClauseMode::Cnf => Formula::or_raw(c.clone()),
        ClauseMode::Dnf => Formula::and_raw(c.clone()),
    };
    let parts: Vec<Formula> = clauses.iter().map(inner).collect();
    match mode {
        ClauseMode::Cnf => Formula::and_raw(parts),
        ClauseMode::Dnf => Formula::or_raw(parts),
    }
}

/// Clause set of a quantifier-free formula by distribution. Literals are
/// deduplicated within a clause and repeated clauses are dropped.
pub fn matrix_clauses(matrix: &Formula, mode: ClauseMode, size_cap: usize) -> Result<Vec<Vec<Formula>>, NormalizeError> {
    if !matrix.is_quantifier_free() {
        return Err(NormalizeError::NotPrenex);
    }
    let m = to_nnf(matrix);
    let clauses = distribute(&m, mode, size_cap)?;
    let mut seen = HashSet::new();
    Ok(clauses.into_iter().filter(|c| seen.insert(c.clone())).collect())
}

fn distribute(f: &Formula, mode: ClauseMode, cap: usize) -> Result<Vec<Vec<Formula>>, NormalizeError> {
    // `outer` is the connective joining clauses, `inner` the one inside a clause.
    let (is_outer, is_inner) = match mode {
        ClauseMode::Cnf => (matches!(f, Formula::And(_)), matches!(f, Formula::Or(_))),
        ClauseMode::Dnf => (matches!(f, Formula::Or(_)), matches!(f, Formula::And(_))),
    };
    let unit_true = match mode {
        ClauseMode::Cnf => matches!(f, Formula::True),
        ClauseMode::Dnf => matches!(f, Formula::False),
    };
    let unit_false = match mode {
        ClauseMode::Cnf => matches!(f, Formula::False),
        ClauseMode::Dnf => matches!(f, Formula::True),
    };
    if unit_true {
        return Ok(Vec::new());
    }
    if unit_false {
        return Ok(vec![Vec::new()]);
    }
    if is_outer {
        let mut out = Vec::new();
        for g in f.children() {
            out.extend(distribute(g, mode, cap)?);
            if out.len() > cap {
                return Err(NormalizeError::BlowUp { attempted: out.len() as u128, cap });
            }
        }
        return Ok(out);
    }
    if is_inner {
        let parts = f
            .children()
            .into_iter()
            .map(|g| distribute(g, mode, cap))
            .collect::<Result<Vec<_>, _>>()?;
        let attempted = parts.iter().fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128));
        if attempted > cap as u128 {
            return Err(NormalizeError::BlowUp { attempted, cap });
        }
        let mut acc: Vec<Vec<Formula>> = vec![Vec::new()];
        for p in parts {
            let mut next = Vec::with_capacity(acc.len() * p.len());
            for a in &acc {
                for c in &p {
                    let mut merged = a.clone();
                    for lit in c {
                        if !merged.contains(lit) {
                            merged.push(lit.clone());
                        }
                    }
                    next.push(merged);
                }
            }
            acc = next;
        }
        return Ok(acc);
    }
    Ok(vec![vec![f.clone()]])
}

/// Rewrites the matrix of a prenex sentence into CNF or DNF.
pub fn qf_normalize(f: &Formula, mode: ClauseMode, size_cap: usize) -> Result<Formula, NormalizeError> {
    Ok(clause_form(f, mode, size_cap)?.to_formula())
}

/// Like [`qf_normalize`] but keeps the clause list.
pub fn clause_form(f: &Formula, mode: ClauseMode, size_cap: usize) -> Result<ClauseForm, NormalizeError> {
    let (so, rest) = f.split_so_prefix();
    let (fo, matrix) = rest.split_fo_prefix();
    Ok(ClauseForm {
        so_prefix: so,
        fo_prefix: fo,
        mode,
        clauses: matrix_clauses(matrix, mode, size_cap)?,
    })
}

/// Reads an already clause-shaped prenex formula without distributing.
pub fn read_clause_form(f: &Formula, mode: ClauseMode) -> Result<ClauseForm, NormalizeError> {
    let (so, rest) = f.split_so_prefix();
    let (fo, matrix) = rest.split_fo_prefix();
    let clause_of = |g: &Formula| -> Option<Vec<Formula>> {
        let is_inner = match mode {
            ClauseMode::Cnf => matches!(g, Formula::Or(_)),
            ClauseMode::Dnf => matches!(g, Formula::And(_)),
        };
        if is_inner {
            let lits: Vec<Formula> = g.children().into_iter().cloned().collect();
            lits.iter().all(Formula::is_literal).then_some(lits)
        } else if g.is_literal() {
            Some(vec![g.clone()])
        } else {
            match (mode, g) {
                (ClauseMode::Cnf, Formula::False) | (ClauseMode::Dnf, Formula::True) => Some(vec![]),
                _ => None,
            }
        }
    };
    let is_outer = match mode {
        ClauseMode::Cnf => matches!(matrix, Formula::And(_)),
        ClauseMode::Dnf => matches!(matrix, Formula::Or(_)),
    };
    let empty = match mode {
        ClauseMode::Cnf => matches!(matrix, Formula::True),
        ClauseMode::Dnf => matches!(matrix, Formula::False),
    };
    let clauses = if empty {
        Some(Vec::new())
    } else if is_outer {
        matrix.children().into_iter().map(clause_of).collect::<Option<Vec<_>>>()
    } else {
        clause_of(matrix).map(|c| vec![c])
    };
    match clauses {
        Some(clauses) => Ok(ClauseForm {
            so_prefix: so,
            fo_prefix: fo,
            mode,
            clauses,
        }),
        None => Err(NormalizeError::NotClauseForm(mode)),
    }
}

/// `Q1 S1 ... Qm Sm . body` becomes `Q̄1 S1 ... Q̄m Sm . NNF(¬body)`.
pub fn dual_negate(f: &Formula) -> Result<Formula, NormalizeError> {
    let (so, body) = f.split_so_prefix();
    if !body.is_first_order() {
        return Err(NormalizeError::NotSoPrenex);
    }
    let flipped: Vec<(Quant, SoVar)> = so.into_iter().map(|(q, v)| (q.dual(), v)).collect();
    Ok(Formula::with_so_prefix(&flipped, to_nnf(&Formula::not(body.clone()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(name: &str, v: &FoVar) -> Formula {
        Formula::rel(name, &[v])
    }

    #[test]
    fn nnf_examples() {
        let x = FoVar::fresh("x");
        let y = FoVar::fresh("y");
        let a = atom("A", &x);
        let b = atom("B", &x);
        assert_eq!(
            to_nnf(&Formula::not(Formula::And(vec![a.clone(), b.clone()]))),
            Formula::Or(vec![Formula::not(a.clone()), Formula::not(b.clone())])
        );
        let r = atom("R", &x);
        assert_eq!(
            to_nnf(&Formula::not(Formula::forall(x.clone(), r.clone()))),
            Formula::exists(x.clone(), Formula::not(r.clone()))
        );
        let rxy = Formula::rel("R", &[&x, &y]);
        assert_eq!(to_nnf(&Formula::not(Formula::not(rxy.clone()))), rxy);
    }

    #[test]
    fn prenex_examples() {
        let x = FoVar::fresh("x");
        let y = FoVar::fresh("y");
        let f = Formula::And(vec![
            Formula::exists(x.clone(), atom("P", &x)),
            Formula::exists(y.clone(), atom("Q", &y)),
        ]);
        let p = to_prenex(&f);
        let expected = Formula::exists(
            x.clone(),
            Formula::exists(y.clone(), Formula::And(vec![atom("P", &x), atom("Q", &y)])),
        );
        assert_eq!(p.formula, expected);
        assert!(!p.so_reordered);
        assert_eq!(to_prenex(&expected).formula, expected);
    }

    #[test]
    fn prenex_flags_so_under_fo() {
        let x = FoVar::fresh("x");
        let s = SoVar::fresh("S", 1);
        let f = Formula::forall(x.clone(), Formula::so(Quant::Exists, s.clone(), Formula::so_atom(&s, &[&x])));
        let p = to_prenex(&f);
        assert!(p.so_reordered);
        assert!(matches!(p.formula, Formula::So { .. }));
    }

    #[test]
    fn prenex_separates_reused_binders() {
        let x = FoVar::fresh("x");
        let p = Formula::exists(x.clone(), atom("P", &x));
        let f = Formula::And(vec![p.clone(), p]);
        let out = to_prenex(&f).formula;
        let (prefix, _) = out.split_fo_prefix();
        assert_eq!(prefix.len(), 2);
        assert_ne!(prefix[0].1, prefix[1].1);
    }

    #[test]
    fn cnf_distribution() {
        let x = FoVar::fresh("x");
        let (a, b, c) = (atom("A", &x), atom("B", &x), atom("C", &x));
        let f = Formula::Or(vec![Formula::And(vec![a.clone(), b.clone()]), c.clone()]);
        let cl = matrix_clauses(&f, ClauseMode::Cnf, 100).unwrap();
        assert_eq!(cl, vec![vec![a.clone(), c.clone()], vec![b.clone(), c.clone()]]);
        let clause = Formula::Or(vec![a.clone(), Formula::not(b.clone())]);
        let whole = Formula::forall(x.clone(), clause.clone());
        assert_eq!(qf_normalize(&whole, ClauseMode::Cnf, 100).unwrap(), whole);
    }

    #[test]
    fn empty_junctions() {
        assert_eq!(matrix_clauses(&Formula::True, ClauseMode::Cnf, 10).unwrap(), Vec::<Vec<Formula>>::new());
        assert_eq!(clauses_to_formula(&[], ClauseMode::Cnf), Formula::True);
        assert_eq!(clauses_to_formula(&[], ClauseMode::Dnf), Formula::False);
        assert_eq!(clauses_to_formula(&[vec![]], ClauseMode::Cnf), Formula::False);
    }

    #[test]
    fn blow_up_is_reported() {
        let x = FoVar::fresh("x");
        let pairs: Vec<Formula> = (0..20)
            .map(|i| Formula::And(vec![atom(&format!("A{i}"), &x), atom(&format!("B{i}"), &x)]))
            .collect();
        let f = Formula::Or(pairs);
        match matrix_clauses(&f, ClauseMode::Cnf, 1000) {
            Err(NormalizeError::BlowUp { attempted, cap }) => {
                assert_eq!(cap, 1000);
                assert_eq!(attempted, 1 << 20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dual_negate_example() {
        let s = SoVar::fresh("S", 1);
        let x = FoVar::fresh("x");
        let f = Formula::so(Quant::Exists, s.clone(), Formula::forall(x.clone(), Formula::so_atom(&s, &[&x])));
        let d = dual_negate(&f).unwrap();
        let expected = Formula::so(
            Quant::Forall,
            s.clone(),
            Formula::exists(x.clone(), Formula::not(Formula::so_atom(&s, &[&x]))),
        );
        assert_eq!(d, expected);
        assert_eq!(dual_negate(&d).unwrap(), f);
    }

    #[test]
    fn dual_negate_rejects_nested_so() {
        let s = SoVar::fresh("S", 1);
        let x = FoVar::fresh("x");
        let f = Formula::forall(x.clone(), Formula::so(Quant::Exists, s.clone(), Formula::so_atom(&s, &[&x])));
        assert_eq!(dual_negate(&f), Err(NormalizeError::NotSoPrenex));
    }

    #[test]
    fn reads_clause_shapes() {
        let x = FoVar::fresh("x");
        let (a, b) = (atom("A", &x), atom("B", &x));
        let f = Formula::forall(x.clone(), Formula::And(vec![Formula::Or(vec![a.clone(), b.clone()]), a.clone()]));
        let cf = read_clause_form(&f, ClauseMode::Cnf).unwrap();
        assert_eq!(cf.clauses.len(), 2);
        let g = Formula::forall(x.clone(), Formula::Or(vec![Formula::And(vec![a.clone(), b.clone()]), a]));
        assert!(read_clause_form(&g, ClauseMode::Cnf).is_err());
    }
}
