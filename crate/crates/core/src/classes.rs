//! Recognizers for positive, negative, ∃-guarded and ∀-restricted sentences.
//!
//! The SO prefix is hoisted and shared; the body is split maximally at
//! conjunctions and disjunctions, and each leaf is prenexed, put into clause
//! form and checked clause by clause. A rejection means "not recognized": the
//! classes are semantic and the recognizers are syntactic.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::formula::{FoVar, Formula, FormulaError, Quant, VarId};
use crate::normalize::{self, hoist_so, ClauseMode, NormalizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    Positive,
    Negative,
    ExistsGuarded,
    ForallRestricted,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::Positive, Class::Negative, Class::ExistsGuarded, Class::ForallRestricted];

    pub fn mode(self) -> ClauseMode {
        match self {
            Class::Positive | Class::ExistsGuarded => ClauseMode::Cnf,
            Class::Negative | Class::ForallRestricted => ClauseMode::Dnf,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Positive => "positive",
            Class::Negative => "negative",
            Class::ExistsGuarded => "exists-guarded",
            Class::ForallRestricted => "forall-restricted",
        }
    }

    /// The class that the dual negation lands in.
    pub fn dual(self) -> Class {
        match self {
            Class::Positive => Class::Negative,
            Class::Negative => Class::Positive,
            Class::ExistsGuarded => Class::ForallRestricted,
            Class::ForallRestricted => Class::ExistsGuarded,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "positive" => Ok(Class::Positive),
            "negative" => Ok(Class::Negative),
            "exists-guarded" => Ok(Class::ExistsGuarded),
            "forall-restricted" => Ok(Class::ForallRestricted),
            other => Err(format!("unknown class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailingClause {
    /// The offending clause, serialized.
    pub clause: String,
    /// The literal violating a polarity condition.
    pub literal: Option<String>,
    /// The FO variable lacking a guard.
    pub variable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "node", rename_all = "kebab-case")]
pub enum Trace {
    And { parts: Vec<Trace> },
    Or { parts: Vec<Trace> },
    Leaf {
        formula: String,
        normal_form: ClauseMode,
        clauses: usize,
        accepted: Option<bool>,
        note: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassVerdict {
    pub class: Class,
    pub accepted: bool,
    /// Set when some leaf exceeded the clause cap and nothing was rejected.
    pub indeterminate: bool,
    pub trace: Trace,
    pub failing_clause: Option<FailingClause>,
    pub note: Option<String>,
}

/// Runs the recognizer for `cls` on a sentence.
pub fn classify(f: &Formula, cls: Class, size_cap: usize) -> Result<ClassVerdict, FormulaError> {
    if let Some(v) = f.free_fo_vars().into_iter().next() {
        return Err(FormulaError::FreeFoVar(v.name.to_string()));
    }
    if let Some(v) = f.free_so_vars().into_iter().next() {
        return Err(FormulaError::FreeSoVar(v.name.to_string()));
    }
    let nnf = normalize::to_nnf(f);
    let (prefix, body, _) = hoist_so(&nnf);
    let so_quant: HashMap<VarId, Quant> = prefix.iter().map(|(q, v)| (v.id, *q)).collect();
    let mut ctx = Ctx {
        cls,
        size_cap,
        so_quant,
        failure: None,
        blow_up: None,
    };
    let trace = ctx.decompose(&body);
    let accepted = ctx.failure.is_none() && ctx.blow_up.is_none();
    let indeterminate = ctx.failure.is_none() && ctx.blow_up.is_some();
    Ok(ClassVerdict {
        class: cls,
        accepted,
        indeterminate,
        trace,
        failing_clause: ctx.failure,
        note: ctx.blow_up,
    })
}

struct Ctx {
    cls: Class,
    size_cap: usize,
    so_quant: HashMap<VarId, Quant>,
    failure: Option<FailingClause>,
    blow_up: Option<String>,
}

impl Ctx {
    fn decompose(&mut self, f: &Formula) -> Trace {
        match f {
            Formula::And(gs) => Trace::And {
                parts: gs.iter().map(|g| self.decompose(g)).collect(),
            },
            Formula::Or(gs) => Trace::Or {
                parts: gs.iter().map(|g| self.decompose(g)).collect(),
            },
            leaf => self.leaf(leaf),
        }
    }

    fn leaf(&mut self, f: &Formula) -> Trace {
        let mode = self.cls.mode();
        let prenex = normalize::to_prenex(f).formula;
        let (fo_prefix, matrix) = prenex.split_fo_prefix();
        let text = f.to_string();
        let clauses = match normalize::matrix_clauses(matrix, mode, self.size_cap) {
            Ok(c) => c,
            Err(NormalizeError::BlowUp { attempted, cap }) => {
                let note = format!("{mode} conversion needs {attempted} clauses, cap is {cap}");
                self.blow_up.get_or_insert_with(|| note.clone());
                return Trace::Leaf {
                    formula: text,
                    normal_form: mode,
                    clauses: 0,
                    accepted: None,
                    note: Some(note),
                };
            }
            Err(e) => unreachable!("prenex matrix is quantifier-free: {e}"),
        };
        let fo_quant: HashMap<VarId, Quant> = fo_prefix.iter().map(|(q, v)| (v.id, *q)).collect();
        let mut ok = true;
        for clause in &clauses {
            if let Some(fail) = self.check_clause(clause, &fo_quant) {
                ok = false;
                self.failure.get_or_insert(fail);
                break;
            }
        }
        Trace::Leaf {
            formula: text,
            normal_form: mode,
            clauses: clauses.len(),
            accepted: Some(ok),
            note: None,
        }
    }

    fn check_clause(&self, clause: &[Formula], fo_quant: &HashMap<VarId, Quant>) -> Option<FailingClause> {
        let render = || normalize::clauses_to_formula(&[clause.to_vec()], self.cls.mode()).to_string();
        match self.cls {
            Class::Positive | Class::Negative => {
                let bad = clause.iter().find(|lit| match (self.cls, lit) {
                    (Class::Positive, Formula::Not(inner)) => matches!(**inner, Formula::Rel { .. }),
                    (Class::Negative, Formula::Rel { .. }) => true,
                    _ => false,
                })?;
                Some(FailingClause {
                    clause: render(),
                    literal: Some(bad.to_string()),
                    variable: None,
                })
            }
            Class::ExistsGuarded | Class::ForallRestricted => {
                let (needs, guard_q, negated) = match self.cls {
                    Class::ExistsGuarded => (Quant::Forall, Quant::Exists, true),
                    _ => (Quant::Exists, Quant::Forall, false),
                };
                let mut vars: Vec<&FoVar> = Vec::new();
                for lit in clause {
                    for v in literal_vars(lit) {
                        if fo_quant.get(&v.id) == Some(&needs) && !vars.contains(&v) {
                            vars.push(v);
                        }
                    }
                }
                let guarded = |x: &FoVar| {
                    clause.iter().any(|lit| {
                        let atom = match (negated, lit) {
                            (true, Formula::Not(inner)) => &**inner,
                            (false, a) => a,
                            _ => return false,
                        };
                        matches!(atom, Formula::SoAtom { var, args }
                            if self.so_quant.get(&var.id) == Some(&guard_q) && args.contains(x))
                    })
                };
                let x = vars.into_iter().find(|x| !guarded(x))?;
                Some(FailingClause {
                    clause: render(),
                    literal: None,
                    variable: Some(x.name.to_string()),
                })
            }
        }
    }
}

fn literal_vars(lit: &Formula) -> Vec<&FoVar> {
    match lit {
        Formula::Not(inner) => literal_vars(inner),
        Formula::Rel { args, .. } | Formula::SoAtom { args, .. } => args.iter().collect(),
        Formula::Eq(a, b) => vec![a, b],
        _ => vec![],
    }
}

/// Compares the ∃-guarded/positive verdicts on `f` with the
/// ∀-restricted/negative verdicts on its dual negation.
pub fn class_duality_check(f: &Formula, size_cap: usize) -> Result<bool, DualityError> {
    let dual = normalize::dual_negate(f).map_err(DualityError::Normalize)?;
    let same = |a: Class| -> Result<bool, DualityError> {
        let l = classify(f, a, size_cap).map_err(DualityError::Formula)?;
        let r = classify(&dual, a.dual(), size_cap).map_err(DualityError::Formula)?;
        if l.indeterminate || r.indeterminate {
            return Err(DualityError::BlowUp);
        }
        Ok(l.accepted == r.accepted)
    };
    Ok(same(Class::ExistsGuarded)? && same(Class::Positive)?)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DualityError {
    #[error(transparent)]
    Normalize(NormalizeError),
    #[error(transparent)]
    Formula(FormulaError),
    #[error("clause normal form exceeded the size cap")]
    BlowUp,
}
