//! Fixed sentence suites and seeded random generators shared by the test
//! oracles, the acceptance harness and the CLI.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{FoVar, Formula, Quant, SoVar};
use crate::model_check::{Qbf3Instance, QcspInstance};
use crate::signature::Signature;
use crate::structure::FiniteStructure;
use crate::text::parse_formula;

/// `{P/1, E/2}`.
pub fn pe_signature() -> Signature {
    Signature::new([("P", 1), ("E", 2)]).expect("valid")
}

/// `{E/2}`.
pub fn graph_signature() -> Signature {
    Signature::new([("E", 2)]).expect("valid")
}

fn parse_all(texts: &[&str], sig: &Signature) -> Vec<Formula> {
    texts
        .iter()
        .map(|t| parse_formula(t, sig).unwrap_or_else(|e| panic!("suite sentence {t}: {e}")))
        .collect()
}

pub const CYCLE_TEXT: &str = "\
(exists2 (S 1) (forall2 (C 1)
  (or (exists x (atom E (x x)))
      (and (exists (x y) (and (atom S (x)) (atom S (y)) (not (eq x y))))
           (or (exists (a b) (and (atom S (a)) (atom S (b)) (atom C (a)) (atom E (a b)) (not (atom C (b)))))
               (forall (x y) (or (not (atom S (x))) (not (atom S (y))) (not (atom C (x))) (atom C (y)))))))))";

/// Positive MSO sentence over `{E}` true exactly when `E` has a directed cycle.
pub fn cycle_sentence() -> Formula {
    parse_formula(CYCLE_TEXT, &graph_signature()).expect("valid")
}

pub const COPY_TEXT: &str = "\
(forall2 (A 1) (exists2 (B 1) (forall (x y)
  (and (or (not (atom E (x y))) (not (atom A (x))) (atom B (y)))
       (or (not (atom E (x y))) (not (atom B (x))) (atom A (y)))))))";

/// The EP copies the UP's `A`-colouring across `E`-edges.
pub fn copy_sentence() -> Formula {
    parse_formula(COPY_TEXT, &graph_signature()).expect("valid")
}

/// The 2-clique.
pub fn k2() -> FiniteStructure {
    FiniteStructure::new(graph_signature(), 2, [("E", vec![vec![0, 1], vec![1, 0]])]).expect("valid")
}

/// The path `0 - 1 - 2` with both edge directions.
pub fn path3() -> FiniteStructure {
    let edges = vec![vec![0, 1], vec![1, 0], vec![2, 1], vec![1, 2]];
    FiniteStructure::new(graph_signature(), 3, [("E", edges)]).expect("valid")
}

pub const FO_SUITE_TEXT: [&str; 10] = [
    "(forall x (not (atom P (x))))",
    "(exists x (atom P (x)))",
    "(forall x (exists y (atom E (x y))))",
    "(exists x (forall y (or (atom E (x y)) (eq x y))))",
    "(forall (x y) (or (not (atom E (x y))) (atom E (y x))))",
    "(exists (x y) (and (atom E (x y)) (not (eq x y)) (atom P (y))))",
    "(forall x (or (atom P (x)) (exists y (and (atom E (y x)) (atom P (y))))))",
    "(not (exists x (atom E (x x))))",
    "(forall (x y z) (or (not (atom E (x y))) (not (atom E (y z))) (atom E (x z))))",
    "(and (exists x (not (atom P (x)))) (forall x (exists y (and (atom P (y)) (or (atom E (x y)) (eq x y))))))",
];

/// First-order sentences over `{P, E}` with assorted quantifier alternations.
pub fn fo_suite() -> Vec<Formula> {
    parse_all(&FO_SUITE_TEXT, &pe_signature())
}

pub const CNF_SUITE_TEXT: [&str; 10] = [
    "(forall x (not (atom P (x))))",
    "(exists x (atom P (x)))",
    "(forall x (exists y (atom E (x y))))",
    "(exists x (forall y (or (atom E (x y)) (eq x y))))",
    "(forall (x y) (or (not (atom E (x y))) (atom E (y x))))",
    "(forall x (exists y (and (atom E (y x)) (or (atom P (y)) (not (atom P (x)))))))",
    "(exists (x y) (forall z (and (atom E (x y)) (or (not (atom E (y z))) (atom P (z))))))",
    "(exists2 (S 1) (forall (x y) (and (or (not (atom E (x y))) (not (atom S (x))) (not (atom S (y)))) (or (not (atom E (x y))) (atom S (x)) (atom S (y))))))",
    "(forall2 (S 1) (exists x (forall y (and (or (atom S (x)) (not (atom S (y)))) (or (not (atom S (y))) (not (atom E (x y))))))))",
    "(exists2 (S 1) (exists x (forall y (and (atom S (x)) (or (not (atom S (y))) (atom P (y)))))))",
];

/// Prenex sentences with CNF matrices over `{P, E}`, first-order and monadic.
pub fn cnf_suite() -> Vec<Formula> {
    parse_all(&CNF_SUITE_TEXT, &pe_signature())
}

pub const HAMMER_SUITE_TEXT: [&str; 5] = [
    COPY_TEXT,
    // 2-colourable
    "(exists2 (C 1) (forall (x y) (and (or (not (atom E (x y))) (not (atom C (x))) (not (atom C (y)))) (or (not (atom E (x y))) (atom C (x)) (atom C (y))))))",
    // loop-free
    "(forall x (not (atom E (x x))))",
    // the out-neighbourhood of any set is independent
    "(forall2 (S 1) (exists2 (T 1) (forall (x y) (and (or (not (atom S (x))) (not (atom E (x y))) (atom T (y))) (or (not (atom T (x))) (not (atom T (y))) (not (atom E (x y))))))))",
    // every nonempty set has an element without successors inside it
    "(forall2 (S 1) (forall z (exists x (forall y (or (not (atom S (z))) (and (atom S (x)) (or (not (atom E (x y))) (not (atom S (y))))))))))",
];

/// Forall-restricted negative sentences over `{E}`, inputs to the hammer.
pub fn hammer_suite() -> Vec<Formula> {
    parse_all(&HAMMER_SUITE_TEXT, &graph_signature())
}

/// Random sentence over `sig` with at most `max_so` unary SO variables
/// (as a prefix) and a first-order part of depth at most `depth`.
pub fn random_sentence<R: Rng>(rng: &mut R, sig: &Signature, depth: usize, max_so: usize) -> Formula {
    let so: Vec<(Quant, SoVar)> = (0..rng.gen_range(0..=max_so))
        .map(|i| {
            let q = if rng.gen() { Quant::Exists } else { Quant::Forall };
            (q, SoVar::fresh(&format!("S{}", i + 1), 1))
        })
        .collect();
    let so_vars: Vec<SoVar> = so.iter().map(|(_, v)| v.clone()).collect();
    let mut scope = Vec::new();
    let body = random_formula(rng, sig, &so_vars, &mut scope, depth);
    Formula::with_so_prefix(&so, body)
}

fn random_atom<R: Rng>(rng: &mut R, sig: &Signature, so: &[SoVar], scope: &[FoVar]) -> Formula {
    let pick = |rng: &mut R| scope.choose(rng).expect("nonempty scope");
    let n_choices = sig.len() + so.len() + 1;
    let k = rng.gen_range(0..n_choices);
    if k < sig.len() {
        let sym = &sig.symbols()[k];
        let args: Vec<&FoVar> = (0..sym.arity).map(|_| pick(rng)).collect();
        Formula::rel(&sym.name, &args)
    } else if k < sig.len() + so.len() {
        Formula::so_atom(&so[k - sig.len()], &[pick(rng)])
    } else {
        Formula::eq(pick(rng), pick(rng))
    }
}

fn random_formula<R: Rng>(rng: &mut R, sig: &Signature, so: &[SoVar], scope: &mut Vec<FoVar>, depth: usize) -> Formula {
    if scope.is_empty() && depth == 0 {
        return if rng.gen() { Formula::True } else { Formula::False };
    }
    let binder = |rng: &mut R, scope: &mut Vec<FoVar>| {
        let x = FoVar::fresh(&format!("x{}", scope.len() + 1));
        scope.push(x.clone());
        let body = random_formula(rng, sig, so, scope, depth - 1);
        scope.pop();
        if rng.gen() {
            Formula::exists(x, body)
        } else {
            Formula::forall(x, body)
        }
    };
    if scope.is_empty() {
        return binder(rng, scope);
    }
    if depth == 0 {
        return random_atom(rng, sig, so, scope);
    }
    match rng.gen_range(0..6) {
        0 => random_atom(rng, sig, so, scope),
        1 => Formula::not(random_formula(rng, sig, so, scope, depth - 1)),
        2 => Formula::and_raw(vec![
            random_formula(rng, sig, so, scope, depth - 1),
            random_formula(rng, sig, so, scope, depth - 1),
        ]),
        3 => Formula::or_raw(vec![
            random_formula(rng, sig, so, scope, depth - 1),
            random_formula(rng, sig, so, scope, depth - 1),
        ]),
        _ => binder(rng, scope),
    }
}

/// Random `∀∃` instance over a single binary relation `R` with `1..=max_vars`
/// variables and between one and `max_vars` atoms.
pub fn random_qcsp<R: Rng>(rng: &mut R, max_vars: usize) -> QcspInstance {
    let total = rng.gen_range(1..=max_vars);
    let n_forall = rng.gen_range(0..=total);
    let blocks = vec![
        (Quant::Forall, (1..=n_forall).map(|i| format!("x{i}")).collect()),
        (Quant::Exists, (1..=total - n_forall).map(|i| format!("y{i}")).collect()),
    ];
    let r: Arc<str> = Arc::from("R");
    let atoms = (0..rng.gen_range(1..=max_vars))
        .map(|_| (r.clone(), vec![rng.gen_range(0..total), rng.gen_range(0..total)]))
        .collect();
    QcspInstance::new(blocks, atoms)
}

/// Random `∀∃` 3-CNF with at most `max_clauses` clauses whose encoding has
/// at most `max_elements` elements (rejection sampling).
pub fn random_qbf3<R: Rng>(rng: &mut R, max_clauses: usize, max_elements: usize) -> Qbf3Instance {
    loop {
        let num_vars: u32 = rng.gen_range(2..=4);
        let n_forall = rng.gen_range(1..num_vars);
        let blocks = vec![
            (Quant::Forall, (1..=n_forall).collect()),
            (Quant::Exists, (n_forall + 1..=num_vars).collect()),
        ];
        let clauses: Vec<Vec<i32>> = (0..rng.gen_range(1..=max_clauses))
            .map(|_| {
                let vars: Vec<u32> = (1..=num_vars).collect();
                let width = rng.gen_range(1..=3.min(num_vars as usize));
                vars.choose_multiple(rng, width)
                    .map(|&v| if rng.gen() { v as i32 } else { -(v as i32) })
                    .collect()
            })
            .collect();
        if clauses.iter().map(Vec::len).sum::<usize>() <= max_elements {
            return Qbf3Instance::new(num_vars, blocks, clauses);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_check::mc_so;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn suites_parse_and_are_sentences() {
        let fo = fo_suite();
        assert_eq!(fo.len(), 10);
        assert!(fo.iter().all(|f| f.is_first_order() && f.is_sentence()));
        assert!(cnf_suite().iter().all(Formula::is_sentence));
        assert_eq!(hammer_suite().len(), 5);
        assert!(cycle_sentence().is_sentence());
    }

    #[test]
    fn copy_sentence_on_example_graphs() {
        let f = copy_sentence();
        assert!(mc_so(&k2(), &f, 1_000_000).unwrap());
        assert!(!mc_so(&path3(), &f, 1_000_000).unwrap());
    }

    #[test]
    fn generators_are_reproducible() {
        let sig = pe_signature();
        let a: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            (0..20).map(|_| random_sentence(&mut rng, &sig, 5, 2).canonical().to_string()).collect()
        };
        let b: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            (0..20).map(|_| random_sentence(&mut rng, &sig, 5, 2).canonical().to_string()).collect()
        };
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let f = random_sentence(&mut rng, &sig, 5, 2);
            assert!(f.is_sentence(), "{f}");
            let q = random_qbf3(&mut rng, 2, 5);
            assert!(q.has_forall_exists_shape(1));
            assert!(random_qcsp(&mut rng, 4).num_vars() <= 4);
        }
    }
}
