use std::collections::BTreeSet;

use pohammer_core::hom::{check_closure, enumerate_structures, ClosureKind, Family, Verdict};
use pohammer_core::model_check::{McConfig, Qbf3Instance};
use pohammer_core::reductions::{
    build_phi_b, build_phi_star, encode_qbf3_instance, qbf3_elements, run_qbf3_pipeline, Leg, Variant,
};
use pohammer_core::suite::k2;
use pohammer_core::transforms::Hammered;
use pohammer_core::{FiniteStructure, Prefix, Quant, Signature};

fn forall_exists(clauses: Vec<Vec<i32>>) -> Qbf3Instance {
    Qbf3Instance::new(2, vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2])], clauses)
}

fn pairs(a: &FiniteStructure, name: &str) -> BTreeSet<Vec<usize>> {
    a.relation(name).unwrap().clone()
}

#[test]
fn qbf3_encoding_examples() {
    let inst = forall_exists(vec![vec![1, 2], vec![-1, -2]]);
    let a = encode_qbf3_instance(&inst, 1).unwrap();
    assert_eq!(a.size(), 4);
    assert_eq!(qbf3_elements(&inst), vec![(1, 0), (2, 0), (-1, 1), (-2, 1)]);
    let rbar: BTreeSet<Vec<usize>> = [[0, 2], [2, 0], [1, 3], [3, 1]].iter().map(|t| t.to_vec()).collect();
    assert_eq!(pairs(&a, "Rbar"), rbar);
    for x in 0..4 {
        for y in 0..4 {
            assert_ne!(a.holds("R", &[x, y]), a.holds("Rbar", &[x, y]));
        }
        let blocks = ["A1", "E1"].iter().filter(|m| a.holds(m, &[x])).count();
        assert_eq!(blocks, 1);
    }

    let single = encode_qbf3_instance(&forall_exists(vec![vec![1]]), 1).unwrap();
    let all: BTreeSet<Vec<usize>> = (0..single.size()).map(|i| vec![i]).collect();
    assert_eq!(pairs(&single, "S"), all);
    assert_eq!(pairs(&single, "T"), all);
    assert!(pairs(&single, "Succ").is_empty());
}

#[test]
fn qbf3_pipeline_examples() {
    let kit = build_phi_star(1, Variant::Repaired).unwrap();
    let cfg = McConfig::default();
    let yes = run_qbf3_pipeline(&forall_exists(vec![vec![1, 2], vec![-1, -2]]), &kit, &cfg).unwrap();
    assert!(yes.direct);
    assert_eq!((yes.via_phi_star, yes.via_hammer), (Leg::Value(true), Leg::Value(false)));
    let no = run_qbf3_pipeline(&forall_exists(vec![vec![1, 2], vec![-2]]), &kit, &cfg).unwrap();
    assert!(!no.direct);
    assert_eq!((no.via_phi_star, no.via_hammer), (Leg::Value(false), Leg::Value(true)));
}

const BOTH: [ClosureKind; 2] = [ClosureKind::DisjointUnions, ClosureKind::InverseHomomorphisms];

fn assert_closed(h: &Hammered, sig: &Signature, families: Vec<(&[ClosureKind], Vec<FiniteStructure>)>) {
    let sig = sig.with(&h.n_symbol, 2).unwrap();
    for (kinds, fam) in families {
        assert!(fam.iter().all(|a| a.signature() == &sig));
        for &kind in kinds {
            let report = check_closure(&h.formula, kind, &fam, &McConfig::default()).unwrap();
            assert_eq!(report.verdict, Verdict::NoCounterexampleUpToBound, "{kind:?}: {:?}", report.witness);
        }
    }
}

fn exhaustive(sig: &Signature, max: usize) -> Vec<FiniteStructure> {
    enumerate_structures(&Family::exhaustive(sig.clone(), max)).unwrap()
}

fn random(sig: &Signature, max: usize, seed: u64, count: usize) -> Vec<FiniteStructure> {
    enumerate_structures(&Family::random(sig.clone(), max, seed, count)).unwrap()
}

// Disjoint unions of two size-4 members would need 2^40 assignments of the
// unary SO variables, so random size-4 families only check inverse homs.
#[test]
fn hammered_phi_b_is_closed() {
    let kit = build_phi_b(&k2(), &Prefix::parse("AE").unwrap(), Variant::Repaired).unwrap();
    let sig = kit.signature.with(&kit.hammered.n_symbol, 2).unwrap();
    assert_closed(
        &kit.hammered,
        &kit.signature,
        vec![
            (&BOTH, exhaustive(&sig, 2)),
            (&[ClosureKind::InverseHomomorphisms], random(&sig, 4, 3, 60)),
        ],
    );
}

// At size 2 the signature of the dual kit already has 2^24 structures, so the
// exhaustive family stops at size 1 and random families cover sizes up to 4.
#[test]
fn hammered_dual_phi_star_is_closed() {
    let kit = build_phi_star(1, Variant::Repaired).unwrap();
    let sig = kit.signature.with(&kit.dual_hammered.n_symbol, 2).unwrap();
    assert_closed(
        &kit.dual_hammered,
        &kit.signature,
        vec![
            (&BOTH, exhaustive(&sig, 1)),
            (&BOTH, random(&sig, 2, 7, 150)),
            (&BOTH, random(&sig, 4, 8, 40)),
        ],
    );
}
