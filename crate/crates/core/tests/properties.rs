use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pohammer_core::hom::{are_isomorphic, enumerate_structures, find_homomorphisms, Family, HomKind};
use pohammer_core::model_check::{evaluate, mc_so, solve_qbf3, solve_qcsp, McConfig, Qbf3Instance, QcspInstance};
use pohammer_core::normalize::{dual_negate, to_nnf, to_prenex};
use pohammer_core::reductions::{build_phi_b, encode_qbf3_instance, encode_qcsp_instance, Variant};
use pohammer_core::suite::{copy_sentence, graph_signature, hammer_suite, k2, pe_signature, random_qbf3, random_qcsp, random_sentence};
use pohammer_core::text::{parse_formula, parse_structure, serialize_formula, serialize_structure};
use pohammer_core::transforms::{csp_hammer, restrict, HammerOptions, RestrictTarget};
use pohammer_core::{FiniteStructure, Formula, Prefix, Quant, Signature};

fn structure(sig: &Signature, seed: u64, max_size: usize) -> FiniteStructure {
    let fam = Family::random(sig.clone(), max_size, seed, 1);
    enumerate_structures(&fam).unwrap().remove(0)
}

fn truth(a: &FiniteStructure, f: &Formula) -> bool {
    mc_so(a, f, u64::MAX).unwrap()
}

fn sentence(seed: u64) -> Formula {
    random_sentence(&mut ChaCha8Rng::seed_from_u64(seed), &pe_signature(), 4, 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nnf_and_prenex_preserve_truth(seed in any::<u64>(), sseed in any::<u64>()) {
        let f = sentence(seed);
        let a = structure(&pe_signature(), sseed, 3);
        let v = truth(&a, &f);
        prop_assert_eq!(truth(&a, &to_nnf(&f)), v);
        let p = to_prenex(&f);
        if a.size() > 0 && !p.so_reordered {
            prop_assert_eq!(truth(&a, &p.formula), v);
        }
        prop_assert_eq!(truth(&a, &dual_negate(&f).unwrap()), !v);
    }

    #[test]
    fn formula_text_round_trips(seed in any::<u64>()) {
        let f = sentence(seed);
        let text = serialize_formula(&f);
        let back = parse_formula(&text, &pe_signature()).unwrap();
        prop_assert!(back.alpha_eq(&f), "{}", text);
        prop_assert_eq!(serialize_formula(&back), text);
    }

    #[test]
    fn structure_text_round_trips(seed in any::<u64>()) {
        let a = structure(&pe_signature(), seed, 4);
        prop_assert_eq!(parse_structure(&serialize_structure(&a)).unwrap(), a);
    }

    #[test]
    fn jobs_do_not_change_values(seed in any::<u64>(), sseed in any::<u64>()) {
        let f = sentence(seed);
        let a = structure(&pe_signature(), sseed, 3);
        let one = evaluate(&a, &f, &McConfig { budget: u64::MAX, jobs: 1 }).unwrap();
        let many = evaluate(&a, &f, &McConfig { budget: u64::MAX, jobs: 3 }).unwrap();
        prop_assert_eq!(one.value, many.value);
    }

    #[test]
    fn restriction_reads_the_substructure(seed in any::<u64>(), sseed in any::<u64>()) {
        let f = random_sentence(&mut ChaCha8Rng::seed_from_u64(seed), &pe_signature(), 4, 0);
        let sig = pe_signature().with("U", 1).unwrap();
        let a = structure(&sig, sseed, 4);
        let u: BTreeSet<usize> = (0..a.size()).filter(|&i| a.holds("U", &[i])).collect();
        let expected = u.is_empty() || truth(&a.substructure(&u).unwrap().0.reduct_without("U"), &f);
        let g = restrict(&f, &RestrictTarget::Symbol("U".into())).unwrap();
        prop_assert_eq!(truth(&a, &g), expected);
    }

    #[test]
    fn exists_only_qcsp_is_homomorphism_existence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = graph_signature();
        let n = rand::Rng::gen_range(&mut rng, 1..=4usize);
        let inst_struct = structure(&sig, rand::Rng::gen(&mut rng), n);
        let template = structure(&sig, rand::Rng::gen(&mut rng), 3);
        let names = (0..inst_struct.size()).map(|i| format!("x{i}")).collect();
        let atoms = inst_struct
            .relation("E")
            .unwrap()
            .iter()
            .map(|t| (Arc::<str>::from("E"), t.clone()))
            .collect();
        let inst = QcspInstance::new(vec![(Quant::Exists, names)], atoms);
        let homs = find_homomorphisms(&inst_struct, &template, HomKind::Any, 1).unwrap();
        prop_assert_eq!(solve_qcsp(&template, &inst).unwrap(), !homs.is_empty() || inst_struct.size() == 0);
    }
}

#[test]
fn hammer_prefix_shape() {
    for f in hammer_suite() {
        let before: Vec<Quant> = f.split_so_prefix().0.iter().map(|(q, _)| *q).collect();
        let h = csp_hammer(&f, HammerOptions::default(), &[]).unwrap();
        let after: Vec<Quant> = h.formula.split_so_prefix().0.iter().map(|(q, _)| *q).collect();
        // ∀U joins the first block of universals, or goes last when there is none.
        let pos = match before.iter().position(|q| *q == Quant::Forall) {
            Some(i) => i + before[i..].iter().take_while(|q| **q == Quant::Forall).count(),
            None => before.len(),
        };
        let mut expected = before.clone();
        expected.insert(pos, Quant::Forall);
        assert_eq!(after, expected, "{}", serialize_formula(&f));
        assert!(h.formula.relation_symbols().contains_key(&h.n_symbol));
    }
}

#[test]
fn hammer_agrees_on_structures_with_disequality() {
    // Reading the fresh symbol as ≠ recovers the original sentence.
    let sig = graph_signature();
    let fam = Family::exhaustive(sig.clone(), 3);
    for f in hammer_suite() {
        let h = csp_hammer(&f, HammerOptions::default(), &[]).unwrap();
        for a in enumerate_structures(&fam).unwrap().iter().filter(|a| a.size() > 0) {
            let expanded = a.expand_with_neq_as(&h.n_symbol).unwrap();
            assert_eq!(truth(&expanded, &h.formula), truth(a, &f), "{}", serialize_formula(&f));
        }
    }
}

#[test]
fn phi_b_sizes() {
    let template = k2();
    for prefix in ["AE", "EA", "AEA"] {
        let prefix = Prefix::parse(prefix).unwrap();
        let kit = build_phi_b(&template, &prefix, Variant::Repaired).unwrap();
        let n = prefix.len();
        let b = template.size();
        assert_eq!(kit.phi_b.split_so_prefix().0.len(), n * b);
        assert_eq!(kit.hammered.formula.split_so_prefix().0.len(), n * b + 1);
        let expected: usize = template
            .signature()
            .symbols()
            .iter()
            .map(|s| n.pow(s.arity as u32))
            .sum();
        assert_eq!(kit.relation_conjuncts, expected);
    }
}

// The encoding records which literal occurrences are complementary, not the
// literals themselves, so distinct instances can share a structure. Sharing
// one must not change the value.
#[test]
fn qbf3_encoding_collisions_keep_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen: Vec<(Qbf3Instance, FiniteStructure)> = Vec::new();
    let mut collisions = 0;
    for _ in 0..300 {
        let inst = random_qbf3(&mut rng, 3, 5);
        let a = encode_qbf3_instance(&inst, 1).unwrap();
        for (other, b) in &seen {
            if a == *b && *other != inst {
                collisions += 1;
                assert_eq!(solve_qbf3(&inst), solve_qbf3(other), "{inst:?} vs {other:?}");
            }
        }
        seen.push((inst, a));
    }
    assert!(collisions > 0);
    let x = Qbf3Instance::new(4, vec![(Quant::Forall, vec![1, 2]), (Quant::Exists, vec![3, 4])], vec![vec![3]]);
    let y = Qbf3Instance::new(3, vec![(Quant::Forall, vec![1]), (Quant::Exists, vec![2, 3])], vec![vec![-2]]);
    assert_eq!(encode_qbf3_instance(&x, 1).unwrap(), encode_qbf3_instance(&y, 1).unwrap());
}

fn qcsp_shape(inst: &QcspInstance) -> (Vec<usize>, BTreeSet<Vec<usize>>) {
    let sizes = inst.blocks().iter().map(|(_, vs)| vs.len()).collect();
    (sizes, inst.atoms().iter().map(|(_, args)| args.clone()).collect())
}

#[test]
fn qcsp_encoding_is_injective_up_to_renaming() {
    let template = parse_structure("signature R/2\ndomain 2\nR: (0,1) (1,0)\n").unwrap();
    let kit = build_phi_b(&template, &Prefix::parse("AE").unwrap(), Variant::Repaired).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pool: Vec<(QcspInstance, FiniteStructure)> = (0..200)
        .map(|_| random_qcsp(&mut rng, 3))
        .map(|inst| {
            let a = encode_qcsp_instance(&inst, &kit).unwrap();
            (inst, a)
        })
        .collect();
    for (i, (p, a)) in pool.iter().enumerate() {
        for (q, b) in &pool[..i] {
            assert_eq!(a == b, qcsp_shape(p) == qcsp_shape(q), "{p:?} vs {q:?}");
        }
    }
}

#[test]
fn copy_sentence_examples() {
    let f = copy_sentence();
    let path = parse_structure("signature E/2\ndomain 3\nE: (0,1) (1,2)\n").unwrap();
    let relabelled = path.relabel(&[2, 0, 1], 3).unwrap();
    assert!(are_isomorphic(&path, &relabelled));
    assert_eq!(truth(&path, &f), truth(&relabelled, &f));
}
