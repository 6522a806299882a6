//! Homomorphism search, small-structure enumeration and the closure oracle.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::model_check::{Checker, McConfig, McError};
use crate::signature::Signature;
use crate::structure::{FiniteStructure, StructureError, Tuple};
use crate::text::serialize_structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomKind {
    Any,
    Injective,
    Surjective,
    Bijective,
}

impl HomKind {
    fn injective(self) -> bool {
        matches!(self, HomKind::Injective | HomKind::Bijective)
    }

    fn surjective(self) -> bool {
        matches!(self, HomKind::Surjective | HomKind::Bijective)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("exhaustive enumeration would produce {count} structures, above the ceiling of {ceiling}")]
    CeilingExceeded { count: u128, ceiling: u128 },
    #[error("isomorphism deduplication is limited to structures of size at most 4")]
    DedupTooLarge,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Mc(#[from] McError),
}

/// Independent per-tuple check that `map` is a homomorphism of the given kind.
pub fn is_homomorphism(a: &FiniteStructure, b: &FiniteStructure, map: &[usize], kind: HomKind) -> bool {
    if a.signature() != b.signature() || map.len() != a.size() || map.iter().any(|&e| e >= b.size()) {
        return false;
    }
    let image: BTreeSet<usize> = map.iter().copied().collect();
    if kind.injective() && image.len() != map.len() {
        return false;
    }
    if kind.surjective() && image.len() != b.size() {
        return false;
    }
    a.relations().iter().zip(b.relations()).all(|(ra, rb)| {
        ra.iter().all(|t| {
            let img: Tuple = t.iter().map(|&e| map[e]).collect();
            rb.contains(&img)
        })
    })
}

/// Injective map that preserves and reflects every relation: `a` is
/// isomorphic to the induced substructure of `b` on the image.
pub fn is_embedding(a: &FiniteStructure, b: &FiniteStructure, map: &[usize]) -> bool {
    if !is_homomorphism(a, b, map, HomKind::Injective) {
        return false;
    }
    let image: HashSet<usize> = map.iter().copied().collect();
    let mut inverse = vec![usize::MAX; b.size()];
    for (i, &e) in map.iter().enumerate() {
        inverse[e] = i;
    }
    a.relations().iter().zip(b.relations()).all(|(ra, rb)| {
        rb.iter()
            .filter(|t| t.iter().all(|e| image.contains(e)))
            .all(|t| ra.contains(&t.iter().map(|&e| inverse[e]).collect::<Tuple>()))
    })
}

/// Backtracking enumeration of homomorphisms `a -> b`, lexicographic in the
/// image sequence, at most `limit` results.
pub fn find_homomorphisms(
    a: &FiniteStructure,
    b: &FiniteStructure,
    kind: HomKind,
    limit: usize,
) -> Result<Vec<Vec<usize>>, StructureError> {
    search(a, b, kind, false, limit)
}

/// Induced-substructure embeddings `a -> b`.
pub fn find_embeddings(a: &FiniteStructure, b: &FiniteStructure, limit: usize) -> Result<Vec<Vec<usize>>, StructureError> {
    search(a, b, HomKind::Injective, true, limit)
}

pub fn are_isomorphic(a: &FiniteStructure, b: &FiniteStructure) -> bool {
    a.signature() == b.signature()
        && a.size() == b.size()
        && a.relations().iter().zip(b.relations()).all(|(x, y)| x.len() == y.len())
        && !search(a, b, HomKind::Bijective, false, 1).unwrap_or_default().is_empty()
}

fn search(
    a: &FiniteStructure,
    b: &FiniteStructure,
    kind: HomKind,
    strong: bool,
    limit: usize,
) -> Result<Vec<Vec<usize>>, StructureError> {
    if a.signature() != b.signature() {
        return Err(StructureError::SignatureMismatch {
            left: a.signature().to_string(),
            right: b.signature().to_string(),
        });
    }
    let n = a.size();
    if (kind.injective() && n > b.size()) || (kind.surjective() && n < b.size()) || limit == 0 {
        return Ok(Vec::new());
    }
    // Tuples of `a` checked once their largest element is mapped.
    let mut due: Vec<Vec<(usize, &Tuple)>> = vec![Vec::new(); n];
    for (r, rel) in a.relations().iter().enumerate() {
        for t in rel {
            if let Some(&m) = t.iter().max() {
                due[m].push((r, t));
            }
        }
    }
    let mut st = Search {
        a,
        b,
        kind,
        strong,
        limit,
        due,
        map: Vec::with_capacity(n),
        used: vec![0; b.size()],
        out: Vec::new(),
    };
    st.go();
    Ok(st.out)
}

struct Search<'a> {
    a: &'a FiniteStructure,
    b: &'a FiniteStructure,
    kind: HomKind,
    strong: bool,
    limit: usize,
    due: Vec<Vec<(usize, &'a Tuple)>>,
    map: Vec<usize>,
    used: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn go(&mut self) {
        let i = self.map.len();
        if i == self.a.size() {
            if !self.kind.surjective() || self.used.iter().all(|&u| u > 0) {
                if !self.strong || is_embedding(self.a, self.b, &self.map) {
                    self.out.push(self.map.clone());
                }
            }
            return;
        }
        if self.kind.surjective() {
            let uncovered = self.used.iter().filter(|&&u| u == 0).count();
            if uncovered > self.a.size() - i {
                return;
            }
        }
        for e in 0..self.b.size() {
            if self.kind.injective() && self.used[e] > 0 {
                continue;
            }
            self.map.push(e);
            let rels = self.b.relations();
            let ok = self.due[i].iter().all(|(r, t)| {
                let img: Tuple = t.iter().map(|&x| self.map[x]).collect();
                rels[*r].contains(&img)
            });
            if ok {
                self.used[e] += 1;
                self.go();
                self.used[e] -= 1;
            }
            self.map.pop();
            if self.out.len() >= self.limit {
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Families

pub const DEFAULT_CEILING: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnumMode {
    Exhaustive,
    Random { seed: u64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyFilter {
    None,
    /// Keep structures where the named binary relation is symmetric and loop-free.
    SymmetricIrreflexive(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub signature: Signature,
    pub min_size: usize,
    pub max_size: usize,
    pub mode: EnumMode,
    pub filter: FamilyFilter,
    /// Keep one canonical representative per isomorphism class (size ≤ 4).
    pub dedup_iso: bool,
    pub ceiling: u128,
}

impl Family {
    pub fn exhaustive(signature: Signature, max_size: usize) -> Self {
        Self {
            signature,
            min_size: 0,
            max_size,
            mode: EnumMode::Exhaustive,
            filter: FamilyFilter::None,
            dedup_iso: false,
            ceiling: DEFAULT_CEILING,
        }
    }

    pub fn random(signature: Signature, max_size: usize, seed: u64, count: usize) -> Self {
        Self {
            mode: EnumMode::Random { seed, count },
            ..Self::exhaustive(signature, max_size)
        }
    }
}

fn all_tuples(n: usize, arity: usize) -> Vec<Tuple> {
    let total = n.pow(arity as u32);
    (0..total)
        .map(|mut i| {
            let mut t = vec![0; arity];
            for slot in t.iter_mut().rev() {
                *slot = i % n;
                i /= n;
            }
            t
        })
        .collect()
}

/// Number of structures with exactly `n` elements.
pub fn count_structures(sig: &Signature, n: usize) -> u128 {
    let bits: u32 = sig.symbols().iter().map(|s| n.pow(s.arity as u32) as u32).sum();
    if bits >= 127 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

/// Every structure (exhaustive) or a seeded sample (random) of the family, in
/// a deterministic order: by size, then by the bitmask over the concatenated
/// lexicographic tuple lists.
pub fn enumerate_structures(fam: &Family) -> Result<Vec<FiniteStructure>, HomError> {
    if fam.dedup_iso && fam.max_size > 4 {
        return Err(HomError::DedupTooLarge);
    }
    let raw = match &fam.mode {
        EnumMode::Exhaustive => {
            let count = (fam.min_size..=fam.max_size)
                .map(|n| count_structures(&fam.signature, n))
                .fold(0u128, u128::saturating_add);
            if count > fam.ceiling {
                return Err(HomError::CeilingExceeded {
                    count,
                    ceiling: fam.ceiling,
                });
            }
            let mut out = Vec::new();
            for n in fam.min_size..=fam.max_size {
                let slots = slots(&fam.signature, n);
                for mask in 0..count_structures(&fam.signature, n) as u64 {
                    out.push(build(&fam.signature, n, &slots, |bit| mask >> bit & 1 == 1)?);
                }
            }
            out
        }
        EnumMode::Random { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(*count);
            for _ in 0..*count {
                let n = rng.gen_range(fam.min_size..=fam.max_size);
                let slots = slots(&fam.signature, n);
                let coins: Vec<bool> = (0..slots.len()).map(|_| rng.gen_bool(0.5)).collect();
                out.push(build(&fam.signature, n, &slots, |bit| coins[bit])?);
            }
            out
        }
    };
    let mut kept: Vec<FiniteStructure> = match &fam.filter {
        FamilyFilter::None => raw,
        FamilyFilter::SymmetricIrreflexive(sym) => raw
            .into_iter()
            .filter(|a| {
                a.relation(sym).is_some_and(|r| {
                    r.iter().all(|t| t.len() == 2 && t[0] != t[1] && r.contains(&vec![t[1], t[0]]))
                })
            })
            .collect(),
    };
    if fam.dedup_iso {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for a in kept {
            let c = canonical_form(&a);
            if seen.insert(serialize_structure(&c)) {
                out.push(c);
            }
        }
        kept = out;
    }
    Ok(kept)
}

fn slots(sig: &Signature, n: usize) -> Vec<(usize, Tuple)> {
    sig.symbols()
        .iter()
        .enumerate()
        .flat_map(|(r, s)| all_tuples(n, s.arity).into_iter().map(move |t| (r, t)))
        .collect()
}

fn build(
    sig: &Signature,
    n: usize,
    slots: &[(usize, Tuple)],
    present: impl Fn(usize) -> bool,
) -> Result<FiniteStructure, StructureError> {
    let mut rels = vec![BTreeSet::new(); sig.len()];
    for (bit, (r, t)) in slots.iter().enumerate() {
        if present(bit) {
            rels[*r].insert(t.clone());
        }
    }
    FiniteStructure::from_parts(sig.clone(), n, rels)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// The relabelling with the smallest serialized form.
pub fn canonical_form(a: &FiniteStructure) -> FiniteStructure {
    permutations(a.size())
        .into_iter()
        .map(|p| a.relabel(&p, a.size()).expect("permutation stays in domain"))
        .min_by_key(serialize_structure)
        .expect("at least one permutation")
}

// ---------------------------------------------------------------------------
// Closure oracle

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureKind {
    Substructures,
    Superstructures,
    Homomorphisms,
    InverseHomomorphisms,
    InjectiveHoms,
    InverseInjectiveHoms,
    SurjectiveHoms,
    InverseSurjectiveHoms,
    BijectiveHoms,
    DisjointUnions,
}

impl ClosureKind {
    pub const ALL: [ClosureKind; 10] = [
        ClosureKind::Substructures,
        ClosureKind::Superstructures,
        ClosureKind::Homomorphisms,
        ClosureKind::InverseHomomorphisms,
        ClosureKind::InjectiveHoms,
        ClosureKind::InverseInjectiveHoms,
        ClosureKind::SurjectiveHoms,
        ClosureKind::InverseSurjectiveHoms,
        ClosureKind::BijectiveHoms,
        ClosureKind::DisjointUnions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosureKind::Substructures => "substructures",
            ClosureKind::Superstructures => "superstructures",
            ClosureKind::Homomorphisms => "homomorphisms",
            ClosureKind::InverseHomomorphisms => "inverse-homomorphisms",
            ClosureKind::InjectiveHoms => "injective-homs",
            ClosureKind::InverseInjectiveHoms => "inverse-injective-homs",
            ClosureKind::SurjectiveHoms => "surjective-homs",
            ClosureKind::InverseSurjectiveHoms => "inverse-surjective-homs",
            ClosureKind::BijectiveHoms => "bijective-homs",
            ClosureKind::DisjointUnions => "disjoint-unions",
        }
    }

    /// The map kind, and whether truth must travel backwards along it.
    /// Substructure closure pulls truth back along embeddings.
    fn shape(self) -> Option<(MapKind, bool)> {
        use ClosureKind::*;
        Some(match self {
            Substructures => (MapKind::Embedding, true),
            Superstructures => (MapKind::Embedding, false),
            Homomorphisms => (MapKind::Hom(HomKind::Any), false),
            InverseHomomorphisms => (MapKind::Hom(HomKind::Any), true),
            InjectiveHoms => (MapKind::Hom(HomKind::Injective), false),
            InverseInjectiveHoms => (MapKind::Hom(HomKind::Injective), true),
            SurjectiveHoms => (MapKind::Hom(HomKind::Surjective), false),
            InverseSurjectiveHoms => (MapKind::Hom(HomKind::Surjective), true),
            BijectiveHoms => (MapKind::Hom(HomKind::Bijective), false),
            DisjointUnions => return None,
        })
    }
}

impl fmt::Display for ClosureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClosureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('_', "-");
        ClosureKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| format!("unknown closure kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MapKind {
    Hom(HomKind),
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoCounterexampleUpToBound,
    Counterexample,
    /// No counterexample among the decided pairs, but some members exhausted the budget.
    Indeterminate,
}

/// A violating pair. `map` goes from `source` to `target`; for disjoint
/// unions it is empty and `union_value` is the value on `source + target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub source_index: usize,
    pub target_index: usize,
    #[serde(serialize_with = "as_text")]
    pub source: FiniteStructure,
    #[serde(serialize_with = "as_text")]
    pub target: FiniteStructure,
    pub map: Vec<usize>,
    pub source_value: bool,
    pub target_value: bool,
    pub union_value: Option<bool>,
}

fn as_text<S: serde::Serializer>(a: &FiniteStructure, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&serialize_structure(a))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Undecided {
    pub index: usize,
    /// Set when the budget ran out on the disjoint union with this member.
    pub partner: Option<usize>,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub kind: ClosureKind,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub structures_examined: usize,
    pub pairs_examined: u64,
    /// Family members whose evaluation ran out of budget.
    pub undecided: Vec<Undecided>,
}

/// Tests the closure implication over all ordered pairs of the family and
/// reports the first violation in (source, target) index order.
pub fn check_closure(
    f: &Formula,
    kind: ClosureKind,
    family: &[FiniteStructure],
    cfg: &McConfig,
) -> Result<ClosureReport, HomError> {
    let checker = Checker::new(f)?;
    let mut values = Vec::with_capacity(family.len());
    let mut undecided = Vec::new();
    for (i, a) in family.iter().enumerate() {
        match checker.check(a, &McConfig { jobs: 1, ..*cfg }) {
            Ok(ev) => values.push(Some(ev.value)),
            Err(McError::BudgetExhausted { nodes }) => {
                values.push(None);
                undecided.push(Undecided {
                    index: i,
                    partner: None,
                    nodes,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    // Only partners whose truth value can complete a violation are visited;
    // the rest of the row counts as covered.
    let models: Vec<usize> = (0..family.len()).filter(|&j| values[j] == Some(true)).collect();
    let non_models: Vec<usize> = (0..family.len()).filter(|&j| values[j] == Some(false)).collect();
    let row = |i: usize| -> Result<(Option<Witness>, u64, Vec<Undecided>), HomError> {
        let mut extra = Vec::new();
        let Some(vi) = values[i] else {
            return Ok((None, family.len() as u64, extra));
        };
        let partners: &[usize] = match kind.shape() {
            None if vi => &models,
            Some((_, true)) if !vi => &models,
            Some((_, false)) if vi => &non_models,
            _ => &[],
        };
        for &j in partners {
            let Some(vj) = values[j] else { continue };
            let (a, b) = (&family[i], &family[j]);
            let found = match kind.shape() {
                None => {
                    if !(vi && vj) {
                        continue;
                    }
                    let u = a.disjoint_union(b)?;
                    match checker.check(&u, &McConfig { jobs: 1, ..*cfg }) {
                        Ok(ev) if !ev.value => Some((Vec::new(), Some(false))),
                        Ok(_) => None,
                        Err(McError::BudgetExhausted { nodes }) => {
                            extra.push(Undecided {
                                index: i,
                                partner: Some(j),
                                nodes,
                            });
                            None
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                Some((map_kind, backwards)) => {
                    let violates = if backwards { vj && !vi } else { vi && !vj };
                    if !violates {
                        continue;
                    }
                    let maps = match map_kind {
                        MapKind::Hom(h) => find_homomorphisms(a, b, h, 1)?,
                        MapKind::Embedding => find_embeddings(a, b, 1)?,
                    };
                    maps.into_iter().next().map(|m| (m, None))
                }
            };
            if let Some((map, union_value)) = found {
                let w = Witness {
                    source_index: i,
                    target_index: j,
                    source: a.clone(),
                    target: b.clone(),
                    map,
                    source_value: vi,
                    target_value: vj,
                    union_value,
                };
                return Ok((Some(w), j as u64 + 1, extra));
            }
        }
        Ok((None, family.len() as u64, extra))
    };

    let rows: Vec<Result<(Option<Witness>, u64, Vec<Undecided>), HomError>> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| HomError::Mc(McError::BadAssignment { var: "jobs".into(), reason: e.to_string() }))?;
        pool.install(|| (0..family.len()).into_par_iter().map(row).collect())
    } else {
        let mut out = Vec::new();
        for i in 0..family.len() {
            let r = row(i);
            let stop = matches!(&r, Ok((Some(_), _, _)) | Err(_));
            out.push(r);
            if stop {
                break;
            }
        }
        out
    };
    let mut pairs_examined = 0;
    let mut witness = None;
    for r in rows {
        let (w, p, extra) = r?;
        pairs_examined += p;
        undecided.extend(extra);
        if w.is_some() {
            witness = w;
            break;
        }
    }
    let verdict = if witness.is_some() {
        Verdict::Counterexample
    } else if !undecided.is_empty() {
        Verdict::Indeterminate
    } else {
        Verdict::NoCounterexampleUpToBound
    };
    Ok(ClosureReport {
        kind,
        verdict,
        witness,
        structures_examined: family.len(),
        pairs_examined,
        undecided,
    })
}

/// Re-checks a witness from scratch: the map has the right kind and the
/// model-checking values violate the closure implication.
pub fn verify_witness(f: &Formula, kind: ClosureKind, w: &Witness, cfg: &McConfig) -> Result<bool, HomError> {
    let checker = Checker::new(f)?;
    let vs = checker.check(&w.source, cfg)?.value;
    let vt = checker.check(&w.target, cfg)?.value;
    Ok(match kind.shape() {
        None => {
            let u = w.source.disjoint_union(&w.target)?;
            vs && vt && !checker.check(&u, cfg)?.value
        }
        Some((map_kind, backwards)) => {
            let valid = match map_kind {
                MapKind::Hom(h) => is_homomorphism(&w.source, &w.target, &w.map, h),
                MapKind::Embedding => is_embedding(&w.source, &w.target, &w.map),
            };
            valid && if backwards { vt && !vs } else { vs && !vt }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> FiniteStructure {
        let sig = Signature::new([("E", 2)]).unwrap();
        FiniteStructure::new(sig, n, [("E", edges.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>())]).unwrap()
    }

    fn k2() -> FiniteStructure {
        graph(2, &[(0, 1), (1, 0)])
    }

    #[test]
    fn single_vertex_into_k2() {
        let maps = find_homomorphisms(&graph(1, &[]), &k2(), HomKind::Any, 10).unwrap();
        assert_eq!(maps, vec![vec![0], vec![1]]);
    }

    #[test]
    fn k2_automorphisms() {
        let maps = find_homomorphisms(&k2(), &k2(), HomKind::Bijective, 10).unwrap();
        assert_eq!(maps, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn g_onto_k2() {
        let g = graph(3, &[(0, 1), (1, 0), (2, 1), (1, 2)]);
        let maps = find_homomorphisms(&g, &k2(), HomKind::Surjective, 10).unwrap();
        assert_eq!(maps, vec![vec![0, 1, 0], vec![1, 0, 1]]);
        assert!(maps.iter().all(|m| is_homomorphism(&g, &k2(), m, HomKind::Surjective)));
    }

    #[test]
    fn embeddings_reflect_relations() {
        let edge = graph(2, &[(0, 1)]);
        let nonedge = graph(2, &[]);
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert!(!find_embeddings(&edge, &path, 1).unwrap().is_empty());
        // {0,2} is independent in the path
        assert_eq!(find_embeddings(&nonedge, &path, 10).unwrap(), vec![vec![0, 2], vec![2, 0]]);
    }

    #[test]
    fn enumeration_counts() {
        let e = Signature::new([("E", 2)]).unwrap();
        assert_eq!(enumerate_structures(&Family::exhaustive(e.clone(), 2)).unwrap().len(), 19);
        let p = Signature::new([("P", 1)]).unwrap();
        assert_eq!(enumerate_structures(&Family::exhaustive(p, 1)).unwrap().len(), 3);
        let fam = Family::random(e.clone(), 4, 7, 20);
        assert_eq!(enumerate_structures(&fam).unwrap(), enumerate_structures(&fam).unwrap());
        let big = Family::exhaustive(e, 5);
        assert!(matches!(enumerate_structures(&big), Err(HomError::CeilingExceeded { .. })));
    }

    #[test]
    fn dedup_counts_graphs() {
        let e = Signature::new([("E", 2)]).unwrap();
        let fam = Family {
            filter: FamilyFilter::SymmetricIrreflexive("E".into()),
            dedup_iso: true,
            ..Family::exhaustive(e, 4)
        };
        // simple graphs up to isomorphism on 0..=4 vertices
        assert_eq!(enumerate_structures(&fam).unwrap().len(), 1 + 1 + 2 + 4 + 11);
    }

    #[test]
    fn isomorphism() {
        assert!(are_isomorphic(&graph(3, &[(0, 1)]), &graph(3, &[(2, 1)])));
        assert!(!are_isomorphic(&graph(3, &[(0, 1)]), &graph(3, &[(1, 1)])));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ClosureKind::ALL {
            assert_eq!(k.name().parse::<ClosureKind>().unwrap(), k);
        }
        assert_eq!("disjoint_unions".parse::<ClosureKind>().unwrap(), ClosureKind::DisjointUnions);
    }
}
