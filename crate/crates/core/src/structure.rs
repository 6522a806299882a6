//! Finite relational structures over the domain `{0, ..., size-1}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::signature::Signature;

pub type Tuple = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("symbol `{0}` is already declared")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("`{0}` is not a valid identifier")]
    BadSymbolName(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` has arity {expected}, got a tuple of length {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element {element} lies outside the domain of size {size}")]
    OutOfDomain { element: usize, size: usize },
    #[error("signatures differ: {left} vs {right}")]
    SignatureMismatch { left: String, right: String },
}

/// An immutable finite structure. Every signature symbol has exactly one
/// (possibly empty) relation and every tuple lies inside the domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteStructure {
    signature: Signature,
    size: usize,
    relations: Vec<BTreeSet<Tuple>>,
}

impl FiniteStructure {
    /// Structure with all relations empty.
    pub fn empty_relations(signature: Signature, size: usize) -> Self {
        let relations = vec![BTreeSet::new(); signature.len()];
        Self {
            signature,
            size,
            relations,
        }
    }

    pub fn new<I, S, T>(signature: Signature, size: usize, relations: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: IntoIterator<Item = Tuple>,
    {
        let mut out = Self::empty_relations(signature, size);
        for (name, tuples) in relations {
            let idx = out
                .signature
                .index_of(name.as_ref())
                .ok_or_else(|| StructureError::UnknownSymbol(name.as_ref().to_string()))?;
            for t in tuples {
                out.check_tuple(idx, &t)?;
                out.relations[idx].insert(t);
            }
        }
        Ok(out)
    }

    /// Builds a structure from per-symbol relations given in signature order.
    pub fn from_parts(
        signature: Signature,
        size: usize,
        relations: Vec<BTreeSet<Tuple>>,
    ) -> Result<Self, StructureError> {
        assert_eq!(signature.len(), relations.len(), "one relation per symbol");
        let out = Self {
            signature,
            size,
            relations,
        };
        for (i, rel) in out.relations.iter().enumerate() {
            for t in rel {
                out.check_tuple(i, t)?;
            }
        }
        Ok(out)
    }

    fn check_tuple(&self, idx: usize, t: &[usize]) -> Result<(), StructureError> {
        let sym = &self.signature.symbols()[idx];
        if t.len() != sym.arity {
            return Err(StructureError::ArityMismatch {
                symbol: sym.name.to_string(),
                expected: sym.arity,
                found: t.len(),
            });
        }
        if let Some(&e) = t.iter().find(|&&e| e >= self.size) {
            return Err(StructureError::OutOfDomain {
                element: e,
                size: self.size,
            });
        }
        Ok(())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relations(&self) -> &[BTreeSet<Tuple>] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Tuple>> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn holds(&self, name: &str, tuple: &[usize]) -> bool {
        self.relation(name).is_some_and(|r| r.contains(tuple))
    }

    /// Induced substructure on `elements`. The domain is re-indexed in increasing
    /// element order; the returned map sends each old element to its new index.
    pub fn substructure(
        &self,
        elements: &BTreeSet<usize>,
    ) -> Result<(FiniteStructure, BTreeMap<usize, usize>), StructureError> {
        if let Some(&e) = elements.iter().find(|&&e| e >= self.size) {
            return Err(StructureError::OutOfDomain {
                element: e,
                size: self.size,
            });
        }
        let index: BTreeMap<usize, usize> =
            elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .filter_map(|t| t.iter().map(|e| index.get(e).copied()).collect::<Option<Tuple>>())
                    .collect()
            })
            .collect();
        let sub = FiniteStructure {
            signature: self.signature.clone(),
            size: elements.len(),
            relations,
        };
        Ok((sub, index))
    }

    /// Disjoint union; `other`'s elements are shifted by `self.size()`.
    pub fn disjoint_union(&self, other: &FiniteStructure) -> Result<FiniteStructure, StructureError> {
        if self.signature != other.signature {
            return Err(StructureError::SignatureMismatch {
                left: self.signature.to_string(),
                right: other.signature.to_string(),
            });
        }
        let shift = self.size;
        let relations = self
            .relations
            .iter()
            .zip(&other.relations)
            .map(|(a, b)| {
                a.iter()
                    .cloned()
                    .chain(b.iter().map(|t| t.iter().map(|e| e + shift).collect()))
                    .collect()
            })
            .collect();
        Ok(FiniteStructure {
            signature: self.signature.clone(),
            size: self.size + other.size,
            relations,
        })
    }

    /// Expansion by one fresh symbol interpreted as `relation`.
    pub fn expand(
        &self,
        symbol: &str,
        arity: usize,
        relation: impl IntoIterator<Item = Tuple>,
    ) -> Result<FiniteStructure, StructureError> {
        let signature = self.signature.with(symbol, arity)?;
        let mut relations = self.relations.clone();
        relations.push(BTreeSet::new());
        let mut out = FiniteStructure {
            signature,
            size: self.size,
            relations,
        };
        let idx = out.relations.len() - 1;
        for t in relation {
            out.check_tuple(idx, &t)?;
            out.relations[idx].insert(t);
        }
        Ok(out)
    }

    /// Drops one symbol (the reduct to the remaining signature).
    pub fn reduct_without(&self, symbol: &str) -> FiniteStructure {
        match self.signature.index_of(symbol) {
            None => self.clone(),
            Some(i) => {
                let mut relations = self.relations.clone();
                relations.remove(i);
                FiniteStructure {
                    signature: self.signature.without(symbol),
                    size: self.size,
                    relations,
                }
            }
        }
    }

    /// Expansion by the binary disequality relation under the reserved name `N`.
    pub fn expand_with_neq(&self) -> Result<FiniteStructure, StructureError> {
        self.expand_with_neq_as("N")
    }

    /// Expansion by disequality under a caller-chosen symbol name.
    pub fn expand_with_neq_as(&self, symbol: &str) -> Result<FiniteStructure, StructureError> {
        let n = self.size;
        let neq = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| vec![a, b]));
        self.expand(symbol, 2, neq)
    }

    /// Applies a permutation/relabelling `map` (old element -> new element) onto a domain of `size`.
    pub fn relabel(&self, map: &[usize], size: usize) -> Result<FiniteStructure, StructureError> {
        let relations = self
            .relations
            .iter()
            .map(|rel| rel.iter().map(|t| t.iter().map(|&e| map[e]).collect()).collect())
            .collect();
        FiniteStructure::from_parts(self.signature.clone(), size, relations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> FiniteStructure {
        let sig = Signature::new([("E", 2)]).unwrap();
        FiniteStructure::new(sig, 2, [("E", vec![vec![0, 1], vec![1, 0]])]).unwrap()
    }

    fn g3() -> FiniteStructure {
        let sig = Signature::new([("E", 2)]).unwrap();
        FiniteStructure::new(
            sig,
            3,
            [("E", vec![vec![0, 1], vec![1, 0], vec![2, 1], vec![1, 2]])],
        )
        .unwrap()
    }

    #[test]
    fn substructure_full_set_is_identity() {
        let a = k2();
        let (sub, map) = a.substructure(&BTreeSet::from([0, 1])).unwrap();
        assert_eq!(sub, a);
        assert_eq!(map, BTreeMap::from([(0, 0), (1, 1)]));
    }

    #[test]
    fn substructure_single_vertex_has_no_edges() {
        let (sub, _) = k2().substructure(&BTreeSet::from([0])).unwrap();
        assert_eq!(sub.size(), 1);
        assert!(sub.relation("E").unwrap().is_empty());
    }

    #[test]
    fn substructure_of_path_is_k2() {
        let (sub, _) = g3().substructure(&BTreeSet::from([0, 1])).unwrap();
        assert_eq!(sub, k2());
    }

    #[test]
    fn substructure_rejects_outside_elements() {
        assert!(matches!(
            k2().substructure(&BTreeSet::from([0, 5])),
            Err(StructureError::OutOfDomain { element: 5, .. })
        ));
    }

    #[test]
    fn disjoint_union_shifts_second_operand() {
        let u = k2().disjoint_union(&k2()).unwrap();
        assert_eq!(u.size(), 4);
        let edges: Vec<Tuple> = u.relation("E").unwrap().iter().cloned().collect();
        assert_eq!(edges, vec![vec![0, 1], vec![1, 0], vec![2, 3], vec![3, 2]]);
        let empty = FiniteStructure::empty_relations(k2().signature().clone(), 0);
        assert_eq!(empty.disjoint_union(&k2()).unwrap(), k2());
    }

    #[test]
    fn disjoint_union_requires_same_signature() {
        let p = FiniteStructure::empty_relations(Signature::new([("P", 1)]).unwrap(), 1);
        assert!(matches!(
            k2().disjoint_union(&p),
            Err(StructureError::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn expansion_round_trips_through_reduct() {
        let a = k2();
        let e = a.expand("U", 1, [vec![0]]).unwrap();
        assert_eq!(e.relation("U").unwrap(), &BTreeSet::from([vec![0]]));
        assert_eq!(e.relation("E"), a.relation("E"));
        assert_eq!(e.reduct_without("U"), a);
        let n = a.expand("N", 2, []).unwrap();
        assert!(n.relation("N").unwrap().is_empty());
        assert!(matches!(
            a.expand("E", 1, []),
            Err(StructureError::DuplicateSymbol(_))
        ));
        assert!(matches!(
            a.expand("U", 1, [vec![2]]),
            Err(StructureError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn neq_expansion_sizes() {
        let one = FiniteStructure::empty_relations(Signature::empty(), 1);
        assert!(one.expand_with_neq().unwrap().relation("N").unwrap().is_empty());
        let two = FiniteStructure::empty_relations(Signature::empty(), 2);
        assert_eq!(
            two.expand_with_neq().unwrap().relation("N").unwrap(),
            &BTreeSet::from([vec![0, 1], vec![1, 0]])
        );
        let three = FiniteStructure::empty_relations(Signature::empty(), 3);
        assert_eq!(three.expand_with_neq().unwrap().relation("N").unwrap().len(), 3 * 2);
        let clash = FiniteStructure::empty_relations(Signature::new([("N", 2)]).unwrap(), 2);
        assert!(clash.expand_with_neq().is_err());
    }
}
