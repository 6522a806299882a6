use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::structure::StructureError;

/// A relation symbol with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Symbol {
    pub name: Arc<str>,
    pub arity: usize,
}

/// An ordered relational vocabulary. Symbol names are unique and every arity is at least one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I, S>(symbols: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: AsRef<str>,
    {
        let mut sig = Signature::empty();
        for (name, arity) in symbols {
            sig = sig.with(name.as_ref(), arity)?;
        }
        Ok(sig)
    }

    /// Returns a copy extended by one symbol.
    pub fn with(&self, name: &str, arity: usize) -> Result<Self, StructureError> {
        if !is_identifier(name) {
            return Err(StructureError::BadSymbolName(name.to_string()));
        }
        if arity == 0 {
            return Err(StructureError::ZeroArity(name.to_string()));
        }
        if self.contains(name) {
            return Err(StructureError::DuplicateSymbol(name.to_string()));
        }
        let mut symbols = self.symbols.clone();
        symbols.push(Symbol {
            name: name.into(),
            arity,
        });
        Ok(Self { symbols })
    }

    /// Returns a copy without `name`; unknown names leave the signature unchanged.
    pub fn without(&self, name: &str) -> Self {
        Self {
            symbols: self
                .symbols
                .iter()
                .filter(|s| &*s.name != name)
                .cloned()
                .collect(),
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| &*s.name == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].arity)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Union of two signatures; shared names must agree on arity.
    pub fn union(&self, other: &Signature) -> Result<Self, StructureError> {
        let mut out = self.clone();
        for s in &other.symbols {
            match out.arity(&s.name) {
                Some(a) if a == s.arity => {}
                Some(a) => {
                    return Err(StructureError::ArityMismatch {
                        symbol: s.name.to_string(),
                        expected: a,
                        found: s.arity,
                    })
                }
                None => out = out.with(&s.name, s.arity)?,
            }
        }
        Ok(out)
    }

    /// A name not present in the signature: `base`, then `base_1`, `base_2`, ...
    pub fn fresh_name(&self, base: &str) -> String {
        fresh_name(base, |n| self.contains(n))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .symbols
            .iter()
            .map(|s| format!("{}/{}", s.name, s.arity))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Reads `P/1, E/2` (braces, commas and spaces are all optional separators).
impl std::str::FromStr for Signature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut syms = Vec::new();
        for item in s.trim().trim_start_matches('{').trim_end_matches('}').split([',', ' ']) {
            if item.is_empty() {
                continue;
            }
            let (name, arity) = item.split_once('/').ok_or_else(|| format!("expected NAME/ARITY, found `{item}`"))?;
            let arity: usize = arity.parse().map_err(|_| format!("bad arity in `{item}`"))?;
            syms.push((name.to_string(), arity));
        }
        Signature::new(syms).map_err(|e| e.to_string())
    }
}

pub(crate) fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken(n))
        .expect("unbounded suffix search")
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    #[test]
    fn from_str_round_trip() {
        let sig: Signature = "P/1, E/2".parse().unwrap();
        assert_eq!(sig.to_string().parse::<Signature>().unwrap(), sig);
        assert!("P".parse::<Signature>().is_err());
        assert!("P/0".parse::<Signature>().is_err());
    }

    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_arity() {
        let sig = Signature::new([("E", 2)]).unwrap();
        assert!(matches!(
            sig.with("E", 1),
            Err(StructureError::DuplicateSymbol(_))
        ));
        assert!(matches!(sig.with("P", 0), Err(StructureError::ZeroArity(_))));
        assert!(matches!(
            sig.with("", 1),
            Err(StructureError::BadSymbolName(_))
        ));
    }

    #[test]
    fn fresh_names_skip_existing() {
        let sig = Signature::new([("N", 2), ("N_1", 2)]).unwrap();
        assert_eq!(sig.fresh_name("N"), "N_2");
        assert_eq!(sig.fresh_name("U"), "U");
    }
}
