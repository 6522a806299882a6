//! Executable toolkit for preservation properties of second-order sentences.
//!
//! The crate is organised around a small number of value types
//! ([`Signature`], [`FiniteStructure`], [`Formula`]) and pure functions over
//! them:
//!
//! - [`text`]: wire formats for structures, formulas, QCSP and QDIMACS input.
//! - [`normalize`]: NNF, prenex form, CNF/DNF of the matrix, dual negation.
//! - [`classes`]: recognizers for positive, negative, exists-guarded and
//!   forall-restricted sentences.
//! - [`transforms`]: the superstructure and surjective-hom closures,
//!   relativization to a unary predicate, and the CSP hammer.
//! - [`model_check`]: brute-force game evaluation of SO sentences, QCSP and
//!   quantified 3-CNF instances.
//! - [`hom`]: homomorphism search, structure enumeration and the closure
//!   oracle.
//! - [`reductions`]: the QCSP and quantified 3-CNF encodings and their
//!   three-way pipelines.

pub mod classes;
pub mod formula;
pub mod hom;
pub mod model_check;
pub mod normalize;
pub mod reductions;
pub mod signature;
pub mod structure;
pub mod suite;
pub mod text;
pub mod transforms;

pub use formula::{Assignment, FoVar, Formula, Prefix, Quant, SoVar};
pub use signature::{Signature, Symbol};
pub use structure::{FiniteStructure, StructureError, Tuple};
