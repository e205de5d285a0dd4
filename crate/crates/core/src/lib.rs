//! Tree ciphering isomorphism for labelled rooted unordered trees, with
//! DAG compression up to label renaming and frequent pattern mining.
//!
//! Two trees are equivalent under tree ciphering (`∼`) when they are
//! isomorphic up to a consistent renaming of labels. This relation sits
//! between unlabelled isomorphism (`≃`) and labelled isomorphism (`≃_l`).

pub mod analytics;
pub mod dag;
pub mod dag_rw;
pub mod error;
pub mod miner;
pub mod solver;
pub mod synthgen;
pub mod text;
pub mod tree;

pub use error::{Error, ParseError, ParseErrorKind};
pub use num_bigint::{BigInt, BigUint};
pub use text::{parse_dataset, parse_tree, serialize_tree};
pub use tree::{compute_stats, canonical_classes, LabeledTree, NodeId, Relation, SignatureRegistry, TopoStats};
