//! Knowledge organization and representation engine.
//!
//! The crate covers two halves of one pipeline:
//!
//! - the library side: faceted [`schedule`]s linted against the classical
//!   canons, analytico-synthetic class numbers and chain indexing
//!   ([`facet`]), and catalogue codes, call numbers and records
//!   ([`catalogue`]);
//! - the knowledge-graph side: a WordNet-like [`lexsem`] resource, the
//!   lightweight [`ontology`] built over it, Entity Type Graphs and
//!   grounding ([`etg`]), Entity Graph assembly and snapshots ([`eg`]),
//!   conjunctive [`query`] evaluation and the [`export`] formats.
//!
//! Shared identifier, label and diagnostic types live in [`model`].

pub mod catalogue;
pub mod eg;
pub mod etg;
pub mod export;
pub mod facet;
pub mod lexsem;
pub mod model;
pub mod ontology;
pub mod query;
pub mod schedule;

pub use catalogue::{CallNumber, CatalogueCode, CatalogueRecord};
pub use eg::{EntityGraph, MappingSpec, Snapshot, Term, Triple};
pub use etg::{EntityTypeGraph, EtgRepository, SchemaGraph};
pub use facet::{ClassNumber, FacetFormula, SubjectHeading};
pub use lexsem::LexicalSemanticResource;
pub use model::{
    mint_iri, validate_identifier, Finding, Identifier, Iri, Label, Provenance, RuleCode,
    Severity, Timestamp,
};
pub use ontology::{DatasetSchema, LightweightOntology};
pub use query::{BindingTable, Query};
pub use schedule::ClassificationSchedule;
