//! Inputs shared by the benches: the shipped fixtures and a scaled-up copy of
//! the bibliographic dataset.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::PathBuf;

use facetforge_core::eg::{build_entity_graph, ingest_dataset, load_mapping_spec, RawTable};
use facetforge_core::etg::{ground, load_etg, load_grounding_map};
use facetforge_core::facet::parse_formula;
use facetforge_core::lexsem::load_lexsem;
use facetforge_core::ontology::{build_lightweight_ontology, load_dataset_schema};
use facetforge_core::schedule::load_schedule;
use facetforge_core::{
    ClassificationSchedule, EntityGraph, FacetFormula, Iri, MappingSpec, SchemaGraph, Timestamp,
};

pub const FORMULA: &str = "[B],[P]:[E].[S]'[T?]";

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn med() -> (ClassificationSchedule, FacetFormula) {
    let schedule = load_schedule(&fixture("med.json")).expect("med.json loads");
    let formula = parse_formula(FORMULA, &schedule).expect("formula parses");
    (schedule, formula)
}

pub fn schema_and_mapping() -> (SchemaGraph, MappingSpec) {
    let lex = load_lexsem(&fixture("lexsem-en.json")).unwrap();
    let schema = load_dataset_schema(&fixture("schema.json")).unwrap();
    let (ontology, _) = build_lightweight_ontology(&lex, "en", &schema).unwrap();
    let etg = load_etg(&fixture("du.etg.json")).unwrap();
    let grounding = load_grounding_map(&fixture("grounding.json")).unwrap();
    let (sg, _) = ground(&ontology, &etg, &grounding).unwrap();
    let spec = load_mapping_spec(&fixture("mapping.json"), &sg).unwrap();
    (sg, spec)
}

/// CSV sources with `n` books, `n` people, `n / 10 + 1` publishers and
/// `n / 100 + 1` places, keyed by dataset id.
pub fn scaled_sources(n: usize) -> BTreeMap<&'static str, String> {
    let orgs = n / 10 + 1;
    let places = n / 100 + 1;
    let mut books = String::from("id,title,author,publisher,date,pages\n");
    let mut people = String::from("id,name\n");
    let mut org_rows = String::from("id,name,headquarters,founder\n");
    let mut place_rows = String::from("id,name\n");
    for i in 0..n {
        writeln!(books, "b{i},Title {i},p{i},o{},{},{}", i % orgs, 1900 + i % 120, 50 + i % 700).unwrap();
        writeln!(people, "p{i},Person {i}").unwrap();
    }
    for i in 0..orgs {
        writeln!(org_rows, "o{i},Org {i},pl{},p{}", i % places, i % n.max(1)).unwrap();
    }
    for i in 0..places {
        writeln!(place_rows, "pl{i},Place {i}").unwrap();
    }
    BTreeMap::from([
        ("books", books),
        ("people", people),
        ("orgs", org_rows),
        ("places", place_rows),
    ])
}

pub fn build_scaled(sg: &SchemaGraph, spec: &MappingSpec, sources: &BTreeMap<&str, String>) -> EntityGraph {
    let mut rows = BTreeMap::new();
    for d in &spec.datasets {
        let table = RawTable::from_csv(&sources[d.id.as_str()]).unwrap();
        let (typed, _) = ingest_dataset(d, &table).unwrap();
        rows.insert(d.id.clone(), typed);
    }
    let base = Iri::parse("https://data.example.org/du").unwrap();
    let at = Timestamp::parse("2024-01-01T00:00:00Z").unwrap();
    build_entity_graph(sg, spec, &rows, &base, at).unwrap().0
}

pub fn scaled_graph(n: usize) -> EntityGraph {
    let (sg, spec) = schema_and_mapping();
    build_scaled(&sg, &spec, &scaled_sources(n))
}
