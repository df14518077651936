#[path = "support/gen.rs"]
mod gen;
#[path = "support/seeded.rs"]
mod seeded;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use facetforge_core::eg::{build_from_sources, load_mapping_spec, EntityGraph, Term};
use facetforge_core::etg::{ground, load_etg, load_grounding_map};
use facetforge_core::export::{export_fca, export_jsongraph, export_ntriples, ntriples_bytes, parse_ntriples};
use facetforge_core::lexsem::load_lexsem;
use facetforge_core::ontology::{build_lightweight_ontology, load_dataset_schema};
use facetforge_core::query::{evaluate, parse_query, run_query};
use facetforge_core::{Iri, Timestamp};
use seeded::{fixture, fixtures_dir};

fn bibliographic_example() -> EntityGraph {
    let lex = load_lexsem(&fixture("lexsem-en.json")).unwrap();
    let schema = load_dataset_schema(&fixture("schema.json")).unwrap();
    let (ontology, _) = build_lightweight_ontology(&lex, "en", &schema).unwrap();
    let etg = load_etg(&fixture("du.etg.json")).unwrap();
    let grounding = load_grounding_map(&fixture("grounding.json")).unwrap();
    let (sg, findings) = ground(&ontology, &etg, &grounding).unwrap();
    assert!(findings.is_empty());
    let spec = load_mapping_spec(&fixture("mapping.json"), &sg).unwrap();
    let base = Iri::parse("https://data.example.org/du").unwrap();
    let at = Timestamp::parse("2024-01-01T00:00:00Z").unwrap();
    let (eg, findings) = build_from_sources(&sg, &spec, &fixtures_dir(), &base, at).unwrap();
    assert!(findings.is_empty(), "{findings:?}");
    eg
}

fn rendered_rows(eg: &EntityGraph, q: &str) -> Vec<Vec<String>> {
    run_query(eg, &parse_query(q).unwrap())
        .unwrap()
        .rows
        .iter()
        .map(|r| r.iter().map(Term::to_string).collect())
        .collect()
}

#[test]
fn bibliographic_example_queries() {
    let eg = bibliographic_example();
    let b1 = "<https://data.example.org/du/Publication/b1>";
    assert_eq!(rendered_rows(&eg, "?b <publisher> <harper-row> ."), vec![vec![b1.to_string()]]);
    assert_eq!(
        rendered_rows(&eg, "?o <type> <Organization> . ?o <foundedBy> ?p ."),
        vec![vec![
            "<https://data.example.org/du/Organization/harper-row>".to_string(),
            "<https://data.example.org/du/Person/james-harper>".to_string(),
        ]]
    );
    assert_eq!(rendered_rows(&eg, "<b1> <author> <schumacher> ."), vec![Vec::<String>::new()]);
    let links: BTreeSet<(String, String, String)> = rendered_rows(
        &eg,
        "?s ?p ?o . ?o <type> ?t .",
    )
    .into_iter()
    .filter(|r| !r[1].ends_with("/prop/type>"))
    .map(|r| (r[0].clone(), r[1].clone(), r[2].clone()))
    .collect();
    assert_eq!(links.len(), 4);
}

#[test]
fn bibliographic_example_exports() {
    let eg = bibliographic_example();
    let nt = String::from_utf8(export_ntriples(&eg)).unwrap();
    assert_eq!(nt.lines().count(), eg.triple_count());
    assert!(nt.contains(
        "<https://data.example.org/du/Organization/harper-row> <https://data.example.org/du/etg/du/prop/foundedBy> <https://data.example.org/du/Person/james-harper> .\n"
    ));
    assert!(nt.contains("\"1973-01-01\"^^<http://www.w3.org/2001/XMLSchema#date>"));
    let reparsed = parse_ntriples(&nt).unwrap();
    assert_eq!(ntriples_bytes(&reparsed), nt.as_bytes());

    let json = export_jsongraph(&eg);
    let back = EntityGraph::from_json(std::str::from_utf8(&json).unwrap()).unwrap();
    assert_eq!(back, eg);
    let types: BTreeSet<&str> = back.entities.iter().map(|e| e.type_id.as_str()).collect();
    assert_eq!(types, BTreeSet::from(["Organization", "Person", "Place", "Publication"]));

    let fca = String::from_utf8(export_fca(&eg)).unwrap();
    let mut lines = fca.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines
        .find(|l| l.starts_with("https://data.example.org/du/Organization/harper-row,"))
        .unwrap()
        .split(',')
        .collect();
    for column in ["headquarteredIn", "foundedBy", "type:Organization"] {
        let i = header.iter().position(|h| *h == column).unwrap();
        assert_eq!(row[i], "1", "{column}");
    }
    assert_eq!(fca.lines().count(), eg.entity_count() + 1);
}

#[test]
fn two_builds_export_identically() {
    let (a, b) = (bibliographic_example(), bibliographic_example());
    assert_eq!(a, b);
    assert_eq!(export_ntriples(&a), export_ntriples(&b));
    assert_eq!(export_jsongraph(&a), export_jsongraph(&b));
    assert_eq!(export_fca(&a), export_fca(&b));
}

#[test]
fn query_matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut non_empty = 0;
    for case in 0..600 {
        let triples = gen::random_triples(&mut rng);
        let (text, patterns) = gen::random_query(&mut rng, &triples);
        let table = evaluate(&triples, &parse_query(&text).unwrap()).unwrap();
        let (vars, expected) = gen::brute_force(&triples, &patterns);
        assert_eq!(table.columns, vars, "case {case}: {text}");
        let got: BTreeSet<Vec<Term>> = table.rows.iter().cloned().collect();
        assert_eq!(got.len(), table.rows.len(), "case {case}: duplicate rows");
        assert_eq!(got, expected, "case {case}: {text}");
        non_empty += usize::from(!got.is_empty());
        let rendered: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| r.iter().map(Term::to_string).collect())
            .collect();
        let mut sorted = rendered.clone();
        sorted.sort();
        assert_eq!(rendered, sorted, "case {case}: rows not canonical");
    }
    assert!(non_empty >= 150, "only {non_empty} non-empty results");
}
