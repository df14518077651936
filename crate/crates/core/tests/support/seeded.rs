//! Minimal seeded violations for every linter rule, built from the clean
//! fixtures by a single edit each.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};

use facetforge_core::catalogue::{
    build_record, lint_records, load_catalogue_code, make_call_number, CatalogueCode,
    CatalogueRecord, LocalVariation,
};
use facetforge_core::etg::{lint_etg, read_etg, CanonConfig};
use facetforge_core::facet::SubjectHeading;
use facetforge_core::lexsem::load_lexsem;
use facetforge_core::ontology::{
    build_lightweight_ontology, load_dataset_schema, validate_backbone, DatasetSchema,
    LightweightOntology,
};
use facetforge_core::schedule::{lint_schedule, load_schedule, LintConfig};
use facetforge_core::{Finding, Identifier, RuleCode};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> String {
    fs::read_to_string(fixtures_dir().join(name)).expect("fixture exists")
}

fn value(name: &str) -> Value {
    serde_json::from_str(&fixture(name)).expect("fixture is JSON")
}

fn concept_mut<'a>(doc: &'a mut Value, code: &str, id: &str) -> &'a mut Value {
    doc["categories"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|c| c["code"] == code)
        .unwrap()["concepts"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|c| c["id"] == id)
        .unwrap()
}

fn lint_config() -> LintConfig {
    LintConfig::from_json(&fixture("med.lint.json")).unwrap()
}

fn schedule_lint(doc: &Value, config: &LintConfig) -> Vec<Finding> {
    lint_schedule(&load_schedule(&doc.to_string()).unwrap(), config)
}

fn ccc() -> CatalogueCode {
    load_catalogue_code(&fixture("ccc.json")).unwrap()
}

fn imprint(drop: &[&str]) -> BTreeMap<String, String> {
    let mut m: BTreeMap<String, String> = [
        ("title", "Bibliography on the tropical disease of children in India in the 1970s"),
        ("author", "E.F. Schumacher"),
        ("publisher", "Harper & Row"),
        ("place", "New York"),
        ("date", "1973"),
        ("pages", "290"),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    for k in drop {
        m.remove(*k);
    }
    m
}

fn record(accession: u64, drop: &[&str], extra_heading: Option<(&str, &str)>) -> CatalogueRecord {
    let call = make_call_number("L,9C:421.44'N7", "Schumacher", 1973, accession, &BTreeSet::new())
        .unwrap();
    let mut headings = vec![SubjectHeading {
        heading: "Child, Medicine".into(),
        reference: "L,9C".into(),
    }];
    if let Some((h, r)) = extra_heading {
        headings.push(SubjectHeading {
            heading: h.into(),
            reference: r.into(),
        });
    }
    build_record(&ccc(), "Book", &imprint(drop), headings, call, accession).unwrap()
}

fn etg_lint(doc: &Value) -> Vec<Finding> {
    lint_etg(&read_etg(&doc.to_string()).unwrap(), &CanonConfig::default())
}

fn fixture_ontology(schema: &DatasetSchema) -> (LightweightOntology, Vec<Finding>) {
    let lex = load_lexsem(&fixture("lexsem-en.json")).unwrap();
    build_lightweight_ontology(&lex, "en", schema).unwrap()
}

fn clean_ontology() -> LightweightOntology {
    fixture_ontology(&load_dataset_schema(&fixture("schema.json")).unwrap()).0
}

fn reparent(o: &mut LightweightOntology, id: &str, parent: Option<&str>) {
    let node = o.nodes.iter_mut().find(|n| n.id.as_str() == id).unwrap();
    node.parent = parent.map(|p| Identifier::new(p).unwrap());
}

/// Codes exercised by the seeded suite.
pub const SEEDED_CODES: [RuleCode; 19] = [
    RuleCode::IC1,
    RuleCode::IC2,
    RuleCode::IC3,
    RuleCode::IC4,
    RuleCode::IC5,
    RuleCode::CH1,
    RuleCode::VP1,
    RuleCode::NP1,
    RuleCode::NP2,
    RuleCode::CC1,
    RuleCode::CC2,
    RuleCode::CC3,
    RuleCode::EP1,
    RuleCode::EP2,
    RuleCode::EP3,
    RuleCode::LO1,
    RuleCode::LO2,
    RuleCode::LO3,
    RuleCode::LO4,
];

/// Findings of the relevant linter on the fixture seeded for `code`.
pub fn seeded_findings(code: RuleCode) -> Vec<Finding> {
    let mut med = value("med.json");
    let mut du = value("du.etg.json");
    match code {
        RuleCode::IC1 => {
            concept_mut(&mut med, "E", "5")["characteristic"] = json!("BySpace");
            schedule_lint(&med, &lint_config())
        }
        RuleCode::IC2 => {
            concept_mut(&mut med, "E", "421")["characteristic"] = json!("ByAffectedPerson");
            schedule_lint(&med, &lint_config())
        }
        RuleCode::IC3 => {
            let mut config = lint_config();
            config.exhaustive.remove("MED/T");
            schedule_lint(&med, &config)
        }
        RuleCode::IC4 => {
            concept_mut(&mut med, "E", "5")["label"] = json!("Disease");
            schedule_lint(&med, &lint_config())
        }
        RuleCode::IC5 => {
            concept_mut(&mut med, "P", "9E")["ordinal"] = json!(0);
            schedule_lint(&med, &lint_config())
        }
        RuleCode::CH1 => {
            concept_mut(&mut med, "E", "421")["characteristic"] = json!("ByTime");
            schedule_lint(&med, &lint_config())
        }
        RuleCode::VP1 => {
            concept_mut(&mut med, "E", "5")["label"] = json!("Worthless remedies");
            med["stoplist"] = json!(["worthless"]);
            schedule_lint(&med, &lint_config())
        }
        RuleCode::NP1 => {
            concept_mut(&mut med, "E", "5")["id"] = json!("44");
            schedule_lint(&med, &lint_config())
        }
        RuleCode::NP2 => {
            concept_mut(&mut med, "S", "73")["notation"] = json!("44");
            concept_mut(&mut med, "S", "73")["ordinal"] = json!(1);
            schedule_lint(&med, &lint_config())
        }
        RuleCode::CC1 => lint_records(&ccc(), &[record(1, &[], None), record(2, &["pages"], None)]),
        RuleCode::CC2 => lint_records(&ccc(), &[record(1, &[], Some(("Harper & Row", "publisher")))]),
        RuleCode::CC3 => {
            let mut code = ccc();
            code.local_variations.push(LocalVariation {
                field: Identifier::new("date").unwrap(),
                template: "{value} ({value})".into(),
            });
            lint_records(&code, &[record(1, &[], None)])
        }
        RuleCode::EP1 => {
            du["data_properties"]
                .as_array_mut()
                .unwrap()
                .retain(|p| p["domain"] != "Organization");
            etg_lint(&du)
        }
        RuleCode::EP2 => {
            du["object_properties"][2]["range"] = json!("Placee");
            etg_lint(&du)
        }
        RuleCode::EP3 => {
            du["data_properties"]
                .as_array_mut()
                .unwrap()
                .push(json!({"name": "title", "domain": "Publication", "datatype": "string"}));
            etg_lint(&du)
        }
        RuleCode::LO1 => {
            let mut schema = value("schema.json");
            schema["classes"]
                .as_array_mut()
                .unwrap()
                .push(json!({"name": "Widget", "attributes": []}));
            let schema = load_dataset_schema(&schema.to_string()).unwrap();
            let (o, mut findings) = fixture_ontology(&schema);
            findings.extend(validate_backbone(&o));
            findings
        }
        RuleCode::LO2 => {
            let mut o = clean_ontology();
            reparent(&mut o, "en-place-1", None);
            validate_backbone(&o)
        }
        RuleCode::LO3 => {
            let mut o = clean_ontology();
            reparent(&mut o, "en-publication-1", Some("en-book-1"));
            validate_backbone(&o)
        }
        RuleCode::LO4 => {
            let mut o = clean_ontology();
            let node = o.nodes.iter_mut().find(|n| n.id.as_str() == "en-person-1").unwrap();
            node.label = "Organization".into();
            validate_backbone(&o)
        }
        other => panic!("no seeded fixture for {other}"),
    }
}

/// Findings of every linter on the clean fixtures.
pub fn clean_findings() -> Vec<Finding> {
    let mut out = schedule_lint(&value("med.json"), &lint_config());
    out.extend(lint_records(&ccc(), &[record(1, &[], None), record(2, &[], None)]));
    out.extend(etg_lint(&value("du.etg.json")));
    let schema = load_dataset_schema(&fixture("schema.json")).unwrap();
    let (o, findings) = fixture_ontology(&schema);
    out.extend(findings);
    out.extend(validate_backbone(&o));
    out
}
