//! Seeded generators shared by property tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use facetforge_core::facet::FacetFormula;
use facetforge_core::schedule::ClassificationSchedule;

const ALPHABET: &[u8] = b"ABCDEFGHJKLMNPQRSTUVWXYZ0123456789";
const CODES: [char; 5] = ['P', 'M', 'E', 'S', 'T'];
const INDICATORS: [char; 5] = [',', ';', ':', '.', '\''];

fn segment<R: Rng>(rng: &mut R, len: usize) -> String {
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

/// Distinct equal-length sibling segments keep every full notation uniquely
/// resolvable.
fn sibling_segments<R: Rng>(rng: &mut R, count: usize) -> Vec<String> {
    let len = rng.gen_range(1..=2);
    let mut out: Vec<String> = Vec::new();
    while out.len() < count {
        let s = segment(rng, len);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn grow<R: Rng>(
    rng: &mut R,
    code: char,
    parent: Option<&str>,
    depth: usize,
    concepts: &mut Vec<Value>,
) {
    let count = rng.gen_range(1..=4);
    let segments = sibling_segments(rng, count);
    for (i, seg) in segments.iter().enumerate() {
        let id = format!("{}{}", parent.unwrap_or(&code.to_string()), seg);
        let mut c = json!({
            "id": id,
            "notation": seg,
            "label": format!("Concept {id}"),
            "value": format!("v{id}"),
            "ordinal": i + 1,
            "sought": rng.gen_bool(0.7),
        });
        if let Some(p) = parent {
            c["parent"] = json!(p);
        }
        concepts.push(c);
        if depth < 3 && rng.gen_bool(0.4) {
            grow(rng, code, Some(&id), depth + 1, concepts);
        }
    }
}

/// A random schedule document with 1 to 5 facet categories.
pub fn random_schedule<R: Rng>(rng: &mut R) -> Value {
    let n = rng.gen_range(1..=5);
    let mut codes = CODES.to_vec();
    codes.shuffle(rng);
    let mut indicators = INDICATORS.to_vec();
    indicators.shuffle(rng);
    let succession: Vec<String> = (0..n).map(|i| format!("C{i}")).collect();
    let categories: Vec<Value> = (0..n)
        .map(|i| {
            let mut concepts = Vec::new();
            grow(rng, codes[i], None, 1, &mut concepts);
            json!({
                "code": codes[i].to_string(),
                "indicator": indicators[i].to_string(),
                "characteristic": succession[i],
                "concepts": concepts,
            })
        })
        .collect();
    json!({
        "id": "GEN",
        "base": {"id": "B", "notation": format!("B{}", segment(rng, 1)), "label": "Base"},
        "succession": succession,
        "stoplist": [],
        "categories": categories,
    })
}

/// A formula over a random ordered subset of the schedule's categories.
pub fn random_formula<R: Rng>(rng: &mut R, schedule: &ClassificationSchedule) -> String {
    let mut cats: Vec<(char, char)> = schedule
        .categories
        .iter()
        .map(|c| (c.code, c.indicator))
        .collect();
    cats.shuffle(rng);
    let keep = rng.gen_range(1..=cats.len());
    let mut text = String::from("[B]");
    for (code, indicator) in &cats[..keep] {
        let optional = if rng.gen_bool(0.3) { "?" } else { "" };
        text.push_str(&format!("{indicator}[{code}{optional}]"));
    }
    text
}

/// Full notations for every required slot and some optional ones.
pub fn random_assignment<R: Rng>(
    rng: &mut R,
    schedule: &ClassificationSchedule,
    formula: &FacetFormula,
) -> BTreeMap<char, String> {
    let mut out = BTreeMap::new();
    for slot in &formula.slots {
        if !slot.required && rng.gen_bool(0.5) {
            continue;
        }
        let category = schedule.category(slot.code).expect("formula category");
        let concept = category.concepts.choose(rng).expect("non-empty category");
        let notation = category
            .full_notation(concept.id.as_str())
            .expect("known concept")
            .to_string();
        out.insert(slot.code, notation);
    }
    out
}

use std::collections::{BTreeSet, HashSet};

use facetforge_core::eg::{Literal, LiteralType, Term, Triple};
use facetforge_core::Iri;

/// A query position as the oracle sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleTerm {
    Var(String),
    Const(Term),
}

fn node_iri(k: usize) -> Iri {
    Iri::parse(format!("https://g.example.org/node/n{k}")).unwrap()
}

fn predicate_iri(k: usize) -> Iri {
    Iri::parse(format!("https://g.example.org/prop/p{k}")).unwrap()
}

fn literal(k: usize) -> Term {
    let (lexical, datatype) = match k {
        0 => ("alpha", LiteralType::String),
        1 => ("beta \"quoted\"", LiteralType::String),
        2 => ("7", LiteralType::Integer),
        _ => ("1973-01-01", LiteralType::Date),
    };
    Term::Literal(Literal {
        lexical: lexical.into(),
        datatype,
    })
}

/// Up to 50 distinct triples over a small vocabulary so joins are frequent.
pub fn random_triples<R: Rng>(rng: &mut R) -> Vec<Triple> {
    let nodes = rng.gen_range(1..=7);
    let predicates = rng.gen_range(1..=3);
    let target = rng.gen_range(0..=50);
    let mut set = BTreeSet::new();
    for _ in 0..target * 2 {
        if set.len() >= target {
            break;
        }
        let object = if rng.gen_bool(0.7) {
            Term::Iri(node_iri(rng.gen_range(0..nodes)))
        } else {
            literal(rng.gen_range(0..4))
        };
        set.insert(Triple {
            subject: node_iri(rng.gen_range(0..nodes)),
            predicate: predicate_iri(rng.gen_range(0..predicates)),
            object,
        });
    }
    set.into_iter().collect()
}

fn render_const(term: &Term, relative: bool) -> String {
    match (term, relative) {
        (Term::Iri(i), true) => format!("<{}>", i.last_segment()),
        _ => term.to_string(),
    }
}

/// A query of 1 to 3 patterns over at most four variables, as text plus the
/// absolute form the oracle evaluates.
pub fn random_query<R: Rng>(rng: &mut R, triples: &[Triple]) -> (String, Vec<[OracleTerm; 3]>) {
    const VARS: [&str; 4] = ["a", "b", "c", "d"];
    let mut subjects: Vec<Term> = triples.iter().map(|t| Term::Iri(t.subject.clone())).collect();
    subjects.push(Term::Iri(node_iri(9)));
    let mut predicates: Vec<Term> = triples.iter().map(|t| Term::Iri(t.predicate.clone())).collect();
    predicates.push(Term::Iri(predicate_iri(9)));
    let mut objects: Vec<Term> = triples.iter().map(|t| t.object.clone()).collect();
    objects.push(literal(rng.gen_range(0..4)));

    let n = rng.gen_range(1..=3);
    let mut text = String::new();
    let mut patterns = Vec::new();
    for _ in 0..n {
        let mut pattern = Vec::new();
        for pool in [&subjects, &predicates, &objects] {
            let term = if rng.gen_bool(0.55) {
                OracleTerm::Var(VARS[rng.gen_range(0..VARS.len())].to_string())
            } else {
                OracleTerm::Const(pool.choose(rng).unwrap().clone())
            };
            let rendered = match &term {
                OracleTerm::Var(v) => format!("?{v}"),
                // relative names only where they are unambiguous in the graph
                OracleTerm::Const(c) => render_const(c, rng.gen_bool(0.3) && is_in_graph(c, triples)),
            };
            text.push_str(&rendered);
            text.push(' ');
            pattern.push(term);
        }
        text.push_str(". ");
        patterns.push(pattern.try_into().unwrap());
    }
    (text, patterns)
}

fn is_in_graph(term: &Term, triples: &[Triple]) -> bool {
    triples.iter().any(|t| {
        Term::Iri(t.subject.clone()) == *term
            || Term::Iri(t.predicate.clone()) == *term
            || t.object == *term
    })
}

/// Enumerates every assignment of the query's variables to graph terms and
/// keeps those under which every pattern is a triple of the graph.
pub fn brute_force(triples: &[Triple], patterns: &[[OracleTerm; 3]]) -> (Vec<String>, BTreeSet<Vec<Term>>) {
    let mut vars: Vec<String> = Vec::new();
    for p in patterns {
        for t in p {
            if let OracleTerm::Var(v) = t {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            }
        }
    }
    let mut domain: BTreeSet<Term> = BTreeSet::new();
    for t in triples {
        domain.insert(Term::Iri(t.subject.clone()));
        domain.insert(Term::Iri(t.predicate.clone()));
        domain.insert(t.object.clone());
    }
    let domain: Vec<Term> = domain.into_iter().collect();
    let facts: HashSet<(Term, Term, Term)> = triples
        .iter()
        .map(|t| (Term::Iri(t.subject.clone()), Term::Iri(t.predicate.clone()), t.object.clone()))
        .collect();

    let mut rows = BTreeSet::new();
    if domain.is_empty() && !vars.is_empty() {
        return (vars, rows);
    }
    let total = domain.len().pow(vars.len() as u32);
    for mut code in 0..total {
        let assignment: Vec<Term> = (0..vars.len())
            .map(|_| {
                let t = domain[code % domain.len()].clone();
                code /= domain.len();
                t
            })
            .collect();
        let value = |t: &OracleTerm| match t {
            OracleTerm::Var(v) => assignment[vars.iter().position(|x| x == v).unwrap()].clone(),
            OracleTerm::Const(c) => c.clone(),
        };
        if patterns
            .iter()
            .all(|p| facts.contains(&(value(&p[0]), value(&p[1]), value(&p[2]))))
        {
            rows.insert(assignment);
        }
    }
    (vars, rows)
}
