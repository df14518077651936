use std::collections::BTreeMap;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use facetforge_bench::med;
use facetforge_core::catalogue::make_call_number;
use facetforge_core::facet::{chain_index, parse_class_number, synthesize_class_number};

fn facet(c: &mut Criterion) {
    let (schedule, formula) = med();
    let assignment: BTreeMap<char, String> = [('P', "9C"), ('E', "421"), ('S', "44"), ('T', "N7")]
        .into_iter()
        .map(|(k, v)| (k, v.to_string()))
        .collect();
    c.bench_function("synthesize L,9C:421.44'N7", |b| {
        b.iter(|| synthesize_class_number(&schedule, &formula, black_box(&assignment)).unwrap())
    });
    c.bench_function("parse L,9C:421.44'N7", |b| {
        b.iter(|| parse_class_number(&schedule, &formula, black_box("L,9C:421.44'N7")).unwrap())
    });
    let number = parse_class_number(&schedule, &formula, "L,9C:4.44").unwrap();
    c.bench_function("chain index L,9C:4.44", |b| {
        b.iter(|| chain_index(&schedule, black_box(&number)).unwrap())
    });
    c.bench_function("call numbers into 1000-entry register", |b| {
        b.iter(|| {
            let mut register = std::collections::BTreeSet::new();
            for accession in 1..=1000u64 {
                let year = 1950 + (accession % 30) as u32;
                let call = make_call_number("L,9C:4.44", "Schumacher", year, accession, &register).unwrap();
                register.insert(call);
            }
            register
        })
    });
}

criterion_group!(benches, facet);
criterion_main!(benches);
