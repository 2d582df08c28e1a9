//! Parallel against sequential throughput for the two per-item stages:
//! sentence extraction and report preprocessing.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use radkg::annotation::{AnnotatedSentence, FallbackAnnotator};
use radkg::extract::Extractor;
use radkg::lexicon::load_lexicon;
use radkg::par;
use radkg::preprocess::{
    load_corpus, parse_section_patterns, parse_word_frequencies, Preprocessor, RawReport, SpellIndex,
};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(fixtures().join(rel)).unwrap()
}

fn sentences(x: &Extractor, copies: usize) -> Vec<AnnotatedSentence> {
    let annotator = FallbackAnnotator::new(&x.lexicon, &x.senses);
    let base: Vec<(String, String)> = read("extraction/sentences.tsv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t').map(|(a, b)| (a.to_string(), b.to_string())))
        .collect();
    (0..copies)
        .flat_map(|c| base.iter().map(move |(id, t)| (format!("{id}.{c}"), t.clone())))
        .map(|(id, t)| annotator.annotate(&id, &t))
        .collect()
}

fn reports(copies: usize) -> Vec<RawReport> {
    let base = load_corpus(&fixtures().join("preprocess/corpus")).unwrap();
    (0..copies)
        .flat_map(|c| {
            base.iter().map(move |r| RawReport {
                report_id: format!("{}.{c}", r.report_id),
                ..r.clone()
            })
        })
        .collect()
}

fn extraction(c: &mut Criterion) {
    let lex = fixtures().join("lexicon");
    let x = Extractor::with_defaults(load_lexicon(&[lex.join("radlex.tsv"), lex.join("corpus_terms.tsv")]).unwrap());
    let mut group = c.benchmark_group("extraction");
    for copies in [10, 100] {
        let input = sentences(&x, copies);
        group.throughput(Throughput::Elements(input.len() as u64));
        group.bench_with_input(BenchmarkId::new("parallel", input.len()), &input, |b, s| {
            b.iter(|| x.extract_batch(s))
        });
        group.bench_with_input(BenchmarkId::new("sequential", input.len()), &input, |b, s| {
            b.iter(|| x.extract_batch_sequential(s))
        });
    }
    group.finish();
}

fn preprocessing(c: &mut Criterion) {
    let pre = Preprocessor::new(
        parse_section_patterns(&read("preprocess/section_patterns.tsv")).unwrap(),
        SpellIndex::build(&parse_word_frequencies(&read("preprocess/word_frequencies.tsv")).unwrap(), 2),
    );
    let mut group = c.benchmark_group("preprocessing");
    for copies in [10, 100] {
        let input = reports(copies);
        group.throughput(Throughput::Elements(input.len() as u64));
        group.bench_with_input(BenchmarkId::new("parallel", input.len()), &input, |b, r| {
            b.iter(|| par::map(r, |r| pre.clean_report(r)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", input.len()), &input, |b, r| {
            b.iter(|| par::map_sequential(r, |r| pre.clean_report(r)))
        });
    }
    group.finish();
}

criterion_group!(benches, extraction, preprocessing);
criterion_main!(benches);
