use criterion::{black_box, criterion_group, criterion_main, Criterion};

use treegram::parser::{parse_mpd, ParserConfig};
use treegram::pipeline::{train, PrepOptions};
use treegram::tgram::ExtractionConfig;
use treegram::treebank::parse_bracketed;

fn bench_parsing(c: &mut Criterion) {
    let text = "(S (NP (DT the) (NN deal)) (VP (VBD took) (NP (DT a) (NN turn)) \
                (PP (IN into) (NP (DT the) (NN lot)))))";
    let trees = parse_bracketed(text).unwrap();
    let opts = PrepOptions {
        prehead_order: 1,
        unknown_threshold: 0,
        ..PrepOptions::default()
    };
    let model = train(trees, &opts, ExtractionConfig::default(), false).unwrap();
    let sentence: Vec<String> = "the deal took a turn into the lot"
        .split_whitespace()
        .map(str::to_string)
        .collect();
    c.bench_function("parse_mpd 8 words", |b| {
        b.iter(|| parse_mpd(black_box(&sentence), &model, &ParserConfig::default()))
    });
}

criterion_group!(benches, bench_parsing);
criterion_main!(benches);
