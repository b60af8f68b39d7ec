mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use rand::Rng;
use remixtrace_core::attribution::{greedy_top_n, min_docs_for_threshold, DocCoverage};
use remixtrace_core::bm25::{Bm25Params, InvertedIndex};
use remixtrace_core::dedup::{lcs_length, DedupConfig};
use remixtrace_core::detection::{auroc, mann_whitney_u, Label, ScoreSet};
use remixtrace_core::metric::AnalysisConfig;
use remixtrace_core::par::Execution;
use remixtrace_core::pipeline::{Analyzer, PipelineConfig};
use remixtrace_core::stopwords::StopWordList;
use remixtrace_core::store::IndexBundle;
use remixtrace_core::{Corpus, QueryText};

#[test]
fn bm25_frozen_table() {
    let corpus = Corpus::from_texts([
        ("d1", "the cat sat on the mat"),
        ("d2", "a dog chased the cat"),
        ("d3", "dogs and cats live together"),
        ("d4", "the mat was red"),
    ])
    .unwrap();
    let index = InvertedIndex::build(&corpus);
    let params = Bm25Params::default();
    // hand-computed with idf = ln(1 + (N - df + 0.5) / (df + 0.5)), k1 = 1.2, b = 0.75
    let table: &[(&[&str], &[(&str, f64)])] = &[
        (&["cat", "mat"], &[("d1", 1.28144856910242), ("d4", 0.7549127709068711), ("d2", 0.6931471805599453)]),
        (&["dog", "cat", "red"], &[("d2", 1.8971199848858813), ("d4", 1.3112575096619106), ("d1", 0.64072428455121)]),
        (&["the"], &[("d1", 0.46431057790840913), ("d4", 0.38845785973525315), ("d2", 0.3566749439387324)]),
    ];
    for (query, expected) in table {
        let got = index.top_k_documents(query, &params);
        assert_eq!(got.len(), expected.len(), "{query:?}");
        for ((id, s), (eid, es)) in got.iter().zip(expected.iter()) {
            assert_eq!(id, eid, "{query:?}");
            assert!((s - es).abs() < 1e-9, "{query:?} {id}: {s} vs {es}");
        }
    }
}

fn lcs_reference(a: &[u8], b: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let key = (a.len(), b.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let v = if a[a.len() - 1] == b[b.len() - 1] {
        1 + lcs_reference(&a[..a.len() - 1], &b[..b.len() - 1], memo)
    } else {
        lcs_reference(&a[..a.len() - 1], b, memo).max(lcs_reference(a, &b[..b.len() - 1], memo))
    };
    memo.insert(key, v);
    v
}

#[test]
fn lcs_matches_recursive_definition() {
    let mut r = rng(31);
    for _ in 0..200 {
        let a: Vec<u8> = (0..r.gen_range(0..40)).map(|_| r.gen_range(0..4)).collect();
        let b: Vec<u8> = (0..r.gen_range(0..40)).map(|_| r.gen_range(0..4)).collect();
        assert_eq!(lcs_length(&a, &b), lcs_reference(&a, &b, &mut HashMap::new()));
    }
}

fn analyzer_config(dedup: bool) -> PipelineConfig {
    PipelineConfig {
        analysis: AnalysisConfig::default(),
        dedup: dedup.then(DedupConfig::default),
        ..Default::default()
    }
}

#[test]
fn verbatim_copy_is_excluded_by_dedup() {
    let text = "an unusual string of words that nobody else would ever write in this particular order at all";
    let corpus = Corpus::from_texts([
        ("copy", format!("preface material {text} closing remarks")),
        ("other", "some unrelated document about gardening and the weather".to_string()),
    ])
    .unwrap();
    let bundle = IndexBundle::build(corpus, Execution::Parallel).unwrap();
    let stop = StopWordList::english();
    let q = QueryText::new("q", text);
    let plain = Analyzer::new(&bundle, None, &stop, analyzer_config(false), Execution::Parallel).unwrap();
    assert_eq!(plain.analyze(&q).unwrap().report.creativity_index, 0.0);
    let deduped = Analyzer::new(&bundle, None, &stop, analyzer_config(true), Execution::Parallel).unwrap();
    let a = deduped.analyze(&q).unwrap();
    assert!(a.report.creativity_index > 0.0);
    assert!(a.dedup.unwrap().excluded.contains("copy"));
}

#[test]
fn metric_invariants_on_random_analyses() {
    let mut r = rng(32);
    let stop = StopWordList::english();
    for _ in 0..20 {
        let docs = random_docs(&mut r, 15, 150, 8);
        let bundle = IndexBundle::build(corpus_of(&docs), Execution::Parallel).unwrap();
        let cfg = analyzer_config(r.gen_bool(0.5));
        let span = (cfg.analysis.l_max - cfg.analysis.l_min + 1) as f64;
        let an = Analyzer::new(&bundle, None, &stop, cfg, Execution::Parallel).unwrap();
        for _ in 0..5 {
            let q = QueryText::from_tokens("q", random_query(&mut r, &docs, 60, 8));
            let a = an.analyze(&q).unwrap();
            assert!(a.curve.is_monotone());
            assert!(a.curve.values.values().all(|v| (0.0..=1.0).contains(v)));
            let ci = a.report.creativity_index;
            assert!((0.0..=span).contains(&ci));
        }
    }
}

fn random_coverage(r: &mut impl Rng, docs: usize, x_len: usize) -> DocCoverage {
    (0..docs)
        .map(|d| {
            let mut s = BTreeSet::new();
            for _ in 0..r.gen_range(0..4) {
                let a = r.gen_range(0..x_len);
                let b = (a + r.gen_range(1..10)).min(x_len);
                s.extend(a..b);
            }
            (format!("d{d:02}"), s)
        })
        .collect()
}

#[test]
fn greedy_within_approximation_bound() {
    let mut r = rng(33);
    let bound = 1.0 - (-1.0f64).exp();
    for _ in 0..60 {
        let x_len = r.gen_range(1..=30);
        let n_docs = r.gen_range(1..=12);
        let cov = random_coverage(&mut r, n_docs, x_len);
        let sets: Vec<BTreeSet<usize>> = cov.values().cloned().collect();
        let sel = greedy_top_n(&cov, cov.len(), x_len);
        for w in sel.residual_by_k.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for n in 1..=cov.len() {
            let picked: BTreeSet<usize> = sel.selected.iter().take(n).flat_map(|id| cov[id].iter().copied()).collect();
            let opt = brute_force_max_cover(&sets, n);
            assert!(picked.len() as f64 >= bound * opt as f64 - 1e-12);
        }
        let theta = r.gen_range(0.0..=1.0);
        let k = min_docs_for_threshold(&cov, theta, x_len);
        if let Some(k) = k {
            assert!(sel.residual_by_k[k] < theta);
            assert!(sel.residual_by_k[..k].iter().all(|&v| v >= theta));
        } else {
            assert!(sel.residual_by_k.iter().all(|&v| v >= theta));
        }
    }
}

fn sets(h: &[f64], m: &[f64]) -> (ScoreSet, ScoreSet) {
    (ScoreSet::new(Label::Human, h.to_vec()), ScoreSet::new(Label::Machine, m.to_vec()))
}

#[test]
fn auroc_properties() {
    let mut r = rng(34);
    for _ in 0..100 {
        let h: Vec<f64> = (0..r.gen_range(1..30)).map(|_| r.gen_range(0..15) as f64).collect();
        let m: Vec<f64> = (0..r.gen_range(1..30)).map(|_| r.gen_range(0..15) as f64).collect();
        let (hs, ms) = sets(&h, &m);
        let a = auroc(&hs, &ms).unwrap();
        assert_eq!(a, pairwise_auroc(&h, &m));
        let (hm, mh) = sets(&m, &h);
        let b = auroc(&hm, &mh).unwrap();
        let n = (h.len() * m.len()) as f64;
        assert_eq!(a + b, 1.0);
        assert_eq!(mann_whitney_u(&h, &m).unwrap().u + mann_whitney_u(&m, &h).unwrap().u, n);
        let t = |v: &[f64]| v.iter().map(|x| x * x * x + 3.0 * x).collect::<Vec<_>>();
        let (ht, mt) = sets(&t(&h), &t(&m));
        assert_eq!(auroc(&ht, &mt).unwrap(), a);
        let e = |v: &[f64]| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        let (he, me) = sets(&e(&h), &e(&m));
        assert_eq!(auroc(&he, &me).unwrap(), a);
        let u = mann_whitney_u(&h, &m).unwrap();
        assert_eq!(u.u / n, a);
        assert!((0.0..=1.0).contains(&u.p));
    }
}

#[test]
fn auroc_hand_examples() {
    let cases: [(&[f64], &[f64], f64); 3] = [
        (&[3.0, 2.0], &[1.0, 0.0], 1.0),
        (&[1.0], &[1.0], 0.5),
        (&[2.0, 0.0], &[1.0, 1.0], 0.5),
    ];
    for (h, m, want) in cases {
        let (hs, ms) = sets(h, m);
        assert_eq!(auroc(&hs, &ms).unwrap(), want);
    }
}
