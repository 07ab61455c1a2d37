//! Synthetic corpora drawn from a known parsimonious model, used as ground
//! truth for recovery and oracle tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use std::sync::Arc;

use crate::corpus::{Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{ModelParams, ModelStructure, PtmModel, SparseRow};

/// Parameters of the generative process.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorSpec {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub num_docs: usize,
    /// Inclusive uniform range for document lengths.
    pub doc_len: (usize, usize),
    /// Fraction of the vocabulary that is specific per topic.
    pub specific_fraction: f64,
    /// Inclusive uniform range for active topics per document.
    pub topics_per_doc: (usize, usize),
    /// Gamma shape of the raw per-topic rate multipliers on specific words;
    /// smaller values make each topic deviate more sharply from the shared
    /// rates. The shared pmf uses a Dirichlet(0.5) draw and the
    /// per-document proportions a Dirichlet(2).
    pub concentration: f64,
}

impl Default for GeneratorSpec {
    /// Small sparse setting: seconds-scale to fit, sparse enough that the
    /// parsimonious structure matters.
    fn default() -> Self {
        GeneratorSpec {
            num_topics: 5,
            vocab_size: 200,
            num_docs: 50,
            doc_len: (80, 120),
            specific_fraction: 0.1,
            topics_per_doc: (1, 2),
            concentration: 0.05,
        }
    }
}

/// How document labels are derived from the generating model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Single label: the topic with the largest proportion.
    ArgmaxProportion,
    /// Multi-label: every active topic.
    ActiveTopics,
}

fn dirichlet_draw(rng: &mut ChaCha8Rng, k: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let sum: f64 = draws.iter().sum();
        if sum > 1e-12 {
            return draws.into_iter().map(|g| g / sum).collect();
        }
    }
}

/// Draw a random model satisfying every structure invariant.
pub fn generate_model(spec: &GeneratorSpec, seed: u64) -> Result<PtmModel> {
    let m = spec.num_topics;
    let n = spec.vocab_size;
    let d = spec.num_docs;
    if m == 0 || n == 0 || d == 0 {
        return Err(Error::data("generator spec requires positive M, N, D"));
    }
    if !(spec.specific_fraction > 0.0 && spec.specific_fraction <= 1.0) {
        return Err(Error::data("specific fraction must be in (0, 1]"));
    }
    if spec.concentration <= 0.0 {
        return Err(Error::data("concentration must be positive"));
    }
    if d < m {
        return Err(Error::data(format!("need at least as many documents ({d}) as topics ({m})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let beta0 = dirichlet_draw(&mut rng, n, 0.5);

    // Salient words are drawn from a pool of globally frequent words, so
    // overlapping topics reshape real probability mass. The per-topic rates
    // over the pool are balanced so that each topic's mixed pmf closes
    // exactly and, across topics, each word's usage-weighted rate matches
    // its shared rate; the global-frequency estimate of the shared model is
    // then consistent with the generating process.
    let per_topic = ((spec.specific_fraction * n as f64).round() as usize).clamp(1, n);
    let pool: Vec<usize> = {
        let mut by_mass: Vec<usize> = (0..n).collect();
        by_mass.sort_by(|&a, &b| beta0[b].partial_cmp(&beta0[a]).unwrap().then(a.cmp(&b)));
        by_mass.truncate(per_topic.saturating_mul(5).div_ceil(2).clamp(per_topic, n));
        by_mass
    };
    let mut u = vec![vec![false; n]; m];
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut chosen: Vec<usize> =
            rand::seq::index::sample(&mut rng, pool.len(), per_topic.min(pool.len()))
                .into_iter()
                .map(|i| pool[i])
                .collect();
        chosen.sort_unstable();
        for &w in &chosen {
            u[j][w] = true;
        }
        sets.push(chosen);
    }

    // Positive rate matrix over the specific support, balanced to the row
    // targets (pmf closure) and column targets (shared-rate consistency).
    let gamma = Gamma::new(spec.concentration, 1.0).expect("positive shape");
    let mut rate: Vec<Vec<f64>> = sets
        .iter()
        .map(|set| set.iter().map(|&w| beta0[w] * (gamma.sample(&mut rng) + 1e-6)).collect())
        .collect();
    let row_target: Vec<f64> = sets.iter().map(|set| set.iter().map(|&w| beta0[w]).sum()).collect();
    let mut topics_of = vec![Vec::new(); n];
    for (j, set) in sets.iter().enumerate() {
        for (slot, &w) in set.iter().enumerate() {
            topics_of[w].push((j, slot));
        }
    }
    let col_target: Vec<f64> = (0..n).map(|w| beta0[w] * topics_of[w].len() as f64).collect();
    for _ in 0..200 {
        let mut drift: f64 = 0.0;
        for (j, row) in rate.iter_mut().enumerate() {
            let sum: f64 = row.iter().sum();
            let scale = row_target[j] / sum;
            drift = drift.max((scale - 1.0).abs());
            row.iter_mut().for_each(|v| *v *= scale);
        }
        for w in 0..n {
            if topics_of[w].len() < 2 {
                continue;
            }
            let sum: f64 = topics_of[w].iter().map(|&(j, slot)| rate[j][slot]).sum();
            let scale = col_target[w] / sum;
            drift = drift.max((scale - 1.0).abs());
            for &(j, slot) in &topics_of[w] {
                rate[j][slot] *= scale;
            }
        }
        if drift < 1e-13 {
            break;
        }
    }
    // Final exact row closure.
    let mut beta = Vec::with_capacity(m);
    for (j, set) in sets.iter().enumerate() {
        let sum: f64 = rate[j].iter().sum();
        let scale = row_target[j] / sum;
        beta.push(SparseRow::from_pairs(
            set.iter().zip(&rate[j]).map(|(&w, &v)| (w, v * scale)).collect(),
        ));
    }

    let (lo, hi) = spec.topics_per_doc;
    let lo = lo.clamp(1, m);
    let hi = hi.clamp(lo, m);
    let mut v = vec![vec![false; d]; m];
    let mut active_sets: Vec<Vec<usize>> = Vec::with_capacity(d);
    for dd in 0..d {
        let m_d = rng.random_range(lo..=hi);
        let mut topics = rand::seq::index::sample(&mut rng, m, m_d).into_vec();
        topics.sort_unstable();
        for &j in &topics {
            v[j][dd] = true;
        }
        active_sets.push(topics);
    }
    // Repair topics used by no document.
    for j in 0..m {
        if v[j].iter().any(|&b| b) {
            continue;
        }
        let candidates: Vec<usize> = (0..d).filter(|&dd| !v[j][dd]).collect();
        let dd = candidates[rng.random_range(0..candidates.len())];
        v[j][dd] = true;
        active_sets[dd].push(j);
        active_sets[dd].sort_unstable();
    }

    let mut alpha = Vec::with_capacity(d);
    for set in &active_sets {
        let weights = dirichlet_draw(&mut rng, set.len(), 2.0);
        alpha.push(SparseRow::from_pairs(
            set.iter().zip(&weights).map(|(&j, &a)| (j, a)).collect(),
        ));
    }

    let structure = ModelStructure::new(u, v)?;
    let model = PtmModel::new(structure, ModelParams { alpha, beta, beta0 })?;
    debug_assert!(model.validate().is_empty(), "{:?}", model.validate());
    Ok(model)
}

fn cumulative(row: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    row.iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw_index(cum: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cum.last().unwrap();
    let x = rng.random_range(0.0..total);
    cum.partition_point(|&c| c <= x).min(cum.len() - 1)
}

/// Ancestral sampling: per word, draw a topic from the document's
/// proportions, then a word from that topic's pmf. Also returns, per
/// document, how many words each topic generated.
pub fn sample_corpus_traced(
    model: &PtmModel,
    doc_len: (usize, usize),
    seed: u64,
    label_mode: LabelMode,
) -> (Corpus, Vec<Vec<usize>>) {
    let n = model.vocab_size();
    let m = model.num_topics();
    let word_cum: Vec<Vec<f64>> = (0..m)
        .map(|j| cumulative(&(0..n).map(|w| model.word_prob(j, w)).collect::<Vec<_>>()))
        .collect();

    let results: Vec<(Document, Vec<usize>)> = (0..model.num_docs())
        .into_par_iter()
        .map(|d| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(d as u64);
            let len = rng.random_range(doc_len.0..=doc_len.1.max(doc_len.0));
            let alpha = &model.params().alpha[d];
            let topic_cum = cumulative(alpha.values());
            let mut counts = vec![0usize; n];
            let mut topic_counts = vec![0usize; m];
            for _ in 0..len {
                let t = draw_index(&topic_cum, &mut rng);
                let j = alpha.indices()[t];
                topic_counts[j] += 1;
                let w = draw_index(&word_cum[j], &mut rng);
                counts[w] += 1;
            }
            let labels = match label_mode {
                LabelMode::ArgmaxProportion => {
                    let (best, _) = alpha
                        .iter()
                        .fold((0usize, f64::NEG_INFINITY), |(bj, bv), (j, v)| {
                            if v > bv {
                                (j, v)
                            } else {
                                (bj, bv)
                            }
                        });
                    vec![best]
                }
                LabelMode::ActiveTopics => alpha.indices().to_vec(),
            };
            let pairs: Vec<(usize, usize)> =
                counts.iter().enumerate().filter(|&(_, &c)| c > 0).map(|(w, &c)| (w, c)).collect();
            let doc = Document::new(pairs, labels).expect("sampled document is non-empty");
            (doc, topic_counts)
        })
        .collect();

    let (documents, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let vocabulary = Arc::new(Vocabulary::synthetic(n));
    let corpus = Corpus::new(documents, vocabulary, m).expect("sampled corpus is valid");
    (corpus, traces)
}

/// Ancestral sampling without the per-topic trace.
pub fn sample_corpus(model: &PtmModel, doc_len: (usize, usize), seed: u64, label_mode: LabelMode) -> Corpus {
    sample_corpus_traced(model, doc_len, seed, label_mode).0
}
