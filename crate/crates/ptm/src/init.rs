//! Model initialization at a given order: seed each topic from a few
//! random documents, hard-assign every document to its best topic, then
//! re-estimate the topic rows from the assignments.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::em::estimate_shared;
use crate::error::{Error, Result};
use crate::model::{ModelParams, ModelStructure, PtmModel, SparseRow, PROB_FLOOR};

/// Default number of seed documents per topic.
pub const DEFAULT_DOCS_PER_TOPIC: usize = 5;

/// Build a topic row from raw counts over the topic's specific words,
/// renormalized so the mixed pmf closes to one.
fn frequency_row(counts: &[f64], specific: &[bool], target: f64) -> Option<SparseRow> {
    let x_bar: f64 = counts
        .iter()
        .zip(specific)
        .filter(|&(_, &s)| s)
        .map(|(&c, _)| c)
        .sum();
    if x_bar <= 0.0 || target <= 0.0 {
        return None;
    }
    let mu = x_bar / target;
    Some(SparseRow::from_pairs(
        specific
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s)
            .map(|(n, _)| (n, counts[n] / mu))
            .collect(),
    ))
}

fn seed_topic_from_docs(corpus: &Corpus, docs: &[usize], beta0: &[f64]) -> (Vec<bool>, SparseRow) {
    let n = corpus.vocab_size();
    let mut counts = vec![0.0; n];
    let mut specific = vec![false; n];
    for &d in docs {
        for &(w, c) in corpus.document(d).counts() {
            specific[w] = true;
            counts[w] += c as f64;
        }
    }
    let shared_out: f64 = beta0
        .iter()
        .enumerate()
        .filter(|&(w, _)| !specific[w])
        .map(|(_, &b)| b)
        .sum();
    let row = frequency_row(&counts, &specific, 1.0 - shared_out)
        .expect("seed documents are non-empty");
    (specific, row)
}

/// Log-likelihood of a document under a single topic.
fn single_topic_ll(corpus: &Corpus, d: usize, word_prob: impl Fn(usize) -> f64) -> f64 {
    corpus
        .document(d)
        .counts()
        .iter()
        .map(|&(w, c)| c as f64 * word_prob(w).max(PROB_FLOOR).ln())
        .sum()
}

/// Construct the initial model at order `m`.
///
/// 1. Each topic is seeded from `docs_per_topic` documents drawn without
///    replacement (independently per topic); its specific words are exactly
///    the words occurring there, with frequency-count probabilities.
/// 2. Every document is hard-assigned to its maximum-likelihood topic, so
///    initially each document carries a single topic with proportion one.
/// 3. Topic rows are re-estimated by frequency counts over the assigned
///    documents. A topic left without documents is re-seeded from the
///    worst-explained document and the assignment repeats once.
pub fn initialize(corpus: &Corpus, m: usize, docs_per_topic: usize, seed: u64) -> Result<PtmModel> {
    let d = corpus.num_documents();
    if m == 0 {
        return Err(Error::data("cannot initialize a model with zero topics"));
    }
    if m > d {
        return Err(Error::data(format!(
            "cannot seed {m} topics from {d} documents"
        )));
    }
    let d_init = docs_per_topic.clamp(1, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta0 = estimate_shared(corpus);

    let mut u: Vec<Vec<bool>> = Vec::with_capacity(m);
    let mut beta: Vec<SparseRow> = Vec::with_capacity(m);
    for _ in 0..m {
        let docs = rand::seq::index::sample(&mut rng, d, d_init).into_vec();
        let (specific, row) = seed_topic_from_docs(corpus, &docs, &beta0);
        u.push(specific);
        beta.push(row);
    }

    let assign = |u: &[Vec<bool>], beta: &[SparseRow]| -> (Vec<usize>, Vec<f64>) {
        let scored: Vec<(usize, f64)> = (0..d)
            .into_par_iter()
            .map(|dd| {
                let mut best = (0usize, f64::NEG_INFINITY);
                for j in 0..m {
                    let ll = single_topic_ll(corpus, dd, |w| {
                        if u[j][w] {
                            beta[j].get(w).unwrap_or(0.0)
                        } else {
                            beta0[w]
                        }
                    });
                    if ll > best.1 {
                        best = (j, ll);
                    }
                }
                best
            })
            .collect();
        scored.into_iter().unzip()
    };

    let (mut assigned, mut best_ll) = assign(&u, &beta);

    // Re-seed topics that attracted no documents from the worst-explained
    // documents, then repeat the assignment once.
    let empty: Vec<usize> = (0..m).filter(|&j| !assigned.contains(&j)).collect();
    let mut forced: Vec<(usize, usize)> = Vec::new();
    if !empty.is_empty() {
        let mut by_fit: Vec<usize> = (0..d).collect();
        by_fit.sort_by(|&a, &b| best_ll[a].partial_cmp(&best_ll[b]).unwrap().then(a.cmp(&b)));
        for (k, &j) in empty.iter().enumerate() {
            let dd = by_fit[k];
            let (specific, row) = seed_topic_from_docs(corpus, &[dd], &beta0);
            u[j] = specific;
            beta[j] = row;
            forced.push((j, dd));
        }
        let (a, l) = assign(&u, &beta);
        assigned = a;
        best_ll = l;
        let _ = best_ll;
        // A topic can in principle still lose its seed document to another
        // topic; pin the seed document to it so every topic stays in use.
        for &(j, dd) in &forced {
            if !assigned.contains(&j) {
                assigned[dd] = j;
            }
        }
    }

    // Final frequency re-estimation over the assigned documents.
    let n = corpus.vocab_size();
    for j in 0..m {
        let mut counts = vec![0.0; n];
        for (dd, &a) in assigned.iter().enumerate() {
            if a == j {
                for &(w, c) in corpus.document(dd).counts() {
                    counts[w] += c as f64;
                }
            }
        }
        let target = {
            let shared_out: f64 = beta0
                .iter()
                .enumerate()
                .filter(|&(w, _)| !u[j][w])
                .map(|(_, &b)| b)
                .sum();
            1.0 - shared_out
        };
        if let Some(row) = frequency_row(&counts, &u[j], target) {
            beta[j] = row;
        }
        // Otherwise the assigned documents contain none of this topic's
        // specific words; keep the seed-stage row, which already satisfies
        // the pmf constraint.
    }

    let mut v = vec![vec![false; d]; m];
    let mut alpha = Vec::with_capacity(d);
    for (dd, &j) in assigned.iter().enumerate() {
        v[j][dd] = true;
        alpha.push(SparseRow::from_pairs(vec![(j, 1.0)]));
    }

    let structure = ModelStructure::new(u, v)?;
    let model = PtmModel::new(structure, ModelParams { alpha, beta, beta0 })?;
    debug_assert!(model.validate().is_empty(), "{:?}", model.validate());
    Ok(model)
}
