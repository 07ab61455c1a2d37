//! Evaluation protocol: document-completion held-out likelihood,
//! co-occurrence topic coherence, sparsity statistics, and class-label
//! consistency.

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lda::{lda_e_step, LdaConfig, LdaModel};
use crate::model::PtmModel;

/// Held-out log-likelihood plus the number of word terms that hit the
/// probability guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeldoutResult {
    pub log_likelihood: f64,
    pub floored_terms: usize,
}

/// Guard applied to per-word mixture probabilities in held-out scoring.
/// Matches the smoothing floor of the LDA baseline so both model families
/// pay the same price for words they make (near-)impossible.
pub const HELDOUT_PROB_GUARD: f64 = 1e-10;

fn heldout_core(
    proportions: &[Vec<f64>],
    expected_word_prob: impl Fn(usize, usize) -> f64 + Sync,
    heldout: &Corpus,
) -> HeldoutResult {
    let m = proportions[0].len();
    let per_doc: Vec<(f64, usize)> = heldout
        .documents()
        .par_iter()
        .enumerate()
        .map(|(d, doc)| {
            let alpha = &proportions[d];
            let mut ll = 0.0;
            let mut floored = 0;
            for &(n, c) in doc.counts() {
                let p: f64 = (0..m).map(|j| alpha[j] * expected_word_prob(j, n)).sum();
                if p < HELDOUT_PROB_GUARD {
                    floored += 1;
                }
                ll += c as f64 * p.max(HELDOUT_PROB_GUARD).ln();
            }
            (ll, floored)
        })
        .collect();
    let log_likelihood = per_doc.iter().map(|&(ll, _)| ll).sum();
    let floored_terms = per_doc.iter().map(|&(_, f)| f).sum();
    HeldoutResult { log_likelihood, floored_terms }
}

/// Document-completion held-out likelihood for the parsimonious model:
/// proportions are inferred from the observed half with all topics allowed,
/// then scored on the held-out half.
pub fn heldout_ll_ptm(
    model: &PtmModel,
    observed: &Corpus,
    heldout: &Corpus,
    infer_iters: usize,
    infer_tol: f64,
) -> Result<HeldoutResult> {
    if observed.num_documents() != heldout.num_documents() {
        return Err(Error::data("observed and held-out corpora differ in size"));
    }
    let proportions: Vec<Vec<f64>> = observed
        .documents()
        .par_iter()
        .map(|doc| crate::em::infer_test_proportions(model, doc, infer_iters, infer_tol))
        .collect();
    Ok(heldout_core(&proportions, |j, n| model.word_prob(j, n), heldout))
}

/// Document-completion held-out likelihood for LDA: proportions are the
/// variational Dirichlet parameters of the observed half, normalized.
pub fn heldout_ll_lda(
    model: &LdaModel,
    observed: &Corpus,
    heldout: &Corpus,
    cfg: &LdaConfig,
) -> Result<HeldoutResult> {
    if observed.num_documents() != heldout.num_documents() {
        return Err(Error::data("observed and held-out corpora differ in size"));
    }
    let proportions: Vec<Vec<f64>> = observed
        .documents()
        .par_iter()
        .map(|doc| {
            let (gamma, _) = lda_e_step(model, doc, cfg);
            let sum: f64 = gamma.iter().sum();
            gamma.into_iter().map(|g| g / sum).collect()
        })
        .collect();
    Ok(heldout_core(&proportions, |j, n| model.beta[j][n], heldout))
}

/// Per-topic coherence values (`None` for skipped topics with fewer than
/// two usable top words) and their mean over the computed topics.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub per_topic: Vec<Option<f64>>,
    pub mean: f64,
    pub skipped: Vec<usize>,
}

fn doc_occurrence_masks(corpus: &Corpus, words: &[usize]) -> Vec<Vec<u64>> {
    let blocks = corpus.num_documents().div_ceil(64);
    let n = corpus.vocab_size();
    let mut mask_of = vec![Vec::new(); n];
    for &w in words {
        if mask_of[w].is_empty() {
            mask_of[w] = vec![0u64; blocks];
        }
    }
    for (d, doc) in corpus.documents().iter().enumerate() {
        for &(w, _) in doc.counts() {
            if !mask_of[w].is_empty() {
                mask_of[w][d / 64] |= 1u64 << (d % 64);
            }
        }
    }
    mask_of
}

fn popcount(mask: &[u64]) -> usize {
    mask.iter().map(|b| b.count_ones() as usize).sum()
}

fn popcount_and(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

/// Co-occurrence coherence of explicit per-topic top-word lists, each
/// ordered by descending probability.
pub fn coherence_from_top_words(top_words: &[Vec<usize>], corpus: &Corpus) -> CoherenceReport {
    let needed: Vec<usize> = top_words.iter().flatten().copied().collect();
    let masks = doc_occurrence_masks(corpus, &needed);
    let mut per_topic = Vec::with_capacity(top_words.len());
    let mut skipped = Vec::new();
    for (j, words) in top_words.iter().enumerate() {
        if words.len() < 2 {
            per_topic.push(None);
            skipped.push(j);
            continue;
        }
        let mut score = 0.0;
        for k in 1..words.len() {
            for l in 0..k {
                let s_l = popcount(&masks[words[l]]);
                if s_l == 0 {
                    continue;
                }
                let joint = popcount_and(&masks[words[k]], &masks[words[l]]);
                score += ((joint + 1) as f64 / s_l as f64).ln();
            }
        }
        per_topic.push(Some(score));
    }
    let computed: Vec<f64> = per_topic.iter().flatten().copied().collect();
    let mean = if computed.is_empty() {
        f64::NAN
    } else {
        computed.iter().sum::<f64>() / computed.len() as f64
    };
    CoherenceReport { per_topic, mean, skipped }
}

/// Top specific words of each topic by probability (descending, ties by
/// index), truncated to `ceil(top_fraction * N_j)`.
pub fn ptm_top_words(model: &PtmModel, top_fraction: f64) -> Vec<Vec<usize>> {
    (0..model.num_topics())
        .map(|j| {
            let row = &model.params().beta[j];
            let t = ((top_fraction * row.len() as f64).ceil() as usize).min(row.len());
            let mut pairs: Vec<(usize, f64)> = row.iter().collect();
            pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            pairs.truncate(t);
            pairs.into_iter().map(|(w, _)| w).collect()
        })
        .collect()
}

/// Top `t` words of each LDA topic from its full row.
pub fn lda_top_words(model: &LdaModel, t: usize) -> Vec<Vec<usize>> {
    model
        .beta
        .iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            idx.truncate(t);
            idx
        })
        .collect()
}

/// Coherence of a parsimonious model's topics over their top specific words.
pub fn coherence_ptm(model: &PtmModel, corpus: &Corpus, top_fraction: f64) -> CoherenceReport {
    coherence_from_top_words(&ptm_top_words(model, top_fraction), corpus)
}

/// Coherence of LDA topics over their `t` most probable words.
pub fn coherence_lda(model: &LdaModel, corpus: &Corpus, t: usize) -> CoherenceReport {
    coherence_from_top_words(&lda_top_words(model, t), corpus)
}

/// Sparsity statistics of a parsimonious model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityStats {
    /// Mean active topics per document.
    pub mean_topics_per_doc: f64,
    /// Mean specific words per topic.
    pub mean_specific_per_topic: f64,
    /// Words specific in at least one topic.
    pub unique_specific_words: usize,
    /// Mean number of topics in which a specific word is specific.
    pub topics_per_specific_word: f64,
}

pub fn sparsity_stats(model: &PtmModel) -> SparsityStats {
    let s = model.structure();
    let m = s.num_topics();
    let d = s.num_docs();
    let mean_topics_per_doc = (0..d).map(|dd| s.num_active(dd)).sum::<usize>() as f64 / d as f64;
    let total_specific = s.total_specific();
    let mean_specific_per_topic = total_specific as f64 / m as f64;
    let unique = (0..s.vocab_size())
        .filter(|&n| (0..m).any(|j| s.word_specific(j, n)))
        .count();
    SparsityStats {
        mean_topics_per_doc,
        mean_specific_per_topic,
        unique_specific_words: unique,
        topics_per_specific_word: if unique == 0 { 0.0 } else { total_specific as f64 / unique as f64 },
    }
}

/// Per-topic label distributions learned by proportion-weighted frequency
/// counting over a labeled corpus.
#[derive(Debug, Clone)]
pub struct LabelDistributions {
    /// `p[j][c]`: a pmf over classes for each topic.
    pub p: Vec<Vec<f64>>,
    /// Topics with zero total weight, assigned a uniform row.
    pub flagged_uniform: Vec<usize>,
}

/// Dense per-document topic proportions of a fitted parsimonious model.
pub fn ptm_train_proportions(model: &PtmModel) -> Vec<Vec<f64>> {
    let m = model.num_topics();
    model
        .params()
        .alpha
        .iter()
        .map(|row| {
            let mut dense = vec![0.0; m];
            for (j, a) in row.iter() {
                dense[j] = a;
            }
            dense
        })
        .collect()
}

/// Normalized variational proportions of an LDA model on a corpus (all
/// topics allowed in every document).
pub fn lda_train_proportions(model: &LdaModel, corpus: &Corpus, cfg: &LdaConfig) -> Vec<Vec<f64>> {
    corpus
        .documents()
        .par_iter()
        .map(|doc| {
            let (gamma, _) = lda_e_step(model, doc, cfg);
            let sum: f64 = gamma.iter().sum();
            gamma.into_iter().map(|g| g / sum).collect()
        })
        .collect()
}

pub fn learn_label_distributions(proportions: &[Vec<f64>], corpus: &Corpus) -> Result<LabelDistributions> {
    let classes = corpus.num_classes();
    if classes == 0 {
        return Err(Error::data("label distributions need a labeled corpus"));
    }
    if proportions.len() != corpus.num_documents() {
        return Err(Error::data("proportion rows do not match the corpus"));
    }
    let m = proportions[0].len();
    let mut p = vec![vec![0.0; classes]; m];
    let mut weight = vec![0.0; m];
    for (props, doc) in proportions.iter().zip(corpus.documents()) {
        for &label in doc.labels() {
            for j in 0..m {
                p[j][label] += props[j];
                weight[j] += props[j];
            }
        }
    }
    let mut flagged_uniform = Vec::new();
    for j in 0..m {
        if weight[j] > 0.0 {
            for c in 0..classes {
                p[j][c] /= weight[j];
            }
        } else {
            flagged_uniform.push(j);
            let share = 1.0 / classes as f64;
            p[j].iter_mut().for_each(|v| *v = share);
        }
    }
    Ok(LabelDistributions { p, flagged_uniform })
}

/// One point of the precision/recall curve at a given threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// 101 evenly spaced thresholds over [0, 1].
pub fn default_threshold_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

fn class_scores(distributions: &[Vec<f64>], props: &[f64]) -> Vec<f64> {
    let classes = distributions[0].len();
    let mut scores = vec![0.0; classes];
    for (j, p_j) in distributions.iter().enumerate() {
        let a = props[j];
        if a == 0.0 {
            continue;
        }
        for c in 0..classes {
            scores[c] += a * p_j[c];
        }
    }
    scores
}

/// Multi-label consistency: micro-pooled precision and recall over the
/// threshold grid and the trapezoidal area under the precision/recall
/// curve. Thresholds where no document predicts any label yield no point.
pub fn label_consistency_multi(
    distributions: &LabelDistributions,
    test_proportions: &[Vec<f64>],
    test: &Corpus,
    thresholds: &[f64],
) -> Result<(f64, Vec<PrPoint>)> {
    if test.num_classes() == 0 {
        return Err(Error::data("label consistency needs a labeled corpus"));
    }
    let scores: Vec<Vec<f64>> = test_proportions
        .iter()
        .map(|props| class_scores(&distributions.p, props))
        .collect();
    let total_truth: usize = test.documents().iter().map(|d| d.labels().len()).sum();
    if total_truth == 0 {
        return Err(Error::data("no test document carries labels"));
    }
    let mut points = Vec::new();
    for &nu in thresholds {
        let mut tp = 0usize;
        let mut predicted = 0usize;
        for (doc, s) in test.documents().iter().zip(&scores) {
            let pred: Vec<usize> = (0..s.len()).filter(|&c| s[c] > nu).collect();
            predicted += pred.len();
            tp += pred.iter().filter(|c| doc.labels().contains(c)).count();
        }
        if predicted == 0 {
            continue; // precision undefined at this threshold
        }
        points.push(PrPoint {
            threshold: nu,
            precision: tp as f64 / predicted as f64,
            recall: tp as f64 / total_truth as f64,
        });
    }
    let mut by_recall = points.clone();
    by_recall.sort_by(|a, b| a.recall.partial_cmp(&b.recall).unwrap());
    let mut auc = 0.0;
    for pair in by_recall.windows(2) {
        auc += (pair[1].recall - pair[0].recall) * 0.5 * (pair[0].precision + pair[1].precision);
    }
    Ok((auc, points))
}

/// Single-label consistency: accuracy of the argmax class over labeled test
/// documents (ties resolved toward the lower class index).
pub fn label_consistency_single(
    distributions: &LabelDistributions,
    test_proportions: &[Vec<f64>],
    test: &Corpus,
) -> Result<f64> {
    if test.num_classes() == 0 {
        return Err(Error::data("label consistency needs a labeled corpus"));
    }
    let mut correct = 0usize;
    let mut labeled = 0usize;
    for (doc, props) in test.documents().iter().zip(test_proportions) {
        if doc.labels().is_empty() {
            continue;
        }
        labeled += 1;
        let scores = class_scores(&distributions.p, props);
        let mut best = (0usize, f64::NEG_INFINITY);
        for (c, &s) in scores.iter().enumerate() {
            if s > best.1 {
                best = (c, s);
            }
        }
        if doc.labels().contains(&best.0) {
            correct += 1;
        }
    }
    if labeled == 0 {
        return Err(Error::data("no test document carries labels"));
    }
    Ok(correct as f64 / labeled as f64)
}
