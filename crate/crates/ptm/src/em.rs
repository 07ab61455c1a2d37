//! EM parameter estimation for a fixed structure: E-step responsibilities,
//! M-step updates for proportions and word probabilities, shared-model
//! estimation, and test-document inference.

use rayon::prelude::*;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::model::{ModelStructure, PtmModel, SparseRow, PROB_FLOOR};

/// EM stopping controls.
#[derive(Debug, Clone, Copy)]
pub struct EmConfig {
    /// Relative log-likelihood improvement below which EM stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig { tol: 1e-5, max_iters: 100 }
    }
}

/// Responsibilities for one document, over its active topics at E-step time.
#[derive(Debug, Clone)]
pub struct DocPosterior {
    /// Active topics, ascending.
    pub topics: Vec<usize>,
    /// Row-major responsibilities: `resp[w * topics.len() + t]` is the
    /// posterior of `topics[t]` for the document's w-th distinct word.
    pub resp: Vec<f64>,
    /// Count-weighted responsibility sums per active topic.
    pub topic_weight: Vec<f64>,
}

/// E-step output: per-document responsibilities plus the x_jn aggregates.
#[derive(Debug, Clone)]
pub struct PosteriorStats {
    docs: Vec<DocPosterior>,
    /// Dense M x N matrix of expected word counts per topic.
    x: Vec<Vec<f64>>,
}

impl PosteriorStats {
    pub fn doc(&self, d: usize) -> &DocPosterior {
        &self.docs[d]
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    /// Expected count of word n attributed to topic j.
    pub fn x(&self, j: usize, n: usize) -> f64 {
        self.x[j][n]
    }

    pub fn x_row(&self, j: usize) -> &[f64] {
        &self.x[j]
    }

    /// x-bar_j: expected count mass of topic j on its specific words.
    pub fn x_bar(&self, j: usize, structure: &ModelStructure) -> f64 {
        structure.specific_words(j).map(|n| self.x[j][n]).sum()
    }
}

fn doc_posterior(model: &PtmModel, d: usize, doc: &Document) -> Result<DocPosterior> {
    let alpha = &model.params().alpha[d];
    let topics: Vec<usize> = alpha.indices().to_vec();
    let k = topics.len();
    let mut resp = vec![0.0; doc.distinct_words() * k];
    let mut topic_weight = vec![0.0; k];
    for (w, &(n, c)) in doc.counts().iter().enumerate() {
        let mut sum = 0.0;
        for (t, (j, a)) in alpha.iter().enumerate() {
            let p = a * model.word_prob(j, n);
            resp[w * k + t] = p;
            sum += p;
        }
        if sum <= 0.0 {
            return Err(Error::numerical(format!(
                "degenerate word: document {d}, word {n} has zero probability under every active topic"
            )));
        }
        for t in 0..k {
            let r = resp[w * k + t] / sum;
            resp[w * k + t] = r;
            topic_weight[t] += c as f64 * r;
        }
    }
    Ok(DocPosterior { topics, resp, topic_weight })
}

/// E-step: responsibilities proportional to alpha_jd * word_prob(j, w),
/// normalized over each document's active topics, with the x_jn aggregates
/// accumulated in document order.
pub fn e_step(model: &PtmModel, corpus: &Corpus) -> Result<PosteriorStats> {
    model.check_corpus(corpus)?;
    let docs: Vec<DocPosterior> = corpus
        .documents()
        .par_iter()
        .enumerate()
        .map(|(d, doc)| doc_posterior(model, d, doc))
        .collect::<Result<_>>()?;

    let mut x = vec![vec![0.0; model.vocab_size()]; model.num_topics()];
    for (doc, block) in corpus.documents().iter().zip(&docs) {
        let k = block.topics.len();
        for (w, &(n, c)) in doc.counts().iter().enumerate() {
            for (t, &j) in block.topics.iter().enumerate() {
                x[j][n] += c as f64 * block.resp[w * k + t];
            }
        }
    }
    Ok(PosteriorStats { docs, x })
}

/// M-step update of topic proportions: per-document responsibility mass
/// divided by document length.
pub fn update_alpha(stats: &PosteriorStats, corpus: &Corpus) -> Vec<SparseRow> {
    stats
        .docs
        .iter()
        .zip(corpus.documents())
        .map(|(block, doc)| {
            let len = doc.length() as f64;
            SparseRow::from_pairs(
                block
                    .topics
                    .iter()
                    .zip(&block.topic_weight)
                    .map(|(&j, &w)| (j, w / len))
                    .collect(),
            )
        })
        .collect()
}

/// Shared-mass normalizer for topic j: 1 minus the shared probability of
/// its non-specific words.
pub(crate) fn specific_mass_target(structure: &ModelStructure, beta0: &[f64], j: usize) -> f64 {
    let shared_out: f64 = beta0
        .iter()
        .enumerate()
        .filter(|&(n, _)| !structure.word_specific(j, n))
        .map(|(_, &b)| b)
        .sum();
    1.0 - shared_out
}

/// M-step update of topic-specific word probabilities through the pmf
/// normalizer mu_j. A topic whose specific words all have zero expected
/// count gets a uniform row over its support.
pub fn update_beta(stats: &PosteriorStats, structure: &ModelStructure, beta0: &[f64]) -> Result<Vec<SparseRow>> {
    (0..structure.num_topics())
        .map(|j| {
            let target = specific_mass_target(structure, beta0, j);
            if target <= 0.0 {
                return Err(Error::numerical(format!(
                    "shared mass overflow: topic {j} has non-specific shared mass >= 1"
                )));
            }
            let x_bar = stats.x_bar(j, structure);
            let row = if x_bar > 0.0 {
                let mu = x_bar / target;
                structure
                    .specific_words(j)
                    .map(|n| (n, stats.x(j, n) / mu))
                    .collect()
            } else {
                let k = structure.num_specific(j);
                structure
                    .specific_words(j)
                    .map(|n| (n, target / k as f64))
                    .collect()
            };
            Ok(SparseRow::from_pairs(row))
        })
        .collect()
}

/// Global-frequency estimate of the shared word pmf.
pub fn estimate_shared(corpus: &Corpus) -> Vec<f64> {
    let mut counts = vec![0.0; corpus.vocab_size()];
    for doc in corpus.documents() {
        for &(n, c) in doc.counts() {
            counts[n] += c as f64;
        }
    }
    let total: f64 = corpus.total_tokens() as f64;
    for c in &mut counts {
        *c /= total;
    }
    counts
}

/// Alternate E- and M-steps until the relative log-likelihood improvement
/// drops below `cfg.tol` or `cfg.max_iters` is reached. The shared model is
/// never modified. Returns the updated model and the log-likelihood trace
/// (the first entry is the initial likelihood).
pub fn run_em(mut model: PtmModel, corpus: &Corpus, cfg: &EmConfig) -> Result<(PtmModel, Vec<f64>)> {
    model.check_corpus(corpus)?;
    let mut trace = vec![model.corpus_log_likelihood(corpus)];
    for _ in 0..cfg.max_iters {
        let stats = e_step(&model, corpus)?;
        let alpha = update_alpha(&stats, corpus);
        let beta = update_beta(&stats, model.structure(), &model.params().beta0)?;
        {
            let (_, params) = model.parts_mut();
            params.alpha = alpha;
            params.beta = beta;
        }
        let ll = model.corpus_log_likelihood(corpus);
        let prev = *trace.last().unwrap();
        trace.push(ll);
        if relative_change(ll, prev) < cfg.tol {
            break;
        }
    }
    Ok((model, trace))
}

pub(crate) fn relative_change(current: f64, previous: f64) -> f64 {
    (current - previous).abs() / previous.abs().max(1e-12)
}

/// Maximize a single document's log-likelihood over proportions restricted
/// to `support`, by fixed-point iteration of the responsibility and
/// proportion updates from a uniform start. The per-document problem is
/// concave, so the optimum does not depend on the starting point.
///
/// Returns proportions aligned with `support` and the final log-likelihood.
/// A word with zero probability under every supported topic contributes the
/// current proportions as its responsibilities (it carries no information)
/// and a floored likelihood term.
pub fn optimize_doc_proportions(
    model: &PtmModel,
    doc: &Document,
    support: &[usize],
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let k = support.len();
    debug_assert!(k >= 1);
    // Cache word probabilities for the supported topics.
    let probs: Vec<Vec<f64>> = doc
        .counts()
        .iter()
        .map(|&(n, _)| support.iter().map(|&j| model.word_prob(j, n)).collect())
        .collect();
    let len = doc.length() as f64;
    let mut alpha = vec![1.0 / k as f64; k];
    let mut ll = f64::NEG_INFINITY;
    for _ in 0..max_iters {
        let mut weight = vec![0.0; k];
        let mut new_ll = 0.0;
        for (w, &(_, c)) in doc.counts().iter().enumerate() {
            let mut sum = 0.0;
            for t in 0..k {
                sum += alpha[t] * probs[w][t];
            }
            if sum > 0.0 {
                for t in 0..k {
                    weight[t] += c as f64 * alpha[t] * probs[w][t] / sum;
                }
            } else {
                // Uninformative word: responsibilities default to the
                // current proportions.
                for t in 0..k {
                    weight[t] += c as f64 * alpha[t];
                }
            }
            new_ll += c as f64 * sum.max(PROB_FLOOR).ln();
        }
        let mut delta: f64 = 0.0;
        for t in 0..k {
            let next = weight[t] / len;
            delta = delta.max((next - alpha[t]).abs());
            alpha[t] = next;
        }
        let converged = delta < tol;
        ll = new_ll;
        if converged {
            break;
        }
    }
    // One more likelihood pass so the reported value matches the final
    // proportions exactly.
    let final_ll: f64 = doc
        .counts()
        .iter()
        .enumerate()
        .map(|(w, &(_, c))| {
            let sum: f64 = (0..k).map(|t| alpha[t] * probs[w][t]).sum();
            c as f64 * sum.max(PROB_FLOOR).ln()
        })
        .sum();
    let _ = ll;
    (alpha, final_ll)
}

/// Infer proportions for a test document with every topic allowed, keeping
/// all word probabilities frozen. Returns a dense length-M vector summing
/// to one.
pub fn infer_test_proportions(model: &PtmModel, doc: &Document, max_iters: usize, tol: f64) -> Vec<f64> {
    let support: Vec<usize> = (0..model.num_topics()).collect();
    let (alpha, _) = optimize_doc_proportions(model, doc, &support, max_iters, tol);
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Vocabulary};
    use crate::model::ModelParams;
    use crate::testutil::{fig_corpus, fig_model};
    use std::sync::Arc;

    #[test]
    fn responsibilities_single_active_topic() {
        let voc = Arc::new(Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 2), (1, 1)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let structure = ModelStructure::new(vec![vec![true, true]], vec![vec![true]]).unwrap();
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 1.0)])],
            beta: vec![SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)])],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let stats = e_step(&model, &corpus).unwrap();
        assert!(stats.doc(0).resp.iter().all(|&r| (r - 1.0).abs() < 1e-15));
    }

    #[test]
    fn responsibilities_split_evenly_under_symmetry() {
        // Two active topics with equal proportions and equal word
        // probabilities -> 0.5 / 0.5.
        let voc = Arc::new(Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 1), (1, 1)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let structure = ModelStructure::new(
            vec![vec![true, true], vec![true, true]],
            vec![vec![true], vec![true]],
        )
        .unwrap();
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)])],
            beta: vec![
                SparseRow::from_pairs(vec![(0, 0.3), (1, 0.7)]),
                SparseRow::from_pairs(vec![(0, 0.3), (1, 0.7)]),
            ],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let stats = e_step(&model, &corpus).unwrap();
        assert!(stats.doc(0).resp.iter().all(|&r| (r - 0.5).abs() < 1e-15));
    }

    #[test]
    fn responsibilities_hand_normalization() {
        // Document 0, word 4: proportions (0.2, 0.8) on topics {0, 2},
        // word probabilities (0.1, 0.3) -> posteriors 0.02/0.26, 0.24/0.26.
        let model = fig_model();
        let voc = Arc::new(Vocabulary::synthetic(6));
        let corpus = Corpus::new(
            vec![
                Document::new(vec![(4, 1)], vec![]).unwrap(),
                Document::new(vec![(2, 1)], vec![]).unwrap(),
            ],
            voc,
            0,
        )
        .unwrap();
        let stats = e_step(&model, &corpus).unwrap();
        let block = stats.doc(0);
        assert_eq!(block.topics, vec![0, 2]);
        assert!((block.resp[0] - 0.02 / 0.26).abs() < 1e-12);
        assert!((block.resp[1] - 0.24 / 0.26).abs() < 1e-12);
        assert!((block.resp[0] - 0.076923).abs() < 1e-6);
        assert!((block.resp[1] - 0.923076).abs() < 1e-6);
    }

    #[test]
    fn degenerate_word_is_reported() {
        let mut model = fig_model();
        {
            let (_, params) = model.parts_mut();
            // Make word 2 impossible under both of document 1's topics:
            // topic 2 is specific on word 2, topic 1 shares it.
            params.beta[2].set_value(2, 0.0);
            params.beta0[2] = 0.0;
        }
        let err = e_step(&model, &fig_corpus()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("document 1") && msg.contains("word 2"), "{msg}");
    }

    #[test]
    fn alpha_update_is_responsibility_ratio() {
        // Single active topic -> proportion 1.0.
        let model = fig_model();
        let corpus = fig_corpus();
        let stats = e_step(&model, &corpus).unwrap();
        let alpha = update_alpha(&stats, &corpus);
        for (d, row) in alpha.iter().enumerate() {
            let sum: f64 = row.sum();
            assert!((sum - 1.0).abs() < 1e-12, "doc {d} sums to {sum}");
        }
        // Hand ratio: length-4 document with responsibility mass 3 and 1.
        let voc = Arc::new(Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 3), (1, 1)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let structure = ModelStructure::new(
            vec![vec![true, true], vec![true, true]],
            vec![vec![true], vec![true]],
        )
        .unwrap();
        // Topic 0 explains word 0 fully, topic 1 explains word 1 fully.
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)])],
            beta: vec![
                SparseRow::from_pairs(vec![(0, 1.0), (1, 0.0)]),
                SparseRow::from_pairs(vec![(0, 0.0), (1, 1.0)]),
            ],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let stats = e_step(&model, &corpus).unwrap();
        let alpha = update_alpha(&stats, &corpus);
        assert!((alpha[0].get(0).unwrap() - 0.75).abs() < 1e-12);
        assert!((alpha[0].get(1).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn beta_update_hand_case() {
        // Specific words {0, 1} with x = (3, 1) and non-specific shared mass
        // 0.5: mu = 4 / 0.5 = 8, beta = (0.375, 0.125), and the mixed pmf
        // closes to one.
        let voc = Arc::new(Vocabulary::synthetic(3));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 3), (1, 1)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let structure = ModelStructure::new(vec![vec![true, true, false]], vec![vec![true]]).unwrap();
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 1.0)])],
            beta: vec![SparseRow::from_pairs(vec![(0, 0.25), (1, 0.25)])],
            beta0: vec![0.25, 0.25, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let stats = e_step(&model, &corpus).unwrap();
        let beta = update_beta(&stats, model.structure(), &model.params().beta0).unwrap();
        assert!((beta[0].get(0).unwrap() - 0.375).abs() < 1e-12);
        assert!((beta[0].get(1).unwrap() - 0.125).abs() < 1e-12);
        assert!((beta[0].sum() + 0.5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_update_all_specific_is_frequency_normalization() {
        let voc = Arc::new(Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 6), (1, 2)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let structure = ModelStructure::new(vec![vec![true, true]], vec![vec![true]]).unwrap();
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 1.0)])],
            beta: vec![SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)])],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let stats = e_step(&model, &corpus).unwrap();
        let beta = update_beta(&stats, model.structure(), &model.params().beta0).unwrap();
        assert!((beta[0].get(0).unwrap() - 0.75).abs() < 1e-12);
        assert!((beta[0].get(1).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_count_specific_word_gets_zero_probability() {
        let voc = Arc::new(Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 4)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let structure = ModelStructure::new(vec![vec![true, true]], vec![vec![true]]).unwrap();
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 1.0)])],
            beta: vec![SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)])],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let stats = e_step(&model, &corpus).unwrap();
        let beta = update_beta(&stats, model.structure(), &model.params().beta0).unwrap();
        assert_eq!(beta[0].get(1).unwrap(), 0.0);
    }

    #[test]
    fn shared_estimate_is_global_frequency() {
        // Documents "a a b" and "b c" -> (0.4, 0.4, 0.2).
        let voc = Arc::new(Vocabulary::synthetic(3));
        let corpus = Corpus::new(
            vec![
                Document::new(vec![(0, 2), (1, 1)], vec![]).unwrap(),
                Document::new(vec![(1, 1), (2, 1)], vec![]).unwrap(),
            ],
            voc,
            0,
        )
        .unwrap();
        let beta0 = estimate_shared(&corpus);
        assert_eq!(beta0, vec![0.4, 0.4, 0.2]);
        assert!((beta0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn em_trace_is_monotone_and_shared_model_frozen() {
        let model = fig_model();
        let corpus = fig_corpus();
        let beta0_before = model.params().beta0.clone();
        let (fitted, trace) = run_em(model, &corpus, &EmConfig::default()).unwrap();
        for pair in trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-10, "trace decreased: {pair:?}");
        }
        assert_eq!(fitted.params().beta0, beta0_before);
        assert!(fitted.validate().is_empty());
    }

    #[test]
    fn converged_model_stops_after_one_iteration() {
        let model = fig_model();
        let corpus = fig_corpus();
        let (fitted, _) = run_em(model, &corpus, &EmConfig { tol: 1e-12, max_iters: 200 }).unwrap();
        let (again, trace) = run_em(fitted, &corpus, &EmConfig::default()).unwrap();
        assert_eq!(trace.len(), 2);
        assert!(relative_change(trace[1], trace[0]) < 1e-5);
        assert!(again.validate().is_empty());
    }

    #[test]
    fn hard_assigned_all_specific_converges_to_frequencies() {
        // Two single-topic documents, all words specific: EM reaches the
        // per-topic frequency estimates in at most two iterations.
        let voc = Arc::new(Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![
                Document::new(vec![(0, 3), (1, 1)], vec![]).unwrap(),
                Document::new(vec![(0, 1), (1, 3)], vec![]).unwrap(),
            ],
            voc,
            0,
        )
        .unwrap();
        let structure = ModelStructure::new(
            vec![vec![true, true], vec![true, true]],
            vec![vec![true, false], vec![false, true]],
        )
        .unwrap();
        let params = ModelParams {
            alpha: vec![
                SparseRow::from_pairs(vec![(0, 1.0)]),
                SparseRow::from_pairs(vec![(1, 1.0)]),
            ],
            beta: vec![
                SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)]),
                SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)]),
            ],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let (fitted, trace) = run_em(model, &corpus, &EmConfig::default()).unwrap();
        assert!(trace.len() <= 3); // initial value plus at most two iterations
        assert!((fitted.params().beta[0].get(0).unwrap() - 0.75).abs() < 1e-12);
        assert!((fitted.params().beta[1].get(1).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn inference_single_topic_is_unit() {
        let voc = Arc::new(Vocabulary::synthetic(2));
        let _ = voc;
        let structure = ModelStructure::new(vec![vec![true, true]], vec![vec![true]]).unwrap();
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 1.0)])],
            beta: vec![SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)])],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let doc = Document::new(vec![(0, 3)], vec![]).unwrap();
        let alpha = infer_test_proportions(&model, &doc, 100, 1e-10);
        assert_eq!(alpha, vec![1.0]);
    }

    #[test]
    fn inference_concentrates_on_matching_topic() {
        // Words specific to topic 2 with much larger probability than the
        // shared model: inferred proportion of topic 2 approaches one.
        let model = fig_model();
        let doc = Document::new(vec![(2, 30)], vec![]).unwrap();
        let alpha = infer_test_proportions(&model, &doc, 500, 1e-12);
        assert!(alpha[2] > 0.95, "alpha = {alpha:?}");
        assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inference_uniform_fixed_point_under_identical_topics() {
        let structure = ModelStructure::new(
            vec![vec![true, true], vec![true, true]],
            vec![vec![true], vec![true]],
        )
        .unwrap();
        let params = ModelParams {
            alpha: vec![SparseRow::from_pairs(vec![(0, 0.5), (1, 0.5)])],
            beta: vec![
                SparseRow::from_pairs(vec![(0, 0.4), (1, 0.6)]),
                SparseRow::from_pairs(vec![(0, 0.4), (1, 0.6)]),
            ],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(structure, params).unwrap();
        let doc = Document::new(vec![(0, 5), (1, 2)], vec![]).unwrap();
        let alpha = infer_test_proportions(&model, &doc, 50, 1e-12);
        assert!((alpha[0] - 0.5).abs() < 1e-12);
        assert!((alpha[1] - 0.5).abs() < 1e-12);
    }
}
