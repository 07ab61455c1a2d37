//! The model-selection objective and its term-by-term breakdown: switch
//! configuration priors, per-parameter penalties with their effective
//! sample sizes, and the data misfit. All costs are in nats.

use std::f64::consts::{LN_2, TAU};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::math::{binary_entropy_bits, ln_binomial};
use crate::model::{ModelStructure, PtmModel};

/// How the word-switch configuration prior is costed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UPriorMode {
    /// Entropy approximation of the number of configurations with at most
    /// N0 "on" switches; valid when N0 is much smaller than M*N.
    EntropyApprox,
    /// Uniform over all 2^(M*N) configurations; used when the vocabulary is
    /// small and the entropy approximation breaks down.
    Exact,
}

impl UPriorMode {
    /// Resolve an automatic choice by vocabulary size: exact below 1000
    /// words, entropy approximation otherwise.
    pub fn auto(vocab_size: usize) -> Self {
        if vocab_size < 1000 {
            UPriorMode::Exact
        } else {
            UPriorMode::EntropyApprox
        }
    }
}

/// The objective value split into its five terms. `total` is the sum of the
/// parts in field order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicBreakdown {
    pub v_prior_cost: f64,
    pub u_prior_cost: f64,
    pub alpha_penalty: f64,
    pub beta_penalty: f64,
    pub neg_log_likelihood: f64,
    pub total: f64,
}

impl BicBreakdown {
    pub fn csv_header() -> &'static str {
        "v_prior_cost,u_prior_cost,alpha_penalty,beta_penalty,neg_log_likelihood,total"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.v_prior_cost,
            self.u_prior_cost,
            self.alpha_penalty,
            self.beta_penalty,
            self.neg_log_likelihood,
            self.total
        )
    }
}

/// Cost of the topic-presence configuration: D log M plus the log binomial
/// count of each document's active-topic choice.
pub fn v_prior_cost(structure: &ModelStructure) -> f64 {
    let m = structure.num_topics();
    let d = structure.num_docs();
    let mut cost = d as f64 * (m as f64).ln();
    for dd in 0..d {
        cost += ln_binomial(m, structure.num_active(dd));
    }
    cost
}

/// Cost of the word-switch configuration under the chosen mode.
pub fn u_prior_cost(structure: &ModelStructure, mode: UPriorMode) -> Result<f64> {
    let mn = (structure.num_topics() * structure.vocab_size()) as f64;
    match mode {
        UPriorMode::Exact => Ok(mn * LN_2),
        UPriorMode::EntropyApprox => {
            let ratio = structure.mean_specific() / structure.vocab_size() as f64;
            if !(0.0..=1.0).contains(&ratio) {
                return Err(Error::data(format!(
                    "mean specific-word fraction {ratio} outside [0, 1]"
                )));
            }
            Ok(mn * binary_entropy_bits(ratio) * LN_2 - 0.5 * mn.ln())
        }
    }
}

/// Per-parameter penalties: half a log effective-sample-size per free
/// proportion (M_d - 1 per document, sample size L_d) and per specific-word
/// probability (N_j per topic, sample size L-bar_j).
pub fn param_penalty(structure: &ModelStructure, corpus: &Corpus) -> Result<(f64, f64)> {
    let mut alpha_penalty = 0.0;
    for (d, doc) in corpus.documents().iter().enumerate() {
        let m_d = structure.num_active(d);
        if m_d > 1 {
            alpha_penalty += 0.5 * (m_d - 1) as f64 * (doc.length() as f64 / TAU).ln();
        }
    }
    let mut beta_penalty = 0.0;
    for j in 0..structure.num_topics() {
        let l_bar = structure.topic_sample_size(j, corpus);
        if l_bar == 0 {
            return Err(Error::data(format!(
                "topic {j} is present in no document; its penalty sample size is zero"
            )));
        }
        beta_penalty += 0.5 * structure.num_specific(j) as f64 * (l_bar as f64 / TAU).ln();
    }
    Ok((alpha_penalty, beta_penalty))
}

/// Evaluate the full objective for a model on a corpus.
pub fn total_bic(model: &PtmModel, corpus: &Corpus, mode: UPriorMode) -> Result<BicBreakdown> {
    model.check_corpus(corpus)?;
    let structure = model.structure();
    let v_cost = v_prior_cost(structure);
    let u_cost = u_prior_cost(structure, mode)?;
    let (alpha_penalty, beta_penalty) = param_penalty(structure, corpus)?;
    let neg_log_likelihood = -model.corpus_log_likelihood(corpus);
    let total = v_cost + u_cost + alpha_penalty + beta_penalty + neg_log_likelihood;
    Ok(BicBreakdown {
        v_prior_cost: v_cost,
        u_prior_cost: u_cost,
        alpha_penalty,
        beta_penalty,
        neg_log_likelihood,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fig_corpus, fig_model};

    fn structure(u: Vec<Vec<bool>>, v: Vec<Vec<bool>>) -> ModelStructure {
        ModelStructure::new(u, v).unwrap()
    }

    #[test]
    fn v_prior_all_topics_active_reduces_to_d_log_m() {
        // C(M, M) = 1, so only D log M remains.
        let s = structure(
            vec![vec![true; 4]; 3],
            vec![vec![true; 5], vec![true; 5], vec![true; 5]],
        );
        assert!((v_prior_cost(&s) - 5.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn v_prior_hand_value() {
        // D = 1, M = 3, M_d = 2: log 3 + log C(3, 2) = 2 log 3.
        let s = structure(
            vec![vec![true; 2]; 3],
            vec![vec![true], vec![true], vec![false]],
        );
        let expected = 3f64.ln() + 3f64.ln();
        assert!((v_prior_cost(&s) - expected).abs() < 1e-12);
        assert!((expected - 2.1972245773362196).abs() < 1e-12);
    }

    #[test]
    fn v_prior_single_topic_is_zero() {
        let s = structure(vec![vec![true, true]], vec![vec![true, true]]);
        assert!(v_prior_cost(&s).abs() < 1e-12);
    }

    #[test]
    fn u_prior_entropy_hand_value() {
        // M = 2, N = 4, one specific word per topic: N-bar/N = 0.25,
        // H(0.25) = 0.811278 bits, cost = 8 H ln2 - 0.5 ln 8.
        let s = structure(
            vec![
                vec![true, false, false, false],
                vec![false, true, false, false],
            ],
            vec![vec![true, false], vec![false, true]],
        );
        let got = u_prior_cost(&s, UPriorMode::EntropyApprox).unwrap();
        let expected = 8.0 * binary_entropy_bits(0.25) * LN_2 - 0.5 * 8f64.ln();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 3.459).abs() < 1e-3);
    }

    #[test]
    fn u_prior_exact_is_uniform_configuration_cost() {
        let s = structure(
            vec![vec![true; 158], vec![true; 158], vec![true; 158]],
            vec![vec![true], vec![true], vec![true]],
        );
        let got = u_prior_cost(&s, UPriorMode::Exact).unwrap();
        assert!((got - 474.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn u_prior_all_specific_leaves_only_sqrt_term() {
        let s = structure(
            vec![vec![true; 3], vec![true; 3]],
            vec![vec![true], vec![true]],
        );
        let got = u_prior_cost(&s, UPriorMode::EntropyApprox).unwrap();
        assert!((got + 0.5 * 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn auto_mode_switches_on_vocab_size() {
        assert_eq!(UPriorMode::auto(200), UPriorMode::Exact);
        assert_eq!(UPriorMode::auto(50_000), UPriorMode::EntropyApprox);
    }

    #[test]
    fn alpha_penalty_vanishes_for_single_topic_documents() {
        let corpus = fig_corpus();
        // Two topics, one document each: every M_d is 1.
        let s = structure(
            vec![vec![true; 6], vec![true; 6]],
            vec![vec![true, false], vec![false, true]],
        );
        let (alpha_pen, _) = param_penalty(&s, &corpus).unwrap();
        assert_eq!(alpha_pen, 0.0);
    }

    #[test]
    fn beta_penalty_hand_value() {
        // One topic, 10 specific words, present in documents totalling 500
        // tokens: 5 ln(500 / 2 pi).
        let voc = std::sync::Arc::new(crate::corpus::Vocabulary::synthetic(10));
        let corpus = Corpus::new(
            vec![
                crate::corpus::Document::new(vec![(0, 200)], vec![]).unwrap(),
                crate::corpus::Document::new(vec![(1, 300)], vec![]).unwrap(),
            ],
            voc,
            0,
        )
        .unwrap();
        let s = structure(vec![vec![true; 10]], vec![vec![true, true]]);
        let (_, beta_pen) = param_penalty(&s, &corpus).unwrap();
        let expected = 5.0 * (500.0 / TAU).ln();
        assert!((beta_pen - expected).abs() < 1e-12);
        assert!((expected - 21.88).abs() < 0.02);
    }

    #[test]
    fn short_documents_may_contribute_negative_alpha_penalty() {
        // L_d < 2 pi with two active topics gives a negative term.
        let voc = std::sync::Arc::new(crate::corpus::Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![crate::corpus::Document::new(vec![(0, 2), (1, 2)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let s = structure(
            vec![vec![true, false], vec![false, true]],
            vec![vec![true], vec![true]],
        );
        let (alpha_pen, _) = param_penalty(&s, &corpus).unwrap();
        assert!(alpha_pen < 0.0);
    }

    #[test]
    fn breakdown_parts_sum_to_total() {
        let model = fig_model();
        let corpus = fig_corpus();
        for mode in [UPriorMode::EntropyApprox, UPriorMode::Exact] {
            let bb = total_bic(&model, &corpus, mode).unwrap();
            let sum = bb.v_prior_cost
                + bb.u_prior_cost
                + bb.alpha_penalty
                + bb.beta_penalty
                + bb.neg_log_likelihood;
            assert_eq!(bb.total, sum);
        }
    }

    #[test]
    fn single_topic_total_has_degenerate_terms() {
        let voc = std::sync::Arc::new(crate::corpus::Vocabulary::synthetic(2));
        let corpus = Corpus::new(
            vec![crate::corpus::Document::new(vec![(0, 2), (1, 1)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let s = structure(vec![vec![true, true]], vec![vec![true]]);
        let params = crate::model::ModelParams {
            alpha: vec![crate::model::SparseRow::from_pairs(vec![(0, 1.0)])],
            beta: vec![crate::model::SparseRow::from_pairs(vec![(0, 0.6), (1, 0.4)])],
            beta0: vec![0.5, 0.5],
        };
        let model = PtmModel::new(s, params).unwrap();
        let bb = total_bic(&model, &corpus, UPriorMode::Exact).unwrap();
        assert_eq!(bb.v_prior_cost, 0.0);
        assert_eq!(bb.alpha_penalty, 0.0);
        let ll = 2.0 * 0.6f64.ln() + 0.4f64.ln();
        assert!((bb.neg_log_likelihood + ll).abs() < 1e-12);
    }
}
