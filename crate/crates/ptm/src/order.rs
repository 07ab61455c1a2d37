//! Top-down model-order selection: fit at a ceiling order, repeatedly prune
//! the least massive topics and refit warm-started, then keep the order
//! with the smallest objective.

use std::time::Instant;

use crate::bic::BicBreakdown;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::init::initialize;
use crate::model::{ModelParams, ModelStructure, PtmModel, SparseRow, PROB_FLOOR};
use crate::search::{fit_fixed_order, FitConfig, FitResult};

/// Expected token mass attributed to each topic across the corpus.
pub fn topic_masses(model: &PtmModel, corpus: &Corpus) -> Vec<f64> {
    let mut mass = vec![0.0; model.num_topics()];
    for (d, doc) in corpus.documents().iter().enumerate() {
        let len = doc.length() as f64;
        for (j, a) in model.params().alpha[d].iter() {
            mass[j] += a * len;
        }
    }
    mass
}

/// Expected token mass of a single topic.
pub fn topic_mass(model: &PtmModel, corpus: &Corpus, j: usize) -> f64 {
    topic_masses(model, corpus)[j]
}

/// Remove the k least massive topics (ties resolved toward the lower
/// index). Documents left without topics are reassigned to their
/// maximum-likelihood surviving topic; other documents renormalize their
/// proportions over the survivors.
pub fn prune_topics(model: &PtmModel, corpus: &Corpus, k: usize) -> Result<PtmModel> {
    let m = model.num_topics();
    if k == 0 {
        return Ok(model.clone());
    }
    if k >= m {
        return Err(Error::data(format!("cannot remove {k} of {m} topics")));
    }
    let masses = topic_masses(model, corpus);
    let mut by_mass: Vec<usize> = (0..m).collect();
    by_mass.sort_by(|&a, &b| masses[a].partial_cmp(&masses[b]).unwrap().then(a.cmp(&b)));
    let mut removed = vec![false; m];
    for &j in by_mass.iter().take(k) {
        removed[j] = true;
    }
    let survivors: Vec<usize> = (0..m).filter(|&j| !removed[j]).collect();
    let mut new_index = vec![usize::MAX; m];
    for (nj, &j) in survivors.iter().enumerate() {
        new_index[j] = nj;
    }

    let s = model.structure();
    let p = model.params();
    let n = model.vocab_size();
    let d = model.num_docs();
    let u: Vec<Vec<bool>> = survivors.iter().map(|&j| (0..n).map(|w| s.word_specific(j, w)).collect()).collect();
    let beta: Vec<SparseRow> = survivors.iter().map(|&j| p.beta[j].clone()).collect();

    let mut v = vec![vec![false; d]; survivors.len()];
    let mut alpha = Vec::with_capacity(d);
    for dd in 0..d {
        let kept: Vec<(usize, f64)> = p.alpha[dd]
            .iter()
            .filter(|&(j, _)| !removed[j])
            .map(|(j, a)| (new_index[j], a))
            .collect();
        let kept_sum: f64 = kept.iter().map(|&(_, a)| a).sum();
        if kept.is_empty() {
            // Reassign to the maximum-likelihood surviving topic.
            let doc = corpus.document(dd);
            let mut best = (0usize, f64::NEG_INFINITY);
            for (nj, &j) in survivors.iter().enumerate() {
                let ll: f64 = doc
                    .counts()
                    .iter()
                    .map(|&(w, c)| c as f64 * model.word_prob(j, w).max(PROB_FLOOR).ln())
                    .sum();
                if ll > best.1 {
                    best = (nj, ll);
                }
            }
            v[best.0][dd] = true;
            alpha.push(SparseRow::from_pairs(vec![(best.0, 1.0)]));
        } else if kept_sum > 0.0 {
            for &(nj, _) in &kept {
                v[nj][dd] = true;
            }
            alpha.push(SparseRow::from_pairs(
                kept.into_iter().map(|(nj, a)| (nj, a / kept_sum)).collect(),
            ));
        } else {
            // Surviving support carried no mass; fall back to uniform.
            let share = 1.0 / kept.len() as f64;
            for &(nj, _) in &kept {
                v[nj][dd] = true;
            }
            alpha.push(SparseRow::from_pairs(kept.into_iter().map(|(nj, _)| (nj, share)).collect()));
        }
    }

    let structure = ModelStructure::new(u, v)?;
    PtmModel::new(
        structure,
        ModelParams { alpha, beta, beta0: p.beta0.clone() },
    )
}

/// One fitted order in a top-down sweep.
#[derive(Debug, Clone, Copy)]
pub struct OrderRecord {
    pub num_topics: usize,
    pub bic: BicBreakdown,
    pub seconds: f64,
}

/// All fitted orders (descending in topic count) and the argmin order.
#[derive(Debug, Clone)]
pub struct OrderSweepResult {
    pub records: Vec<OrderRecord>,
    pub m_star: usize,
}

impl OrderSweepResult {
    pub fn record_at(&self, m: usize) -> Option<&OrderRecord> {
        self.records.iter().find(|r| r.num_topics == m)
    }
}

/// Fit at `m_max`, then repeatedly remove `step` least-massive topics and
/// refit from the pruned parameters, recording the objective at every
/// order down to `m_min`. Ties in the argmin prefer the larger order.
/// Returns the sweep records and the best model.
pub fn sweep_top_down(
    corpus: &Corpus,
    m_max: usize,
    m_min: usize,
    step: usize,
    docs_per_topic: usize,
    seed: u64,
    cfg: &FitConfig,
) -> Result<(OrderSweepResult, PtmModel)> {
    sweep_top_down_with(corpus, m_max, m_min, step, docs_per_topic, seed, cfg, |_, _| Ok(()))
}

/// `sweep_top_down` with a per-order callback, invoked with each record and
/// the model fitted at that order.
#[allow(clippy::too_many_arguments)]
pub fn sweep_top_down_with(
    corpus: &Corpus,
    m_max: usize,
    m_min: usize,
    step: usize,
    docs_per_topic: usize,
    seed: u64,
    cfg: &FitConfig,
    mut on_order: impl FnMut(&OrderRecord, &PtmModel) -> Result<()>,
) -> Result<(OrderSweepResult, PtmModel)> {
    if m_min < 1 || m_max < m_min {
        return Err(Error::data(format!("invalid order range {m_max}..{m_min}")));
    }
    if step == 0 {
        return Err(Error::data("order step must be positive"));
    }
    let mut model = initialize(corpus, m_max, docs_per_topic, seed)?;
    let mut records = Vec::new();
    let mut best: Option<(f64, PtmModel)> = None;
    let mut m = m_max;
    loop {
        let start = Instant::now();
        let FitResult { model: fitted, trace } = fit_fixed_order(model, corpus, cfg)?;
        let bic = trace.last().expect("trace is never empty").bic;
        let record = OrderRecord {
            num_topics: m,
            bic,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_order(&record, &fitted)?;
        records.push(record);
        // Strict improvement keeps the earlier (larger) order on ties.
        if best.as_ref().is_none_or(|(b, _)| bic.total < *b) {
            best = Some((bic.total, fitted.clone()));
        }
        if m <= m_min {
            model = fitted;
            break;
        }
        let k = step.min(m - m_min);
        model = prune_topics(&fitted, corpus, k)?;
        m -= k;
    }
    let _ = model;
    let (_, best_model) = best.expect("at least one order was fitted");
    let m_star = records
        .iter()
        .fold(None::<(usize, f64)>, |acc, r| match acc {
            Some((_, total)) if r.bic.total >= total => acc,
            _ => Some((r.num_topics, r.bic.total)),
        })
        .expect("records non-empty")
        .0;
    Ok((OrderSweepResult { records, m_star }, best_model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};
    use crate::testutil::{fig_corpus, fig_model};

    #[test]
    fn masses_sum_to_corpus_tokens() {
        let model = fig_model();
        let corpus = fig_corpus();
        let masses = topic_masses(&model, &corpus);
        let total: f64 = masses.iter().sum();
        assert!((total - corpus.total_tokens() as f64).abs() < 1e-9);
    }

    #[test]
    fn mass_matches_brute_force() {
        let truth = generate_model(&GeneratorSpec::default(), 13).unwrap();
        let corpus = sample_corpus(&truth, (80, 120), 13, LabelMode::ArgmaxProportion);
        for j in 0..truth.num_topics() {
            let brute: f64 = (0..corpus.num_documents())
                .map(|d| {
                    truth.params().alpha[d].get(j).unwrap_or(0.0) * corpus.document(d).length() as f64
                })
                .sum();
            assert!((topic_mass(&truth, &corpus, j) - brute).abs() < 1e-9);
        }
    }

    #[test]
    fn prune_zero_is_identity() {
        let model = fig_model();
        let corpus = fig_corpus();
        let pruned = prune_topics(&model, &corpus, 0).unwrap();
        assert_eq!(model, pruned);
    }

    #[test]
    fn prune_renormalizes_survivors() {
        // Document 0 has proportions (0.2, -, 0.8); removing its first
        // topic leaves all mass on the last: (0, 1.0) over survivors.
        let model = fig_model();
        let corpus = fig_corpus();
        let masses = topic_masses(&model, &corpus);
        // Topic 0 is the lightest in this fixture (only 0.2 of doc 0).
        assert!(masses[0] < masses[1] && masses[0] < masses[2]);
        let pruned = prune_topics(&model, &corpus, 1).unwrap();
        assert_eq!(pruned.num_topics(), 2);
        // Old topics 1, 2 became 0, 1. Document 0 had {0: 0.2, 2: 0.8}.
        let row = &pruned.params().alpha[0];
        assert_eq!(row.indices(), &[1]);
        assert!((row.get(1).unwrap() - 1.0).abs() < 1e-12);
        assert!(pruned.validate().is_empty(), "{:?}", pruned.validate());
    }

    #[test]
    fn prune_reassigns_orphaned_documents() {
        let truth = generate_model(
            &GeneratorSpec { topics_per_doc: (1, 1), ..GeneratorSpec::default() },
            14,
        )
        .unwrap();
        let corpus = sample_corpus(&truth, (80, 120), 14, LabelMode::ArgmaxProportion);
        let pruned = prune_topics(&truth, &corpus, 2).unwrap();
        assert_eq!(pruned.num_topics(), 3);
        assert!(pruned.validate().is_empty(), "{:?}", pruned.validate());
    }

    #[test]
    fn single_order_sweep_has_one_record() {
        let truth = generate_model(&GeneratorSpec::default(), 15).unwrap();
        let corpus = sample_corpus(&truth, (80, 120), 15, LabelMode::ArgmaxProportion);
        let cfg = FitConfig { max_gem_iters: 5, ..FitConfig::default() };
        let (result, model) = sweep_top_down(&corpus, 4, 4, 1, 5, 0, &cfg).unwrap();
        assert_eq!(result.records.len(), 1);
        assert_eq!(result.m_star, 4);
        assert!(model.validate().is_empty());
    }

    #[test]
    fn sweep_records_descend_in_order_and_argmin_is_reported() {
        let truth = generate_model(&GeneratorSpec::default(), 16).unwrap();
        let corpus = sample_corpus(&truth, (80, 120), 16, LabelMode::ArgmaxProportion);
        let cfg = FitConfig { max_gem_iters: 4, ..FitConfig::default() };
        let (result, best) = sweep_top_down(&corpus, 7, 2, 2, 5, 1, &cfg).unwrap();
        let orders: Vec<usize> = result.records.iter().map(|r| r.num_topics).collect();
        assert_eq!(orders, vec![7, 5, 3, 2]);
        let min_total = result
            .records
            .iter()
            .map(|r| r.bic.total)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(result.record_at(result.m_star).unwrap().bic.total, min_total);
        assert!(best.validate().is_empty());
        // The returned best model is the one fitted at the argmin order.
        assert_eq!(best.num_topics(), result.m_star);
    }
}
