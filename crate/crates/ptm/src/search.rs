//! Structure search: coordinate-descent sweeps over the word switches and
//! topic-presence switches, interleaved with EM parameter updates, driven
//! by exact cost/likelihood deltas for single-switch flips.

use std::f64::consts::TAU;

use crate::bic::{self, BicBreakdown, UPriorMode};
use crate::corpus::Corpus;
use crate::em::{self, specific_mass_target, PosteriorStats};
use crate::error::{Error, Result};
use crate::math::{binary_entropy_bits, ln_binomial};
use crate::model::{PtmModel, SparseRow, PROB_FLOOR};

/// Controls for `fit_fixed_order` and the individual sweeps.
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    /// Relative BIC improvement below which the outer loop stops.
    pub tol: f64,
    pub max_gem_iters: usize,
    /// Cap on full cycles within one u- or v-sweep.
    pub max_sweep_cycles: usize,
    pub u_prior_mode: UPriorMode,
    /// Iteration cap and tolerance for the per-document proportion
    /// optimization used by v-switch trials.
    pub trial_alpha_iters: usize,
    pub trial_alpha_tol: f64,
    /// When set, every accepted flip re-evaluates its objective from
    /// scratch and the sweep records the smallest observed decrease.
    pub verify_descent: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tol: 1e-5,
            max_gem_iters: 50,
            max_sweep_cycles: 20,
            u_prior_mode: UPriorMode::EntropyApprox,
            trial_alpha_iters: 200,
            trial_alpha_tol: 1e-12,
            verify_descent: false,
        }
    }
}

/// Outcome of one switch sweep. `bic_before`/`bic_after` are the objective
/// the sweep descends in: expected complete-data BIC for u-sweeps,
/// incomplete-data BIC for v-sweeps.
#[derive(Debug, Clone, Copy)]
pub struct SweepReport {
    pub flips_accepted: usize,
    pub cycles: usize,
    pub bic_before: f64,
    pub bic_after: f64,
    /// Smallest scratch-verified decrease over accepted flips; present only
    /// when descent verification ran and at least one flip was accepted.
    pub min_flip_decrease: Option<f64>,
}

/// Expected complete-data log-likelihood under frozen responsibilities.
pub fn expected_complete_log_likelihood(model: &PtmModel, stats: &PosteriorStats, corpus: &Corpus) -> f64 {
    let mut total = 0.0;
    for (d, doc) in corpus.documents().iter().enumerate() {
        let block = stats.doc(d);
        let k = block.topics.len();
        let alpha = &model.params().alpha[d];
        let log_alpha: Vec<f64> = block
            .topics
            .iter()
            .map(|&j| alpha.get(j).unwrap_or(0.0).max(PROB_FLOOR).ln())
            .collect();
        for (w, &(n, c)) in doc.counts().iter().enumerate() {
            for t in 0..k {
                let r = block.resp[w * k + t];
                if r <= 0.0 {
                    continue;
                }
                let j = block.topics[t];
                let lp = model.word_prob(j, n).max(PROB_FLOOR).ln();
                total += c as f64 * r * (log_alpha[t] + lp);
            }
        }
    }
    total
}

/// Expected complete-data BIC: the structure costs and penalties plus the
/// negated expected complete-data log-likelihood.
pub fn expected_complete_bic(
    model: &PtmModel,
    stats: &PosteriorStats,
    corpus: &Corpus,
    mode: UPriorMode,
) -> Result<f64> {
    let s = model.structure();
    let (alpha_pen, beta_pen) = bic::param_penalty(s, corpus)?;
    Ok(bic::v_prior_cost(s) + bic::u_prior_cost(s, mode)? + alpha_pen + beta_pen
        - expected_complete_log_likelihood(model, stats, corpus))
}

fn entropy_cost_delta(m: usize, n: usize, n0_minus: usize, n0_plus: usize) -> f64 {
    let mn = (m * n) as f64;
    let h_plus = binary_entropy_bits(n0_plus as f64 / mn);
    let h_minus = binary_entropy_bits(n0_minus as f64 / mn);
    mn * std::f64::consts::LN_2 * (h_plus - h_minus)
}

/// Cost delta for flipping word switch (j, n): half a log effective sample
/// size for the gained or lost parameter plus the change in the switch
/// configuration prior.
pub fn delta_cost_u(
    model: &PtmModel,
    corpus: &Corpus,
    j: usize,
    n: usize,
    mode: UPriorMode,
) -> Result<f64> {
    let s = model.structure();
    let on = s.word_specific(j, n);
    if on && s.num_specific(j) == 1 {
        return Err(Error::data(format!(
            "flip would leave topic {j} without specific words"
        )));
    }
    let sign = if on { -1.0 } else { 1.0 };
    let l_bar = s.topic_sample_size(j, corpus);
    if l_bar == 0 {
        return Err(Error::data(format!("topic {j} has zero sample size")));
    }
    let param_term = 0.5 * sign * (l_bar as f64 / TAU).ln();
    let prior_term = match mode {
        UPriorMode::Exact => 0.0,
        UPriorMode::EntropyApprox => {
            let n0 = s.total_specific();
            let n0_plus = if on { n0 - 1 } else { n0 + 1 };
            entropy_cost_delta(s.num_topics(), s.vocab_size(), n0, n0_plus)
        }
    };
    Ok(param_term + prior_term)
}

/// Change in the expected complete-data log-likelihood from flipping word
/// switch (j, n), with the topic row renormalized through the updated pmf
/// normalizer. Assumes the row currently sits at its M-step value for the
/// given statistics.
pub fn delta_ll_u(stats: &PosteriorStats, model: &PtmModel, j: usize, n: usize) -> Result<f64> {
    let s = model.structure();
    let beta0 = &model.params().beta0;
    let on = s.word_specific(j, n);
    let sign = if on { -1.0 } else { 1.0 };
    let x = stats.x(j, n);
    let x_bar_minus = stats.x_bar(j, s);
    let denom_minus = specific_mass_target(s, beta0, j);
    delta_ll_u_inner(sign, x, x_bar_minus, denom_minus, beta0[n], j, n)
}

fn delta_ll_u_inner(
    sign: f64,
    x: f64,
    x_bar_minus: f64,
    denom_minus: f64,
    beta0_n: f64,
    j: usize,
    n: usize,
) -> Result<f64> {
    let denom_plus = denom_minus + sign * beta0_n;
    if denom_plus <= 0.0 {
        return Err(Error::numerical(format!(
            "flip of ({j}, {n}) makes the shared mass of topic {j} exceed one"
        )));
    }
    if denom_minus <= 0.0 || x_bar_minus <= 0.0 {
        return Err(Error::numerical(format!(
            "topic {j} has no usable specific mass; flip of ({j}, {n}) rejected"
        )));
    }
    let mu_minus = x_bar_minus / denom_minus;
    let mu_plus = (x_bar_minus + sign * x) / denom_plus;
    if mu_plus <= 0.0 || !mu_plus.is_finite() {
        return Err(Error::numerical(format!(
            "flip of ({j}, {n}) drives the pmf normalizer of topic {j} to zero"
        )));
    }
    let first = if x > 0.0 {
        if beta0_n <= 0.0 {
            return Err(Error::numerical(format!(
                "word {n} occurs but has zero shared probability"
            )));
        }
        sign * x * (x / (mu_plus * beta0_n)).ln()
    } else {
        0.0 // 0 log 0 term
    };
    Ok(first - x_bar_minus * (mu_plus / mu_minus).ln())
}

/// Cost delta for flipping topic-presence switch (j, d): the change in the
/// per-document configuration prior plus the proportion- and word-parameter
/// penalty changes.
pub fn delta_cost_v(model: &PtmModel, corpus: &Corpus, j: usize, d: usize) -> Result<f64> {
    let s = model.structure();
    let on = s.topic_in_doc(j, d);
    if on && s.num_active(d) == 1 {
        return Err(Error::data(format!("flip would leave document {d} without topics")));
    }
    if on && s.docs_using_topic(j) == 1 {
        return Err(Error::data(format!("flip would leave topic {j} without documents")));
    }
    let l_bar = s.topic_sample_size(j, corpus);
    let l_d = corpus.document(d).length();
    delta_cost_v_inner(
        s.num_topics(),
        s.num_active(d),
        s.num_specific(j),
        l_bar,
        l_d,
        on,
    )
}

fn delta_cost_v_inner(
    m: usize,
    m_d: usize,
    n_j: usize,
    l_bar_minus: u64,
    l_d: usize,
    on: bool,
) -> Result<f64> {
    let sign = if on { -1.0 } else { 1.0 };
    let m_d_plus = if on { m_d - 1 } else { m_d + 1 };
    let binom = ln_binomial(m, m_d_plus) - ln_binomial(m, m_d);
    let l_bar_plus = if on {
        l_bar_minus
            .checked_sub(l_d as u64)
            .ok_or_else(|| Error::numerical("topic sample size underflow".to_string()))?
    } else {
        l_bar_minus + l_d as u64
    };
    if l_bar_plus == 0 {
        return Err(Error::data("flip would zero a topic's sample size".to_string()));
    }
    let proportion_term = sign * (l_d as f64 / TAU).ln();
    let word_term = n_j as f64 * (l_bar_plus as f64 / l_bar_minus as f64).ln();
    Ok(binom + 0.5 * (proportion_term + word_term))
}

/// Likelihood delta for flipping topic-presence switch (j, d): document d's
/// proportions are re-optimized over the trial support and the
/// incomplete-data log-likelihood ratio is evaluated. Returns the delta and
/// the trial proportions, to be committed if the flip is accepted.
pub fn delta_ll_v(
    model: &PtmModel,
    corpus: &Corpus,
    j: usize,
    d: usize,
    cfg: &FitConfig,
) -> Result<(f64, SparseRow)> {
    let s = model.structure();
    let on = s.topic_in_doc(j, d);
    let mut support: Vec<usize> = model.params().alpha[d].indices().to_vec();
    if on {
        support.retain(|&t| t != j);
    } else {
        let pos = support.partition_point(|&t| t < j);
        support.insert(pos, j);
    }
    if support.is_empty() {
        return Err(Error::data(format!("flip would leave document {d} without topics")));
    }
    let doc = corpus.document(d);
    let (trial, ll_plus) =
        em::optimize_doc_proportions(model, doc, &support, cfg.trial_alpha_iters, cfg.trial_alpha_tol);
    if !ll_plus.is_finite() || trial.iter().any(|a| !a.is_finite()) {
        return Err(Error::numerical(format!(
            "degenerate trial proportions for document {d}"
        )));
    }
    let ll_minus = model.doc_log_likelihood(d, doc);
    let row = SparseRow::from_pairs(support.into_iter().zip(trial).collect());
    Ok((ll_plus - ll_minus, row))
}

/// One u-sweep: cyclic visits over all word switches in (topic-major,
/// descending x_jn) order; a flip is accepted iff it strictly decreases the
/// expected complete-data BIC, and the affected topic row is renormalized
/// immediately.
pub fn sweep_u(
    model: &mut PtmModel,
    stats: &PosteriorStats,
    corpus: &Corpus,
    cfg: &FitConfig,
) -> Result<SweepReport> {
    let m = model.num_topics();
    let n = model.vocab_size();
    let bic_before = expected_complete_bic(model, stats, corpus, cfg.u_prior_mode)?;

    let l_bar: Vec<u64> = (0..m).map(|j| model.structure().topic_sample_size(j, corpus)).collect();
    // Visit words by descending expected count within each topic; the
    // statistics are frozen, so the order is computed once.
    let orders: Vec<Vec<usize>> = (0..m)
        .map(|j| {
            let row = stats.x_row(j);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut flips = 0usize;
    let mut cycles = 0usize;
    let mut min_decrease: Option<f64> = None;
    let mut verify_prev = if cfg.verify_descent { Some(bic_before) } else { None };

    'sweep: for _ in 0..cfg.max_sweep_cycles {
        cycles += 1;
        let mut accepted_this_cycle = 0usize;
        // Shared-mass normalizers, refreshed per cycle against drift.
        let mut denom: Vec<f64> = (0..m)
            .map(|j| specific_mass_target(model.structure(), &model.params().beta0, j))
            .collect();
        let mut x_bar: Vec<f64> = (0..m).map(|j| stats.x_bar(j, model.structure())).collect();

        for j in 0..m {
            for &word in &orders[j] {
                let s = model.structure();
                let on = s.word_specific(j, word);
                if on && s.num_specific(j) == 1 {
                    continue;
                }
                let sign = if on { -1.0 } else { 1.0 };
                let param_term = 0.5 * sign * (l_bar[j] as f64 / TAU).ln();
                let prior_term = match cfg.u_prior_mode {
                    UPriorMode::Exact => 0.0,
                    UPriorMode::EntropyApprox => {
                        let n0 = s.total_specific();
                        let n0_plus = if on { n0 - 1 } else { n0 + 1 };
                        entropy_cost_delta(m, n, n0, n0_plus)
                    }
                };
                let dcost = param_term + prior_term;
                let beta0_n = model.params().beta0[word];
                let x = stats.x(j, word);
                // Never switch on a word the topic is not expected to emit:
                // its specific probability would be a structural zero, which
                // can strand documents whose other topics lack the word.
                if !on && x == 0.0 {
                    continue;
                }
                let Ok(dll) = delta_ll_u_inner(sign, x, x_bar[j], denom[j], beta0_n, j, word) else {
                    continue;
                };
                if dcost - dll >= 0.0 {
                    continue;
                }

                // Commit: flip the switch and renormalize the topic row.
                denom[j] += sign * beta0_n;
                x_bar[j] += sign * x;
                let mu = x_bar[j] / denom[j];
                {
                    let (structure, params) = model.parts_mut();
                    structure.set_u(j, word, !on);
                    params.beta[j] = SparseRow::from_pairs(
                        structure
                            .specific_words(j)
                            .map(|w| (w, stats.x(j, w) / mu))
                            .collect(),
                    );
                }
                flips += 1;
                accepted_this_cycle += 1;

                if let Some(prev) = verify_prev {
                    let now = expected_complete_bic(model, stats, corpus, cfg.u_prior_mode)?;
                    let decrease = prev - now;
                    min_decrease = Some(min_decrease.map_or(decrease, |d: f64| d.min(decrease)));
                    verify_prev = Some(now);
                }
            }
        }
        if accepted_this_cycle == 0 {
            break 'sweep;
        }
    }

    let bic_after = expected_complete_bic(model, stats, corpus, cfg.u_prior_mode)?;
    Ok(SweepReport {
        flips_accepted: flips,
        cycles,
        bic_before,
        bic_after,
        min_flip_decrease: min_decrease,
    })
}

/// One v-sweep: cyclic visits over all topic-presence switches in
/// (document-major, ascending current proportion) order; a flip is accepted
/// iff it strictly decreases the incomplete-data BIC, committing the trial
/// proportions.
pub fn sweep_v(model: &mut PtmModel, corpus: &Corpus, cfg: &FitConfig) -> Result<SweepReport> {
    let m = model.num_topics();
    let bic_before = bic::total_bic(model, corpus, cfg.u_prior_mode)?.total;
    let mut l_bar: Vec<u64> = (0..m).map(|j| model.structure().topic_sample_size(j, corpus)).collect();

    let mut flips = 0usize;
    let mut cycles = 0usize;
    let mut min_decrease: Option<f64> = None;
    let mut verify_prev = if cfg.verify_descent { Some(bic_before) } else { None };

    'sweep: for _ in 0..cfg.max_sweep_cycles {
        cycles += 1;
        let mut accepted_this_cycle = 0usize;
        for d in 0..corpus.num_documents() {
            let doc = corpus.document(d);
            let l_d = doc.length();
            // Weakest current topics first, absent topics before present ones.
            let alpha = &model.params().alpha[d];
            let mut order: Vec<(f64, usize)> =
                (0..m).map(|j| (alpha.get(j).unwrap_or(0.0), j)).collect();
            order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

            for &(_, j) in &order {
                let s = model.structure();
                let on = s.topic_in_doc(j, d);
                if on && (s.num_active(d) == 1 || s.docs_using_topic(j) == 1) {
                    continue;
                }
                let Ok(dcost) = delta_cost_v_inner(m, s.num_active(d), s.num_specific(j), l_bar[j], l_d, on)
                else {
                    continue;
                };
                let Ok((dll, trial)) = delta_ll_v(model, corpus, j, d, cfg) else {
                    continue;
                };
                if dcost - dll >= 0.0 {
                    continue;
                }

                {
                    let (structure, params) = model.parts_mut();
                    structure.set_v(j, d, !on);
                    params.alpha[d] = trial;
                }
                if on {
                    l_bar[j] -= l_d as u64;
                } else {
                    l_bar[j] += l_d as u64;
                }
                flips += 1;
                accepted_this_cycle += 1;

                if let Some(prev) = verify_prev {
                    let now = bic::total_bic(model, corpus, cfg.u_prior_mode)?.total;
                    let decrease = prev - now;
                    min_decrease = Some(min_decrease.map_or(decrease, |d: f64| d.min(decrease)));
                    verify_prev = Some(now);
                }
            }
        }
        if accepted_this_cycle == 0 {
            break 'sweep;
        }
    }

    let bic_after = bic::total_bic(model, corpus, cfg.u_prior_mode)?.total;
    Ok(SweepReport {
        flips_accepted: flips,
        cycles,
        bic_before,
        bic_after,
        min_flip_decrease: min_decrease,
    })
}

/// Switch off specific words carrying zero probability, rescaling each
/// affected topic row onto its reduced mass target. Entry models produced
/// by pruning or reassignment can hold such words; left in place they can
/// strand a document on an impossible word before the first sweep runs.
fn drop_zero_probability_specific_words(model: &mut PtmModel) {
    let m = model.num_topics();
    for j in 0..m {
        let (structure, params) = model.parts_mut();
        let row = &params.beta[j];
        let zeros: Vec<usize> = row.iter().filter(|&(_, v)| v == 0.0).map(|(w, _)| w).collect();
        if zeros.is_empty() || zeros.len() == row.len() {
            continue;
        }
        let old_target = row.sum();
        let removed_shared: f64 = zeros.iter().map(|&w| params.beta0[w]).sum();
        let new_target = old_target - removed_shared;
        if new_target <= 0.0 || old_target <= 0.0 {
            continue;
        }
        for &w in &zeros {
            structure.set_u(j, w, false);
        }
        let scale = new_target / old_target;
        let mut kept = SparseRow::from_pairs(
            row.iter().filter(|&(_, v)| v != 0.0).collect(),
        );
        kept.scale(scale);
        params.beta[j] = kept;
    }
}

/// One recorded outer iteration of the fit.
#[derive(Debug, Clone, Copy)]
pub struct GemIteration {
    pub bic: BicBreakdown,
    pub u_report: Option<SweepReport>,
    pub v_report: Option<SweepReport>,
}

/// Result of fitting at a fixed order: the model and the per-iteration BIC
/// trace (entry 0 is the initial objective, before any update).
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: PtmModel,
    pub trace: Vec<GemIteration>,
}

/// Alternate the E-step, closed-form parameter updates, and the two switch
/// sweeps until the relative BIC improvement falls below `cfg.tol` or the
/// iteration cap is reached. The BIC trace is non-increasing.
pub fn fit_fixed_order(mut model: PtmModel, corpus: &Corpus, cfg: &FitConfig) -> Result<FitResult> {
    model.check_corpus(corpus)?;
    drop_zero_probability_specific_words(&mut model);
    let mut trace = vec![GemIteration {
        bic: bic::total_bic(&model, corpus, cfg.u_prior_mode)?,
        u_report: None,
        v_report: None,
    }];

    for _ in 0..cfg.max_gem_iters {
        let stats = em::e_step(&model, corpus)?;
        let alpha = em::update_alpha(&stats, corpus);
        let beta = em::update_beta(&stats, model.structure(), &model.params().beta0)?;
        {
            let (_, params) = model.parts_mut();
            params.alpha = alpha;
            params.beta = beta;
        }
        let u_report = sweep_u(&mut model, &stats, corpus, cfg)?;
        let v_report = sweep_v(&mut model, corpus, cfg)?;
        let bic = bic::total_bic(&model, corpus, cfg.u_prior_mode)?;
        let prev_total = trace.last().unwrap().bic.total;
        trace.push(GemIteration {
            bic,
            u_report: Some(u_report),
            v_report: Some(v_report),
        });
        if em::relative_change(bic.total, prev_total) < cfg.tol {
            break;
        }
    }

    Ok(FitResult { model, trace })
}
