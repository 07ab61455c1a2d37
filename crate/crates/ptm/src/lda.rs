//! Mean-field variational LDA baseline, including the background-topic
//! variant (one row frozen at the global word frequencies) and the
//! argmax-assignment topic-sparsity measure.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{Corpus, Document};
use crate::em::{estimate_shared, relative_change};
use crate::error::{Error, Result};
use crate::math::{digamma, ln_gamma, log_sum_exp, trigamma};
use crate::model::PROB_FLOOR;

/// Floor applied to topic-word probabilities after each M-step so held-out
/// words keep positive probability.
pub const BETA_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct LdaConfig {
    /// Relative ELBO improvement below which training stops.
    pub tol: f64,
    pub max_iters: usize,
    /// Convergence threshold on the mean absolute gamma change.
    pub inner_tol: f64,
    pub inner_iters: usize,
    /// Skip the Newton update and keep the Dirichlet parameter fixed.
    pub fixed_eta: bool,
    /// Freeze the last topic row at the global word frequencies.
    pub background: bool,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            tol: 1e-5,
            max_iters: 100,
            inner_tol: 1e-5,
            inner_iters: 50,
            fixed_eta: false,
            background: false,
        }
    }
}

/// Row-stochastic topic-word matrix with a Dirichlet parameter vector and
/// an optional frozen background row.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub beta: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    pub background_row: Option<usize>,
}

impl LdaModel {
    pub fn num_topics(&self) -> usize {
        self.beta.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.beta[0].len()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        use std::fmt::Write as _;
        let mut out = String::new();
        writeln!(out, "lda 1").unwrap();
        writeln!(out, "{} {}", self.num_topics(), self.vocab_size()).unwrap();
        let eta: Vec<String> = self.eta.iter().map(|e| format!("{e}")).collect();
        writeln!(out, "{}", eta.join(" ")).unwrap();
        match self.background_row {
            Some(row) => writeln!(out, "{row}").unwrap(),
            None => writeln!(out, "-").unwrap(),
        }
        for row in &self.beta {
            let vals: Vec<String> = row.iter().map(|b| format!("{b}")).collect();
            writeln!(out, "{}", vals.join(" ")).unwrap();
        }
        let mut f = std::fs::File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
        f.write_all(out.as_bytes())
            .map_err(|source| Error::Io { path: path.into(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let mut lines = BufReader::new(file).lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()
                .map_err(|source| Error::Io { path: path.into(), source })?
                .ok_or_else(|| Error::data(format!("model file ended before {what}")))
        };
        if next("header")?.trim() != "lda 1" {
            return Err(Error::data("unsupported model header"));
        }
        let dims = next("dimensions")?;
        let mut it = dims.split_whitespace();
        let m: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| Error::data("bad M"))?;
        let n: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| Error::data("bad N"))?;
        let eta: Vec<f64> = next("eta")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::data(format!("bad eta value {t:?}"))))
            .collect::<Result<_>>()?;
        if eta.len() != m {
            return Err(Error::data("eta length disagrees with M"));
        }
        let bg = next("background row")?;
        let background_row = match bg.trim() {
            "-" => None,
            t => Some(t.parse().map_err(|_| Error::data("bad background row"))?),
        };
        let mut beta = Vec::with_capacity(m);
        for _ in 0..m {
            let row: Vec<f64> = next("topic row")?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::data(format!("bad float {t:?}"))))
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::data("topic row length disagrees with N"));
            }
            beta.push(row);
        }
        Ok(LdaModel { beta, eta, background_row })
    }
}

/// Variational posteriors for a corpus: per-document Dirichlet parameters
/// and per-(document, distinct word) topic distributions (row-major,
/// `phi[d][w * M + j]`).
#[derive(Debug, Clone)]
pub struct VariationalState {
    pub gamma: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}

/// Fixed-point iteration of the variational updates for one document.
/// Returns the Dirichlet parameter and the per-distinct-word topic
/// distributions.
pub fn lda_e_step(model: &LdaModel, doc: &Document, cfg: &LdaConfig) -> (Vec<f64>, Vec<f64>) {
    lda_e_step_from(model, doc, None, cfg)
}

/// `lda_e_step` with an optional warm start for the Dirichlet parameter;
/// training warm-starts from the previous outer iteration so the bound
/// climbs from its last value.
pub fn lda_e_step_from(
    model: &LdaModel,
    doc: &Document,
    warm_gamma: Option<&[f64]>,
    cfg: &LdaConfig,
) -> (Vec<f64>, Vec<f64>) {
    let m = model.num_topics();
    let log_beta: Vec<Vec<f64>> = doc
        .counts()
        .iter()
        .map(|&(n, _)| (0..m).map(|j| model.beta[j][n].max(PROB_FLOOR).ln()).collect())
        .collect();
    let mut gamma: Vec<f64> = match warm_gamma {
        Some(g) => g.to_vec(),
        None => model
            .eta
            .iter()
            .map(|&e| e + doc.length() as f64 / m as f64)
            .collect(),
    };
    let mut phi = vec![0.0; doc.distinct_words() * m];
    for _ in 0..cfg.inner_iters.max(1) {
        let dig: Vec<f64> = gamma.iter().map(|&g| digamma(g)).collect();
        let mut new_gamma = model.eta.clone();
        for (w, &(_, c)) in doc.counts().iter().enumerate() {
            let logits: Vec<f64> = (0..m).map(|j| log_beta[w][j] + dig[j]).collect();
            let norm = log_sum_exp(&logits);
            for j in 0..m {
                let p = (logits[j] - norm).exp();
                phi[w * m + j] = p;
                new_gamma[j] += c as f64 * p;
            }
        }
        let change: f64 = gamma
            .iter()
            .zip(&new_gamma)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / m as f64;
        gamma = new_gamma;
        if change < cfg.inner_tol {
            break;
        }
    }
    (gamma, phi)
}

/// Evidence lower bound contribution of one document given its variational
/// parameters.
pub fn doc_elbo(model: &LdaModel, doc: &Document, gamma: &[f64], phi: &[f64]) -> f64 {
    let m = model.num_topics();
    let gamma_sum: f64 = gamma.iter().sum();
    let dig_sum = digamma(gamma_sum);
    let e_log_theta: Vec<f64> = gamma.iter().map(|&g| digamma(g) - dig_sum).collect();
    let eta_sum: f64 = model.eta.iter().sum();

    // E[log p(theta | eta)]
    let mut elbo = ln_gamma(eta_sum) - model.eta.iter().map(|&e| ln_gamma(e)).sum::<f64>();
    for j in 0..m {
        elbo += (model.eta[j] - 1.0) * e_log_theta[j];
    }
    // E[log p(z | theta)] + E[log p(w | z, beta)] - E[log q(z | phi)]
    for (w, &(n, c)) in doc.counts().iter().enumerate() {
        for j in 0..m {
            let p = phi[w * m + j];
            if p <= 0.0 {
                continue;
            }
            elbo += c as f64
                * p
                * (e_log_theta[j] + model.beta[j][n].max(PROB_FLOOR).ln() - p.ln());
        }
    }
    // -E[log q(theta | gamma)]
    elbo -= ln_gamma(gamma_sum) - gamma.iter().map(|&g| ln_gamma(g)).sum::<f64>();
    for j in 0..m {
        elbo -= (gamma[j] - 1.0) * e_log_theta[j];
    }
    elbo
}

/// Run the E-step over the whole corpus; returns the state and the bound.
pub fn e_step_all(model: &LdaModel, corpus: &Corpus, cfg: &LdaConfig) -> (VariationalState, f64) {
    e_step_all_from(model, corpus, None, cfg)
}

fn e_step_all_from(
    model: &LdaModel,
    corpus: &Corpus,
    warm: Option<&VariationalState>,
    cfg: &LdaConfig,
) -> (VariationalState, f64) {
    let results: Vec<(Vec<f64>, Vec<f64>, f64)> = corpus
        .documents()
        .par_iter()
        .enumerate()
        .map(|(d, doc)| {
            let warm_gamma = warm.map(|s| s.gamma[d].as_slice());
            let (gamma, phi) = lda_e_step_from(model, doc, warm_gamma, cfg);
            let elbo = doc_elbo(model, doc, &gamma, &phi);
            (gamma, phi, elbo)
        })
        .collect();
    let mut gamma = Vec::with_capacity(results.len());
    let mut phi = Vec::with_capacity(results.len());
    let mut elbo = 0.0;
    for (g, p, e) in results {
        gamma.push(g);
        phi.push(p);
        elbo += e;
    }
    (VariationalState { gamma, phi }, elbo)
}

/// The eta part of the bound, used to accept or reject Newton steps.
fn eta_objective(eta: &[f64], suff: &[f64], num_docs: f64) -> f64 {
    let eta_sum: f64 = eta.iter().sum();
    let mut f = num_docs * (ln_gamma(eta_sum) - eta.iter().map(|&e| ln_gamma(e)).sum::<f64>());
    for (e, s) in eta.iter().zip(suff) {
        f += (e - 1.0) * s;
    }
    f
}

/// Newton-Raphson maximization of the Dirichlet parameter objective, using
/// the diagonal-plus-rank-one Hessian structure, with backtracking on each
/// step. Runs to convergence within the M-step; returns false if the very
/// first step finds no improving direction.
fn newton_eta(eta: &mut [f64], suff: &[f64], num_docs: f64) -> bool {
    let m = eta.len();
    let mut current = eta_objective(eta, suff, num_docs);
    for iteration in 0..100 {
        let eta_sum: f64 = eta.iter().sum();
        let dig_sum = digamma(eta_sum);
        let grad: Vec<f64> = (0..m)
            .map(|j| num_docs * (dig_sum - digamma(eta[j])) + suff[j])
            .collect();
        let q: Vec<f64> = eta.iter().map(|&e| -num_docs * trigamma(e)).collect();
        let z = num_docs * trigamma(eta_sum);
        let b = grad.iter().zip(&q).map(|(g, qq)| g / qq).sum::<f64>()
            / (1.0 / z + q.iter().map(|qq| 1.0 / qq).sum::<f64>());
        let step: Vec<f64> = grad.iter().zip(&q).map(|(g, qq)| (g - b) / qq).collect();

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = eta.iter().zip(&step).map(|(e, s)| e - scale * s).collect();
            if trial.iter().all(|&e| e > 1e-10) {
                let value = eta_objective(&trial, suff, num_docs);
                if value >= current {
                    accepted = Some((trial, value));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, value)) => {
                eta.copy_from_slice(&trial);
                let improved = value - current;
                current = value;
                if improved < 1e-10 {
                    return true;
                }
            }
            None => return iteration > 0,
        }
    }
    true
}

/// M-step: re-normalize topic rows from the responsibility-weighted counts
/// (leaving any background row untouched) and update the Dirichlet
/// parameter by Newton-Raphson unless it is fixed. Returns the number of
/// reverted Newton updates (0 or 1).
pub fn lda_m_step(
    state: &VariationalState,
    corpus: &Corpus,
    model: &mut LdaModel,
    cfg: &LdaConfig,
) -> usize {
    let m = model.num_topics();
    let n = model.vocab_size();
    let mut acc = vec![vec![0.0; n]; m];
    for (doc, phi) in corpus.documents().iter().zip(&state.phi) {
        for (w, &(word, c)) in doc.counts().iter().enumerate() {
            for j in 0..m {
                acc[j][word] += c as f64 * phi[w * m + j];
            }
        }
    }
    for j in 0..m {
        if model.background_row == Some(j) {
            continue;
        }
        let total: f64 = acc[j].iter().sum();
        let row = &mut model.beta[j];
        if total > 0.0 {
            for (dst, &a) in row.iter_mut().zip(&acc[j]) {
                *dst = a / total;
            }
        } else {
            let uniform = 1.0 / n as f64;
            row.iter_mut().for_each(|b| *b = uniform);
        }
        // Floor and re-normalize so rows stay strictly positive pmfs.
        let mut sum = 0.0;
        for b in row.iter_mut() {
            *b = b.max(BETA_FLOOR);
            sum += *b;
        }
        for b in row.iter_mut() {
            *b /= sum;
        }
    }

    let mut reverts = 0;
    if !cfg.fixed_eta {
        let mut suff = vec![0.0; m];
        for gamma in &state.gamma {
            let dig_sum = digamma(gamma.iter().sum());
            for (s, &g) in suff.iter_mut().zip(gamma) {
                *s += digamma(g) - dig_sum;
            }
        }
        let prev = model.eta.clone();
        if !newton_eta(&mut model.eta, &suff, corpus.num_documents() as f64) {
            model.eta = prev;
            reverts = 1;
        }
    }
    reverts
}

/// Training output: the model, the per-iteration bound (measured after each
/// E-step), and how many Newton updates were reverted.
#[derive(Debug, Clone)]
pub struct LdaTrainResult {
    pub model: LdaModel,
    pub elbo_trace: Vec<f64>,
    pub eta_reverts: usize,
}

/// Train an LDA model with `m` topics. The topic rows are seeded from the
/// given seed; with `cfg.background` the last row is fixed at the global
/// word frequencies for the whole run.
pub fn lda_train(corpus: &Corpus, m: usize, cfg: &LdaConfig, seed: u64) -> Result<LdaTrainResult> {
    if m == 0 {
        return Err(Error::data("LDA needs at least one topic"));
    }
    let n = corpus.vocab_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut beta = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1.0 / n as f64).collect();
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|b| *b /= sum);
        beta.push(row);
    }
    let background_row = if cfg.background {
        beta[m - 1] = estimate_shared(corpus);
        Some(m - 1)
    } else {
        None
    };
    let mut model = LdaModel { beta, eta: vec![1.0; m], background_row };

    let mut trace = Vec::new();
    let mut eta_reverts = 0;
    let mut warm: Option<VariationalState> = None;
    for _ in 0..cfg.max_iters {
        let (state, elbo) = e_step_all_from(&model, corpus, warm.as_ref(), cfg);
        let prev = trace.last().copied();
        trace.push(elbo);
        eta_reverts += lda_m_step(&state, corpus, &mut model, cfg);
        warm = Some(state);
        if let Some(prev) = prev {
            if relative_change(elbo, prev) < cfg.tol {
                break;
            }
        }
    }
    Ok(LdaTrainResult { model, elbo_trace: trace, eta_reverts })
}

/// Mean number of occurring topics per document, where a topic "occurs" if
/// it wins the argmax of the word-level posteriors for at least one word
/// (ties resolved toward the lower topic index).
pub fn lda_topic_sparsity(model: &LdaModel, corpus: &Corpus, cfg: &LdaConfig) -> f64 {
    let m = model.num_topics();
    let per_doc: Vec<usize> = corpus
        .documents()
        .par_iter()
        .map(|doc| {
            let (_, phi) = lda_e_step(model, doc, cfg);
            let mut used = vec![false; m];
            for w in 0..doc.distinct_words() {
                let mut best = (0usize, f64::NEG_INFINITY);
                for j in 0..m {
                    let p = phi[w * m + j];
                    if p > best.1 {
                        best = (j, p);
                    }
                }
                used[best.0] = true;
            }
            used.iter().filter(|&&b| b).count()
        })
        .collect();
    per_doc.iter().sum::<usize>() as f64 / corpus.num_documents() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Vocabulary};
    use crate::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};
    use crate::testutil::tmp_dir;
    use std::sync::Arc;

    fn tiny_corpus() -> Corpus {
        let voc = Arc::new(Vocabulary::synthetic(4));
        Corpus::new(
            vec![
                Document::new(vec![(0, 3), (1, 1)], vec![]).unwrap(),
                Document::new(vec![(2, 2), (3, 2)], vec![]).unwrap(),
                Document::new(vec![(0, 1), (2, 1), (3, 1)], vec![]).unwrap(),
            ],
            voc,
            0,
        )
        .unwrap()
    }

    #[test]
    fn single_topic_e_step_closed_form() {
        let model = LdaModel {
            beta: vec![vec![0.25; 4]],
            eta: vec![0.7],
            background_row: None,
        };
        let doc = Document::new(vec![(0, 2), (3, 3)], vec![]).unwrap();
        let (gamma, phi) = lda_e_step(&model, &doc, &LdaConfig::default());
        assert!((gamma[0] - (0.7 + 5.0)).abs() < 1e-12);
        assert!(phi.iter().all(|&p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn symmetric_model_gives_uniform_phi() {
        let model = LdaModel {
            beta: vec![vec![0.25; 4], vec![0.25; 4]],
            eta: vec![1.0, 1.0],
            background_row: None,
        };
        let doc = Document::new(vec![(1, 2), (2, 2)], vec![]).unwrap();
        let (_, phi) = lda_e_step(&model, &doc, &LdaConfig::default());
        assert!(phi.iter().all(|&p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn inner_iterations_do_not_decrease_the_bound() {
        let corpus = tiny_corpus();
        let result = lda_train(&corpus, 2, &LdaConfig { max_iters: 1, ..LdaConfig::default() }, 3).unwrap();
        let model = result.model;
        let doc = corpus.document(2);
        let mut last = f64::NEG_INFINITY;
        for iters in 1..10 {
            let cfg = LdaConfig { inner_iters: iters, inner_tol: 0.0, ..LdaConfig::default() };
            let (gamma, phi) = lda_e_step(&model, doc, &cfg);
            let elbo = doc_elbo(&model, doc, &gamma, &phi);
            assert!(elbo >= last - 1e-9, "inner iteration decreased the bound");
            last = elbo;
        }
    }

    #[test]
    fn gamma_dominates_eta() {
        let corpus = tiny_corpus();
        let result = lda_train(&corpus, 3, &LdaConfig::default(), 5).unwrap();
        let (state, _) = e_step_all(&result.model, &corpus, &LdaConfig::default());
        for gamma in &state.gamma {
            for (g, e) in gamma.iter().zip(&result.model.eta) {
                assert!(g >= e);
            }
        }
    }

    #[test]
    fn m_step_single_doc_single_topic_is_frequency() {
        let voc = Arc::new(Vocabulary::synthetic(3));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 2), (2, 2)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let mut model = LdaModel {
            beta: vec![vec![1.0 / 3.0; 3]],
            eta: vec![1.0],
            background_row: None,
        };
        let cfg = LdaConfig { fixed_eta: true, ..LdaConfig::default() };
        let (state, _) = e_step_all(&model, &corpus, &cfg);
        lda_m_step(&state, &corpus, &mut model, &cfg);
        assert!((model.beta[0][0] - 0.5).abs() < 1e-9);
        assert!((model.beta[0][1] - 0.0).abs() < 1e-9);
        assert!((model.beta[0][2] - 0.5).abs() < 1e-9);
        let sum: f64 = model.beta[0].iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn background_row_is_bitwise_frozen() {
        let corpus = tiny_corpus();
        let cfg = LdaConfig { background: true, ..LdaConfig::default() };
        let frequencies = estimate_shared(&corpus);
        let result = lda_train(&corpus, 3, &cfg, 9).unwrap();
        assert_eq!(result.model.background_row, Some(2));
        assert_eq!(result.model.beta[2], frequencies);
    }

    #[test]
    fn elbo_trace_is_non_decreasing() {
        let truth = generate_model(&GeneratorSpec { num_docs: 20, vocab_size: 60, ..GeneratorSpec::default() }, 4).unwrap();
        let corpus = sample_corpus(&truth, (40, 60), 4, LabelMode::ArgmaxProportion);
        for fixed_eta in [true, false] {
            let cfg = LdaConfig { fixed_eta, max_iters: 30, ..LdaConfig::default() };
            let result = lda_train(&corpus, 4, &cfg, 7).unwrap();
            for pair in result.elbo_trace.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-6 * pair[0].abs(),
                    "ELBO decreased (fixed_eta = {fixed_eta}): {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
            for &e in &result.model.eta {
                assert!(e > 0.0);
            }
        }
    }

    #[test]
    fn training_is_deterministic_under_seed() {
        let corpus = tiny_corpus();
        let a = lda_train(&corpus, 2, &LdaConfig::default(), 11).unwrap();
        let b = lda_train(&corpus, 2, &LdaConfig::default(), 11).unwrap();
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn single_topic_train_closed_form() {
        let corpus = tiny_corpus();
        let result = lda_train(&corpus, 1, &LdaConfig { fixed_eta: true, ..LdaConfig::default() }, 0).unwrap();
        let freq = estimate_shared(&corpus);
        for (b, f) in result.model.beta[0].iter().zip(&freq) {
            assert!((b - f).abs() < 1e-6, "{b} vs {f}");
        }
    }

    #[test]
    fn sparsity_is_one_for_single_topic() {
        let corpus = tiny_corpus();
        let result = lda_train(&corpus, 1, &LdaConfig::default(), 2).unwrap();
        let m_bar = lda_topic_sparsity(&result.model, &corpus, &LdaConfig::default());
        assert_eq!(m_bar, 1.0);
    }

    #[test]
    fn sparsity_counts_distinct_argmax_topics() {
        // A document whose words all favor one topic contributes one.
        let model = LdaModel {
            beta: vec![vec![0.7, 0.1, 0.1, 0.1], vec![0.1, 0.1, 0.1, 0.7]],
            eta: vec![1.0, 1.0],
            background_row: None,
        };
        let voc = Arc::new(Vocabulary::synthetic(4));
        let corpus = Corpus::new(
            vec![Document::new(vec![(0, 5)], vec![]).unwrap()],
            voc,
            0,
        )
        .unwrap();
        let m_bar = lda_topic_sparsity(&model, &corpus, &LdaConfig::default());
        assert_eq!(m_bar, 1.0);
    }

    #[test]
    fn model_file_round_trip() {
        let dir = tmp_dir("lda-rt");
        let corpus = tiny_corpus();
        let result = lda_train(&corpus, 2, &LdaConfig { background: true, ..LdaConfig::default() }, 6).unwrap();
        let path = dir.join("m.lda");
        result.model.save(&path).unwrap();
        let loaded = LdaModel::load(&path).unwrap();
        assert_eq!(result.model, loaded);
    }
}
