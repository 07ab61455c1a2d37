//! Batch command implementations behind the `ptm` binary. Each command is
//! an ordinary function over a plain argument struct, so the binary stays a
//! thin parser and the commands stay callable from tests and examples.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::bic::{BicBreakdown, UPriorMode};
use crate::corpus::{self, Corpus};
use crate::error::{Error, Result};
use crate::eval;
use crate::init::initialize;
use crate::lda::{self, LdaConfig, LdaModel};
use crate::model::PtmModel;
use crate::order;
use crate::search::{fit_fixed_order, FitConfig};
use crate::synth::{self, GeneratorSpec, LabelMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UPriorChoice {
    Approx,
    Exact,
    Auto,
}

impl UPriorChoice {
    pub fn resolve(self, vocab_size: usize) -> UPriorMode {
        match self {
            UPriorChoice::Approx => UPriorMode::EntropyApprox,
            UPriorChoice::Exact => UPriorMode::Exact,
            UPriorChoice::Auto => UPriorMode::auto(vocab_size),
        }
    }
}

/// Flags shared by every training-style command.
#[derive(Debug, Clone, Args)]
pub struct CommonOpts {
    /// Root seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative objective improvement below which iteration stops.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Iteration cap for EM-style loops (LDA outer loop, test inference).
    #[arg(long = "max-em-iters", default_value_t = 100)]
    pub max_em_iters: usize,
    /// Outer iteration cap for the structure-learning fit.
    #[arg(long = "max-gem-iters", default_value_t = 50)]
    pub max_gem_iters: usize,
    /// Cycle cap within each switch sweep.
    #[arg(long = "max-sweep-cycles", default_value_t = 20)]
    pub max_sweep_cycles: usize,
    /// Seed documents per topic at initialization.
    #[arg(long = "d-init", default_value_t = 5)]
    pub d_init: usize,
    /// Independent restarts; the lowest-objective run is kept.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Word-switch prior mode.
    #[arg(long = "u-prior", value_enum, default_value_t = UPriorChoice::Auto)]
    pub u_prior: UPriorChoice,
    /// Keep the LDA Dirichlet parameter fixed instead of Newton updates.
    #[arg(long = "fixed-eta", default_value_t = false)]
    pub fixed_eta: bool,
    /// Observed fraction for document-completion splits.
    #[arg(long = "split-fraction", default_value_t = 0.5)]
    pub split_fraction: f64,
    /// Worker threads (0 = all available cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl Default for CommonOpts {
    fn default() -> Self {
        CommonOpts {
            seed: 0,
            tol: 1e-5,
            max_em_iters: 100,
            max_gem_iters: 50,
            max_sweep_cycles: 20,
            d_init: 5,
            restarts: 1,
            u_prior: UPriorChoice::Auto,
            fixed_eta: false,
            split_fraction: 0.5,
            threads: 0,
        }
    }
}

impl CommonOpts {
    pub fn fit_config(&self, vocab_size: usize) -> FitConfig {
        FitConfig {
            tol: self.tol,
            max_gem_iters: self.max_gem_iters,
            max_sweep_cycles: self.max_sweep_cycles,
            u_prior_mode: self.u_prior.resolve(vocab_size),
            ..FitConfig::default()
        }
    }

    pub fn lda_config(&self, background: bool) -> LdaConfig {
        LdaConfig {
            tol: self.tol,
            max_iters: self.max_em_iters,
            fixed_eta: self.fixed_eta,
            background,
            ..LdaConfig::default()
        }
    }
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io { path: path.into(), source })
}

/// Append a dotted suffix to a path (`out` + `bic.csv` -> `out.bic.csv`),
/// never replacing existing extensions.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

fn load(corpus: &Path, vocab: &Path, labels: Option<&PathBuf>) -> Result<Corpus> {
    corpus::load_corpus(corpus, vocab, labels.map(|p| p.as_path()))
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Corpus file.
    pub corpus: PathBuf,
    /// Vocabulary file.
    pub vocab: PathBuf,
    /// Number of topics.
    #[arg(short, long)]
    pub num_topics: usize,
    /// Output prefix; writes <out>.model, <out>.bic.csv, <out>.ll.csv.
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: CommonOpts,
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub restart_totals: Vec<f64>,
    pub best_restart: usize,
    pub final_bic: BicBreakdown,
    pub model_path: PathBuf,
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainSummary> {
    let corpus = load(&args.corpus, &args.vocab, None)?;
    let cfg = args.opts.fit_config(corpus.vocab_size());
    let restarts = args.opts.restarts.max(1);

    use rayon::prelude::*;
    let fits: Vec<_> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let seed = args.opts.seed.wrapping_add(r as u64);
            let model = initialize(&corpus, args.num_topics, args.opts.d_init, seed)?;
            fit_fixed_order(model, &corpus, &cfg)
        })
        .collect::<Result<_>>()?;

    let restart_totals: Vec<f64> = fits
        .iter()
        .map(|f| f.trace.last().unwrap().bic.total)
        .collect();
    let best_restart = restart_totals
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |acc, (i, &t)| if t < acc.1 { (i, t) } else { acc })
        .0;
    let best = &fits[best_restart];

    let model_path = with_suffix(&args.out, "model");
    best.model.save(&model_path)?;

    let mut bic_csv = format!("iteration,{},u_flips,v_flips\n", BicBreakdown::csv_header());
    let mut ll_csv = String::from("iteration,log_likelihood\n");
    for (i, it) in best.trace.iter().enumerate() {
        let u = it.u_report.map_or(0, |r| r.flips_accepted);
        let v = it.v_report.map_or(0, |r| r.flips_accepted);
        writeln!(bic_csv, "{i},{},{u},{v}", it.bic.csv_row()).unwrap();
        writeln!(ll_csv, "{i},{}", -it.bic.neg_log_likelihood).unwrap();
    }
    write_text(&with_suffix(&args.out, "bic.csv"), &bic_csv)?;
    write_text(&with_suffix(&args.out, "ll.csv"), &ll_csv)?;

    Ok(TrainSummary {
        restart_totals,
        best_restart,
        final_bic: best.trace.last().unwrap().bic,
        model_path,
    })
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub corpus: PathBuf,
    pub vocab: PathBuf,
    /// Ceiling order the sweep starts from.
    #[arg(long)]
    pub m_max: usize,
    /// Floor order the sweep stops at.
    #[arg(long, default_value_t = 1)]
    pub m_min: usize,
    /// Topics removed per stage.
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    /// Optional test corpus; adds a held-out likelihood column.
    #[arg(long)]
    pub test_corpus: Option<PathBuf>,
    /// Output prefix; writes <out>.curve.csv and <out>.model.
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: CommonOpts,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub m_star: usize,
    pub records: Vec<order::OrderRecord>,
    pub model_path: PathBuf,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepSummary> {
    let corpus = load(&args.corpus, &args.vocab, None)?;
    let cfg = args.opts.fit_config(corpus.vocab_size());
    let split = args
        .test_corpus
        .as_ref()
        .map(|p| -> Result<_> {
            let test = load(p, &args.vocab, None)?;
            corpus::split_document_completion(&test, args.opts.split_fraction, args.opts.seed)
        })
        .transpose()?;

    // One full sweep per restart; the one with the lowest selected-order
    // objective is kept.
    let restarts = args.opts.restarts.max(1);
    let mut kept: Option<(String, order::OrderSweepResult, PtmModel)> = None;
    for r in 0..restarts {
        let seed = args.opts.seed.wrapping_add(r as u64);
        let mut curve = format!("num_topics,{},heldout_ll,seconds\n", BicBreakdown::csv_header());
        let (result, best) = order::sweep_top_down_with(
            &corpus,
            args.m_max,
            args.m_min,
            args.step,
            args.opts.d_init,
            seed,
            &cfg,
            |record, model| {
                let heldout = match &split {
                    Some((obs, held)) => {
                        let h = eval::heldout_ll_ptm(model, obs, held, args.opts.max_em_iters, 1e-8)?;
                        format!("{}", h.log_likelihood)
                    }
                    None => String::new(),
                };
                writeln!(
                    curve,
                    "{},{},{heldout},{}",
                    record.num_topics,
                    record.bic.csv_row(),
                    record.seconds
                )
                .unwrap();
                Ok(())
            },
        )?;
        let total = result.record_at(result.m_star).expect("argmin recorded").bic.total;
        let better = kept
            .as_ref()
            .map(|(_, prev, _)| {
                total < prev.record_at(prev.m_star).expect("argmin recorded").bic.total
            })
            .unwrap_or(true);
        if better {
            kept = Some((curve, result, best));
        }
    }
    let (curve, result, best) = kept.expect("at least one restart ran");

    write_text(&with_suffix(&args.out, "curve.csv"), &curve)?;
    let model_path = with_suffix(&args.out, "model");
    best.save(&model_path)?;
    Ok(SweepSummary { m_star: result.m_star, records: result.records, model_path })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelMetricMode {
    Auto,
    Single,
    Multi,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Model file (`ptm` or `lda` format, detected from the header).
    pub model: PathBuf,
    /// Training corpus (co-occurrence counts, label distributions).
    pub train_corpus: PathBuf,
    pub vocab: PathBuf,
    /// Test corpus for the document-completion evaluation.
    pub test_corpus: PathBuf,
    /// Training label file.
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    /// Test label file.
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    /// Top fraction of specific words used for coherence.
    #[arg(long, default_value_t = 0.02)]
    pub coherence_fraction: f64,
    /// Explicit top-word count for LDA coherence (default: the mean count
    /// the fraction yields on a parsimonious model, or 10).
    #[arg(long)]
    pub coherence_top: Option<usize>,
    /// Which label-consistency score to compute.
    #[arg(long, value_enum, default_value_t = LabelMetricMode::Auto)]
    pub label_mode: LabelMetricMode,
    /// Output prefix; writes <out>.eval.csv (and <out>.pr.csv for multi).
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: CommonOpts,
}

/// One evaluated model, CSV-serializable.
#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub model_kind: &'static str,
    pub heldout: eval::HeldoutResult,
    pub coherence_mean: f64,
    pub mean_topics_per_doc: f64,
    pub mean_specific_per_topic: Option<f64>,
    pub unique_specific_words: Option<usize>,
    pub topics_per_specific_word: Option<f64>,
    pub label_score: Option<f64>,
    pub label_metric: Option<&'static str>,
}

impl EvalSummary {
    pub fn csv_header() -> &'static str {
        "model,heldout_ll,floored_terms,coherence_mean,mean_topics_per_doc,\
         mean_specific_per_topic,unique_specific_words,topics_per_specific_word,\
         label_metric,label_score"
    }

    pub fn csv_row(&self) -> String {
        let opt_f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.model_kind,
            self.heldout.log_likelihood,
            self.heldout.floored_terms,
            self.coherence_mean,
            self.mean_topics_per_doc,
            opt_f(self.mean_specific_per_topic),
            self.unique_specific_words.map(|x| x.to_string()).unwrap_or_default(),
            opt_f(self.topics_per_specific_word),
            self.label_metric.unwrap_or(""),
            opt_f(self.label_score),
        )
    }
}

enum AnyModel {
    Ptm(PtmModel),
    Lda(LdaModel),
}

fn load_any_model(path: &Path) -> Result<AnyModel> {
    let head = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.into(), source })?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    match head.split_whitespace().next() {
        Some("ptm") => Ok(AnyModel::Ptm(PtmModel::load(path)?)),
        Some("lda") => Ok(AnyModel::Lda(LdaModel::load(path)?)),
        _ => Err(Error::data(format!("unrecognized model header {head:?}"))),
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalSummary> {
    let train = load(&args.train_corpus, &args.vocab, args.train_labels.as_ref())?;
    let test = load(&args.test_corpus, &args.vocab, args.test_labels.as_ref())?;
    let model = load_any_model(&args.model)?;
    let lda_cfg = args.opts.lda_config(false);
    let (obs, held) =
        corpus::split_document_completion(&test, args.opts.split_fraction, args.opts.seed)?;

    let label_mode = match args.label_mode {
        LabelMetricMode::None => None,
        LabelMetricMode::Single => Some(false),
        LabelMetricMode::Multi => Some(true),
        LabelMetricMode::Auto => {
            if test.num_classes() == 0 || train.num_classes() == 0 {
                None
            } else {
                Some(test.documents().iter().any(|d| d.labels().len() > 1))
            }
        }
    };
    if label_mode.is_some() && (test.num_classes() == 0 || train.num_classes() == 0) {
        return Err(Error::data(
            "label consistency requested but the corpora carry no labels",
        ));
    }

    let mut pr_csv = None;
    let summary = match &model {
        AnyModel::Ptm(model) => {
            model.check_corpus(&train)?;
            let heldout = eval::heldout_ll_ptm(model, &obs, &held, args.opts.max_em_iters, 1e-8)?;
            let coherence = eval::coherence_ptm(model, &train, args.coherence_fraction);
            let sparsity = eval::sparsity_stats(model);
            let (label_metric, label_score) = match label_mode {
                None => (None, None),
                Some(multi) => {
                    let train_props = eval::ptm_train_proportions(model);
                    let dist = eval::learn_label_distributions(&train_props, &train)?;
                    let test_props: Vec<Vec<f64>> = test
                        .documents()
                        .iter()
                        .map(|doc| crate::em::infer_test_proportions(model, doc, args.opts.max_em_iters, 1e-8))
                        .collect();
                    if multi {
                        let (auc, points) = eval::label_consistency_multi(
                            &dist,
                            &test_props,
                            &test,
                            &eval::default_threshold_grid(),
                        )?;
                        pr_csv = Some(points);
                        (Some("multi_auc"), Some(auc))
                    } else {
                        let acc = eval::label_consistency_single(&dist, &test_props, &test)?;
                        (Some("single_accuracy"), Some(acc))
                    }
                }
            };
            EvalSummary {
                model_kind: "ptm",
                heldout,
                coherence_mean: coherence.mean,
                mean_topics_per_doc: sparsity.mean_topics_per_doc,
                mean_specific_per_topic: Some(sparsity.mean_specific_per_topic),
                unique_specific_words: Some(sparsity.unique_specific_words),
                topics_per_specific_word: Some(sparsity.topics_per_specific_word),
                label_score,
                label_metric,
            }
        }
        AnyModel::Lda(model) => {
            let heldout = eval::heldout_ll_lda(model, &obs, &held, &lda_cfg)?;
            let top = args.coherence_top.unwrap_or(10);
            let coherence = eval::coherence_lda(model, &train, top);
            let m_bar = lda::lda_topic_sparsity(model, &train, &lda_cfg);
            let (label_metric, label_score) = match label_mode {
                None => (None, None),
                Some(multi) => {
                    let train_props = eval::lda_train_proportions(model, &train, &lda_cfg);
                    let dist = eval::learn_label_distributions(&train_props, &train)?;
                    let test_props = eval::lda_train_proportions(model, &test, &lda_cfg);
                    if multi {
                        let (auc, points) = eval::label_consistency_multi(
                            &dist,
                            &test_props,
                            &test,
                            &eval::default_threshold_grid(),
                        )?;
                        pr_csv = Some(points);
                        (Some("multi_auc"), Some(auc))
                    } else {
                        let acc = eval::label_consistency_single(&dist, &test_props, &test)?;
                        (Some("single_accuracy"), Some(acc))
                    }
                }
            };
            EvalSummary {
                model_kind: "lda",
                heldout,
                coherence_mean: coherence.mean,
                mean_topics_per_doc: m_bar,
                mean_specific_per_topic: None,
                unique_specific_words: None,
                topics_per_specific_word: None,
                label_score,
                label_metric,
            }
        }
    };

    let mut csv = format!("{}\n", EvalSummary::csv_header());
    writeln!(csv, "{}", summary.csv_row()).unwrap();
    write_text(&with_suffix(&args.out, "eval.csv"), &csv)?;
    if let Some(points) = pr_csv {
        let mut pr = String::from("threshold,precision,recall\n");
        for p in points {
            writeln!(pr, "{},{},{}", p.threshold, p.precision, p.recall).unwrap();
        }
        write_text(&with_suffix(&args.out, "pr.csv"), &pr)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Args)]
pub struct LdaArgs {
    pub corpus: PathBuf,
    pub vocab: PathBuf,
    #[arg(short, long)]
    pub num_topics: usize,
    /// Freeze the last topic at the global word frequencies.
    #[arg(long, default_value_t = false)]
    pub background: bool,
    /// Output prefix; writes <out>.model and <out>.elbo.csv.
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: CommonOpts,
}

#[derive(Debug, Clone)]
pub struct LdaSummary {
    pub final_elbo: f64,
    pub iterations: usize,
    pub eta_reverts: usize,
    pub model_path: PathBuf,
}

pub fn cmd_lda(args: &LdaArgs) -> Result<LdaSummary> {
    let corpus = load(&args.corpus, &args.vocab, None)?;
    let cfg = args.opts.lda_config(args.background);
    let result = lda::lda_train(&corpus, args.num_topics, &cfg, args.opts.seed)?;
    let model_path = with_suffix(&args.out, "model");
    result.model.save(&model_path)?;
    let mut csv = String::from("iteration,elbo\n");
    for (i, e) in result.elbo_trace.iter().enumerate() {
        writeln!(csv, "{i},{e}").unwrap();
    }
    write_text(&with_suffix(&args.out, "elbo.csv"), &csv)?;
    Ok(LdaSummary {
        final_elbo: *result.elbo_trace.last().unwrap(),
        iterations: result.elbo_trace.len(),
        eta_reverts: result.eta_reverts,
        model_path,
    })
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    pub num_topics: usize,
    #[arg(long, default_value_t = 200)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 50)]
    pub num_docs: usize,
    #[arg(long, default_value_t = 80)]
    pub min_len: usize,
    #[arg(long, default_value_t = 120)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0.1)]
    pub specific_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub min_topics_per_doc: usize,
    #[arg(long, default_value_t = 2)]
    pub max_topics_per_doc: usize,
    #[arg(long, default_value_t = 0.3)]
    pub concentration: f64,
    /// Label documents with every active topic instead of the argmax.
    #[arg(long, default_value_t = false)]
    pub multi_label: bool,
    /// Output prefix; writes <out>.corpus.txt, .vocab.txt, .labels.txt,
    /// and .truth.model.
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: CommonOpts,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<PathBuf> {
    let spec = GeneratorSpec {
        num_topics: args.num_topics,
        vocab_size: args.vocab_size,
        num_docs: args.num_docs,
        doc_len: (args.min_len, args.max_len),
        specific_fraction: args.specific_fraction,
        topics_per_doc: (args.min_topics_per_doc, args.max_topics_per_doc),
        concentration: args.concentration,
    };
    let truth = synth::generate_model(&spec, args.opts.seed)?;
    let mode = if args.multi_label { LabelMode::ActiveTopics } else { LabelMode::ArgmaxProportion };
    let corpus = synth::sample_corpus(&truth, spec.doc_len, args.opts.seed.wrapping_add(1), mode);
    let corpus_path = with_suffix(&args.out, "corpus.txt");
    corpus::write_corpus(&corpus, &corpus_path)?;
    corpus::write_vocabulary(corpus.vocabulary(), &with_suffix(&args.out, "vocab.txt"))?;
    corpus::write_labels(&corpus, &with_suffix(&args.out, "labels.txt"))?;
    truth.save(&with_suffix(&args.out, "truth.model"))?;
    Ok(corpus_path)
}

#[derive(Debug, Clone, Args)]
pub struct TopicsArgs {
    /// Model file (`ptm` or `lda`).
    pub model: PathBuf,
    pub vocab: PathBuf,
    /// Words listed per topic.
    #[arg(short = 'k', long, default_value_t = 10)]
    pub top: usize,
}

pub fn cmd_topics(args: &TopicsArgs) -> Result<String> {
    let vocab = corpus::load_vocabulary(&args.vocab)?;
    let mut out = String::new();
    match load_any_model(&args.model)? {
        AnyModel::Ptm(model) => {
            if vocab.size() != model.vocab_size() {
                return Err(Error::data("vocabulary size disagrees with the model"));
            }
            for j in 0..model.num_topics() {
                let row = &model.params().beta[j];
                let mut specific: Vec<(usize, f64)> = row.iter().collect();
                specific.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                specific.truncate(args.top);
                let words: Vec<String> =
                    specific.iter().map(|&(w, p)| format!("{} ({p:.4})", vocab.token(w))).collect();
                writeln!(out, "topic {j} specific: {}", words.join(" ")).unwrap();

                let beta0 = &model.params().beta0;
                let mut shared: Vec<(usize, f64)> = (0..model.vocab_size())
                    .filter(|&w| !model.structure().word_specific(j, w))
                    .map(|w| (w, beta0[w]))
                    .collect();
                shared.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                shared.truncate(args.top);
                let words: Vec<String> =
                    shared.iter().map(|&(w, p)| format!("{} ({p:.4})", vocab.token(w))).collect();
                writeln!(out, "topic {j} shared:   {}", words.join(" ")).unwrap();
            }
        }
        AnyModel::Lda(model) => {
            if vocab.size() != model.vocab_size() {
                return Err(Error::data("vocabulary size disagrees with the model"));
            }
            for (j, top) in eval::lda_top_words(&model, args.top).iter().enumerate() {
                let words: Vec<String> = top
                    .iter()
                    .map(|&w| format!("{} ({:.4})", vocab.token(w), model.beta[j][w]))
                    .collect();
                writeln!(out, "topic {j}: {}", words.join(" ")).unwrap();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::tmp_dir;

    fn dir_file(out: &Path, name: &str) -> PathBuf {
        out.with_file_name(name)
    }

    fn synth_files(tag: &str, seed: u64) -> (PathBuf, SynthArgs) {
        let dir = tmp_dir(tag);
        let out = dir.join("data");
        let args = SynthArgs {
            num_topics: 3,
            vocab_size: 60,
            num_docs: 20,
            min_len: 40,
            max_len: 60,
            specific_fraction: 0.15,
            min_topics_per_doc: 1,
            max_topics_per_doc: 2,
            concentration: 0.3,
            multi_label: false,
            out: out.clone(),
            opts: CommonOpts { seed, ..CommonOpts::default() },
        };
        (out, args)
    }

    #[test]
    fn synth_then_train_round_trip() {
        let (out, synth_args) = synth_files("cli-train", 7);
        cmd_synth(&synth_args).unwrap();
        let train_args = TrainArgs {
            corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            num_topics: 3,
            out: dir_file(&out, "fit"),
            opts: CommonOpts { seed: 1, max_gem_iters: 4, ..CommonOpts::default() },
        };
        let summary = cmd_train(&train_args).unwrap();
        let model = PtmModel::load(&summary.model_path).unwrap();
        assert!(model.validate().is_empty());
        assert!(summary.final_bic.total.is_finite());
        let bic_csv = std::fs::read_to_string(dir_file(&out, "fit").with_file_name("fit.bic.csv")).unwrap();
        assert!(bic_csv.lines().count() >= 2);
    }

    #[test]
    fn train_is_byte_deterministic() {
        let (out, synth_args) = synth_files("cli-det", 9);
        cmd_synth(&synth_args).unwrap();
        let mut train_args = TrainArgs {
            corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            num_topics: 3,
            out: dir_file(&out, "a"),
            opts: CommonOpts { seed: 5, max_gem_iters: 3, ..CommonOpts::default() },
        };
        cmd_train(&train_args).unwrap();
        train_args.out = dir_file(&out, "b");
        cmd_train(&train_args).unwrap();
        let a = std::fs::read(dir_file(&out, "a").with_file_name("a.model")).unwrap();
        let b = std::fs::read(dir_file(&out, "b").with_file_name("b.model")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn restarts_return_the_lowest_objective() {
        let (out, synth_args) = synth_files("cli-restarts", 11);
        cmd_synth(&synth_args).unwrap();
        let train_args = TrainArgs {
            corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            num_topics: 3,
            out: dir_file(&out, "fit"),
            opts: CommonOpts { seed: 2, restarts: 4, max_gem_iters: 3, ..CommonOpts::default() },
        };
        let summary = cmd_train(&train_args).unwrap();
        let min = summary.restart_totals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(summary.restart_totals[summary.best_restart], min);
        assert_eq!(summary.final_bic.total, min);
    }

    #[test]
    fn eval_matches_direct_module_calls() {
        let (out, mut synth_args) = synth_files("cli-eval", 13);
        synth_args.num_docs = 24;
        cmd_synth(&synth_args).unwrap();
        let train_args = TrainArgs {
            corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            num_topics: 3,
            out: dir_file(&out, "fit"),
            opts: CommonOpts { seed: 3, max_gem_iters: 3, ..CommonOpts::default() },
        };
        let train_summary = cmd_train(&train_args).unwrap();
        let eval_args = EvalArgs {
            model: train_summary.model_path.clone(),
            train_corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            test_corpus: with_suffix(&out, "corpus.txt"),
            train_labels: Some(with_suffix(&out, "labels.txt")),
            test_labels: Some(with_suffix(&out, "labels.txt")),
            coherence_fraction: 0.5,
            coherence_top: None,
            label_mode: LabelMetricMode::Single,
            out: dir_file(&out, "report"),
            opts: CommonOpts { seed: 4, ..CommonOpts::default() },
        };
        let summary = cmd_eval(&eval_args).unwrap();

        let model = PtmModel::load(&train_summary.model_path).unwrap();
        let stats = eval::sparsity_stats(&model);
        assert_eq!(summary.mean_topics_per_doc, stats.mean_topics_per_doc);
        assert_eq!(summary.unique_specific_words, Some(stats.unique_specific_words));
        assert!(summary.label_score.unwrap() >= 0.0 && summary.label_score.unwrap() <= 1.0);
        let csv = std::fs::read_to_string(dir_file(&out, "report").with_file_name("report.eval.csv")).unwrap();
        assert!(csv.contains("ptm"));
    }

    #[test]
    fn eval_without_labels_rejects_label_request() {
        let (out, synth_args) = synth_files("cli-nolabel", 15);
        cmd_synth(&synth_args).unwrap();
        let train_args = TrainArgs {
            corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            num_topics: 3,
            out: dir_file(&out, "fit"),
            opts: CommonOpts { seed: 1, max_gem_iters: 2, ..CommonOpts::default() },
        };
        let summary = cmd_train(&train_args).unwrap();
        let eval_args = EvalArgs {
            model: summary.model_path,
            train_corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            test_corpus: with_suffix(&out, "corpus.txt"),
            train_labels: None,
            test_labels: None,
            coherence_fraction: 0.5,
            coherence_top: None,
            label_mode: LabelMetricMode::Single,
            out: dir_file(&out, "report"),
            opts: CommonOpts::default(),
        };
        assert!(cmd_eval(&eval_args).is_err());
    }

    #[test]
    fn lda_command_writes_model_and_trace() {
        let (out, synth_args) = synth_files("cli-lda", 17);
        cmd_synth(&synth_args).unwrap();
        let lda_args = LdaArgs {
            corpus: with_suffix(&out, "corpus.txt"),
            vocab: with_suffix(&out, "vocab.txt"),
            num_topics: 2,
            background: true,
            out: dir_file(&out, "lda"),
            opts: CommonOpts { seed: 6, max_em_iters: 10, ..CommonOpts::default() },
        };
        let summary = cmd_lda(&lda_args).unwrap();
        let model = LdaModel::load(&summary.model_path).unwrap();
        assert_eq!(model.background_row, Some(1));
        assert!(summary.final_elbo.is_finite());
    }

    #[test]
    fn topics_lists_specific_and_shared_words() {
        let dir = tmp_dir("cli-topics");
        let model = crate::testutil::fig_model();
        let model_path = dir.join("fig.model");
        model.save(&model_path).unwrap();
        let vocab_path = dir.join("fig.vocab");
        std::fs::write(&vocab_path, "w0\nw1\nw2\nw3\nw4\nw5\n").unwrap();
        let out = cmd_topics(&TopicsArgs { model: model_path, vocab: vocab_path, top: 1 })
            .unwrap();
        // Topic 2's top specific word is w2 at 0.3, and its top shared word
        // is w4 at the shared probability 0.3.
        assert!(out.contains("topic 2 specific: w2 (0.3000)"), "{out}");
        assert!(out.contains("topic 2 shared:   w4 (0.3000)"), "{out}");
    }
}
