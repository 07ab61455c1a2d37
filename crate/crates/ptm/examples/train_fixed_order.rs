//! Fit a parsimonious topic model at a fixed number of topics and watch
//! the objective descend: EM parameter updates alternate with greedy
//! switch sweeps over salient words and topic presence.
//!
//! ```bash
//! cargo run --example train_fixed_order
//! ```

use ptm::eval::sparsity_stats;
use ptm::init::initialize;
use ptm::search::{fit_fixed_order, FitConfig};
use ptm::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};

fn main() -> ptm::Result<()> {
    let spec = GeneratorSpec::default();
    let truth = generate_model(&spec, 1)?;
    let corpus = sample_corpus(&truth, spec.doc_len, 2, LabelMode::ArgmaxProportion);

    let model = initialize(&corpus, spec.num_topics, 5, 0)?;
    let fit = fit_fixed_order(model, &corpus, &FitConfig::default())?;

    println!("iter  total        -log L       u-flips  v-flips");
    for (i, it) in fit.trace.iter().enumerate() {
        println!(
            "{i:>4}  {:>11.3}  {:>11.3}  {:>7}  {:>7}",
            it.bic.total,
            it.bic.neg_log_likelihood,
            it.u_report.map_or(0, |r| r.flips_accepted),
            it.v_report.map_or(0, |r| r.flips_accepted),
        );
    }

    let stats = sparsity_stats(&fit.model);
    println!(
        "\nfitted model: {:.2} topics per document, {:.1} specific words per topic, {} salient words in total",
        stats.mean_topics_per_doc, stats.mean_specific_per_topic, stats.unique_specific_words
    );
    assert!(fit.model.validate().is_empty());
    Ok(())
}
