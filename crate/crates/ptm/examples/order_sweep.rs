//! Select the number of topics without labels or validation data: fit at a
//! ceiling order, repeatedly prune the least massive topics and refit, and
//! keep the order with the smallest objective.
//!
//! ```bash
//! cargo run --example order_sweep
//! ```

use ptm::order::sweep_top_down;
use ptm::search::FitConfig;
use ptm::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};

fn main() -> ptm::Result<()> {
    let spec = GeneratorSpec::default(); // five generating topics
    let truth = generate_model(&spec, 4)?;
    let corpus = sample_corpus(&truth, spec.doc_len, 5, LabelMode::ArgmaxProportion);

    let (result, best) = sweep_top_down(&corpus, 10, 2, 1, 5, 0, &FitConfig::default())?;

    println!("topics  total        -log L       seconds");
    for r in &result.records {
        println!(
            "{:>6}  {:>11.3}  {:>11.3}  {:>7.2}",
            r.num_topics, r.bic.total, r.bic.neg_log_likelihood, r.seconds
        );
    }
    println!(
        "\nselected {} topics (generating model had {}); best model keeps {} salient words",
        result.m_star,
        spec.num_topics,
        best.structure().total_specific()
    );
    Ok(())
}
