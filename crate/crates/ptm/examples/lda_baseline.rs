//! Train the variational LDA baseline, optionally with a background topic
//! frozen at the global word frequencies, and measure its topic sparsity
//! by argmax word assignment.
//!
//! ```bash
//! cargo run --example lda_baseline
//! ```

use ptm::lda::{lda_topic_sparsity, lda_train, LdaConfig};
use ptm::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};

fn main() -> ptm::Result<()> {
    let spec = GeneratorSpec::default();
    let truth = generate_model(&spec, 12)?;
    let corpus = sample_corpus(&truth, spec.doc_len, 13, LabelMode::ArgmaxProportion);

    for background in [false, true] {
        let cfg = LdaConfig { background, ..LdaConfig::default() };
        let result = lda_train(&corpus, 5, &cfg, 0)?;
        let m_bar = lda_topic_sparsity(&result.model, &corpus, &cfg);
        println!(
            "{}: {} iterations, bound {:.1}, mean occurring topics per document {:.2}",
            if background { "with background topic" } else { "plain LDA            " },
            result.elbo_trace.len(),
            result.elbo_trace.last().unwrap(),
            m_bar
        );
    }
    Ok(())
}
