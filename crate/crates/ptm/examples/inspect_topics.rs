//! Fit a model and print each topic's top salient words next to the top
//! shared words it falls back to, plus the coherence of the salient sets.
//!
//! ```bash
//! cargo run --example inspect_topics
//! ```

use ptm::eval::{coherence_ptm, ptm_top_words};
use ptm::init::initialize;
use ptm::search::{fit_fixed_order, FitConfig};
use ptm::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};

fn main() -> ptm::Result<()> {
    let spec = GeneratorSpec::default();
    let truth = generate_model(&spec, 21)?;
    let corpus = sample_corpus(&truth, spec.doc_len, 22, LabelMode::ArgmaxProportion);
    let model = fit_fixed_order(
        initialize(&corpus, spec.num_topics, 5, 1)?,
        &corpus,
        &FitConfig::default(),
    )?
    .model;

    let vocab = corpus.vocabulary();
    let beta0 = &model.params().beta0;
    for j in 0..model.num_topics() {
        let row = &model.params().beta[j];
        let mut specific: Vec<(usize, f64)> = row.iter().collect();
        specific.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let salient: Vec<String> = specific
            .iter()
            .take(6)
            .map(|&(w, p)| format!("{}({p:.3})", vocab.token(w)))
            .collect();
        let mut shared: Vec<(usize, f64)> = (0..model.vocab_size())
            .filter(|&w| !model.structure().word_specific(j, w))
            .map(|w| (w, beta0[w]))
            .collect();
        shared.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let fallback: Vec<String> = shared
            .iter()
            .take(4)
            .map(|&(w, p)| format!("{}({p:.3})", vocab.token(w)))
            .collect();
        println!("topic {j}");
        println!("  salient: {}", salient.join(" "));
        println!("  shared:  {}", fallback.join(" "));
    }

    let coherence = coherence_ptm(&model, &corpus, 0.3);
    println!("\nmean coherence of the salient sets: {:.2}", coherence.mean);
    let tops = ptm_top_words(&model, 0.3);
    println!("top-word set sizes per topic: {:?}", tops.iter().map(|t| t.len()).collect::<Vec<_>>());
    Ok(())
}
