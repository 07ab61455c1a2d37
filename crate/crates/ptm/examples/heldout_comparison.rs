//! Compare the parsimonious model against the LDA baseline on held-out
//! data with document completion: each test document is split into an
//! observed part (used to infer topic proportions) and a held-out part
//! with disjoint words (scored under those proportions).
//!
//! ```bash
//! cargo run --example heldout_comparison
//! ```

use ptm::corpus::{split_document_completion, Corpus};
use ptm::eval::{heldout_ll_lda, heldout_ll_ptm};
use ptm::lda::{lda_train, LdaConfig};
use ptm::order::sweep_top_down;
use ptm::search::FitConfig;
use ptm::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};

fn main() -> ptm::Result<()> {
    let spec = GeneratorSpec { num_docs: 70, ..GeneratorSpec::default() };
    let truth = generate_model(&spec, 3)?;
    let corpus = sample_corpus(&truth, spec.doc_len, 2003, LabelMode::ArgmaxProportion);
    let train = Corpus::new(
        corpus.documents()[..50].to_vec(),
        corpus.vocabulary().clone(),
        corpus.num_classes(),
    )?;
    let test = Corpus::new(
        corpus.documents()[50..].to_vec(),
        corpus.vocabulary().clone(),
        corpus.num_classes(),
    )?;

    // Select the order on the training set, then fit LDA at the same order.
    let (result, best) = sweep_top_down(&train, 10, 2, 1, 5, 3, &FitConfig::default())?;
    let lda_cfg = LdaConfig::default();
    let lda = lda_train(&train, result.m_star, &lda_cfg, 3)?;

    let (observed, heldout) = split_document_completion(&test, 0.5, 3)?;
    let sparse = heldout_ll_ptm(&best, &observed, &heldout, 100, 1e-8)?;
    let baseline = heldout_ll_lda(&lda.model, &observed, &heldout, &lda_cfg)?;

    println!("selected order: {}", result.m_star);
    println!("parsimonious model held-out log-likelihood: {:.1}", sparse.log_likelihood);
    println!("LDA baseline held-out log-likelihood:       {:.1}", baseline.log_likelihood);
    println!(
        "margin: {:+.1} nats over {} held-out tokens",
        sparse.log_likelihood - baseline.log_likelihood,
        heldout.total_tokens()
    );
    Ok(())
}
