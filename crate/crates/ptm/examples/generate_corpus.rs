//! Draw a synthetic corpus from a known sparse model and write it to disk
//! in the corpus/vocabulary/label file formats, together with the ground
//! truth model.
//!
//! ```bash
//! cargo run --example generate_corpus -- /tmp/ptm-demo
//! ```

use ptm::corpus::{corpus_stats, write_corpus, write_labels, write_vocabulary};
use ptm::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};

fn main() -> ptm::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "/tmp/ptm-demo".into());
    std::fs::create_dir_all(&out).expect("create output directory");
    let out = std::path::PathBuf::from(out);

    let spec = GeneratorSpec::default();
    let truth = generate_model(&spec, 7)?;
    let corpus = sample_corpus(&truth, spec.doc_len, 8, LabelMode::ArgmaxProportion);

    write_corpus(&corpus, &out.join("corpus.txt"))?;
    write_vocabulary(corpus.vocabulary(), &out.join("vocab.txt"))?;
    write_labels(&corpus, &out.join("labels.txt"))?;
    truth.save(&out.join("truth.model"))?;

    let stats = corpus_stats(&corpus);
    println!(
        "wrote {} documents over {} words ({} tokens, mean length {:.1}) to {}",
        stats.num_documents,
        stats.vocab_size,
        stats.total_tokens,
        stats.mean_length,
        out.display()
    );
    println!(
        "ground truth: {} topics, {:.1} specific words per topic",
        truth.num_topics(),
        truth.structure().mean_specific()
    );
    Ok(())
}
