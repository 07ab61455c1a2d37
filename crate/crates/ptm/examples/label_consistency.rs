//! Score a fitted model against ground-truth class labels: learn a label
//! distribution per topic on the training set, infer proportions for test
//! documents, and report single-label accuracy.
//!
//! ```bash
//! cargo run --example label_consistency
//! ```

use ptm::corpus::Corpus;
use ptm::em::infer_test_proportions;
use ptm::eval::{label_consistency_single, learn_label_distributions, ptm_train_proportions};
use ptm::init::initialize;
use ptm::search::{fit_fixed_order, FitConfig};
use ptm::synth::{generate_model, sample_corpus, GeneratorSpec, LabelMode};

fn main() -> ptm::Result<()> {
    let spec = GeneratorSpec {
        num_docs: 80,
        topics_per_doc: (1, 1),
        ..GeneratorSpec::default()
    };
    let truth = generate_model(&spec, 6)?;
    let corpus = sample_corpus(&truth, spec.doc_len, 60, LabelMode::ArgmaxProportion);
    let train = Corpus::new(
        corpus.documents()[..60].to_vec(),
        corpus.vocabulary().clone(),
        corpus.num_classes(),
    )?;
    let test = Corpus::new(
        corpus.documents()[60..].to_vec(),
        corpus.vocabulary().clone(),
        corpus.num_classes(),
    )?;

    // A few restarts, keeping the lowest objective.
    let model = (0..3)
        .map(|restart| {
            let init = initialize(&train, spec.num_topics, 5, restart)?;
            fit_fixed_order(init, &train, &FitConfig::default())
        })
        .collect::<ptm::Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| {
            let (a, b) = (a.trace.last().unwrap().bic.total, b.trace.last().unwrap().bic.total);
            a.partial_cmp(&b).unwrap()
        })
        .unwrap()
        .model;

    let distributions = learn_label_distributions(&ptm_train_proportions(&model), &train)?;
    for (j, row) in distributions.p.iter().enumerate() {
        let best = row.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
        println!("topic {j}: most likely class {} (p = {:.2})", best.0, best.1);
    }

    let test_proportions: Vec<Vec<f64>> = test
        .documents()
        .iter()
        .map(|doc| infer_test_proportions(&model, doc, 200, 1e-10))
        .collect();
    let accuracy = label_consistency_single(&distributions, &test_proportions, &test)?;
    println!("\nsingle-label accuracy on {} test documents: {accuracy:.2}", test.num_documents());
    Ok(())
}
