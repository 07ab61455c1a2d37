//! Shared fixtures for unit tests.

use std::path::PathBuf;
use std::sync::Arc;

use crate::corpus::{Corpus, Document, Vocabulary};
use crate::model::{ModelParams, ModelStructure, PtmModel, SparseRow};

pub fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ptm-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Three topics over six words and two documents. Word probabilities:
///
/// ```text
///        w0    w1    w2    w3    w4    w5
/// t0   [0.1]  0.2  [0.2]  0.25  0.1  [0.15]
/// t1   [0.1]  0.25 [0.2]  0.3   0.05  0.1
/// t2   [0.1]  0.05  0.3   0.1  [0.3] [0.15]
/// ```
///
/// Bracketed entries are shared (u = 0); the rest are topic-specific. The
/// shared pmf fills words 1 and 3 (specific everywhere) with 0.125 each so
/// it normalizes. Document proportions: doc 0 = (0.2, -, 0.8) on topics
/// {0, 2}; doc 1 = (-, 0.4, 0.6) on topics {1, 2}.
pub fn fig_model() -> PtmModel {
    let f = false;
    let t = true;
    let u = vec![
        vec![f, t, f, t, t, f],
        vec![f, t, f, t, t, t],
        vec![f, t, t, t, f, f],
    ];
    let v = vec![vec![t, f], vec![f, t], vec![t, t]];
    let structure = ModelStructure::new(u, v).unwrap();
    let params = ModelParams {
        alpha: vec![
            SparseRow::from_pairs(vec![(0, 0.2), (2, 0.8)]),
            SparseRow::from_pairs(vec![(1, 0.4), (2, 0.6)]),
        ],
        beta: vec![
            SparseRow::from_pairs(vec![(1, 0.2), (3, 0.25), (4, 0.1)]),
            SparseRow::from_pairs(vec![(1, 0.25), (3, 0.3), (4, 0.05), (5, 0.1)]),
            SparseRow::from_pairs(vec![(1, 0.05), (2, 0.3), (3, 0.1)]),
        ],
        beta0: vec![0.1, 0.125, 0.2, 0.125, 0.3, 0.15],
    };
    PtmModel::new(structure, params).unwrap()
}

/// A small corpus dimensionally matching [`fig_model`].
pub fn fig_corpus() -> Corpus {
    let vocabulary = Arc::new(Vocabulary::synthetic(6));
    let documents = vec![
        Document::new(vec![(0, 2), (1, 1), (4, 3)], vec![]).unwrap(),
        Document::new(vec![(2, 2), (3, 1), (5, 4)], vec![]).unwrap(),
    ];
    Corpus::new(documents, vocabulary, 0).unwrap()
}
