//! Parsimonious topic modeling.
//!
//! Topics share a single corpus-wide word distribution for most of the
//! vocabulary and carry their own probabilities only for a learned set of
//! salient words; each document is explained by a learned subset of topics.
//! Structure (which words are salient where, which topics appear where),
//! parameters, and the number of topics are all chosen by descending a
//! single information-criterion objective, so no hyperparameter tuning or
//! labeled validation data is needed.
//!
//! The crate also ships a mean-field variational LDA baseline (with an
//! optional frozen background topic), a synthetic-corpus generator with
//! known ground truth, and the evaluation stack used to compare models:
//! document-completion held-out likelihood, co-occurrence topic coherence,
//! sparsity statistics, and class-label consistency.
//!
//! Start with the `examples/` directory: each example is a runnable
//! walkthrough of one capability (training, order selection, held-out
//! comparison, labeling). The `ptm` binary wraps the same entry points for
//! batch use.

pub mod bic;
pub mod cli;
pub mod corpus;
pub mod em;
pub mod error;
pub mod eval;
pub mod init;
pub mod lda;
pub mod math;
pub mod model;
pub mod order;
pub mod search;
pub mod synth;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use model::{PtmModel, Violation};
