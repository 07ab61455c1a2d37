//! Model structure (switch matrices), parameters (topic proportions, word
//! probabilities, shared model), per-word and per-document likelihood, and
//! the model file format.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};

/// Probabilities are floored at this value before taking logs; a true
/// structural zero is a validation failure, not a likelihood value.
pub const PROB_FLOOR: f64 = 1e-300;

/// Tolerance on pmf normalization checks.
pub const PMF_TOL: f64 = 1e-9;

/// Sparse vector with ascending indices. Entries with value 0.0 are kept:
/// the support itself is meaningful (it mirrors a switch row).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl SparseRow {
    pub fn new() -> Self {
        SparseRow { idx: Vec::new(), val: Vec::new() }
    }

    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let idx = pairs.iter().map(|&(i, _)| i).collect();
        let val = pairs.iter().map(|&(_, v)| v).collect();
        SparseRow { idx, val }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.idx.binary_search(&index).ok().map(|slot| self.val[slot])
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx
    }

    pub fn values(&self) -> &[f64] {
        &self.val
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx.iter().copied().zip(self.val.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.val.iter().sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.val {
            *v *= factor;
        }
    }

    pub fn set_value(&mut self, index: usize, value: f64) {
        if let Ok(slot) = self.idx.binary_search(&index) {
            self.val[slot] = value;
        } else {
            panic!("index {index} not in sparse row support");
        }
    }
}

impl Default for SparseRow {
    fn default() -> Self {
        Self::new()
    }
}

/// Binary switch matrices u (topic-specific words) and v (topic presence in
/// documents) together with the topic count, plus cached marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelStructure {
    u: Vec<Vec<bool>>,
    v: Vec<Vec<bool>>,
    n_j: Vec<usize>,
    m_d: Vec<usize>,
    docs_per_topic: Vec<usize>,
}

impl ModelStructure {
    /// `u` is M x N (topic x word), `v` is M x D (topic x document).
    pub fn new(u: Vec<Vec<bool>>, v: Vec<Vec<bool>>) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::data("u and v must have one row per topic"));
        }
        let n = u[0].len();
        let d = v[0].len();
        if u.iter().any(|row| row.len() != n) || v.iter().any(|row| row.len() != d) {
            return Err(Error::data("ragged switch matrix"));
        }
        let n_j = u.iter().map(|row| row.iter().filter(|&&b| b).count()).collect();
        let docs_per_topic = v.iter().map(|row| row.iter().filter(|&&b| b).count()).collect();
        let mut m_d = vec![0usize; d];
        for row in &v {
            for (dd, &b) in row.iter().enumerate() {
                if b {
                    m_d[dd] += 1;
                }
            }
        }
        Ok(ModelStructure { u, v, n_j, m_d, docs_per_topic })
    }

    pub fn num_topics(&self) -> usize {
        self.u.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.u[0].len()
    }

    pub fn num_docs(&self) -> usize {
        self.v[0].len()
    }

    pub fn word_specific(&self, j: usize, n: usize) -> bool {
        self.u[j][n]
    }

    pub fn topic_in_doc(&self, j: usize, d: usize) -> bool {
        self.v[j][d]
    }

    /// Number of topic-specific words in topic j.
    pub fn num_specific(&self, j: usize) -> usize {
        self.n_j[j]
    }

    /// Number of topics active in document d.
    pub fn num_active(&self, d: usize) -> usize {
        self.m_d[d]
    }

    pub fn docs_using_topic(&self, j: usize) -> usize {
        self.docs_per_topic[j]
    }

    /// Total number of "on" u switches across all topics.
    pub fn total_specific(&self) -> usize {
        self.n_j.iter().sum()
    }

    /// Average number of topic-specific words per topic.
    pub fn mean_specific(&self) -> f64 {
        self.total_specific() as f64 / self.num_topics() as f64
    }

    pub fn specific_words(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.u[j].iter().enumerate().filter(|&(_, &b)| b).map(|(n, _)| n)
    }

    pub fn active_topics(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        self.v.iter().enumerate().filter(move |(_, row)| row[d]).map(|(j, _)| j)
    }

    pub fn set_u(&mut self, j: usize, n: usize, on: bool) {
        if self.u[j][n] != on {
            self.u[j][n] = on;
            if on {
                self.n_j[j] += 1;
            } else {
                self.n_j[j] -= 1;
            }
        }
    }

    pub fn set_v(&mut self, j: usize, d: usize, on: bool) {
        if self.v[j][d] != on {
            self.v[j][d] = on;
            if on {
                self.m_d[d] += 1;
                self.docs_per_topic[j] += 1;
            } else {
                self.m_d[d] -= 1;
                self.docs_per_topic[j] -= 1;
            }
        }
    }

    /// Sum of lengths of the documents in which topic j is present.
    pub fn topic_sample_size(&self, j: usize, corpus: &Corpus) -> u64 {
        self.v[j]
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(|(d, _)| corpus.document(d).length() as u64)
            .sum()
    }
}

/// Topic proportions, topic-specific word probabilities, and the shared
/// word pmf. `alpha[d]` is supported on document d's active topics and
/// `beta[j]` on topic j's specific words; `beta0` is dense.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub alpha: Vec<SparseRow>,
    pub beta: Vec<SparseRow>,
    pub beta0: Vec<f64>,
}

/// A parsimonious topic model: structure plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PtmModel {
    structure: ModelStructure,
    params: ModelParams,
}

/// One violated model invariant; produced by [`PtmModel::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TopicWithoutSpecificWords { topic: usize },
    DocumentWithoutTopics { doc: usize },
    TopicWithoutDocuments { topic: usize },
    AlphaSupportMismatch { doc: usize },
    AlphaNotNormalized { doc: usize, sum: f64 },
    NegativeAlpha { doc: usize, topic: usize },
    BetaSupportMismatch { topic: usize },
    TopicPmfNotNormalized { topic: usize, sum: f64 },
    NegativeBeta { topic: usize, word: usize },
    SharedPmfNotNormalized { sum: f64 },
    NegativeShared { word: usize },
    DimensionMismatch { detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TopicWithoutSpecificWords { topic } => {
                write!(f, "topic {topic} has no specific words")
            }
            Violation::DocumentWithoutTopics { doc } => write!(f, "document {doc} has no topics"),
            Violation::TopicWithoutDocuments { topic } => {
                write!(f, "topic {topic} is used by no document")
            }
            Violation::AlphaSupportMismatch { doc } => {
                write!(f, "alpha support of document {doc} differs from its active topics")
            }
            Violation::AlphaNotNormalized { doc, sum } => {
                write!(f, "topic proportions of document {doc} sum to {sum}")
            }
            Violation::NegativeAlpha { doc, topic } => {
                write!(f, "negative proportion at document {doc}, topic {topic}")
            }
            Violation::BetaSupportMismatch { topic } => {
                write!(f, "beta support of topic {topic} differs from its specific words")
            }
            Violation::TopicPmfNotNormalized { topic, sum } => {
                write!(f, "word pmf of topic {topic} sums to {sum}")
            }
            Violation::NegativeBeta { topic, word } => {
                write!(f, "negative probability at topic {topic}, word {word}")
            }
            Violation::SharedPmfNotNormalized { sum } => write!(f, "shared pmf sums to {sum}"),
            Violation::NegativeShared { word } => {
                write!(f, "negative shared probability at word {word}")
            }
            Violation::DimensionMismatch { detail } => write!(f, "dimension mismatch: {detail}"),
        }
    }
}

impl PtmModel {
    pub fn new(structure: ModelStructure, params: ModelParams) -> Result<Self> {
        if params.alpha.len() != structure.num_docs()
            || params.beta.len() != structure.num_topics()
            || params.beta0.len() != structure.vocab_size()
        {
            return Err(Error::data("parameter dimensions disagree with structure"));
        }
        Ok(PtmModel { structure, params })
    }

    pub fn structure(&self) -> &ModelStructure {
        &self.structure
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn num_topics(&self) -> usize {
        self.structure.num_topics()
    }

    pub fn vocab_size(&self) -> usize {
        self.structure.vocab_size()
    }

    pub fn num_docs(&self) -> usize {
        self.structure.num_docs()
    }

    /// Mutable access for training loops that own the model exclusively.
    pub(crate) fn parts_mut(&mut self) -> (&mut ModelStructure, &mut ModelParams) {
        (&mut self.structure, &mut self.params)
    }

    /// Probability of word n under topic j: the topic-specific value where
    /// the word is specific, the shared value otherwise.
    pub fn word_prob(&self, j: usize, n: usize) -> f64 {
        if self.structure.u[j][n] {
            self.params.beta[j].get(n).unwrap_or(0.0)
        } else {
            self.params.beta0[n]
        }
    }

    /// Mixture probability of word n under an explicit proportion row.
    pub fn mixture_prob(&self, alpha: &SparseRow, n: usize) -> f64 {
        alpha.iter().map(|(j, a)| a * self.word_prob(j, n)).sum()
    }

    /// Log-likelihood of a document under the model's proportions for
    /// document index d. Per-word mixture probabilities are floored at
    /// [`PROB_FLOOR`] before the log.
    pub fn doc_log_likelihood(&self, d: usize, doc: &Document) -> f64 {
        let alpha = &self.params.alpha[d];
        doc.counts()
            .iter()
            .map(|&(n, c)| {
                let p = self.mixture_prob(alpha, n).max(PROB_FLOOR);
                c as f64 * p.ln()
            })
            .sum()
    }

    /// Corpus log-likelihood; summation order is fixed (document order).
    pub fn corpus_log_likelihood(&self, corpus: &Corpus) -> f64 {
        use rayon::prelude::*;
        let per_doc: Vec<f64> = corpus
            .documents()
            .par_iter()
            .enumerate()
            .map(|(d, doc)| self.doc_log_likelihood(d, doc))
            .collect();
        per_doc.iter().sum()
    }

    /// Check every model invariant; returns all violations (empty = valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let s = &self.structure;
        let p = &self.params;
        let (m, n, d) = (s.num_topics(), s.vocab_size(), s.num_docs());

        for j in 0..m {
            if s.n_j[j] == 0 {
                out.push(Violation::TopicWithoutSpecificWords { topic: j });
            }
            if s.docs_per_topic[j] == 0 {
                out.push(Violation::TopicWithoutDocuments { topic: j });
            }
        }
        for dd in 0..d {
            if s.m_d[dd] == 0 {
                out.push(Violation::DocumentWithoutTopics { doc: dd });
            }
        }

        // Shared pmf.
        let mut shared_sum = 0.0;
        for (w, &b) in p.beta0.iter().enumerate() {
            if b < 0.0 {
                out.push(Violation::NegativeShared { word: w });
            }
            shared_sum += b;
        }
        if (shared_sum - 1.0).abs() > PMF_TOL {
            out.push(Violation::SharedPmfNotNormalized { sum: shared_sum });
        }

        // Per-topic mixed pmf over the whole vocabulary.
        for j in 0..m {
            let row = &p.beta[j];
            let support_matches = row.len() == s.n_j[j] && row.iter().all(|(w, _)| w < n && s.u[j][w]);
            if !support_matches {
                out.push(Violation::BetaSupportMismatch { topic: j });
                continue;
            }
            let mut specific_sum = 0.0;
            let mut shared_part = shared_sum;
            for (w, val) in row.iter() {
                if val < 0.0 {
                    out.push(Violation::NegativeBeta { topic: j, word: w });
                }
                specific_sum += val;
                shared_part -= p.beta0[w];
            }
            let total = specific_sum + shared_part;
            if (total - 1.0).abs() > PMF_TOL {
                out.push(Violation::TopicPmfNotNormalized { topic: j, sum: total });
            }
        }

        // Per-document proportions.
        for dd in 0..d {
            let row = &p.alpha[dd];
            let support_matches =
                row.len() == s.m_d[dd] && row.iter().all(|(j, _)| j < m && s.v[j][dd]);
            if !support_matches {
                out.push(Violation::AlphaSupportMismatch { doc: dd });
                continue;
            }
            let mut sum = 0.0;
            for (j, val) in row.iter() {
                if val < 0.0 {
                    out.push(Violation::NegativeAlpha { doc: dd, topic: j });
                }
                sum += val;
            }
            if (sum - 1.0).abs() > PMF_TOL {
                out.push(Violation::AlphaNotNormalized { doc: dd, sum });
            }
        }

        out
    }

    /// Validate dimensional agreement with a corpus.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        if corpus.num_documents() != self.num_docs() || corpus.vocab_size() != self.vocab_size() {
            return Err(Error::data(format!(
                "model is {} topics x {} words x {} docs but corpus has {} words x {} docs",
                self.num_topics(),
                self.vocab_size(),
                self.num_docs(),
                corpus.vocab_size(),
                corpus.num_documents()
            )));
        }
        Ok(())
    }

    /// Write the versioned text model file. Floats are printed with the
    /// shortest representation that round-trips, so a load reproduces every
    /// parameter bit-exactly.
    pub fn save(&self, path: &Path) -> Result<()> {
        use std::fmt::Write as _;
        let s = &self.structure;
        let p = &self.params;
        let mut out = String::new();
        writeln!(out, "ptm 1").unwrap();
        writeln!(out, "{} {} {}", s.num_topics(), s.vocab_size(), s.num_docs()).unwrap();
        let beta0: Vec<String> = p.beta0.iter().map(|b| format!("{b}")).collect();
        writeln!(out, "{}", beta0.join(" ")).unwrap();
        for j in 0..s.num_topics() {
            writeln!(out, "{}", p.beta[j].len()).unwrap();
            for (n, val) in p.beta[j].iter() {
                writeln!(out, "{n} {val}").unwrap();
            }
        }
        for d in 0..s.num_docs() {
            writeln!(out, "{}", p.alpha[d].len()).unwrap();
            for (j, val) in p.alpha[d].iter() {
                writeln!(out, "{j} {val}").unwrap();
            }
        }
        let mut f = std::fs::File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
        f.write_all(out.as_bytes())
            .map_err(|source| Error::Io { path: path.into(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(line))) => Ok((i + 1, line)),
                Some((_, Err(source))) => Err(Error::Io { path: path.into(), source }),
                None => Err(Error::data(format!("model file ended before {what}"))),
            }
        };
        let perr = |line: usize, message: String| Error::Parse { path: path.into(), line, message };

        let (ln, header) = next_line("header")?;
        if header.trim() != "ptm 1" {
            return Err(perr(ln, format!("unsupported model header {header:?}")));
        }
        let (ln, dims) = next_line("dimensions")?;
        let dims: Vec<usize> = dims
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad dimension {t:?}"))))
            .collect::<Result<_>>()?;
        let [m, n, d] = dims[..] else {
            return Err(perr(ln, "expected M N D".into()));
        };

        let (ln, beta0_line) = next_line("shared pmf")?;
        let beta0: Vec<f64> = beta0_line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad float {t:?}"))))
            .collect::<Result<_>>()?;
        if beta0.len() != n {
            return Err(perr(ln, format!("shared pmf has {} entries, expected {n}", beta0.len())));
        }

        let mut read_block = |len_what: &str, max_index: usize| -> Result<SparseRow> {
            let (ln, k) = next_line(len_what)?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| perr(ln, format!("bad block length {k:?}")))?;
            let mut pairs = Vec::with_capacity(k);
            for _ in 0..k {
                let (ln, pair) = next_line("index-value pair")?;
                let mut it = pair.split_whitespace();
                let (Some(i), Some(v)) = (it.next(), it.next()) else {
                    return Err(perr(ln, format!("malformed pair {pair:?}")));
                };
                let i: usize = i.parse().map_err(|_| perr(ln, format!("bad index {i:?}")))?;
                let v: f64 = v.parse().map_err(|_| perr(ln, format!("bad float {v:?}")))?;
                if i >= max_index {
                    return Err(perr(ln, format!("index {i} out of range {max_index}")));
                }
                pairs.push((i, v));
            }
            Ok(SparseRow::from_pairs(pairs))
        };

        let mut beta = Vec::with_capacity(m);
        for _ in 0..m {
            beta.push(read_block("topic block", n)?);
        }
        let mut alpha = Vec::with_capacity(d);
        for _ in 0..d {
            alpha.push(read_block("document block", m)?);
        }

        let mut u = vec![vec![false; n]; m];
        for (j, row) in beta.iter().enumerate() {
            for (w, _) in row.iter() {
                u[j][w] = true;
            }
        }
        let mut v = vec![vec![false; d]; m];
        for (dd, row) in alpha.iter().enumerate() {
            for (j, _) in row.iter() {
                v[j][dd] = true;
            }
        }
        let structure = ModelStructure::new(u, v)?;
        PtmModel::new(structure, ModelParams { alpha, beta, beta0 })
    }
}
