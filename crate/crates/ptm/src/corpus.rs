//! Bag-of-words corpora: loading, validation, document-completion splits,
//! and summary statistics.
//!
//! On-disk formats (all plain text, one record per line, single-space
//! separators):
//!
//! * corpus file — one document per line: `K idx:count idx:count ...` where
//!   `K` is the number of `idx:count` pairs, indices are 0-based into the
//!   vocabulary, and counts are positive integers;
//! * vocabulary file — one token per line; line number is the word index;
//! * label file — one line per document with space-separated 0-based class
//!   indices (an empty line means the document is unlabeled).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ordered set of unique tokens; word indices are 0..N-1 in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if index.insert(tok.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate vocabulary token {tok:?}")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    /// Synthetic vocabulary `w0`, `w1`, ... of the given size.
    pub fn synthetic(size: usize) -> Self {
        let tokens: Vec<String> = (0..size).map(|i| format!("w{i}")).collect();
        Vocabulary::new(tokens).expect("generated tokens are unique")
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, n: usize) -> &str {
        &self.tokens[n]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

/// One document as sparse word counts plus optional class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// (word index, count) pairs, sorted by word index, counts > 0.
    counts: Vec<(usize, usize)>,
    length: usize,
    labels: Vec<usize>,
}

impl Document {
    pub fn new(mut counts: Vec<(usize, usize)>, labels: Vec<usize>) -> Result<Self> {
        counts.sort_unstable_by_key(|&(n, _)| n);
        if counts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::data("duplicate word index in document"));
        }
        if counts.iter().any(|&(_, c)| c == 0) {
            return Err(Error::data("zero count in document"));
        }
        let length = counts.iter().map(|&(_, c)| c).sum();
        if length == 0 {
            return Err(Error::data("empty document"));
        }
        Ok(Document { counts, length, labels })
    }

    /// Sparse (word, count) pairs in ascending word order.
    pub fn counts(&self) -> &[(usize, usize)] {
        &self.counts
    }

    /// Total token count L_d.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn count_of(&self, word: usize) -> usize {
        self.counts
            .binary_search_by_key(&word, |&(n, _)| n)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }
}

/// A validated document collection over a shared vocabulary.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Arc<Vocabulary>,
    num_classes: usize,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, vocabulary: Arc<Vocabulary>, num_classes: usize) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::data("corpus has no documents"));
        }
        let n = vocabulary.size();
        for (d, doc) in documents.iter().enumerate() {
            if let Some(&(w, _)) = doc.counts.iter().find(|&&(w, _)| w >= n) {
                return Err(Error::data(format!(
                    "document {d} references word index {w} >= vocabulary size {n}"
                )));
            }
            if let Some(&l) = doc.labels.iter().find(|&&l| l >= num_classes) {
                return Err(Error::data(format!(
                    "document {d} has label {l} >= class count {num_classes}"
                )));
            }
        }
        Ok(Corpus { documents, vocabulary, num_classes })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, d: usize) -> &Document {
        &self.documents[d]
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.size()
    }

    /// Number of distinct class labels; 0 for an unlabeled corpus.
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.length).sum()
    }
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufReader::new(file).lines())
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Load a vocabulary file (one token per line).
pub fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    let mut tokens = Vec::new();
    for (i, line) in open_lines(path)?.enumerate() {
        let line = line.map_err(|source| Error::Io { path: path.into(), source })?;
        let tok = line.trim();
        if tok.is_empty() {
            return Err(parse_err(path, i + 1, "empty vocabulary token"));
        }
        tokens.push(tok.to_string());
    }
    Vocabulary::new(tokens)
}

/// Load and validate a corpus from a corpus file, vocabulary file, and
/// optional label file. Word indices are assigned by vocabulary file order.
pub fn load_corpus(corpus_path: &Path, vocab_path: &Path, label_path: Option<&Path>) -> Result<Corpus> {
    let vocabulary = Arc::new(load_vocabulary(vocab_path)?);
    let mut documents = Vec::new();
    for (i, line) in open_lines(corpus_path)?.enumerate() {
        let line = line.map_err(|source| Error::Io { path: corpus_path.into(), source })?;
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let k: usize = fields
            .next()
            .ok_or_else(|| parse_err(corpus_path, lineno, "empty document line"))?
            .parse()
            .map_err(|_| parse_err(corpus_path, lineno, "malformed pair count"))?;
        if k == 0 {
            return Err(parse_err(
                corpus_path,
                lineno,
                format!("document {} is empty", documents.len()),
            ));
        }
        let mut counts = Vec::with_capacity(k);
        for field in fields.by_ref() {
            let (idx, cnt) = field
                .split_once(':')
                .ok_or_else(|| parse_err(corpus_path, lineno, format!("malformed pair {field:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(corpus_path, lineno, format!("malformed word index {idx:?}")))?;
            let cnt: usize = cnt
                .parse()
                .map_err(|_| parse_err(corpus_path, lineno, format!("malformed count {cnt:?}")))?;
            if cnt == 0 {
                return Err(parse_err(corpus_path, lineno, format!("zero count for word {idx}")));
            }
            counts.push((idx, cnt));
        }
        if counts.len() != k {
            return Err(parse_err(
                corpus_path,
                lineno,
                format!("declared {k} pairs, found {}", counts.len()),
            ));
        }
        counts.sort_unstable_by_key(|&(n, _)| n);
        if let Some(w) = counts.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(parse_err(corpus_path, lineno, format!("duplicate word index {}", w[0].0)));
        }
        let doc = Document::new(counts, Vec::new()).map_err(|e| parse_err(corpus_path, lineno, e.to_string()))?;
        documents.push(doc);
    }

    let mut num_classes = 0;
    if let Some(label_path) = label_path {
        let mut all_labels = Vec::new();
        for (i, line) in open_lines(label_path)?.enumerate() {
            let line = line.map_err(|source| Error::Io { path: label_path.into(), source })?;
            let mut labels = Vec::new();
            for field in line.split_whitespace() {
                let l: usize = field
                    .parse()
                    .map_err(|_| parse_err(label_path, i + 1, format!("malformed label {field:?}")))?;
                labels.push(l);
            }
            labels.sort_unstable();
            labels.dedup();
            all_labels.push(labels);
        }
        if all_labels.len() != documents.len() {
            return Err(Error::data(format!(
                "label file has {} lines for {} documents",
                all_labels.len(),
                documents.len()
            )));
        }
        num_classes = all_labels
            .iter()
            .flat_map(|ls| ls.iter())
            .max()
            .map_or(0, |&m| m + 1);
        for (doc, labels) in documents.iter_mut().zip(all_labels) {
            doc.labels = labels;
        }
    }

    Corpus::new(documents, vocabulary, num_classes)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
    f.write_all(content.as_bytes())
        .map_err(|source| Error::Io { path: path.into(), source })
}

/// Write the corpus file; token counts round-trip exactly through
/// `load_corpus`.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut out = String::new();
    for doc in &corpus.documents {
        write!(out, "{}", doc.counts.len()).unwrap();
        for &(n, c) in &doc.counts {
            write!(out, " {n}:{c}").unwrap();
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_vocabulary(vocab: &Vocabulary, path: &Path) -> Result<()> {
    let mut out = String::new();
    for tok in &vocab.tokens {
        out.push_str(tok);
        out.push('\n');
    }
    write_file(path, &out)
}

/// Write one label line per document (empty line for unlabeled documents).
pub fn write_labels(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut out = String::new();
    for doc in &corpus.documents {
        let labels: Vec<String> = doc.labels.iter().map(|l| l.to_string()).collect();
        out.push_str(&labels.join(" "));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Partition every document's distinct words into an observed and a held-out
/// side with disjoint word sets; each word type carries its whole count to
/// exactly one side.
///
/// The observed side receives `round(fraction * distinct)` word types
/// (clamped so both sides stay non-empty), chosen by a seeded shuffle.
pub fn split_document_completion(corpus: &Corpus, fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::data(format!("split fraction must be in (0,1), got {fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed = Vec::with_capacity(corpus.num_documents());
    let mut heldout = Vec::with_capacity(corpus.num_documents());
    for (d, doc) in corpus.documents.iter().enumerate() {
        let distinct = doc.distinct_words();
        if distinct < 2 {
            return Err(Error::data(format!(
                "document {d} has {distinct} distinct word(s); document-completion split needs at least 2"
            )));
        }
        let mut order: Vec<usize> = (0..distinct).collect();
        order.shuffle(&mut rng);
        let k = ((fraction * distinct as f64).round() as usize).clamp(1, distinct - 1);
        let mut obs_counts = Vec::with_capacity(k);
        let mut held_counts = Vec::with_capacity(distinct - k);
        for (rank, &slot) in order.iter().enumerate() {
            if rank < k {
                obs_counts.push(doc.counts[slot]);
            } else {
                held_counts.push(doc.counts[slot]);
            }
        }
        observed.push(Document::new(obs_counts, doc.labels.clone())?);
        heldout.push(Document::new(held_counts, doc.labels.clone())?);
    }
    Ok((
        Corpus::new(observed, corpus.vocabulary.clone(), corpus.num_classes)?,
        Corpus::new(heldout, corpus.vocabulary.clone(), corpus.num_classes)?,
    ))
}

/// Corpus summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub num_documents: usize,
    pub vocab_size: usize,
    pub total_tokens: usize,
    pub mean_length: f64,
    pub std_length: f64,
    /// Documents per class label (empty for unlabeled corpora).
    pub label_histogram: Vec<usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let d = corpus.num_documents();
    let total: usize = corpus.total_tokens();
    let mean = total as f64 / d as f64;
    let var = corpus
        .documents
        .iter()
        .map(|doc| {
            let diff = doc.length as f64 - mean;
            diff * diff
        })
        .sum::<f64>()
        / d as f64;
    let mut label_histogram = vec![0usize; corpus.num_classes];
    for doc in &corpus.documents {
        for &l in &doc.labels {
            label_histogram[l] += 1;
        }
    }
    CorpusStats {
        num_documents: d,
        vocab_size: corpus.vocab_size(),
        total_tokens: total,
        mean_length: mean,
        std_length: var.sqrt(),
        label_histogram,
    }
}
