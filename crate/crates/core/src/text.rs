//! Tokenization, corpus statistics and query-document content features.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_jsonl;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    /// Emit overlapping character bigrams for runs of CJK characters.
    pub cjk_bigrams: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer { cjk_bigrams: true }
    }
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF      // kana
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FFFF)
}

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut word = String::new();
        let mut run: Vec<char> = Vec::new();
        for c in text.chars() {
            if is_cjk(c) {
                flush_word(&mut word, &mut out);
                run.push(c);
            } else if c.is_alphanumeric() {
                self.flush_run(&mut run, &mut out);
                word.extend(c.to_lowercase());
            } else {
                flush_word(&mut word, &mut out);
                self.flush_run(&mut run, &mut out);
            }
        }
        flush_word(&mut word, &mut out);
        self.flush_run(&mut run, &mut out);
        out
    }

    fn flush_run(&self, run: &mut Vec<char>, out: &mut Vec<String>) {
        if run.is_empty() {
            return;
        }
        if self.cjk_bigrams && run.len() > 1 {
            out.extend(run.windows(2).map(|w| w.iter().collect::<String>()));
        } else {
            out.push(run.iter().collect());
        }
        run.clear();
    }
}

fn flush_word(word: &mut String, out: &mut Vec<String>) {
    if !word.is_empty() {
        out.push(std::mem::take(word));
    }
}

/// Tokenizes with the default configuration.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocStats {
    pub tf: BTreeMap<String, u32>,
    pub length: u32,
}

/// Term statistics over a document collection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    documents: BTreeMap<String, DocStats>,
    df: BTreeMap<String, u32>,
    total_length: u64,
}

pub const CORPUS_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CorpusFile {
    format_version: u32,
    documents: BTreeMap<String, DocStats>,
}

#[derive(Deserialize)]
struct DocRecord {
    doc_id: String,
    text: String,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_document(&mut self, doc_id: &str, terms: &[String]) -> Result<()> {
        if self.documents.contains_key(doc_id) {
            return Err(Error::validation(format!("duplicate doc_id {doc_id}")));
        }
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in terms {
            *tf.entry(t.clone()).or_default() += 1;
        }
        for t in tf.keys() {
            *self.df.entry(t.clone()).or_default() += 1;
        }
        self.total_length += terms.len() as u64;
        self.documents.insert(
            doc_id.to_string(),
            DocStats {
                tf,
                length: terms.len() as u32,
            },
        );
        Ok(())
    }

    pub fn add_text(&mut self, doc_id: &str, text: &str, tokenizer: &Tokenizer) -> Result<()> {
        self.add_document(doc_id, &tokenizer.tokenize(text))
    }

    /// Reads `{"doc_id": .., "text": ..}` lines.
    pub fn from_jsonl<R: BufRead>(reader: R, tokenizer: &Tokenizer) -> Result<Self> {
        let records: Vec<DocRecord> = read_jsonl(reader)?;
        let mut corpus = Corpus::new();
        for r in records {
            corpus.add_text(&r.doc_id, &r.text, tokenizer)?;
        }
        Ok(corpus)
    }

    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn df(&self, term: &str) -> u32 {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn tf(&self, doc_id: &str, term: &str) -> u32 {
        self.documents
            .get(doc_id)
            .and_then(|d| d.tf.get(term).copied())
            .unwrap_or(0)
    }

    pub fn doc(&self, doc_id: &str) -> Option<&DocStats> {
        self.documents.get(doc_id)
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.documents.contains_key(doc_id)
    }

    pub fn avg_doc_length(&self) -> f64 {
        if self.documents.is_empty() {
            0.0
        } else {
            self.total_length as f64 / self.documents.len() as f64
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CorpusFile {
            format_version: CORPUS_FORMAT_VERSION,
            documents: self.documents.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CorpusFile = serde_json::from_str(text)?;
        if file.format_version != CORPUS_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                artifact: "corpus",
                expected: CORPUS_FORMAT_VERSION,
                found: file.format_version,
            });
        }
        let mut corpus = Corpus::new();
        for (id, stats) in file.documents {
            for t in stats.tf.keys() {
                *corpus.df.entry(t.clone()).or_default() += 1;
            }
            corpus.total_length += u64::from(stats.length);
            corpus.documents.insert(id, stats);
        }
        Ok(corpus)
    }

    /// TF-IDF weight `ln(N / df)`, with unseen terms weighted `ln(N + 1)`.
    pub fn idf<F: Real>(&self, term: &str) -> F {
        let n = F::from_usize_lossy(self.n_docs());
        match self.df(term) {
            0 => (n + F::one()).ln(),
            df => (n / F::c(f64::from(df))).ln(),
        }
    }

    /// Robertson-Sparck-Jones IDF with +1 smoothing, as used by BM25.
    pub fn bm25_idf<F: Real>(&self, term: &str) -> F {
        let n = F::from_usize_lossy(self.n_docs());
        let df = F::c(f64::from(self.df(term)));
        let half = F::c(0.5);
        (F::one() + (n - df + half) / (df + half)).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0) || !(0.0..=1.0).contains(&self.b) {
            return Err(Error::validation(format!(
                "invalid BM25 parameters k1={} b={}",
                self.k1, self.b
            )));
        }
        Ok(())
    }
}

/// The five content features, in ranking-feature order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentFeatures<F> {
    pub avg_tf: F,
    pub avg_idf: F,
    pub avg_tfidf: F,
    pub bm25: F,
    pub cosine: F,
}

impl<F: Copy> ContentFeatures<F> {
    pub const NAMES: [&'static str; 5] = ["avg_tf", "avg_idf", "avg_tfidf", "bm25", "cosine"];

    pub fn to_array(&self) -> [F; 5] {
        [self.avg_tf, self.avg_idf, self.avg_tfidf, self.bm25, self.cosine]
    }
}

/// Computes the content features of `doc_id` for a tokenized query.
///
/// Averages run over the query token list (repeated tokens count again and
/// tokens absent from the document contribute zero); BM25 sums over the
/// same list. The cosine is between the query's count x idf vector and the
/// document's tf x idf vector.
pub fn content_features<F: Real>(
    query: &[String],
    doc_id: &str,
    corpus: &Corpus,
    params: &Bm25Params,
) -> Result<ContentFeatures<F>> {
    if query.is_empty() {
        return Err(Error::validation("content features of an empty query"));
    }
    params.validate()?;
    let doc = corpus
        .doc(doc_id)
        .ok_or_else(|| Error::validation(format!("document {doc_id} not in corpus")))?;
    let k1 = F::c(params.k1);
    let b = F::c(params.b);
    let len_ratio = F::c(f64::from(doc.length)) / F::c(corpus.avg_doc_length());
    let qn = F::from_usize_lossy(query.len());

    let (mut sum_tf, mut sum_idf, mut sum_tfidf, mut bm25) = (F::zero(), F::zero(), F::zero(), F::zero());
    for term in query {
        let tf = F::c(f64::from(doc.tf.get(term).copied().unwrap_or(0)));
        let idf: F = corpus.idf(term);
        sum_tf = sum_tf + tf;
        sum_idf = sum_idf + idf;
        sum_tfidf = sum_tfidf + tf * idf;
        if tf > F::zero() {
            let denom = tf + k1 * (F::one() - b + b * len_ratio);
            bm25 = bm25 + corpus.bm25_idf::<F>(term) * tf * (k1 + F::one()) / denom;
        }
    }

    let mut q_counts: BTreeMap<&str, u32> = BTreeMap::new();
    for t in query {
        *q_counts.entry(t.as_str()).or_default() += 1;
    }
    let mut dot = F::zero();
    let mut q_norm = F::zero();
    for (t, &c) in &q_counts {
        let w = F::c(f64::from(c)) * corpus.idf::<F>(t);
        q_norm = q_norm + w * w;
        if let Some(&tf) = doc.tf.get(*t) {
            dot = dot + w * F::c(f64::from(tf)) * corpus.idf::<F>(t);
        }
    }
    let d_norm: F = doc
        .tf
        .iter()
        .map(|(t, &tf)| {
            let w = F::c(f64::from(tf)) * corpus.idf::<F>(t);
            w * w
        })
        .sum();
    let cosine = if q_norm > F::zero() && d_norm > F::zero() {
        (dot / (q_norm.sqrt() * d_norm.sqrt())).min(F::one()).max(F::zero())
    } else {
        F::zero()
    };

    Ok(ContentFeatures {
        avg_tf: sum_tf / qn,
        avg_idf: sum_idf / qn,
        avg_tfidf: sum_tfidf / qn,
        bm25,
        cosine,
    })
}
