//! Monolingual word-embedding spaces: word2vec text loading, token lookup,
//! averaged phrase vectors, row normalization and export.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};

/// How [`EmbeddingSpace::average`] treats out-of-vocabulary tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Unknown tokens are dropped; the mean runs over found tokens only.
    #[default]
    Skip,
    /// Unknown tokens contribute zero vectors and still count in the divisor.
    Zero,
}

/// A vocabulary plus one dense row vector per token.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    matrix: Matrix,
    dim: usize,
    is_normalized: bool,
    duplicates_skipped: usize,
}

impl EmbeddingSpace {
    /// Builds a space from parallel token/vector lists.
    pub fn from_parts(tokens: Vec<String>, matrix: Matrix) -> Result<Self> {
        if tokens.len() != matrix.rows() {
            return Err(Error::Size(format!(
                "{} tokens but {} matrix rows",
                tokens.len(),
                matrix.rows()
            )));
        }
        if matrix.cols() == 0 {
            return Err(Error::Argument("embedding dimension must be >= 1".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Argument(format!("duplicate token {t:?}")));
            }
        }
        let dim = matrix.cols();
        Ok(EmbeddingSpace {
            index,
            tokens,
            matrix,
            dim,
            is_normalized: false,
            duplicates_skipped: 0,
        })
    }

    /// Reads the word2vec text format: an optional `<v> <d>` header line,
    /// then one `<token> <f1> ... <fd>` line per word. `limit` caps the
    /// number of rows kept, which is how embedding-truncation ablations
    /// are run. Duplicate tokens after the first are skipped and counted.
    pub fn load_text<R: BufRead>(reader: R, limit: Option<usize>) -> Result<Self> {
        let mut tokens: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut dim: Option<usize> = None;
        let mut duplicates = 0usize;
        let mut saw_header = false;

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line_number = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let first = fields.next().expect("non-empty line has a first field");
            let rest: Vec<&str> = fields.collect();

            // A first line of exactly two positive integers is the header.
            if lineno == 0 && rest.len() == 1 {
                if let (Ok(_v), Ok(d)) = (first.parse::<usize>(), rest[0].parse::<usize>()) {
                    if d >= 1 {
                        dim = Some(d);
                        saw_header = true;
                        continue;
                    }
                }
            }

            if limit.is_some_and(|cap| tokens.len() >= cap) {
                break;
            }

            let mut values = Vec::with_capacity(rest.len());
            for field in &rest {
                let v: f64 = field.parse().map_err(|_| {
                    Error::format_at(line_number, format!("cannot parse value {field:?}"))
                })?;
                values.push(v);
            }
            match dim {
                None => {
                    if values.is_empty() {
                        return Err(Error::format_at(line_number, "token without vector values"));
                    }
                    dim = Some(values.len());
                }
                Some(d) => {
                    if values.len() != d {
                        return Err(Error::format_at(
                            line_number,
                            format!("expected {d} values, found {}", values.len()),
                        ));
                    }
                }
            }
            if index.contains_key(first) {
                duplicates += 1;
                continue;
            }
            index.insert(first.to_string(), tokens.len());
            tokens.push(first.to_string());
            rows.push(values);
        }

        if tokens.is_empty() {
            return Err(Error::Format(if saw_header {
                "embedding file contains a header but no vectors".into()
            } else {
                "empty embedding file".into()
            }));
        }
        if duplicates > 0 {
            log::warn!("skipped {duplicates} duplicate embedding tokens");
        }
        let dim = dim.expect("dim set once a row was read");
        let matrix = Matrix::from_rows(&rows)?;
        Ok(EmbeddingSpace {
            index,
            tokens,
            matrix,
            dim,
            is_normalized: false,
            duplicates_skipped: duplicates,
        })
    }

    /// Writes the word2vec text format with a `<v> <d>` header and
    /// six-decimal values.
    pub fn write_text<W: Write>(&self, writer: &mut W) -> Result<()> {
        write_word2vec(
            writer,
            self.dim,
            self.tokens
                .iter()
                .map(|t| (t.as_str(), self.matrix.row(self.index[t]))),
            self.tokens.len(),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.is_normalized
    }

    pub fn duplicates_skipped(&self) -> usize {
        self.duplicates_skipped
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.matrix.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    /// Mean vector of the given tokens. Total over all inputs: unknown
    /// tokens follow `policy` and an empty effective set yields the zero
    /// vector.
    pub fn average<S: AsRef<str>>(&self, tokens: &[S], policy: OovPolicy) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        let mut found = 0usize;
        for t in tokens {
            if let Some(row) = self.lookup(t.as_ref()) {
                for (s, v) in sum.iter_mut().zip(row) {
                    *s += v;
                }
                found += 1;
            }
        }
        let divisor = match policy {
            OovPolicy::Skip => found,
            OovPolicy::Zero => tokens.len(),
        };
        if divisor > 0 {
            for s in &mut sum {
                *s /= divisor as f64;
            }
        }
        sum
    }

    /// True when none of the tokens is in the vocabulary.
    pub fn all_oov<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        !tokens.iter().any(|t| self.contains(t.as_ref()))
    }

    /// Returns a copy with every nonzero row scaled to unit Euclidean norm.
    /// Zero rows are left untouched.
    pub fn normalize_rows(&self) -> EmbeddingSpace {
        let mut out = self.clone();
        for r in 0..out.matrix.rows() {
            let n = norm(out.matrix.row(r));
            if n > 0.0 {
                for v in out.matrix.row_mut(r) {
                    *v /= n;
                }
            }
        }
        out.is_normalized = true;
        out
    }
}

/// Writes word2vec text: `<count> <dim>` header, then one token and `%.6f`
/// values per line.
pub fn write_word2vec<'a, W, I>(writer: &mut W, dim: usize, rows: I, count: usize) -> Result<()>
where
    W: Write,
    I: Iterator<Item = (&'a str, &'a [f64])>,
{
    writeln!(writer, "{count} {dim}")?;
    let mut written = 0usize;
    for (token, values) in rows {
        if values.len() != dim {
            return Err(Error::Size(format!(
                "row for {token:?} has {} values, expected {dim}",
                values.len()
            )));
        }
        write!(writer, "{token}")?;
        for v in values {
            write!(writer, " {v:.6}")?;
        }
        writeln!(writer)?;
        written += 1;
    }
    if written != count {
        return Err(Error::Size(format!(
            "header promised {count} rows but {written} were written"
        )));
    }
    Ok(())
}
