//! Labeled sentiment corpora: JSONL ingestion, label-scheme mapping, and
//! target-span handling.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Canonical label names the mapping operations understand.
pub const STRONG_NEGATIVE: &str = "strong_negative";
pub const NEGATIVE: &str = "negative";
pub const NEUTRAL: &str = "neutral";
pub const POSITIVE: &str = "positive";
pub const STRONG_POSITIVE: &str = "strong_positive";

/// An ordered set of label names; the label of an instance is an index
/// into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    names: Vec<String>,
}

impl LabelSchema {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::Argument("schema needs at least two labels".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::Argument(format!("duplicate label name {n:?}")));
            }
        }
        Ok(LabelSchema { names })
    }

    /// `negative`, `positive`.
    pub fn binary() -> Self {
        LabelSchema::new(vec![NEGATIVE, POSITIVE]).expect("static names are valid")
    }

    /// `negative`, `neutral`, `positive`.
    pub fn three_class() -> Self {
        LabelSchema::new(vec![NEGATIVE, NEUTRAL, POSITIVE]).expect("static names are valid")
    }

    /// `strong_negative`, `negative`, `positive`, `strong_positive`.
    pub fn four_class() -> Self {
        LabelSchema::new(vec![STRONG_NEGATIVE, NEGATIVE, POSITIVE, STRONG_POSITIVE])
            .expect("static names are valid")
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A token sequence with a labeled target span. Sentence-level instances
/// carry the zero-width span `[0, 0)` and `sentence_level = true`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetedInstance {
    pub tokens: Vec<String>,
    pub target_start: usize,
    pub target_end: usize,
    pub label: usize,
    pub sid: Option<String>,
    pub sentence_level: bool,
}

impl TargetedInstance {
    pub fn sentence(tokens: Vec<String>, label: usize) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Argument("instance needs at least one token".into()));
        }
        Ok(TargetedInstance {
            tokens,
            target_start: 0,
            target_end: 0,
            label,
            sid: None,
            sentence_level: true,
        })
    }

    pub fn targeted(tokens: Vec<String>, span: (usize, usize), label: usize) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Argument("instance needs at least one token".into()));
        }
        let (start, end) = span;
        if start >= end || end > tokens.len() {
            return Err(Error::Argument(format!(
                "span [{start},{end}) invalid for {} tokens",
                tokens.len()
            )));
        }
        Ok(TargetedInstance {
            tokens,
            target_start: start,
            target_end: end,
            label,
            sid: None,
            sentence_level: false,
        })
    }

    pub fn with_sid(mut self, sid: impl Into<String>) -> Self {
        self.sid = Some(sid.into());
        self
    }

    /// Splits the token sequence into left context, target, and right
    /// context. Their concatenation reproduces the tokens exactly.
    pub fn split_at_target(&self) -> Result<(&[String], &[String], &[String])> {
        if self.sentence_level {
            return Err(Error::Argument(
                "cannot split a sentence-level instance at its target".into(),
            ));
        }
        Ok((
            &self.tokens[..self.target_start],
            &self.tokens[self.target_start..self.target_end],
            &self.tokens[self.target_end..],
        ))
    }
}

/// A plain labeled sentence, the unit the sentence-level model consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub tokens: Vec<String>,
    pub label: usize,
}

impl From<&TargetedInstance> for LabeledSentence {
    fn from(inst: &TargetedInstance) -> Self {
        LabeledSentence {
            tokens: inst.tokens.clone(),
            label: inst.label,
        }
    }
}

/// A corpus is a schema plus instances in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub schema: LabelSchema,
    pub instances: Vec<TargetedInstance>,
}

impl Corpus {
    /// The instances viewed as plain labeled sentences (spans dropped).
    pub fn sentences(&self) -> Vec<LabeledSentence> {
        self.instances.iter().map(Into::into).collect()
    }

    pub fn gold_labels(&self) -> Vec<usize> {
        self.instances.iter().map(|i| i.label).collect()
    }
}

#[derive(Deserialize)]
struct RawInstance {
    tokens: Vec<String>,
    label: String,
    #[serde(default)]
    target: Option<(usize, usize)>,
    #[serde(default)]
    sid: Option<String>,
}

/// Options for [`load_corpus`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Drop every instance of a sentence (grouped by `sid`) whose targets
    /// carry conflicting labels.
    pub remove_mixed: bool,
    /// Lowercase tokens on ingestion.
    pub lowercase: bool,
}

/// Reads one JSON object per line:
/// `{"tokens": [...], "label": "name", "target": [start, end], "sid": "s1"}`
/// where `target` and `sid` are optional. A missing target marks a
/// sentence-level instance. Overlapping target spans within one sentence
/// are rejected.
pub fn load_corpus<R: BufRead>(
    reader: R,
    schema: &LabelSchema,
    opts: LoadOptions,
) -> Result<Corpus> {
    let mut instances = Vec::new();
    let mut spans_by_sid: HashMap<String, Vec<(usize, usize, usize)>> = HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_number = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawInstance = serde_json::from_str(&line)
            .map_err(|e| Error::format_at(line_number, format!("invalid JSON: {e}")))?;
        if raw.tokens.is_empty() {
            return Err(Error::format_at(line_number, "empty token list"));
        }
        let label = schema.index_of(&raw.label).ok_or_else(|| {
            Error::format_at(line_number, format!("unknown label {:?}", raw.label))
        })?;
        let tokens: Vec<String> = if opts.lowercase {
            raw.tokens.iter().map(|t| t.to_lowercase()).collect()
        } else {
            raw.tokens
        };
        let mut inst = match raw.target {
            None => TargetedInstance::sentence(tokens, label)
                .map_err(|e| Error::format_at(line_number, e.to_string()))?,
            Some((start, end)) => {
                if start >= end {
                    return Err(Error::format_at(
                        line_number,
                        format!("empty target span [{start},{end})"),
                    ));
                }
                if end > tokens.len() {
                    return Err(Error::format_at(
                        line_number,
                        format!(
                            "target span [{start},{end}) out of bounds for {} tokens",
                            tokens.len()
                        ),
                    ));
                }
                TargetedInstance::targeted(tokens, (start, end), label)
                    .map_err(|e| Error::format_at(line_number, e.to_string()))?
            }
        };
        if let Some(sid) = raw.sid {
            if !inst.sentence_level {
                let spans = spans_by_sid.entry(sid.clone()).or_default();
                for &(s, e, other_line) in spans.iter() {
                    if inst.target_start < e && s < inst.target_end {
                        return Err(Error::format_at(
                            line_number,
                            format!("target span overlaps span [{s},{e}) from line {other_line}"),
                        ));
                    }
                }
                spans.push((inst.target_start, inst.target_end, line_number));
            }
            inst = inst.with_sid(sid);
        }
        instances.push(inst);
    }

    if opts.remove_mixed {
        let mut label_by_sid: HashMap<&str, (usize, bool)> = HashMap::new();
        for inst in &instances {
            if let Some(sid) = &inst.sid {
                label_by_sid
                    .entry(sid)
                    .and_modify(|(l, mixed)| *mixed |= *l != inst.label)
                    .or_insert((inst.label, false));
            }
        }
        let mixed: std::collections::HashSet<String> = label_by_sid
            .iter()
            .filter(|(_, (_, mixed))| *mixed)
            .map(|(sid, _)| sid.to_string())
            .collect();
        instances.retain(|inst| match &inst.sid {
            Some(sid) => !mixed.contains(sid),
            None => true,
        });
    }

    Ok(Corpus {
        schema: schema.clone(),
        instances,
    })
}

/// Target label scheme for [`map_labels`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Merge strong and weak polarities; drop neutral instances.
    Binary,
    /// Keep the original scheme.
    Multiclass,
}

/// Maps a 4-class (or 3-class) corpus onto the requested scheme.
/// Binary mode folds `strong_positive`/`positive` into `positive` and
/// `strong_negative`/`negative` into `negative`; `neutral` instances are
/// removed. Multiclass mode keeps the corpus unchanged.
pub fn map_labels(corpus: &Corpus, mode: LabelMode) -> Result<Corpus> {
    let names = corpus.schema.names();
    let known = [
        STRONG_NEGATIVE,
        NEGATIVE,
        NEUTRAL,
        POSITIVE,
        STRONG_POSITIVE,
    ];
    let recognized = names.iter().all(|n| known.contains(&n.as_str()));
    if !(corpus.schema.arity() == 3 || corpus.schema.arity() == 4) || !recognized {
        return Err(Error::Argument(format!(
            "label mapping needs the 3- or 4-class polarity scheme, got {names:?}"
        )));
    }
    match mode {
        LabelMode::Multiclass => Ok(corpus.clone()),
        LabelMode::Binary => {
            let binary = LabelSchema::binary();
            let mut instances = Vec::with_capacity(corpus.instances.len());
            for inst in &corpus.instances {
                let name = corpus.schema.name(inst.label);
                let mapped = match name {
                    STRONG_POSITIVE | POSITIVE => Some(POSITIVE),
                    STRONG_NEGATIVE | NEGATIVE => Some(NEGATIVE),
                    NEUTRAL => None,
                    _ => unreachable!("schema checked above"),
                };
                if let Some(new_name) = mapped {
                    let mut out = inst.clone();
                    out.label = binary.index_of(new_name).expect("binary schema");
                    instances.push(out);
                }
            }
            Ok(Corpus {
                schema: binary,
                instances,
            })
        }
    }
}
