//! The bilingual translation lexicon and its train/development partition.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ordered word-to-word translation pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilingualLexicon {
    pub name: String,
    pairs: Vec<(String, String)>,
}

impl BilingualLexicon {
    pub fn new(name: impl Into<String>, pairs: Vec<(String, String)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Argument("lexicon must not be empty".into()));
        }
        if pairs.iter().any(|(s, t)| s.is_empty() || t.is_empty()) {
            return Err(Error::Argument("lexicon pair with an empty side".into()));
        }
        Ok(BilingualLexicon {
            name: name.into(),
            pairs,
        })
    }

    /// Reads tab-separated `source<TAB>target` lines. Blank lines are
    /// ignored; structurally malformed lines (no tab, several tabs,
    /// an empty side) are errors. Multi-word entries on either side are
    /// excluded, matching how translated lexicons are prepared.
    pub fn load_tsv<R: BufRead>(name: impl Into<String>, reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut multiword_skipped = 0usize;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line_number = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::format_at(
                    line_number,
                    format!("expected source<TAB>target, found {} fields", fields.len()),
                ));
            }
            let (src, trg) = (fields[0].trim(), fields[1].trim());
            if src.is_empty() || trg.is_empty() {
                return Err(Error::format_at(line_number, "empty side in pair"));
            }
            if src.contains(char::is_whitespace) || trg.contains(char::is_whitespace) {
                multiword_skipped += 1;
                continue;
            }
            pairs.push((src.to_string(), trg.to_string()));
        }
        if multiword_skipped > 0 {
            log::warn!("excluded {multiword_skipped} multi-word lexicon entries");
        }
        if pairs.is_empty() {
            return Err(Error::Format("lexicon contains no valid pairs".into()));
        }
        Ok(BilingualLexicon {
            name: name.into(),
            pairs,
        })
    }

    pub fn write_tsv<W: Write>(&self, writer: &mut W) -> Result<()> {
        for (s, t) in &self.pairs {
            writeln!(writer, "{s}\t{t}")?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// Drops exact duplicate pairs, keeping first occurrences.
    pub fn dedup(&self) -> BilingualLexicon {
        let mut seen = std::collections::HashSet::new();
        let pairs: Vec<_> = self
            .pairs
            .iter()
            .filter(|p| seen.insert((*p).clone()))
            .cloned()
            .collect();
        BilingualLexicon {
            name: self.name.clone(),
            pairs,
        }
    }

    /// Keeps the first `n` pairs, for lexicon-size studies.
    pub fn truncate(&self, n: usize) -> BilingualLexicon {
        BilingualLexicon {
            name: self.name.clone(),
            pairs: self.pairs.iter().take(n).cloned().collect(),
        }
    }

    /// Splits off `round(fraction * n)` pairs as a development set.
    /// The partition is disjoint, deterministic under `seed`, and both
    /// sides keep their original file order.
    pub fn split_dev(
        &self,
        fraction: f64,
        seed: u64,
    ) -> Result<(BilingualLexicon, BilingualLexicon)> {
        if !(0.0..1.0).contains(&fraction) || fraction <= 0.0 {
            return Err(Error::Argument(format!(
                "dev fraction must lie in (0,1), got {fraction}"
            )));
        }
        let n = self.pairs.len();
        let dev_size = (fraction * n as f64).round() as usize;
        if dev_size == 0 || dev_size >= n {
            return Err(Error::Argument(format!(
                "splitting {n} pairs at fraction {fraction} would leave an empty side"
            )));
        }
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        let mut dev_idx: Vec<usize> = indices[..dev_size].to_vec();
        dev_idx.sort_unstable();
        let mut train_idx: Vec<usize> = indices[dev_size..].to_vec();
        train_idx.sort_unstable();
        let pick = |idx: &[usize]| idx.iter().map(|&i| self.pairs[i].clone()).collect();
        Ok((
            BilingualLexicon {
                name: format!("{}-train", self.name),
                pairs: pick(&train_idx),
            },
            BilingualLexicon {
                name: format!("{}-dev", self.name),
                pairs: pick(&dev_idx),
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    #[test]
    fn load_two_pairs() {
        let lex = BilingualLexicon::load_tsv("t", Cursor::new("good\tbueno\nbad\tmalo")).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.pairs()[0], ("good".into(), "bueno".into()));
    }

    #[test]
    fn load_rejects_untabbed_line() {
        match BilingualLexicon::load_tsv("t", Cursor::new("good bueno")) {
            Err(Error::FormatAt { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn load_ignores_trailing_blank_line() {
        let lex =
            BilingualLexicon::load_tsv("t", Cursor::new("good\tbueno\nbad\tmalo\n\n")).unwrap();
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn load_excludes_multiword_entries() {
        let input = "good\tbueno\ngood morning\tbuenos dias\nbad\tmalo\n";
        let lex = BilingualLexicon::load_tsv("t", Cursor::new(input)).unwrap();
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn export_round_trip() {
        let lex = BilingualLexicon::load_tsv("t", Cursor::new("good\tbueno\nbad\tmalo")).unwrap();
        let mut buf = Vec::new();
        lex.write_tsv(&mut buf).unwrap();
        let re = BilingualLexicon::load_tsv("t", Cursor::new(buf)).unwrap();
        assert_eq!(re.pairs(), lex.pairs());
    }

    fn numbered_lexicon(n: usize) -> BilingualLexicon {
        BilingualLexicon::new(
            "n",
            (0..n).map(|i| (format!("s{i}"), format!("t{i}"))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn split_ten_percent_of_ten() {
        let lex = numbered_lexicon(10);
        let (train, dev) = lex.split_dev(0.1, 3).unwrap();
        assert_eq!(dev.len(), 1);
        assert_eq!(train.len(), 9);
    }

    #[test]
    fn split_is_deterministic() {
        let lex = numbered_lexicon(20);
        let a = lex.split_dev(0.25, 42).unwrap();
        let b = lex.split_dev(0.25, 42).unwrap();
        assert_eq!(a.0.pairs(), b.0.pairs());
        assert_eq!(a.1.pairs(), b.1.pairs());
    }

    #[test]
    fn split_half_of_four() {
        let lex = numbered_lexicon(4);
        let (train, dev) = lex.split_dev(0.5, 0).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(dev.len(), 2);
        let mut union: Vec<_> = train.pairs().iter().chain(dev.pairs()).cloned().collect();
        union.sort();
        let mut orig = lex.pairs().to_vec();
        orig.sort();
        assert_eq!(union, orig);
    }

    #[test]
    fn split_rejects_empty_side() {
        let lex = numbered_lexicon(3);
        assert!(lex.split_dev(0.01, 0).is_err());
        assert!(lex.split_dev(0.99, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions_exactly(n in 4usize..60, seed in 0u64..50) {
            let lex = numbered_lexicon(n);
            let (train, dev) = lex.split_dev(0.3, seed).unwrap();
            prop_assert_eq!(train.len() + dev.len(), n);
            prop_assert_eq!(dev.len(), (0.3 * n as f64).round() as usize);
            let mut union: Vec<_> = train.pairs().iter().chain(dev.pairs()).cloned().collect();
            union.sort();
            let mut orig = lex.pairs().to_vec();
            orig.sort();
            prop_assert_eq!(union, orig);
            // Distinct pairs means the two sides must not intersect.
            for p in train.pairs() {
                prop_assert!(!dev.pairs().contains(p));
            }
        }
    }
}
