//! Vocabulary distribution and word-context precision over a corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{Category, Lexicon};
use crate::session::{load_session, Session};
use crate::sim::narration::noun_matches;
use crate::verb::Verb;

/// Default length of the context window following a word.
pub const DEFAULT_WINDOW: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub total_tokens: u64,
    pub total_types: u64,
    /// Every category is present, possibly with count 0.
    pub token_counts: BTreeMap<Category, u64>,
    pub type_counts: BTreeMap<Category, u64>,
    /// Most frequent lemmas per category, by count then lemma.
    pub top: BTreeMap<Category, Vec<(String, u64)>>,
}

impl DistributionReport {
    pub fn token_share(&self, c: Category) -> f64 {
        self.token_counts[&c] as f64 / self.total_tokens as f64
    }

    pub fn type_share(&self, c: Category) -> f64 {
        self.type_counts[&c] as f64 / self.total_types as f64
    }

    /// `(count, total)` so shares can be compared as exact rationals.
    pub fn token_ratio(&self, c: Category) -> (u64, u64) {
        (self.token_counts[&c], self.total_tokens)
    }

    pub fn type_ratio(&self, c: Category) -> (u64, u64) {
        (self.type_counts[&c], self.total_types)
    }

    /// `level, category, count, total, proportion` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("level\tcategory\tcount\ttotal\tproportion\n");
        for (level, counts, total) in
            [("token", &self.token_counts, self.total_tokens), ("type", &self.type_counts, self.total_types)]
        {
            for (c, n) in counts {
                out.push_str(&format!("{level}\t{c}\t{n}\t{total}\t{:.6}\n", *n as f64 / total as f64));
            }
        }
        out
    }

    /// `category, rank, lemma, count` rows.
    pub fn top_tsv(&self) -> String {
        let mut out = String::from("category\trank\tlemma\tcount\n");
        for (c, rows) in &self.top {
            for (i, (lemma, n)) in rows.iter().enumerate() {
                out.push_str(&format!("{c}\t{}\t{lemma}\t{n}\n", i + 1));
            }
        }
        out
    }
}

/// Token shares count every token; type shares count distinct
/// (lemma, category) pairs.
pub fn category_distribution<S: AsRef<str>>(
    corpus: &[Vec<S>],
    lexicon: &Lexicon,
    top_k: usize,
) -> Result<DistributionReport> {
    let mut token_counts: BTreeMap<Category, u64> = Category::ALL.iter().map(|c| (*c, 0)).collect();
    let mut lemma_counts: BTreeMap<(Category, String), u64> = BTreeMap::new();
    let mut total = 0u64;
    for doc in corpus {
        for w in doc {
            let t = lexicon.tag(w.as_ref());
            *token_counts.get_mut(&t.category).expect("all categories seeded") += 1;
            *lemma_counts.entry((t.category, t.lemma)).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::Empty("corpus"));
    }
    let mut type_counts: BTreeMap<Category, u64> = Category::ALL.iter().map(|c| (*c, 0)).collect();
    let mut per_cat: BTreeMap<Category, Vec<(String, u64)>> = BTreeMap::new();
    for ((c, lemma), n) in &lemma_counts {
        *type_counts.get_mut(c).expect("all categories seeded") += 1;
        per_cat.entry(*c).or_default().push((lemma.clone(), *n));
    }
    for rows in per_cat.values_mut() {
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows.truncate(top_k);
    }
    Ok(DistributionReport {
        total_tokens: total,
        total_types: lemma_counts.len() as u64,
        token_counts,
        type_counts,
        top: per_cat,
    })
}

/// How a word's context is judged against annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Judge<'a> {
    Verb(Verb),
    Noun(&'a str),
    Never,
}

fn judge_for<'a>(lemma: &'a str, category: Category) -> Judge<'a> {
    match category {
        Category::Verb => lemma.parse().map_or(Judge::Never, Judge::Verb),
        Category::Noun => Judge::Noun(lemma),
        _ => Judge::Never,
    }
}

/// Whether the window `[t, t + window)` holds an action matching `lemma`.
fn window_hit(session: &Session, judge: Judge<'_>, t: f64, window: f64) -> bool {
    let end = t + window;
    session.annotations.iter().filter(|a| a.overlaps(t, end)).any(|a| match judge {
        Judge::Verb(v) => a.verb == v,
        Judge::Noun(n) => session.object_index(&a.object).is_some_and(|i| noun_matches(n, session.objects[i].class)),
        Judge::Never => false,
    })
}

/// Per-occurrence outcomes for nouns and verbs, accumulated one session
/// at a time so a corpus never has to be held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTally {
    window: f64,
    outcomes: BTreeMap<String, (Category, Vec<bool>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRow {
    pub word: String,
    pub category: Category,
    /// Occurrences in the corpus.
    pub n: usize,
    /// Occurrences judged.
    pub sampled: usize,
    /// `None` when the word never occurs.
    pub precision: Option<f64>,
}

impl SignalTally {
    pub fn new(window: f64) -> Result<SignalTally> {
        if !(window > 0.0) {
            return Err(Error::InvalidArgument(format!("window must be positive, got {window}")));
        }
        Ok(SignalTally { window, outcomes: BTreeMap::new() })
    }

    pub fn add_session(&mut self, session: &Session, lexicon: &Lexicon) {
        for tok in &session.transcript {
            let tag = lexicon.tag(&tok.word);
            if !matches!(tag.category, Category::Noun | Category::Verb) {
                continue;
            }
            let hit = window_hit(session, judge_for(&tag.lemma, tag.category), tok.start, self.window);
            self.outcomes.entry(tag.lemma).or_insert_with(|| (tag.category, Vec::new())).1.push(hit);
        }
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.outcomes.keys().map(String::as_str)
    }

    /// Precision over all occurrences, or over `sample_size` of them drawn
    /// without replacement with `seed`.
    pub fn row(&self, word: &str, category: Category, sample_size: Option<usize>, seed: u64) -> SignalRow {
        let Some((cat, hits)) = self.outcomes.get(word) else {
            return SignalRow { word: word.into(), category, n: 0, sampled: 0, precision: None };
        };
        let n = hits.len();
        let chosen: Vec<bool> = match sample_size {
            Some(k) if k < n => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| hits[i]).collect()
            }
            _ => hits.clone(),
        };
        let precision =
            (!chosen.is_empty()).then(|| chosen.iter().filter(|h| **h).count() as f64 / chosen.len() as f64);
        SignalRow { word: word.into(), category: *cat, n, sampled: chosen.len(), precision }
    }

    pub fn rows(&self, sample_size: Option<usize>, seed: u64) -> Vec<SignalRow> {
        self.outcomes.iter().map(|(w, (c, _))| self.row(w, *c, sample_size, seed)).collect()
    }
}

pub fn signal_tsv(rows: &[SignalRow]) -> String {
    let mut out = String::from("word\tcategory\tN\tP\n");
    for r in rows {
        let p = r.precision.map_or_else(|| "absent".to_string(), |p| format!("{p:.3}"));
        out.push_str(&format!("{}\t{}\t{}\t{p}\n", r.word, r.category, r.n));
    }
    out
}

/// `(N, P)` for one lemma over `sessions`; `P` is `None` when `N = 0`.
pub fn signal_precision(
    sessions: &[Session],
    word: &str,
    window: f64,
    sample_size: Option<usize>,
    lexicon: &Lexicon,
    seed: u64,
) -> Result<(usize, Option<f64>)> {
    let mut tally = SignalTally::new(window)?;
    for s in sessions {
        tally.add_session(s, lexicon);
    }
    let category = if word.parse::<Verb>().is_ok() { Category::Verb } else { Category::Noun };
    let row = tally.row(word, category, sample_size, seed);
    Ok((row.n, row.precision))
}

/// Whitespace tokens of a plain-text document, lowercased, with
/// surrounding punctuation stripped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Corpus files in a directory, sorted by name: `*.json` sessions and
/// `*.txt` plain text.
pub fn corpus_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "txt")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Empty("corpus directory (no .json or .txt files)"));
    }
    Ok(files)
}

/// Token lists per document: a session's transcript or a text file's words.
pub fn load_token_corpus(dir: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    corpus_files(dir)?
        .into_iter()
        .map(|p| {
            if p.extension().and_then(|e| e.to_str()) == Some("json") {
                Ok(load_session(&p)?.transcript.into_iter().map(|t| t.word).collect())
            } else {
                Ok(tokenize(&fs::read_to_string(&p)?))
            }
        })
        .collect()
}

/// Distinct lemmas of the given category in the lexicon.
pub fn lexicon_lemmas(lexicon: &Lexicon, category: Category) -> BTreeSet<String> {
    lexicon.entries().filter(|(_, e)| e.category == category).map(|(_, e)| e.lemma.clone()).collect()
}
