//! Closed-vocabulary tagging: word form to (lemma, category).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Noun,
    Verb,
    Pronoun,
    Adjective,
    Adverb,
    Determiner,
    Preposition,
    Other,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Noun,
        Category::Verb,
        Category::Pronoun,
        Category::Adjective,
        Category::Adverb,
        Category::Determiner,
        Category::Preposition,
        Category::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Noun => "noun",
            Category::Verb => "verb",
            Category::Pronoun => "pronoun",
            Category::Adjective => "adjective",
            Category::Adverb => "adverb",
            Category::Determiner => "determiner",
            Category::Preposition => "preposition",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown category {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexEntry {
    pub lemma: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tagged {
    pub word: String,
    pub lemma: String,
    pub category: Category,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
}

/// Target nouns and verbs plus the closed-class words narration uses.
const NOUNS: &[&str] = &[
    "ball", "banana", "book", "shoe", "apple", "bear", "cup", "spoon", "door", "toy", "chair", "doll", "fork", "bowl",
    "clock", "table", "knife", "window", "plant", "lamp", "bunny", "dinosaur", "truck", "plane",
];

/// base, third person, progressive, past, participle
const VERBS: &[[&str; 5]] = &[
    ["eat", "eats", "eating", "ate", "eaten"],
    ["go", "goes", "going", "went", "gone"],
    ["play", "plays", "playing", "played", "played"],
    ["open", "opens", "opening", "opened", "opened"],
    ["stop", "stops", "stopping", "stopped", "stopped"],
    ["walk", "walks", "walking", "walked", "walked"],
    ["get", "gets", "getting", "got", "gotten"],
    ["wash", "washes", "washing", "washed", "washed"],
    ["cook", "cooks", "cooking", "cooked", "cooked"],
    ["close", "closes", "closing", "closed", "closed"],
    ["push", "pushes", "pushing", "pushed", "pushed"],
    ["throw", "throws", "throwing", "threw", "thrown"],
    ["hold", "holds", "holding", "held", "held"],
    ["drop", "drops", "dropping", "dropped", "dropped"],
    ["give", "gives", "giving", "gave", "given"],
    ["put", "puts", "putting", "put", "put"],
    ["take", "takes", "taking", "took", "taken"],
    ["pick", "picks", "picking", "picked", "picked"],
    ["shake", "shakes", "shaking", "shook", "shaken"],
    ["look", "looks", "looking", "looked", "looked"],
];

const CLOSED: &[(&str, &str, Category)] = &[
    ("up", "up", Category::Preposition),
    ("down", "down", Category::Preposition),
    ("outside", "outside", Category::Preposition),
    ("on", "on", Category::Preposition),
    ("in", "in", Category::Preposition),
    ("inside", "inside", Category::Preposition),
    ("by", "by", Category::Preposition),
    ("to", "to", Category::Preposition),
    ("at", "at", Category::Preposition),
    ("over", "over", Category::Preposition),
    ("red", "red", Category::Adjective),
    ("bad", "bad", Category::Adjective),
    ("green", "green", Category::Adjective),
    ("good", "good", Category::Adjective),
    ("yellow", "yellow", Category::Adjective),
    ("fast", "fast", Category::Adjective),
    ("full", "full", Category::Adjective),
    ("empty", "empty", Category::Adjective),
    ("slow", "slow", Category::Adjective),
    ("here", "here", Category::Adverb),
    ("back", "back", Category::Adverb),
    ("there", "there", Category::Adverb),
    ("away", "away", Category::Adverb),
    ("now", "now", Category::Adverb),
    ("later", "later", Category::Adverb),
    ("where", "where", Category::Adverb),
    ("the", "the", Category::Determiner),
    ("a", "a", Category::Determiner),
    ("this", "this", Category::Determiner),
    ("that", "that", Category::Determiner),
    ("my", "my", Category::Determiner),
    ("i", "i", Category::Pronoun),
    ("we", "we", Category::Pronoun),
    ("you", "you", Category::Pronoun),
    ("it", "it", Category::Pronoun),
    ("am", "be", Category::Other),
    ("is", "be", Category::Other),
    ("are", "be", Category::Other),
    ("will", "will", Category::Other),
    ("okay", "okay", Category::Other),
    ("hmm", "hmm", Category::Other),
    ("so", "so", Category::Other),
];

fn plural(noun: &str) -> String {
    match noun {
        "knife" => "knives".into(),
        "bunny" => "bunnies".into(),
        n => format!("{n}s"),
    }
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    /// The built-in kitchen vocabulary with inflections.
    pub fn builtin() -> Lexicon {
        let mut lex = Lexicon::new();
        for n in NOUNS {
            lex.insert_unchecked(n, n, Category::Noun);
            lex.insert_unchecked(&plural(n), n, Category::Noun);
        }
        for forms in VERBS {
            for f in forms {
                lex.insert_unchecked(f, forms[0], Category::Verb);
            }
        }
        for (w, l, c) in CLOSED {
            lex.insert_unchecked(w, l, *c);
        }
        lex
    }

    fn insert_unchecked(&mut self, word: &str, lemma: &str, category: Category) {
        self.entries.insert(word.to_string(), LexEntry { lemma: lemma.to_string(), category });
    }

    pub fn insert(&mut self, word: &str, lemma: &str, category: Category) -> Result<()> {
        if word.is_empty() || word != word.to_lowercase() || word.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("lexicon key {word:?} must be a lowercase single word")));
        }
        self.insert_unchecked(word, lemma, category);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&LexEntry> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &LexEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Unknown words tag as themselves with category `other`.
    pub fn tag(&self, word: &str) -> Tagged {
        match self.entries.get(word) {
            Some(e) => Tagged { word: word.to_string(), lemma: e.lemma.clone(), category: e.category },
            None => Tagged { word: word.to_string(), lemma: word.to_string(), category: Category::Other },
        }
    }

    /// Parses `word<TAB>lemma<TAB>category` lines; blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_tsv_str(text: &str) -> Result<Lexicon> {
        let mut lex = Lexicon::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [word, lemma, category] = cols[..] else {
                return Err(Error::Schema(format!("lexicon line {}: expected 3 tab-separated columns", i + 1)));
            };
            let category = category.parse().map_err(|e| Error::Schema(format!("lexicon line {}: {e}", i + 1)))?;
            lex.insert(word, lemma, category).map_err(|e| Error::Schema(format!("lexicon line {}: {e}", i + 1)))?;
        }
        if lex.is_empty() {
            return Err(Error::Empty("lexicon"));
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon> {
        Lexicon::from_tsv_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# word\tlemma\tcategory\n");
        for (w, e) in &self.entries {
            out.push_str(&format!("{w}\t{}\t{}\n", e.lemma, e.category));
        }
        out
    }
}

pub fn tag_tokens<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> Vec<Tagged> {
    tokens.iter().map(|t| lexicon.tag(t.as_ref())).collect()
}
