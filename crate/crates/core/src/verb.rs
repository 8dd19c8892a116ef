use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The fourteen target verbs, by lemma.
///
/// Variants are declared alphabetically so the derived `Ord` is the
/// lexicographic order of the lemmas, which the tie rules rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    Drop,
    Eat,
    Get,
    Give,
    Go,
    Hold,
    Open,
    Pick,
    Play,
    Put,
    Take,
    Throw,
    Walk,
    Wash,
}

impl Verb {
    pub const ALL: [Verb; 14] = [
        Verb::Drop,
        Verb::Eat,
        Verb::Get,
        Verb::Give,
        Verb::Go,
        Verb::Hold,
        Verb::Open,
        Verb::Pick,
        Verb::Play,
        Verb::Put,
        Verb::Take,
        Verb::Throw,
        Verb::Walk,
        Verb::Wash,
    ];

    pub fn lemma(self) -> &'static str {
        match self {
            Verb::Drop => "drop",
            Verb::Eat => "eat",
            Verb::Get => "get",
            Verb::Give => "give",
            Verb::Go => "go",
            Verb::Hold => "hold",
            Verb::Open => "open",
            Verb::Pick => "pick",
            Verb::Play => "play",
            Verb::Put => "put",
            Verb::Take => "take",
            Verb::Throw => "throw",
            Verb::Walk => "walk",
            Verb::Wash => "wash",
        }
    }

    /// Progressive form used by narration templates.
    pub fn progressive(self) -> &'static str {
        match self {
            Verb::Drop => "dropping",
            Verb::Eat => "eating",
            Verb::Get => "getting",
            Verb::Give => "giving",
            Verb::Go => "going",
            Verb::Hold => "holding",
            Verb::Open => "opening",
            Verb::Pick => "picking",
            Verb::Play => "playing",
            Verb::Put => "putting",
            Verb::Take => "taking",
            Verb::Throw => "throwing",
            Verb::Walk => "walking",
            Verb::Wash => "washing",
        }
    }

    /// Particle that follows the verb in the bigram forms "pick up" / "put down".
    pub fn particle(self) -> Option<&'static str> {
        match self {
            Verb::Pick => Some("up"),
            Verb::Put => Some("down"),
            _ => None,
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.lemma())
    }
}

impl FromStr for Verb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Verb::ALL
            .iter()
            .copied()
            .find(|v| v.lemma() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("{s:?} is not one of the 14 target verbs")))
    }
}
