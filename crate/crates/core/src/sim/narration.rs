//! Timestamped narration for a simulated schedule.
//!
//! Each action is described at its start with a template phrase. Whether the
//! phrase names the action's verb and object is drawn per action from the
//! profile. A mention that is not grounded in its action is instead spoken at
//! a time whose following window contains no matching action, so measured
//! word-context precision tracks the configured probability.
//!
//! RNG consumption order, on one ChaCha8 stream seeded with `seed`:
//! per action in schedule order: verb draw, noun draw, template draw,
//! determiner draw; then per displaced mention in request order: up to
//! `PLACEMENT_TRIES` candidate start times.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::{ActionAnnotation, ObjectClass, ObjectMeta, TranscriptToken};
use crate::verb::Verb;

/// Length of the context window a mention is judged against.
pub const MENTION_WINDOW: f64 = 5.0;
const PLACEMENT_TRIES: usize = 400;
const WORD_GAP: f64 = 0.04;
/// Noun probability for nouns the profile does not list.
pub const DEFAULT_NOUN_P: f64 = 0.8;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrationProfile {
    /// Probability that an action's verb is spoken at the action's start.
    pub verbs: BTreeMap<Verb, f64>,
    /// Probability that an action's object noun is spoken with it.
    pub nouns: BTreeMap<String, f64>,
    /// Speak ungrounded mentions elsewhere instead of dropping them.
    #[serde(default = "default_true")]
    pub displaced_mentions: bool,
}

impl Default for NarrationProfile {
    fn default() -> Self {
        NarrationProfile::observed()
    }
}

impl NarrationProfile {
    /// Per-word precision measured on the recorded corpus.
    pub fn observed() -> NarrationProfile {
        let verbs = [
            (Verb::Go, 0.0),
            (Verb::Put, 0.4),
            (Verb::Pick, 0.8),
            (Verb::Eat, 0.0),
            (Verb::Take, 0.8),
            (Verb::Get, 0.4),
            (Verb::Wash, 0.6),
            (Verb::Play, 0.8),
            (Verb::Walk, 0.4),
            (Verb::Throw, 0.6),
            (Verb::Hold, 1.0),
            (Verb::Drop, 0.4),
            (Verb::Give, 0.0),
            (Verb::Open, 0.3),
        ];
        let nouns = [
            ("table", 1.0),
            ("spoon", 1.0),
            ("banana", 0.8),
            ("apple", 1.0),
            ("cup", 1.0),
            ("ball", 0.6),
            ("toy", 1.0),
            ("fork", 0.8),
            ("bowl", 1.0),
            ("knife", 0.8),
            ("book", 1.0),
            ("plant", 1.0),
            ("bear", 1.0),
            ("chair", 0.4),
            ("doll", 0.8),
            ("clock", 0.6),
            ("lamp", 1.0),
            ("door", 0.0),
            ("window", 1.0),
        ];
        NarrationProfile {
            verbs: verbs.into_iter().collect(),
            nouns: nouns.into_iter().map(|(w, p)| (w.to_string(), p)).collect(),
            displaced_mentions: true,
        }
    }

    /// Every verb and noun at probability `p`.
    pub fn uniform(p: f64) -> NarrationProfile {
        let mut profile = NarrationProfile::observed();
        profile.verbs.values_mut().for_each(|v| *v = p);
        profile.nouns.values_mut().for_each(|v| *v = p);
        profile
    }

    pub fn p_signal(&self, verb: Verb) -> f64 {
        self.verbs.get(&verb).copied().unwrap_or(0.0)
    }

    pub fn p_noun(&self, noun: &str) -> f64 {
        self.nouns.get(noun).copied().unwrap_or(DEFAULT_NOUN_P)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |p: f64| !(0.0..=1.0).contains(&p);
        if let Some((v, p)) = self.verbs.iter().find(|(_, p)| bad(**p)) {
            return Err(Error::Config(format!("p_signal({v}) = {p} is outside [0, 1]")));
        }
        if let Some((n, p)) = self.nouns.iter().find(|(_, p)| bad(**p)) {
            return Err(Error::Config(format!("p_noun({n}) = {p} is outside [0, 1]")));
        }
        Ok(())
    }
}

/// Word used to name an object of this class, if it is ever named.
pub fn noun_for(class: ObjectClass) -> Option<&'static str> {
    use ObjectClass::*;
    match class {
        Head | LeftHand | RightHand => None,
        Bunny | Dinosaur | Truck | Plane => Some("toy"),
        c => Some(c.name()),
    }
}

/// Whether `noun` refers to objects of `class`.
pub fn noun_matches(noun: &str, class: ObjectClass) -> bool {
    class.name() == noun || (noun == "toy" && class.is_toy())
}

fn word_duration(word: &str) -> f64 {
    0.12 + 0.04 * word.len() as f64
}

fn phrase_length(words: &[String]) -> f64 {
    words.iter().map(|w| word_duration(w) + WORD_GAP).sum()
}

fn verb_words(verb: Verb) -> Vec<String> {
    let mut w = vec![verb.progressive().to_string()];
    if let Some(p) = verb.particle() {
        w.push(p.to_string());
    }
    w
}

enum Mention {
    Verb(Verb),
    Noun(&'static str),
}

/// Builds the transcript for `schedule`.
///
/// `objects` resolves annotation object ids to classes; `duration` bounds
/// where displaced mentions may go. Tokens come out ordered by start and
/// non-overlapping.
pub fn emit_narration(
    schedule: &[ActionAnnotation],
    objects: &[ObjectMeta],
    duration: f64,
    profile: &NarrationProfile,
    seed: u64,
) -> Result<Vec<TranscriptToken>> {
    profile.validate()?;
    let class_of = |id: &str| {
        objects.iter().find(|o| o.id == id).map(|o| o.class).ok_or_else(|| Error::UnknownObject(id.to_string()))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tokens: Vec<TranscriptToken> = Vec::new();
    let mut displaced: Vec<Mention> = Vec::new();
    let dets = ["the", "this", "my"];

    for action in schedule {
        let noun = noun_for(class_of(&action.object)?);
        let says_verb = rng.random::<f64>() < profile.p_signal(action.verb);
        let noun_draw = rng.random::<f64>();
        let says_noun = noun.is_some_and(|n| noun_draw < profile.p_noun(n));
        let template = rng.random_range(0..3usize);
        let det = dets[rng.random_range(0..dets.len())];

        let np: Vec<String> = match (says_noun, noun) {
            (true, Some(n)) => vec![det.into(), n.into()],
            _ if action.verb == Verb::Walk || action.verb == Verb::Go => vec!["over".into(), "there".into()],
            _ => vec!["it".into()],
        };
        let (prefix, body): (Vec<String>, Vec<String>) = if says_verb {
            let prefix = match template {
                0 => vec!["i".into(), "am".into()],
                1 => vec!["now".into()],
                _ => vec!["we".into(), "are".into()],
            };
            let mut body = verb_words(action.verb);
            body.extend(np);
            (prefix, body)
        } else if says_noun {
            (Vec::new(), [vec!["look".into(), "at".into()], np].concat())
        } else {
            let filler = ["okay", "hmm", "so"][template];
            (Vec::new(), vec![filler.into()])
        };
        let last_end = tokens.last().map_or(0.0, |t| t.end);
        let lead = phrase_length(&prefix);
        let prefix = if action.start - lead >= last_end + WORD_GAP { prefix } else { Vec::new() };
        let mut t = action.start - phrase_length(&prefix);
        for w in prefix.into_iter().chain(body) {
            let end = t + word_duration(&w);
            tokens.push(TranscriptToken { word: w, start: t, end });
            t = end + WORD_GAP;
        }

        if profile.displaced_mentions {
            if !says_verb {
                displaced.push(Mention::Verb(action.verb));
            }
            if let (false, Some(n)) = (says_noun, noun) {
                if profile.p_noun(n) < 1.0 {
                    displaced.push(Mention::Noun(n));
                }
            }
        }
    }

    for m in displaced {
        let (words, key_index) = match m {
            Mention::Verb(v) => {
                let mut w = vec!["i".to_string(), "will".into()];
                w.extend(verb_words(v));
                w.extend(["it".to_string(), "later".into()]);
                (w, 2)
            }
            Mention::Noun(n) => (vec!["where".to_string(), "is".into(), "the".into(), n.to_string()], 3),
        };
        let len = phrase_length(&words);
        let key_offset = phrase_length(&words[..key_index]);
        let clear = |start: f64| -> Result<bool> {
            let key = start + key_offset;
            let (a, b) = (key, key + MENTION_WINDOW);
            for ann in schedule.iter().filter(|ann| ann.overlaps(a, b)) {
                let hit = match m {
                    Mention::Verb(v) => ann.verb == v,
                    Mention::Noun(n) => noun_matches(n, class_of(&ann.object)?),
                };
                if hit {
                    return Ok(false);
                }
            }
            let free = tokens.iter().all(|t| t.end + WORD_GAP <= start || start + len + WORD_GAP <= t.start);
            Ok(free)
        };
        let latest = duration - len;
        if latest <= 0.0 {
            continue;
        }
        let mut placed = None;
        for _ in 0..PLACEMENT_TRIES {
            let start = rng.random_range(0.0..latest);
            if clear(start)? {
                placed = Some(start);
                break;
            }
        }
        // an unplaceable mention is dropped rather than grounded
        if let Some(start) = placed {
            let mut t = start;
            let at = tokens.partition_point(|tok| tok.start < start);
            let new: Vec<TranscriptToken> = words
                .into_iter()
                .map(|w| {
                    let end = t + word_duration(&w);
                    let tok = TranscriptToken { word: w, start: t, end };
                    t = end + WORD_GAP;
                    tok
                })
                .collect();
            tokens.splice(at..at, new);
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn objects() -> Vec<ObjectMeta> {
        let m = |id: &str, class| ObjectMeta {
            id: id.into(),
            class,
            movable: true,
            half_extents: Vec3::new(0.05, 0.05, 0.05),
        };
        vec![m("head", ObjectClass::Head), m("apple", ObjectClass::Apple), m("cup", ObjectClass::Cup)]
    }

    fn schedule(verb: Verb, n: usize) -> Vec<ActionAnnotation> {
        (0..n)
            .map(|i| {
                let s = 0.5 + 6.0 * i as f64;
                ActionAnnotation {
                    verb,
                    start: s,
                    end: s + 5.0,
                    object: if i % 2 == 0 { "apple" } else { "cup" }.into(),
                }
            })
            .collect()
    }

    fn check_order(tokens: &[TranscriptToken]) {
        for w in tokens.windows(2) {
            assert!(w[0].end <= w[1].start, "{:?} overlaps {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn certain_signal_gives_one_verb_token_per_action_at_its_start() {
        let sched = schedule(Verb::Pick, 20);
        let toks = emit_narration(&sched, &objects(), 130.0, &NarrationProfile::uniform(1.0), 4).unwrap();
        check_order(&toks);
        let verbs: Vec<&TranscriptToken> = toks.iter().filter(|t| t.word == "picking").collect();
        assert_eq!(verbs.len(), 20);
        for (a, t) in sched.iter().zip(verbs) {
            assert!((t.start - a.start).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_signal_without_displacement_gives_no_verb_tokens() {
        let sched = schedule(Verb::Put, 20);
        let mut profile = NarrationProfile::uniform(0.0);
        profile.displaced_mentions = false;
        let toks = emit_narration(&sched, &objects(), 130.0, &profile, 4).unwrap();
        assert!(toks.iter().all(|t| t.word != "putting"));
        profile.displaced_mentions = true;
        let toks = emit_narration(&sched, &objects(), 260.0, &profile, 4).unwrap();
        check_order(&toks);
        // displaced verb mentions never sit in front of a matching action
        for t in toks.iter().filter(|t| t.word == "putting") {
            assert!(sched.iter().all(|a| !a.overlaps(t.start, t.start + MENTION_WINDOW)));
        }
    }

    #[test]
    fn put_emission_rate_matches_profile() {
        // binomial oracle: sd = sqrt(0.4 * 0.6 / 1000) = 0.0155
        let sched = schedule(Verb::Put, 1000);
        let mut profile = NarrationProfile::observed();
        profile.displaced_mentions = false;
        let toks = emit_narration(&sched, &objects(), 6010.0, &profile, 11).unwrap();
        let n = toks.iter().filter(|t| t.word == "putting").count();
        let frac = n as f64 / 1000.0;
        assert!((frac - 0.4).abs() <= 0.05, "{frac}");
    }

    #[test]
    fn rejects_bad_probability() {
        let mut p = NarrationProfile::observed();
        p.verbs.insert(Verb::Eat, 1.5);
        assert!(emit_narration(&[], &objects(), 10.0, &p, 0).is_err());
    }
}
