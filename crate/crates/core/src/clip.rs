//! Five-second clips: segmentation, word-clip labeling, subject splits.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FrustumParams;
use crate::lexicon::{Category, Lexicon};
use crate::session::{align_words, derive_frame, DerivedFrame, ObjectMeta, Session};
use crate::verb::Verb;

pub const CLIP_SECONDS: f64 = 5.0;
pub const CLIP_FRAMES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clip {
    pub session_id: String,
    pub start: f64,
    pub end: f64,
    pub objects: Vec<ObjectMeta>,
    /// Exactly `CLIP_FRAMES` snapshots; `frames[j].objects[i]` belongs to `objects[i]`.
    pub frames: Vec<DerivedFrame>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Verb>,
}

impl Clip {
    pub fn validate(&self) -> Result<()> {
        if self.frames.len() != CLIP_FRAMES {
            return Err(Error::Schema(format!("clip has {} frames, expected {CLIP_FRAMES}", self.frames.len())));
        }
        if !(self.end > self.start) {
            return Err(Error::Schema("clip end must follow its start".into()));
        }
        for (j, f) in self.frames.iter().enumerate() {
            if f.objects.len() != self.objects.len() {
                return Err(Error::Frame {
                    frame: j,
                    field: "objects".into(),
                    message: format!("{} states for {} objects", f.objects.len(), self.objects.len()),
                });
            }
            if j > 0 && !(f.t > self.frames[j - 1].t) {
                return Err(Error::Frame { frame: j, field: "t".into(), message: "not increasing".into() });
            }
        }
        Ok(())
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn from_json_str(s: &str) -> Result<Clip> {
        let clip: Clip = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        clip.validate()?;
        Ok(clip)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Clip> {
        Clip::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Raw frames per clip window and the window offsets that are kept:
/// `floor(j * window / CLIP_FRAMES)`, which is `0, 9, ..., 441` at 90 fps.
pub fn window_layout(fps: f64) -> Result<(usize, Vec<usize>)> {
    let window = (CLIP_SECONDS * fps).round() as usize;
    if window < CLIP_FRAMES {
        return Err(Error::InvalidArgument(format!(
            "{fps} fps gives {window} frames per clip, fewer than {CLIP_FRAMES}"
        )));
    }
    Ok((window, (0..CLIP_FRAMES).map(|j| j * window / CLIP_FRAMES).collect()))
}

/// The clip whose window starts at raw frame `first`.
pub fn clip_at(session: &Session, first: usize, label: Option<Verb>, frustum: &FrustumParams) -> Result<Clip> {
    let (window, offsets) = window_layout(session.fps)?;
    if first + window > session.frames.len() {
        return Err(Error::InvalidArgument(format!(
            "clip at frame {first} runs past the session's {} frames",
            session.frames.len()
        )));
    }
    let frames = offsets.iter().map(|o| derive_frame(session, first + o, frustum)).collect::<Result<Vec<_>>>()?;
    let start = first as f64 / session.fps;
    Ok(Clip {
        session_id: session.subject_id.clone(),
        start,
        end: start + CLIP_SECONDS,
        objects: session.objects.clone(),
        frames,
        label,
    })
}

/// Window start frames of the consecutive tiling; a trailing remainder
/// shorter than a clip is dropped.
pub fn tiling_starts(session: &Session) -> Result<Vec<usize>> {
    let (window, _) = window_layout(session.fps)?;
    Ok((0..session.frames.len() / window).map(|k| k * window).collect())
}

pub fn segment_clips(session: &Session) -> Result<Vec<Clip>> {
    segment_clips_with(session, &FrustumParams::default())
}

pub fn segment_clips_with(session: &Session, frustum: &FrustumParams) -> Result<Vec<Clip>> {
    tiling_starts(session)?.into_iter().map(|f| clip_at(session, f, None, frustum)).collect()
}

/// `(window start frame, verb)` for every transcript token whose lemma is a
/// target verb and whose window fits in the session.
pub fn training_anchors(session: &Session, lexicon: &Lexicon) -> Result<Vec<(usize, Verb)>> {
    let (window, _) = window_layout(session.fps)?;
    let n = session.frames.len();
    let mut out = Vec::new();
    for w in align_words(session)? {
        let tag = lexicon.tag(&w.token.word);
        if tag.category != Category::Verb {
            continue;
        }
        let Ok(verb) = tag.lemma.parse::<Verb>() else { continue };
        if w.frame + window <= n {
            out.push((w.frame, verb));
        }
    }
    Ok(out)
}

/// One labeled clip per target-verb token, starting at the token.
pub fn label_training_clips(session: &Session, lexicon: &Lexicon) -> Result<Vec<Clip>> {
    let frustum = FrustumParams::default();
    training_anchors(session, lexicon)?.into_iter().map(|(f, v)| clip_at(session, f, Some(v), &frustum)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub heldout: Vec<String>,
}

impl Default for SplitSpec {
    /// The last subject of each aesthetic in the default 18-subject plan.
    fn default() -> Self {
        SplitSpec { heldout: vec!["s17".into(), "s18".into()] }
    }
}

impl SplitSpec {
    pub fn new<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> SplitSpec {
        SplitSpec { heldout: ids.into_iter().map(Into::into).collect() }
    }

    pub fn is_heldout(&self, id: &str) -> bool {
        self.heldout.iter().any(|h| h == id)
    }

    /// Every heldout id must name a known subject, once.
    pub fn check<'a>(&self, subjects: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let known: BTreeSet<&str> = subjects.into_iter().collect();
        let mut seen = BTreeSet::new();
        for h in &self.heldout {
            if !seen.insert(h.as_str()) {
                return Err(Error::InvalidArgument(format!("heldout subject {h:?} listed twice")));
            }
            if !known.contains(h.as_str()) {
                return Err(Error::UnknownSubject(h.clone()));
            }
        }
        Ok(())
    }
}

/// Partitions sessions into (train, test) by subject id.
pub fn split_by_subject(sessions: Vec<Session>, spec: &SplitSpec) -> Result<(Vec<Session>, Vec<Session>)> {
    spec.check(sessions.iter().map(|s| s.subject_id.as_str()))?;
    Ok(sessions.into_iter().partition(|s| !spec.is_heldout(&s.subject_id)))
}
