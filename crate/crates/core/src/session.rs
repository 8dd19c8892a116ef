//! Recorded sessions: object poses per frame, the word-level transcript, and
//! ground-truth action annotations.
//!
//! On disk a session is one canonical JSON document (see `docs/session-schema.md`).
//! Canonical form means compact output, keys in a fixed order, per-frame
//! states keyed by object id in sorted order, and every float rounded to nine
//! significant digits, so equal sessions serialize to equal bytes.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::ser::{SerializeMap, SerializeSeq, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{self, FrustumParams, Quat, Vec3};
use crate::verb::Verb;

/// Quaternions in a recording may deviate from unit norm by this much.
pub const UNIT_QUAT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectClass {
    Apple,
    Ball,
    Banana,
    Bear,
    Book,
    Bowl,
    Bunny,
    Cup,
    Dinosaur,
    Doll,
    Fork,
    Knife,
    Lamp,
    Plane,
    Plant,
    Spoon,
    Truck,
    Head,
    LeftHand,
    RightHand,
    Cabinets,
    Ceiling,
    Chair,
    Clock,
    Counter,
    Dishwasher,
    Door,
    Floor,
    Fridge,
    Microwave,
    Oven,
    Pillar,
    Rug,
    Sink,
    Stove,
    Table,
    TrashBin,
    Wall,
    Window,
}

impl ObjectClass {
    pub fn is_body(self) -> bool {
        matches!(self, ObjectClass::Head | ObjectClass::LeftHand | ObjectClass::RightHand)
    }

    pub fn is_toy(self) -> bool {
        matches!(
            self,
            ObjectClass::Bear
                | ObjectClass::Bunny
                | ObjectClass::Doll
                | ObjectClass::Dinosaur
                | ObjectClass::Truck
                | ObjectClass::Plane
        )
    }

    /// The class name as it appears in JSON, which doubles as its noun.
    pub fn name(self) -> &'static str {
        use ObjectClass::*;
        match self {
            Apple => "apple",
            Ball => "ball",
            Banana => "banana",
            Bear => "bear",
            Book => "book",
            Bowl => "bowl",
            Bunny => "bunny",
            Cup => "cup",
            Dinosaur => "dinosaur",
            Doll => "doll",
            Fork => "fork",
            Knife => "knife",
            Lamp => "lamp",
            Plane => "plane",
            Plant => "plant",
            Spoon => "spoon",
            Truck => "truck",
            Head => "head",
            LeftHand => "left-hand",
            RightHand => "right-hand",
            Cabinets => "cabinets",
            Ceiling => "ceiling",
            Chair => "chair",
            Clock => "clock",
            Counter => "counter",
            Dishwasher => "dishwasher",
            Door => "door",
            Floor => "floor",
            Fridge => "fridge",
            Microwave => "microwave",
            Oven => "oven",
            Pillar => "pillar",
            Rug => "rug",
            Sink => "sink",
            Stove => "stove",
            Table => "table",
            TrashBin => "trash-bin",
            Wall => "wall",
            Window => "window",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectMeta {
    pub id: String,
    pub class: ObjectClass,
    pub movable: bool,
    /// Distance from the center to the faces of the bounding box, per axis.
    pub half_extents: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectState {
    pub pos: Vec3,
    pub rot: Quat,
}

/// One recorded frame. `states[i]` belongs to `Session::objects[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub t: f64,
    pub states: Vec<ObjectState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptToken {
    pub word: String,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionAnnotation {
    pub verb: Verb,
    pub start: f64,
    pub end: f64,
    pub object: String,
}

impl ActionAnnotation {
    /// True when `[start, end)` and `[a, b)` share any time.
    pub fn overlaps(&self, a: f64, b: f64) -> bool {
        self.start < b && a < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Aesthetic {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub subject_id: String,
    pub aesthetic: Aesthetic,
    pub layout: u8,
    pub fps: f64,
    pub objects: Vec<ObjectMeta>,
    pub frames: Vec<RawFrame>,
    pub transcript: Vec<TranscriptToken>,
    pub annotations: Vec<ActionAnnotation>,
}

/// Per-object features of one frame, all derived from raw poses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedState {
    pub pos: Vec3,
    pub vel: Vec3,
    pub rot: Quat,
    #[serde(rename = "relPos")]
    pub rel_pos: Vec3,
    #[serde(rename = "relVel")]
    pub rel_vel: Vec3,
    #[serde(rename = "relRot")]
    pub rel_rot: Quat,
    #[serde(rename = "inView")]
    pub in_view: bool,
}

/// `objects[i]` belongs to `Session::objects[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedFrame {
    pub t: f64,
    pub objects: Vec<DerivedState>,
}

/// A transcript token paired with the frame it is anchored to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedWord<'a> {
    pub token_index: usize,
    pub token: &'a TranscriptToken,
    pub frame: usize,
}

impl Session {
    /// Recording length in seconds, `frames / fps`.
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn head_index(&self) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| o.class == ObjectClass::Head)
            .ok_or_else(|| Error::Schema("session has no head object".into()))
    }

    /// Checks every structural invariant of a session.
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Schema(format!("fps must be positive, got {}", self.fps)));
        }
        if !(1..=3).contains(&self.layout) {
            return Err(Error::Schema(format!("layout must be 1..=3, got {}", self.layout)));
        }
        let mut seen = HashSet::new();
        for (i, o) in self.objects.iter().enumerate() {
            if !seen.insert(o.id.as_str()) {
                return Err(Error::Schema(format!("objects[{i}]: duplicate id {:?}", o.id)));
            }
            let he = o.half_extents;
            if !he.is_finite() || he.x < 0.0 || he.y < 0.0 || he.z < 0.0 {
                return Err(Error::Schema(format!("objects[{i}].half_extents must be finite and non-negative")));
            }
            if o.class.is_body() && !o.movable {
                return Err(Error::Schema(format!("objects[{i}]: body part {:?} must be movable", o.id)));
            }
        }
        for class in [ObjectClass::Head, ObjectClass::LeftHand, ObjectClass::RightHand] {
            let n = self.objects.iter().filter(|o| o.class == class).count();
            if n != 1 {
                return Err(Error::Schema(format!("expected exactly one {class} object, found {n}")));
            }
        }
        let mut prev_t = f64::NEG_INFINITY;
        for (fi, frame) in self.frames.iter().enumerate() {
            if !frame.t.is_finite() {
                return Err(frame_err(fi, "t", "timestamp is not finite"));
            }
            if frame.t <= prev_t {
                return Err(frame_err(fi, "t", format!("timestamp {} does not increase (previous {prev_t})", frame.t)));
            }
            prev_t = frame.t;
            if frame.states.len() != self.objects.len() {
                return Err(frame_err(
                    fi,
                    "states",
                    format!("{} states for {} objects", frame.states.len(), self.objects.len()),
                ));
            }
            for (st, meta) in frame.states.iter().zip(&self.objects) {
                if !st.pos.is_finite() {
                    return Err(frame_err(fi, format!("states.{}.pos", meta.id), "position is not finite"));
                }
                if !st.rot.is_finite() {
                    return Err(frame_err(fi, format!("states.{}.rot", meta.id), "rotation is not finite"));
                }
                let n = st.rot.norm();
                if (n - 1.0).abs() > UNIT_QUAT_TOLERANCE {
                    return Err(frame_err(
                        fi,
                        format!("states.{}.rot", meta.id),
                        format!("quaternion norm {n} is not 1"),
                    ));
                }
            }
        }
        let mut prev_start = f64::NEG_INFINITY;
        for (i, tok) in self.transcript.iter().enumerate() {
            if !(tok.start.is_finite() && tok.end.is_finite()) || tok.start > tok.end {
                return Err(Error::Schema(format!("transcript[{i}]: need start <= end")));
            }
            if tok.start < prev_start {
                return Err(Error::Schema(format!("transcript[{i}]: tokens must be ordered by start")));
            }
            if tok.word.chars().any(char::is_uppercase) {
                return Err(Error::Schema(format!("transcript[{i}]: word {:?} must be lowercase", tok.word)));
            }
            prev_start = tok.start;
        }
        for (i, a) in self.annotations.iter().enumerate() {
            if !(a.start.is_finite() && a.end.is_finite()) || a.start >= a.end {
                return Err(Error::Schema(format!("annotations[{i}]: need start < end")));
            }
            if self.object_index(&a.object).is_none() {
                return Err(Error::Schema(format!("annotations[{i}]: unknown object {:?}", a.object)));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Session> {
        let wire: WireSession = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        let session = wire.into_session()?;
        session.validate()?;
        Ok(session)
    }

    /// Canonical JSON bytes.
    pub fn to_canonical_json(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_canonical(&mut out)?;
        Ok(out)
    }

    pub fn write_canonical<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, &CanonicalSession(self))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_canonical(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn frame_err(frame: usize, field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Frame { frame, field: field.into(), message: message.into() }
}

pub fn load_session(path: impl AsRef<Path>) -> Result<Session> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Session::from_json_str(&text).map_err(|e| match e {
        Error::Schema(m) => Error::Schema(format!("{}: {m}", path.as_ref().display())),
        other => other,
    })
}

/// Rounds to nine significant digits; negative zero becomes zero.
pub fn canonical_float(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireSession {
    subject_id: String,
    aesthetic: Aesthetic,
    layout: u8,
    fps: f64,
    objects: Vec<ObjectMeta>,
    frames: Vec<WireFrame>,
    transcript: Vec<TranscriptToken>,
    annotations: Vec<ActionAnnotation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireFrame {
    t: f64,
    states: BTreeMap<String, ObjectState>,
}

impl WireSession {
    fn into_session(self) -> Result<Session> {
        let index: BTreeMap<&str, usize> = self.objects.iter().enumerate().map(|(i, o)| (o.id.as_str(), i)).collect();
        let mut frames = Vec::with_capacity(self.frames.len());
        for (fi, wf) in self.frames.into_iter().enumerate() {
            let mut states: Vec<Option<ObjectState>> = vec![None; self.objects.len()];
            for (id, st) in wf.states {
                let Some(&i) = index.get(id.as_str()) else {
                    return Err(frame_err(fi, format!("states.{id}"), "unknown object id"));
                };
                states[i] = Some(st);
            }
            let states = states
                .into_iter()
                .zip(&self.objects)
                .map(|(s, o)| s.ok_or_else(|| frame_err(fi, format!("states.{}", o.id), "missing state")))
                .collect::<Result<Vec<_>>>()?;
            frames.push(RawFrame { t: wf.t, states });
        }
        Ok(Session {
            subject_id: self.subject_id,
            aesthetic: self.aesthetic,
            layout: self.layout,
            fps: self.fps,
            objects: self.objects,
            frames,
            transcript: self.transcript,
            annotations: self.annotations,
        })
    }
}

struct CanonicalSession<'a>(&'a Session);
struct CanonicalFrames<'a>(&'a Session, &'a [(&'a str, usize)]);
struct CanonicalStates<'a>(&'a RawFrame, &'a [(&'a str, usize)]);
struct F(f64);
struct V3(Vec3);
struct Q(Quat);

impl Serialize for F {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(canonical_float(self.0))
    }
}

impl Serialize for V3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [F(self.0.x), F(self.0.y), F(self.0.z)].serialize(s)
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [F(self.0.x), F(self.0.y), F(self.0.z), F(self.0.w)].serialize(s)
    }
}

#[derive(Serialize)]
struct CanonicalObject<'a> {
    id: &'a str,
    class: ObjectClass,
    movable: bool,
    half_extents: V3,
}

#[derive(Serialize)]
struct CanonicalToken<'a> {
    word: &'a str,
    start: F,
    end: F,
}

#[derive(Serialize)]
struct CanonicalAnnotation<'a> {
    verb: Verb,
    start: F,
    end: F,
    object: &'a str,
}

#[derive(Serialize)]
struct CanonicalState {
    pos: V3,
    rot: Q,
}

impl Serialize for CanonicalSession<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let sess = self.0;
        let mut order: Vec<(&str, usize)> = sess.objects.iter().enumerate().map(|(i, o)| (o.id.as_str(), i)).collect();
        order.sort();
        let objects: Vec<CanonicalObject> = sess
            .objects
            .iter()
            .map(|o| CanonicalObject {
                id: &o.id,
                class: o.class,
                movable: o.movable,
                half_extents: V3(o.half_extents),
            })
            .collect();
        let transcript: Vec<CanonicalToken> = sess
            .transcript
            .iter()
            .map(|t| CanonicalToken { word: &t.word, start: F(t.start), end: F(t.end) })
            .collect();
        let annotations: Vec<CanonicalAnnotation> = sess
            .annotations
            .iter()
            .map(|a| CanonicalAnnotation { verb: a.verb, start: F(a.start), end: F(a.end), object: &a.object })
            .collect();
        let mut st = s.serialize_struct("Session", 8)?;
        st.serialize_field("subject_id", &sess.subject_id)?;
        st.serialize_field("aesthetic", &sess.aesthetic)?;
        st.serialize_field("layout", &sess.layout)?;
        st.serialize_field("fps", &F(sess.fps))?;
        st.serialize_field("objects", &objects)?;
        st.serialize_field("frames", &CanonicalFrames(sess, &order))?;
        st.serialize_field("transcript", &transcript)?;
        st.serialize_field("annotations", &annotations)?;
        st.end()
    }
}

impl Serialize for CanonicalFrames<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Frame<'a> {
            t: F,
            states: CanonicalStates<'a>,
        }
        let mut seq = s.serialize_seq(Some(self.0.frames.len()))?;
        for f in &self.0.frames {
            seq.serialize_element(&Frame { t: F(f.t), states: CanonicalStates(f, self.1) })?;
        }
        seq.end()
    }
}

impl Serialize for CanonicalStates<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.1.len()))?;
        for &(id, i) in self.1 {
            let st = self.0.states[i];
            map.serialize_entry(id, &CanonicalState { pos: V3(st.pos), rot: Q(st.rot) })?;
        }
        map.end()
    }
}

/// Derived features of a single frame against that frame's head state.
pub fn derive_frame(session: &Session, index: usize, frustum: &FrustumParams) -> Result<DerivedFrame> {
    let head = session.head_index()?;
    let frame =
        session.frames.get(index).ok_or_else(|| Error::InvalidArgument(format!("frame {index} out of range")))?;
    let prev = if index > 0 { Some(&session.frames[index - 1]) } else { None };
    let velocity = |i: usize| -> Vec3 {
        match prev {
            Some(p) => geometry::backward_difference(p.states[i].pos, frame.states[i].pos, session.fps),
            None => Vec3::ZERO,
        }
    };
    let head_state = frame.states[head];
    let head_vel = velocity(head);
    let inv_head = geometry::quat_inverse(head_state.rot)?;
    let mut objects = Vec::with_capacity(session.objects.len());
    for (i, (st, meta)) in frame.states.iter().zip(&session.objects).enumerate() {
        let vel = velocity(i);
        objects.push(DerivedState {
            pos: st.pos,
            vel,
            rot: st.rot,
            rel_pos: geometry::rel_pos(head_state.pos, head_state.rot, st.pos)?,
            rel_vel: geometry::quat_rotate(inv_head, vel - head_vel)?,
            rel_rot: geometry::rel_rot(head_state.rot, st.rot)?,
            in_view: geometry::in_view(head_state.pos, head_state.rot, st.pos, meta.half_extents, frustum, meta.class)?,
        });
    }
    Ok(DerivedFrame { t: frame.t, objects })
}

pub fn derive_features(session: &Session) -> Result<Vec<DerivedFrame>> {
    derive_features_with(session, &FrustumParams::default())
}

pub fn derive_features_with(session: &Session, frustum: &FrustumParams) -> Result<Vec<DerivedFrame>> {
    (0..session.frames.len()).map(|i| derive_frame(session, i, frustum)).collect()
}

/// Anchors each token at frame `round(start · fps)`.
pub fn align_words(session: &Session) -> Result<Vec<AlignedWord<'_>>> {
    let n = session.frames.len();
    session
        .transcript
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            let frame = (tok.start * session.fps).round();
            if n == 0 || frame < 0.0 || frame >= n as f64 {
                return Err(Error::Alignment {
                    index: i,
                    word: tok.word.clone(),
                    start: tok.start,
                    last: n.saturating_sub(1) as f64 / session.fps,
                });
            }
            Ok(AlignedWord { token_index: i, token: tok, frame: frame as usize })
        })
        .collect()
}
