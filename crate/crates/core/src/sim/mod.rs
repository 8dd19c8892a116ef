//! Seeded synthetic kitchen sessions.
//!
//! A [`SimConfig`] fixes the scene, an ordered action schedule and a
//! narration profile. [`simulate_session`] replays the schedule through the
//! kinematic [`Engine`], records every frame, annotates every action and
//! narrates the result. All randomness comes from ChaCha8 streams derived
//! from the config seed with [`derive_seed`].

pub mod kinematics;
pub mod narration;
pub mod plan;
pub mod scene;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::session::{canonical_float, ActionAnnotation, Aesthetic, RawFrame, Session, TranscriptToken};
use crate::verb::Verb;

pub use kinematics::{gen_action_trajectory, Engine, Hand, Kinematic, PoseSample, PoseSegment, ResolvedAction};
pub use narration::{emit_narration, NarrationProfile};
pub use plan::{SimPlan, SubjectSpec};
pub use scene::{Placement, Scene};

pub const DEFAULT_FPS: f64 = 90.0;
/// Gap before an action whose template gives no start time.
pub const DEFAULT_GAP: f64 = 0.5;

pub const STREAM_ACTION: u64 = 1;
pub const STREAM_NARRATION: u64 = 2;
pub const STREAM_SCHEDULE: u64 = 3;
pub const STREAM_SUBJECT: u64 = 4;

/// Folds `stream` and `index` into `seed` with splitmix64 finalizers.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ stream) ^ index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionTemplate {
    pub verb: Verb,
    pub object: String,
    pub duration: f64,
    /// Defaults to the verb's own kinematics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kinematic>,
    /// Defaults to `DEFAULT_GAP` after the previous action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    /// Destination for walking and putting down.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub subject_id: String,
    pub aesthetic: Aesthetic,
    pub layout: u8,
    pub duration: f64,
    pub fps: f64,
    pub scene: Scene,
    pub schedule: Vec<ActionTemplate>,
    pub narration: NarrationProfile,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Config(format!("fps must be positive, got {}", self.fps)));
        }
        if !(1..=3).contains(&self.layout) {
            return Err(Error::Config(format!("layout must be 1..=3, got {}", self.layout)));
        }
        for (i, a) in self.schedule.iter().enumerate() {
            if !(a.duration > 0.0 && a.duration.is_finite()) {
                return Err(Error::Config(format!("schedule[{i}]: duration must be positive")));
            }
        }
        self.narration.validate()
    }
}

/// Places each template on the timeline and checks that the single actor
/// never does two things at once.
pub fn resolve_schedule(config: &SimConfig, engine: &Engine) -> Result<Vec<ResolvedAction>> {
    let mut out: Vec<ResolvedAction> = Vec::with_capacity(config.schedule.len());
    for (i, a) in config.schedule.iter().enumerate() {
        let object = engine
            .object_index(&a.object)
            .ok_or_else(|| Error::UnknownObject(format!("schedule[{i}]: {}", a.object)))?;
        let start = a.start.unwrap_or_else(|| out.last().map_or(DEFAULT_GAP, |p| p.end + DEFAULT_GAP));
        let end = start + a.duration;
        if start < 0.0 || end > config.duration + 1e-9 {
            return Err(Error::InfeasibleSchedule(format!(
                "schedule[{i}] ({} {}) spans [{start:.3}, {end:.3}] outside the {:.3}s session",
                a.verb, a.object, config.duration
            )));
        }
        if let Some((j, prev)) = out.iter().enumerate().find(|(_, p)| p.start < end && start < p.end) {
            let what = if prev.object == object { "on the same object" } else { "by the same actor" };
            return Err(Error::InfeasibleSchedule(format!(
                "schedule[{i}] ({} {}) overlaps schedule[{j}] ({}) {what}",
                a.verb, a.object, prev.verb
            )));
        }
        if out.last().is_some_and(|p| p.start > start) {
            return Err(Error::InfeasibleSchedule(format!("schedule[{i}] starts before its predecessor")));
        }
        let kind = a.kind.unwrap_or_else(|| Kinematic::for_verb(a.verb));
        let obj_class = engine.objects()[object].class;
        if !kind.is_locomotion()
            && (!engine.objects()[object].movable || obj_class.is_body())
            && kind != Kinematic::Open
        {
            return Err(Error::InfeasibleSchedule(format!(
                "schedule[{i}]: {} needs a movable non-body object, got {}",
                a.verb, a.object
            )));
        }
        out.push(ResolvedAction { verb: a.verb, kind, object, start, end, target: a.target });
    }
    Ok(out)
}

/// Frame range `[first, last)` sampled inside `[start, end)`.
pub fn frame_span(start: f64, end: f64, fps: f64, n_frames: usize) -> (usize, usize) {
    let f = |t: f64| ((t * fps - 1e-9).ceil().max(0.0) as usize).min(n_frames);
    (f(start), f(end))
}

/// Advances `engine` through the frames of one action, calling `emit` per
/// frame. Recording and schedule planning both go through here so they see
/// identical world states.
pub fn run_action(
    engine: &mut Engine,
    action: &ResolvedAction,
    index: usize,
    seed: u64,
    n_frames: usize,
    emit: impl FnMut(&[crate::session::ObjectState]),
) -> Result<()> {
    let fps = engine.fps();
    let (sf, ef) = frame_span(action.start, action.end, fps, n_frames);
    let offset = sf as f64 / fps - action.start;
    engine.run(action, offset, ef - sf, derive_seed(seed, STREAM_ACTION, index as u64), emit)
}

pub fn simulate_session(config: &SimConfig) -> Result<Session> {
    config.validate()?;
    let mut engine = Engine::new(&config.scene, config.fps)?;
    let actions = resolve_schedule(config, &engine)?;
    let n = (config.duration * config.fps).round() as usize;
    let mut frames: Vec<RawFrame> = Vec::with_capacity(n);
    let push = |frames: &mut Vec<RawFrame>, states: &[crate::session::ObjectState]| {
        let i = frames.len();
        frames.push(RawFrame { t: i as f64 / config.fps, states: states.to_vec() });
    };
    for (i, action) in actions.iter().enumerate() {
        let (sf, _) = frame_span(action.start, action.end, config.fps, n);
        while frames.len() < sf {
            let states = engine.states().to_vec();
            push(&mut frames, &states);
        }
        run_action(&mut engine, action, i, config.seed, n, |s| push(&mut frames, s))?;
    }
    while frames.len() < n {
        let states = engine.states().to_vec();
        push(&mut frames, &states);
    }
    let objects = engine.objects().to_vec();
    let annotations: Vec<ActionAnnotation> = actions
        .iter()
        .map(|a| ActionAnnotation {
            verb: a.verb,
            start: canonical_float(a.start),
            end: canonical_float(a.end),
            object: objects[a.object].id.clone(),
        })
        .collect();
    // times are stored at canonical precision so a saved session reloads equal
    let transcript: Vec<TranscriptToken> = emit_narration(
        &annotations,
        &objects,
        config.duration,
        &config.narration,
        derive_seed(config.seed, STREAM_NARRATION, 0),
    )?
    .into_iter()
    .map(|t| TranscriptToken { start: canonical_float(t.start), end: canonical_float(t.end), ..t })
    .collect();
    let session = Session {
        subject_id: config.subject_id.clone(),
        aesthetic: config.aesthetic,
        layout: config.layout,
        fps: config.fps,
        objects,
        frames,
        transcript,
        annotations,
    };
    session.validate()?;
    Ok(session)
}
