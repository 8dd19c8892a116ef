//! Multi-subject corpus plans and the schedule builder behind them.
//!
//! The builder steps its own [`Engine`] through every action it appends, so
//! it always knows what is held and where everything is, and only schedules
//! actions the actor can perform from that state. Feasibility-driven walks
//! toward out-of-reach objects are inserted as ordinary `walk` actions.
//!
//! Each decision takes the least-used feasible verb. Builder draws, in
//! order per decision: tie among least-used verbs, candidate object (and, when a
//! held and an unheld candidate both exist, which pool), duration, walk goal
//! where one is needed, trailing gap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::session::{Aesthetic, ObjectClass};
use crate::verb::Verb;

use super::kinematics::{clamp_goal, walk_time, Engine, Kinematic, ResolvedAction, HEAD_ID};
use super::narration::NarrationProfile;
use super::scene::{Scene, ROOM_HALF};
use super::{derive_seed, run_action, ActionTemplate, SimConfig, STREAM_SCHEDULE, STREAM_SUBJECT};

/// Horizontal distance within which an object can be handled without walking.
pub const REACH: f64 = 0.8;
/// Distance from an object at which an approach walk stops.
pub const STAND_OFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimPlan {
    pub subjects: usize,
    pub duration: f64,
    pub fps: f64,
    /// Verbs the builder may choose; approach walks are added regardless.
    pub verbs: Vec<Verb>,
    pub action_duration: [f64; 2],
    pub gap: [f64; 2],
    pub lead_in: f64,
    pub narration: NarrationProfile,
    pub seed: u64,
}

impl Default for SimPlan {
    fn default() -> Self {
        SimPlan {
            subjects: 18,
            duration: 300.0,
            fps: super::DEFAULT_FPS,
            verbs: Verb::ALL.to_vec(),
            action_duration: [4.0, 6.5],
            gap: [0.3, 1.0],
            lead_in: 0.5,
            narration: NarrationProfile::observed(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectSpec {
    pub id: String,
    pub aesthetic: Aesthetic,
    pub layout: u8,
}

impl SimPlan {
    pub fn validate(&self) -> Result<()> {
        let range_ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && 0.0 <= r[0] && r[0] <= r[1];
        if self.subjects == 0 {
            return Err(Error::Config("plan needs at least one subject".into()));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) || !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Config("plan duration and fps must be positive".into()));
        }
        if self.verbs.is_empty() {
            return Err(Error::Config("plan needs at least one verb".into()));
        }
        if !range_ok(self.action_duration) || self.action_duration[0] < 2.0 {
            return Err(Error::Config("action_duration must be an ordered range starting at 2 s or more".into()));
        }
        if !range_ok(self.gap) || !(self.lead_in >= 0.0) {
            return Err(Error::Config("gap must be an ordered non-negative range and lead_in non-negative".into()));
        }
        self.narration.validate()
    }

    /// Subjects alternate aesthetics and cycle through the three layouts in
    /// pairs, so `s01..s18` cover every condition three times.
    pub fn subject(&self, index: usize) -> SubjectSpec {
        SubjectSpec {
            id: format!("s{:02}", index + 1),
            aesthetic: if index.is_multiple_of(2) { Aesthetic::A } else { Aesthetic::B },
            layout: ((index / 2) % 3 + 1) as u8,
        }
    }

    pub fn subject_list(&self) -> Vec<SubjectSpec> {
        (0..self.subjects).map(|i| self.subject(i)).collect()
    }

    pub fn config_for(&self, index: usize) -> Result<SimConfig> {
        self.validate()?;
        if index >= self.subjects {
            return Err(Error::InvalidArgument(format!("subject index {index} out of {}", self.subjects)));
        }
        let spec = self.subject(index);
        let scene = Scene::kitchen(spec.aesthetic, spec.layout);
        let seed = derive_seed(self.seed, STREAM_SUBJECT, index as u64);
        let schedule = build_schedule(self, &scene, seed, derive_seed(self.seed, STREAM_SCHEDULE, index as u64))?;
        Ok(SimConfig {
            subject_id: spec.id,
            aesthetic: spec.aesthetic,
            layout: spec.layout,
            duration: self.duration,
            fps: self.fps,
            scene,
            schedule,
            narration: self.narration.clone(),
            seed,
        })
    }

    pub fn configs(&self) -> Result<Vec<SimConfig>> {
        (0..self.subjects).map(|i| self.config_for(i)).collect()
    }
}

fn throwable(c: ObjectClass) -> bool {
    c == ObjectClass::Ball || c.is_toy()
}

fn washable(c: ObjectClass) -> bool {
    use ObjectClass::*;
    matches!(c, Cup | Bowl | Fork | Knife | Spoon | Apple | Banana)
}

fn edible(c: ObjectClass) -> bool {
    matches!(c, ObjectClass::Apple | ObjectClass::Banana)
}

fn horizontal(a: Vec3, b: Vec3) -> f64 {
    ((a.x - b.x).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

/// Standing point `STAND_OFF` short of `spot` on the line from the body.
fn approach_goal(from: Vec3, spot: Vec3) -> Vec3 {
    let d = horizontal(from, spot);
    let dir = Vec3::new(spot.x - from.x, 0.0, spot.z - from.z) * (1.0 / d.max(1e-9));
    clamp_goal(Vec3::new(spot.x, 0.0, spot.z) - dir * STAND_OFF)
}

struct Step {
    verb: Verb,
    object: usize,
    /// Walk to this point first.
    approach: Option<Vec3>,
    /// Walking goal for locomotion verbs.
    target: Option<Vec3>,
}

struct Builder<'a> {
    plan: &'a SimPlan,
    engine: Engine,
    rng: ChaCha8Rng,
    seed: u64,
    n_frames: usize,
    head: usize,
    door: Option<usize>,
    templates: Vec<ActionTemplate>,
}

fn build_schedule(plan: &SimPlan, scene: &Scene, config_seed: u64, schedule_seed: u64) -> Result<Vec<ActionTemplate>> {
    let engine = Engine::new(scene, plan.fps)?;
    let head = engine.object_index(HEAD_ID).expect("engine adds the head");
    let door = engine.objects().iter().position(|o| o.class == ObjectClass::Door);
    let mut b = Builder {
        plan,
        engine,
        rng: ChaCha8Rng::seed_from_u64(schedule_seed),
        seed: config_seed,
        n_frames: (plan.duration * plan.fps).round() as usize,
        head,
        door,
        templates: Vec::new(),
    };
    let mut t = plan.lead_in;
    let mut failures = 0;
    while t < plan.duration && failures < 20 {
        let Some(step) = b.choose()? else { break };
        match b.append(step, t)? {
            Some(next) => {
                t = next;
                failures = 0;
            }
            None => failures += 1,
        }
    }
    Ok(b.templates)
}

impl Builder<'_> {
    fn movable(&self) -> impl Iterator<Item = usize> + '_ {
        self.engine.objects().iter().enumerate().filter(|(_, o)| o.movable && !o.class.is_body()).map(|(i, _)| i)
    }

    fn count(&self, verb: Verb) -> usize {
        self.templates.iter().filter(|t| t.verb == verb).count()
    }

    fn class(&self, i: usize) -> ObjectClass {
        self.engine.objects()[i].class
    }

    fn held(&self, i: usize) -> bool {
        self.engine.holder_of(i).is_some()
    }

    fn candidates(&self, verb: Verb) -> (Vec<usize>, Vec<usize>) {
        let kind = Kinematic::for_verb(verb);
        let free = self.engine.free_hand().is_some();
        let fits = |c: ObjectClass| match verb {
            Verb::Throw | Verb::Play => throwable(c),
            Verb::Wash => washable(c),
            Verb::Eat => edible(c),
            _ => true,
        };
        let held: Vec<usize> = if kind.requires_held() {
            self.movable().filter(|&i| self.held(i) && fits(self.class(i))).collect()
        } else {
            Vec::new()
        };
        let unheld: Vec<usize> =
            if free { self.movable().filter(|&i| !self.held(i) && fits(self.class(i))).collect() } else { Vec::new() };
        (held, unheld)
    }

    fn random_goal(&mut self) -> Vec3 {
        let from = self.engine.body().pos;
        let lim = ROOM_HALF - 1.0;
        let mut goal = from;
        for _ in 0..10 {
            goal = Vec3::new(self.rng.random_range(-lim..lim), 0.0, self.rng.random_range(-lim..lim));
            if horizontal(goal, from) >= 1.5 {
                break;
            }
        }
        clamp_goal(goal)
    }

    fn choose(&mut self) -> Result<Option<Step>> {
        let feasible: Vec<Verb> = self
            .plan
            .verbs
            .iter()
            .copied()
            .filter(|&v| match Kinematic::for_verb(v) {
                Kinematic::Walk | Kinematic::Go => true,
                Kinematic::Open => self.door.is_some() && self.engine.free_hand().is_some(),
                _ => {
                    let (h, u) = self.candidates(v);
                    !h.is_empty() || !u.is_empty()
                }
            })
            .collect();
        if feasible.is_empty() {
            return Ok(None);
        }
        // the least-used feasible verb keeps corpus counts balanced
        let least = feasible.iter().map(|v| self.count(*v)).min().expect("non-empty");
        let pool: Vec<Verb> = feasible.into_iter().filter(|v| self.count(*v) == least).collect();
        let verb = pool[self.rng.random_range(0..pool.len())];
        let kind = Kinematic::for_verb(verb);
        let body = self.engine.body();
        if kind.is_locomotion() {
            let goal = self.random_goal();
            return Ok(Some(Step { verb, object: self.head, approach: None, target: Some(goal) }));
        }
        let object = if kind == Kinematic::Open {
            self.door.expect("checked above")
        } else {
            let (held, unheld) = self.candidates(verb);
            let pool = if !held.is_empty() && (unheld.is_empty() || self.rng.random_bool(0.7)) { held } else { unheld };
            pool[self.rng.random_range(0..pool.len())]
        };
        let mut approach = None;
        if !self.held(object) {
            let pos = self.engine.states()[object].pos;
            if horizontal(pos, body.pos) > REACH {
                approach = Some(approach_goal(body.pos, pos));
            }
        }
        if kind == Kinematic::Wash {
            let sink = self.engine.sink().ok_or_else(|| Error::Config("scene has no sink".into()))?;
            let from = approach.unwrap_or(body.pos);
            if horizontal(sink, from) > REACH {
                approach = Some(approach_goal(from, sink));
            }
        }
        if kind == Kinematic::Throw {
            // face the room center so the landing point stays inside
            let from = approach.unwrap_or(body.pos);
            let facing = match approach {
                Some(g) if horizontal(g, body.pos) > 1e-6 => (g - body.pos) * (1.0 / horizontal(g, body.pos)),
                _ => body.forward(),
            };
            let landing = from + facing * 3.3;
            if landing.x.abs() > ROOM_HALF - 0.1 || landing.z.abs() > ROOM_HALF - 0.1 {
                if approach.is_some() {
                    // reach the object first and decide again from there
                    return Ok(Some(Step { verb: Verb::Walk, object: self.head, approach: None, target: approach }));
                }
                // a short step toward the room center turns the body around
                let d = horizontal(from, Vec3::ZERO);
                let dir = Vec3::new(-from.x, 0.0, -from.z) * (1.0 / d.max(1e-9));
                approach = Some(clamp_goal(from + dir * 0.3));
            }
        }
        Ok(Some(Step { verb, object, approach, target: None }))
    }

    /// Appends the step's actions if they fit; returns the next free time.
    fn append(&mut self, step: Step, t: f64) -> Result<Option<f64>> {
        let [d0, d1] = self.plan.action_duration;
        let duration = if d1 > d0 { self.rng.random_range(d0..d1) } else { d0 };
        let body = self.engine.body();
        let mut actions = Vec::new();
        let mut start = t;
        if let Some(goal) = step.approach {
            let dur = walk_time(body, goal);
            actions.push((Verb::Walk, self.head, start, dur, Some(goal)));
            start += dur + self.gap();
        }
        // locomotion steps never carry an approach
        let dur = match step.target {
            Some(goal) => walk_time(body, goal),
            None => duration,
        };
        actions.push((step.verb, step.object, start, dur, step.target));
        let end = start + dur;
        if end > self.plan.duration {
            return Ok(None);
        }
        for (verb, object, start, dur, target) in actions {
            let action =
                ResolvedAction { verb, kind: Kinematic::for_verb(verb), object, start, end: start + dur, target };
            let index = self.templates.len();
            run_action(&mut self.engine, &action, index, self.seed, self.n_frames, |_| {})?;
            self.templates.push(ActionTemplate {
                verb,
                object: self.engine.objects()[object].id.clone(),
                duration: dur,
                kind: None,
                start: Some(start),
                target,
            });
        }
        Ok(Some(end + self.gap()))
    }

    fn gap(&mut self) -> f64 {
        let [g0, g1] = self.plan.gap;
        if g1 > g0 {
            self.rng.random_range(g0..g1)
        } else {
            g0
        }
    }
}
