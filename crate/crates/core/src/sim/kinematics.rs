//! Scripted kinematics for each action kind, and the world engine that
//! replays a schedule frame by frame.
//!
//! Motions are minimum-jerk interpolations between key poses, ballistic arcs
//! for thrown and dropped objects, and sinusoids for washing and playing.
//! Nothing here is a physics simulation: the goal is a recognizable
//! kinematic signature per verb.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Quat, Vec3};
use crate::session::{ObjectClass, ObjectMeta, ObjectState};
use crate::verb::Verb;

use super::scene::{Scene, Surface, ROOM_HALF};

pub const GRAVITY: f64 = 9.81;
pub const FLOOR_Y: f64 = 0.0;
pub const HEAD_HEIGHT: f64 = 1.6;
/// Constant downward tilt of the head, radians.
pub const HEAD_PITCH: f64 = 0.35;
pub const WALK_SPEED: f64 = 1.0;
pub const TURN_RATE: f64 = PI;
/// Peak deviation of a held object from its hand during `hold`, per axis.
pub const HOLD_JITTER: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kinematic {
    PickUp,
    PutDown,
    Throw,
    Drop,
    Walk,
    Hold,
    Wash,
    Play,
    Get,
    Take,
    Go,
    Open,
    Eat,
    Give,
}

impl Kinematic {
    pub fn for_verb(verb: Verb) -> Kinematic {
        match verb {
            Verb::Pick => Kinematic::PickUp,
            Verb::Put => Kinematic::PutDown,
            Verb::Throw => Kinematic::Throw,
            Verb::Drop => Kinematic::Drop,
            Verb::Walk => Kinematic::Walk,
            Verb::Hold => Kinematic::Hold,
            Verb::Wash => Kinematic::Wash,
            Verb::Play => Kinematic::Play,
            Verb::Get => Kinematic::Get,
            Verb::Take => Kinematic::Take,
            Verb::Go => Kinematic::Go,
            Verb::Open => Kinematic::Open,
            Verb::Eat => Kinematic::Eat,
            Verb::Give => Kinematic::Give,
        }
    }

    pub fn is_locomotion(self) -> bool {
        matches!(self, Kinematic::Walk | Kinematic::Go)
    }

    pub fn is_pick_like(self) -> bool {
        matches!(self, Kinematic::PickUp | Kinematic::Get | Kinematic::Take | Kinematic::Eat | Kinematic::Give)
    }

    /// Kinds that act on an object already in hand; an unheld object is
    /// grabbed first.
    pub fn requires_held(self) -> bool {
        matches!(
            self,
            Kinematic::PutDown
                | Kinematic::Throw
                | Kinematic::Drop
                | Kinematic::Hold
                | Kinematic::Wash
                | Kinematic::Play
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    Left,
    Right,
}

impl Hand {
    fn side(self) -> f64 {
        match self {
            Hand::Left => -1.0,
            Hand::Right => 1.0,
        }
    }

    fn slot(self) -> usize {
        match self {
            Hand::Left => 0,
            Hand::Right => 1,
        }
    }
}

/// The participant's body frame: head position and facing yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub pos: Vec3,
    pub yaw: f64,
}

impl Body {
    pub fn yaw_rot(&self) -> Quat {
        Quat::from_axis_angle(Vec3::Y, self.yaw)
    }

    pub fn to_world(&self, offset: Vec3) -> Vec3 {
        self.pos + self.yaw_rot().rotate(offset)
    }

    pub fn to_local(&self, world: Vec3) -> Vec3 {
        self.yaw_rot().conjugate().rotate(world - self.pos)
    }

    pub fn forward(&self) -> Vec3 {
        self.yaw_rot().rotate(Vec3::Z)
    }

    pub fn head_state(&self) -> ObjectState {
        ObjectState { pos: self.pos, rot: Quat::from_yaw_pitch(self.yaw, HEAD_PITCH) }
    }
}

pub fn rest_offset(hand: Hand) -> Vec3 {
    Vec3::new(0.22 * hand.side(), -0.65, 0.25)
}

pub fn carry_offset(hand: Hand) -> Vec3 {
    Vec3::new(0.2 * hand.side(), -0.4, 0.4)
}

/// Pose of everything an action moves, at its start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActorState {
    pub body: Body,
    /// Hand that performs the action.
    pub hand: Hand,
    pub hand_pos: Vec3,
    pub other_hand_pos: Vec3,
    /// Target object; for locomotion this is the head.
    pub object: ObjectState,
    pub object_half_extents: Vec3,
    /// Whether the target object is already in `hand`.
    pub held: bool,
}

#[derive(Debug, Clone)]
pub struct TrajectoryParams<'a> {
    pub duration: f64,
    /// Time from action start to the first sampled frame.
    pub first_offset: f64,
    pub fps: f64,
    pub n_frames: usize,
    pub target: Option<Vec3>,
    pub surfaces: &'a [Surface],
    pub sink: Option<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub body: Body,
    pub hand: Vec3,
    pub other_hand: Vec3,
    pub object: ObjectState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseSegment {
    pub samples: Vec<PoseSample>,
    /// Whether the acting hand holds the target object when the action ends.
    pub held_at_end: bool,
}

type Motion = Box<dyn Fn(f64) -> PoseSample>;

/// Minimum-jerk profile on `[0, 1]`.
fn ease(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

fn phase(u: f64, a: f64, b: f64) -> f64 {
    ease((u - a) / (b - a))
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = (a + PI) % (2.0 * PI);
    if a < 0.0 {
        a += 2.0 * PI;
    }
    a - PI
}

/// Time for an object released at `height` with upward speed `vy` to fall
/// until its center reaches `floor`.
pub fn fall_time(height: f64, vy: f64, floor: f64) -> f64 {
    let drop = (height - floor).max(0.0);
    (vy + (vy * vy + 2.0 * GRAVITY * drop).sqrt()) / GRAVITY
}

fn placement_height(surfaces: &[Surface], x: f64, z: f64, half_y: f64) -> f64 {
    surfaces.iter().filter(|s| s.contains(x, z)).map(|s| s.top + half_y).fold(FLOOR_Y + half_y, f64::max)
}

/// Time a walk from `body` to `goal` needs: turn in place, then cover the
/// distance at `WALK_SPEED` on average, plus a short settle.
pub fn walk_time(body: Body, goal: Vec3) -> f64 {
    let delta = goal - body.pos;
    let dist = (delta.x * delta.x + delta.z * delta.z).sqrt();
    let turn = if dist > 1e-6 { wrap_angle(delta.x.atan2(delta.z) - body.yaw).abs() / TURN_RATE } else { 0.0 };
    turn + dist / WALK_SPEED + 0.3
}

/// Clamps a walking goal into the room at head height.
pub fn clamp_goal(goal: Vec3) -> Vec3 {
    let limit = ROOM_HALF - 0.2;
    Vec3::new(goal.x.clamp(-limit, limit), HEAD_HEIGHT, goal.z.clamp(-limit, limit))
}

/// Generates the poses of body, hands and target object over one action.
///
/// `seed` drives the only stochastic parts: throw speed, hold jitter phases,
/// and the play path. The same inputs always give the same segment.
pub fn gen_action_trajectory(
    kind: Kinematic,
    start: &ActorState,
    params: &TrajectoryParams<'_>,
    seed: u64,
) -> Result<PoseSegment> {
    if !(params.duration > 0.0) || !(params.fps > 0.0) {
        return Err(Error::InvalidArgument("trajectory needs positive duration and fps".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (motion, held_at_end) = plan(kind, start, params, params.duration, &mut rng)?;
    let samples = (0..params.n_frames).map(|j| motion(params.first_offset + j as f64 / params.fps)).collect();
    Ok(PoseSegment { samples, held_at_end })
}

fn plan(
    kind: Kinematic,
    s: &ActorState,
    p: &TrajectoryParams<'_>,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Motion, bool)> {
    if kind.requires_held() && !s.held {
        return plan_with_grab(kind, s, p, duration, rng);
    }
    let s = *s;
    let body = s.body;
    let other = s.other_hand_pos;
    let he = s.object_half_extents;
    let rot0 = s.object.rot;
    let sample = move |hand: Vec3, obj: Vec3| PoseSample {
        body,
        hand,
        other_hand: other,
        object: ObjectState { pos: obj, rot: rot0 },
    };
    let d = duration;
    match kind {
        k if k.is_pick_like() => {
            let side = s.hand.side();
            let o0 = s.object.pos;
            let h0 = s.hand_pos;
            let mut end = body.to_world(match k {
                Kinematic::PickUp => carry_offset(s.hand),
                Kinematic::Get => Vec3::new(0.15 * side, -0.55, 0.22),
                Kinematic::Take => Vec3::new(0.25 * side, -0.3, 0.3),
                Kinematic::Eat => Vec3::new(0.0, -0.1, 0.12),
                _ => Vec3::new(0.05 * side, -0.35, 0.65),
            });
            if k == Kinematic::PickUp {
                end.y = end.y.max(o0.y + 0.3);
            }
            let held = s.held;
            Ok((
                Box::new(move |t| {
                    let u = t / d;
                    if held {
                        let q = h0.lerp(end, ease(u));
                        sample(q, q)
                    } else if u < 0.35 {
                        sample(h0.lerp(o0, phase(u, 0.0, 0.35)), o0)
                    } else if u < 0.45 {
                        sample(o0, o0)
                    } else {
                        let q = o0.lerp(end, phase(u, 0.45, 1.0));
                        sample(q, q)
                    }
                }),
                true,
            ))
        }
        Kinematic::PutDown => {
            let s0 = s.object.pos;
            let place = match p.target {
                Some(t) => t,
                None => {
                    let spot = body.to_world(Vec3::new(0.0, 0.0, 0.45));
                    let mut y = placement_height(p.surfaces, spot.x, spot.z, he.y);
                    if y > s0.y - 0.2 {
                        y = FLOOR_Y + he.y;
                    }
                    Vec3::new(spot.x, y, spot.z)
                }
            };
            let rest = body.to_world(rest_offset(s.hand));
            Ok((
                Box::new(move |t| {
                    let u = t / d;
                    if u < 0.55 {
                        let q = s0.lerp(place, phase(u, 0.0, 0.55));
                        sample(q, q)
                    } else if u < 0.65 {
                        sample(place, place)
                    } else {
                        sample(place.lerp(rest, phase(u, 0.65, 1.0)), place)
                    }
                }),
                false,
            ))
        }
        Kinematic::Throw => {
            let s0 = s.object.pos;
            let local = body.to_local(s0);
            let windup = body.to_world(local + Vec3::new(0.0, 0.2, -0.15));
            let release = body.to_world(Vec3::new(0.15 * s.hand.side(), -0.05, 0.35));
            let speed = rng.random_range(0.9..1.1);
            let v0 = body.yaw_rot().rotate(Vec3::new(0.0, 3.0 * speed, 3.0 * speed));
            let flight = fall_time(release.y, v0.y, FLOOR_Y + he.y);
            let t_release = 0.8f64.min(d - flight - 0.1);
            if t_release < 0.3 {
                return Err(Error::InfeasibleSchedule(format!(
                    "throw lasting {d:.2}s is too short for a {flight:.2}s flight"
                )));
            }
            let landing = {
                let mut q = release + v0 * flight;
                q.y = FLOOR_Y + he.y;
                q
            };
            let rest = body.to_world(rest_offset(s.hand));
            let spin_axis = body.yaw_rot().rotate(Vec3::X);
            Ok((
                Box::new(move |t| {
                    if t < t_release {
                        let w = 0.6 * t_release;
                        let q = if t < w {
                            s0.lerp(windup, ease(t / w))
                        } else {
                            windup.lerp(release, ease((t - w) / (t_release - w)))
                        };
                        return sample(q, q);
                    }
                    let hand = release.lerp(rest, ease((t - t_release) / 0.6));
                    let dt = (t - t_release).min(flight);
                    let mut obj = release + v0 * dt;
                    obj.y -= 0.5 * GRAVITY * dt * dt;
                    if dt >= flight {
                        obj = landing;
                    }
                    let rot = Quat::from_axis_angle(spin_axis, 6.0 * dt) * rot0;
                    PoseSample { body, hand, other_hand: other, object: ObjectState { pos: obj, rot } }
                }),
                false,
            ))
        }
        Kinematic::Drop => {
            let s0 = s.object.pos;
            let floor = FLOOR_Y + he.y;
            let fall = fall_time(s0.y, 0.0, floor);
            if fall > d {
                return Err(Error::InfeasibleSchedule(format!("drop lasting {d:.2}s ends mid-fall")));
            }
            let rest = body.to_world(rest_offset(s.hand));
            let back = (d - 0.4).clamp(1e-3, 0.8);
            Ok((
                Box::new(move |t| {
                    let dt = t.min(fall);
                    let mut obj = s0;
                    obj.y = if t >= fall { floor } else { s0.y - 0.5 * GRAVITY * dt * dt };
                    let hand = if t < 0.4 { s0 } else { s0.lerp(rest, ease((t - 0.4) / back)) };
                    sample(hand, obj)
                }),
                false,
            ))
        }
        Kinematic::Walk | Kinematic::Go => {
            let hand_local = body.to_local(s.hand_pos);
            let other_local = body.to_local(s.other_hand_pos);
            let goal = p.target.unwrap_or_else(|| body.to_world(Vec3::new(0.0, 0.0, (0.7 * d * WALK_SPEED).min(3.0))));
            let goal = clamp_goal(goal);
            let delta = goal - body.pos;
            let dist = (delta.x * delta.x + delta.z * delta.z).sqrt();
            let dyaw = if dist > 1e-6 { wrap_angle(delta.x.atan2(delta.z) - body.yaw) } else { 0.0 };
            let turn = dyaw.abs() / TURN_RATE;
            let move_time = (dist / WALK_SPEED).min((d - turn - 0.1).max(0.0));
            let reach = move_time * WALK_SPEED;
            let dir = if dist > 1e-6 { delta * (1.0 / dist) } else { Vec3::ZERO };
            Ok((
                Box::new(move |t| {
                    let yaw = if turn > 0.0 { body.yaw + dyaw * ease(t / turn) } else { body.yaw + dyaw };
                    let tm = t - turn;
                    let (along, bob) = if move_time > 0.0 && tm > 0.0 {
                        let u = (tm / move_time).min(1.0);
                        (reach * ease(u), 0.02 * (2.0 * PI * 2.0 * tm).sin() * (PI * u).sin())
                    } else {
                        (0.0, 0.0)
                    };
                    let mut pos = body.pos + dir * along;
                    pos.y = body.pos.y + bob;
                    let b = Body { pos, yaw };
                    PoseSample {
                        body: b,
                        hand: b.to_world(hand_local),
                        other_hand: b.to_world(other_local),
                        object: b.head_state(),
                    }
                }),
                s.held,
            ))
        }
        Kinematic::Hold => {
            let s0 = s.object.pos;
            let present = body.to_world(Vec3::new(0.1 * s.hand.side(), -0.35, 0.45));
            let freqs: [f64; 3] = std::array::from_fn(|_| rng.random_range(1.0..3.0));
            let phases: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
            Ok((
                Box::new(move |t| {
                    let u = t / d;
                    let hand = s0.lerp(present, phase(u, 0.0, 0.3));
                    let env = (PI * u.clamp(0.0, 1.0)).sin();
                    let j = |i: usize| HOLD_JITTER * env * (2.0 * PI * freqs[i] * t + phases[i]).sin();
                    sample(hand, hand + Vec3::new(j(0), j(1), j(2)))
                }),
                true,
            ))
        }
        Kinematic::Wash => {
            let s0 = s.object.pos;
            let basin = match p.sink {
                Some(k) if (Vec3::new(k.x - body.pos.x, 0.0, k.z - body.pos.z)).norm() < 1.0 => k,
                _ => body.to_world(Vec3::new(0.0, -0.6, 0.45)),
            };
            let carry = body.to_world(carry_offset(s.hand));
            let yaw = body.yaw_rot();
            let scrub = move |t: f64| {
                let tt = t - 0.2 * d;
                basin
                    + yaw.rotate(Vec3::new(
                        0.08 * (2.0 * PI * 1.5 * tt).sin(),
                        0.03 * (2.0 * PI * 3.0 * tt).sin(),
                        0.04 * (2.0 * PI * 0.75 * tt).sin(),
                    ))
            };
            let last = scrub(0.85 * d);
            Ok((
                Box::new(move |t| {
                    let u = t / d;
                    let q = if u < 0.2 {
                        s0.lerp(basin, phase(u, 0.0, 0.2))
                    } else if u < 0.85 {
                        scrub(t)
                    } else {
                        last.lerp(carry, phase(u, 0.85, 1.0))
                    };
                    sample(q, q)
                }),
                true,
            ))
        }
        Kinematic::Play => {
            let s0 = s.object.pos;
            let center = body.to_world(Vec3::new(0.1 * s.hand.side(), -0.5, 0.45));
            let carry = body.to_world(carry_offset(s.hand));
            let yaw = body.yaw_rot();
            let mut comp = [[0.0f64; 3]; 6];
            for c in comp.iter_mut() {
                *c = [rng.random_range(0.4..1.0), rng.random_range(0.0..2.0 * PI), 0.0];
            }
            let path = move |t: f64| {
                let axis = |i: usize| {
                    0.12 * (2.0 * PI * comp[2 * i][0] * t + comp[2 * i][1]).sin()
                        + 0.06 * (2.0 * PI * comp[2 * i + 1][0] * t + comp[2 * i + 1][1]).sin()
                };
                center + yaw.rotate(Vec3::new(axis(0), axis(1), axis(2)))
            };
            Ok((
                Box::new(move |t| {
                    let u = t / d;
                    let q = if u < 0.15 {
                        s0.lerp(path(t), phase(u, 0.0, 0.15))
                    } else if u < 0.85 {
                        path(t)
                    } else {
                        path(t).lerp(carry, phase(u, 0.85, 1.0))
                    };
                    let spin = Quat::from_axis_angle(Vec3::Y, 0.5 * (2.0 * PI * 0.5 * t).sin());
                    PoseSample { body, hand: q, other_hand: other, object: ObjectState { pos: q, rot: spin * rot0 } }
                }),
                true,
            ))
        }
        Kinematic::Open => {
            // the hinge sits on the object's local -x face; the door swings
            // 90 degrees open and closes again on its own once released
            let hinge = s.object.pos - rot0.rotate(Vec3::new(he.x, 0.0, 0.0));
            let center_arm = rot0.rotate(Vec3::new(he.x, 0.0, 0.0));
            let handle_arm = rot0.rotate(Vec3::new((2.0 * he.x - 0.08).max(0.0), 0.0, 0.0));
            let h0 = s.hand_pos;
            let rest = body.to_world(rest_offset(s.hand));
            let handle_at = move |angle: f64| hinge + Quat::from_axis_angle(Vec3::Y, angle).rotate(handle_arm);
            let angle_at = move |u: f64| 0.5 * PI * (phase(u, 0.3, 0.6) - phase(u, 0.75, 1.0));
            let release = handle_at(angle_at(0.65));
            Ok((
                Box::new(move |t| {
                    let u = t / d;
                    let angle = angle_at(u);
                    let swing = Quat::from_axis_angle(Vec3::Y, angle);
                    let door = ObjectState { pos: hinge + swing.rotate(center_arm), rot: swing * rot0 };
                    let hand = if u < 0.3 {
                        h0.lerp(handle_at(0.0), phase(u, 0.0, 0.3))
                    } else if u < 0.65 {
                        handle_at(angle)
                    } else {
                        release.lerp(rest, phase(u, 0.65, 0.85))
                    };
                    PoseSample { body, hand, other_hand: other, object: door }
                }),
                false,
            ))
        }
        _ => unreachable!("all kinds handled"),
    }
}

/// Reach for an unheld object and lift it to the carry pose during the first
/// 30% of the action, then run `kind` on the held object.
fn plan_with_grab(
    kind: Kinematic,
    s: &ActorState,
    p: &TrajectoryParams<'_>,
    duration: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Motion, bool)> {
    let grab = 0.3 * duration;
    let carry = {
        let mut c = s.body.to_world(carry_offset(s.hand));
        c.y = c.y.max(s.object.pos.y + 0.3);
        c
    };
    let inner_state =
        ActorState { hand_pos: carry, object: ObjectState { pos: carry, rot: s.object.rot }, held: true, ..*s };
    let (inner, held_at_end) = plan(kind, &inner_state, p, duration - grab, rng)?;
    let (h0, o0, body, other, rot) = (s.hand_pos, s.object.pos, s.body, s.other_hand_pos, s.object.rot);
    Ok((
        Box::new(move |t| {
            if t >= grab {
                return inner(t - grab);
            }
            let u = t / grab;
            let (hand, obj) = if u < 0.6 {
                (h0.lerp(o0, phase(u, 0.0, 0.6)), o0)
            } else {
                let q = o0.lerp(carry, phase(u, 0.6, 1.0));
                (q, q)
            };
            PoseSample { body, hand, other_hand: other, object: ObjectState { pos: obj, rot } }
        }),
        held_at_end,
    ))
}

/// An action placed on the session timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedAction {
    pub verb: Verb,
    pub kind: Kinematic,
    pub object: usize,
    pub start: f64,
    pub end: f64,
    pub target: Option<Vec3>,
}

/// World state replayed across a schedule.
#[derive(Debug, Clone)]
pub struct Engine {
    objects: Vec<ObjectMeta>,
    states: Vec<ObjectState>,
    body: Body,
    head: usize,
    hands: [usize; 2],
    holding: [Option<usize>; 2],
    surfaces: Vec<Surface>,
    sink: Option<Vec3>,
    fps: f64,
}

pub const HEAD_ID: &str = "head";
pub const LEFT_HAND_ID: &str = "left-hand";
pub const RIGHT_HAND_ID: &str = "right-hand";

impl Engine {
    pub fn new(scene: &Scene, fps: f64) -> Result<Engine> {
        let body = scene.start_body();
        let body_meta = |id: &str, class| ObjectMeta {
            id: id.into(),
            class,
            movable: true,
            half_extents: super::scene::default_half_extents(class),
        };
        let mut objects = vec![
            body_meta(HEAD_ID, ObjectClass::Head),
            body_meta(LEFT_HAND_ID, ObjectClass::LeftHand),
            body_meta(RIGHT_HAND_ID, ObjectClass::RightHand),
        ];
        let hand_rot = body.yaw_rot();
        let mut states = vec![
            body.head_state(),
            ObjectState { pos: body.to_world(rest_offset(Hand::Left)), rot: hand_rot },
            ObjectState { pos: body.to_world(rest_offset(Hand::Right)), rot: hand_rot },
        ];
        for p in &scene.objects {
            if p.class.is_body() {
                return Err(Error::Config(format!("scene object {:?}: body parts are added automatically", p.id)));
            }
            if objects.iter().any(|o| o.id == p.id) {
                return Err(Error::Config(format!("duplicate scene object id {:?}", p.id)));
            }
            objects.push(p.meta());
            states.push(ObjectState { pos: p.pos, rot: p.rot.normalized() });
        }
        Ok(Engine {
            objects,
            states,
            body,
            head: 0,
            hands: [1, 2],
            holding: [None, None],
            surfaces: scene.surfaces(),
            sink: scene.sink_point(),
            fps,
        })
    }

    pub fn objects(&self) -> &[ObjectMeta] {
        &self.objects
    }

    pub fn states(&self) -> &[ObjectState] {
        &self.states
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn body(&self) -> Body {
        self.body
    }

    pub fn surfaces(&self) -> &[Surface] {
        &self.surfaces
    }

    pub fn sink(&self) -> Option<Vec3> {
        self.sink
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn holder_of(&self, object: usize) -> Option<Hand> {
        [Hand::Left, Hand::Right].into_iter().find(|h| self.holding[h.slot()] == Some(object))
    }

    pub fn held_by(&self, hand: Hand) -> Option<usize> {
        self.holding[hand.slot()]
    }

    pub fn free_hand(&self) -> Option<Hand> {
        [Hand::Right, Hand::Left].into_iter().find(|h| self.holding[h.slot()].is_none())
    }

    /// Runs one action over `n_frames` frames, the first sampled
    /// `first_offset` seconds after the action starts, calling `emit` with
    /// the full world state of each frame.
    pub fn run<F: FnMut(&[ObjectState])>(
        &mut self,
        action: &ResolvedAction,
        first_offset: f64,
        n_frames: usize,
        seed: u64,
        mut emit: F,
    ) -> Result<()> {
        let locomotion = action.kind.is_locomotion();
        let hand = if locomotion {
            Hand::Right
        } else {
            match self.holder_of(action.object).or_else(|| self.free_hand()) {
                Some(h) => h,
                None => {
                    return Err(Error::InfeasibleSchedule(format!(
                        "{} at {:.2}s: both hands are occupied",
                        action.verb, action.start
                    )))
                }
            }
        };
        let other_hand = match hand {
            Hand::Left => Hand::Right,
            Hand::Right => Hand::Left,
        };
        let held = !locomotion && self.holder_of(action.object) == Some(hand);
        let start = ActorState {
            body: self.body,
            hand,
            hand_pos: self.states[self.hands[hand.slot()]].pos,
            other_hand_pos: self.states[self.hands[other_hand.slot()]].pos,
            object: self.states[action.object],
            object_half_extents: self.objects[action.object].half_extents,
            held,
        };
        let params = TrajectoryParams {
            duration: action.end - action.start,
            first_offset,
            fps: self.fps,
            n_frames,
            target: action.target,
            surfaces: &self.surfaces,
            sink: self.sink,
        };
        let segment = gen_action_trajectory(action.kind, &start, &params, seed)?;
        for s in &segment.samples {
            self.body = s.body;
            let hand_rot = s.body.yaw_rot();
            self.states[self.head] = s.body.head_state();
            self.states[self.hands[hand.slot()]] = ObjectState { pos: s.hand, rot: hand_rot };
            self.states[self.hands[other_hand.slot()]] = ObjectState { pos: s.other_hand, rot: hand_rot };
            if !locomotion {
                self.states[action.object] = s.object;
            }
            for h in [Hand::Left, Hand::Right] {
                if let Some(o) = self.holding[h.slot()] {
                    if locomotion || o != action.object {
                        self.states[o].pos = self.states[self.hands[h.slot()]].pos;
                    }
                }
            }
            emit(&self.states);
        }
        if !locomotion && n_frames > 0 {
            if segment.held_at_end {
                self.holding[hand.slot()] = Some(action.object);
            } else if self.holding[hand.slot()] == Some(action.object) {
                self.holding[hand.slot()] = None;
            }
        }
        Ok(())
    }
}
