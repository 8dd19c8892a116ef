//! Test-only oracles computed straight from raw session frames, sharing no
//! code with the library's feature path.

#![allow(dead_code)]

use groundverb::geometry::{Quat, Vec3};
use groundverb::session::{ObjectMeta, ObjectState, RawFrame};
use groundverb::{Aesthetic, ObjectClass, Session};
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FPS: f64 = 90.0;

pub fn meta(id: &str, class: ObjectClass, movable: bool) -> ObjectMeta {
    ObjectMeta { id: id.into(), class, movable, half_extents: Vec3::new(0.05, 0.05, 0.05) }
}

/// Session at 90 fps from per-frame `(pos, rot)` for each object.
pub fn session_from(objects: Vec<ObjectMeta>, n: usize, pose: impl Fn(usize, usize) -> (Vec3, Quat)) -> Session {
    let frames = (0..n)
        .map(|k| RawFrame {
            t: k as f64 / FPS,
            states: (0..objects.len())
                .map(|i| {
                    let (pos, rot) = pose(k, i);
                    ObjectState { pos, rot }
                })
                .collect(),
        })
        .collect();
    Session {
        subject_id: "oracle".into(),
        aesthetic: Aesthetic::A,
        layout: 1,
        fps: FPS,
        objects,
        frames,
        transcript: vec![],
        annotations: vec![],
    }
}

fn body() -> Vec<ObjectMeta> {
    vec![
        meta("head", ObjectClass::Head, true),
        meta("left-hand", ObjectClass::LeftHand, true),
        meta("right-hand", ObjectClass::RightHand, true),
    ]
}

fn unit_quat(rng: &mut ChaCha8Rng) -> Quat {
    let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
    Quat::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n)
}

/// Head, hands and 2-5 other objects on smooth random paths with random
/// orientations; some objects are immovable and never leave their pose.
pub fn random_session(seed: u64, n: usize) -> Session {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = [ObjectClass::Apple, ObjectClass::Ball, ObjectClass::Cup, ObjectClass::Book, ObjectClass::Table];
    let mut objects = body();
    let extra = rng.random_range(2..=5);
    for j in 0..extra {
        let class = classes[rng.random_range(0..classes.len())];
        let movable = class != ObjectClass::Table;
        objects.push(meta(&format!("obj-{j}-{class}"), class, movable));
    }
    // per object: base, linear drift, wobble amplitude, frequency, phase
    let params: Vec<[f64; 11]> = (0..objects.len())
        .map(|_| {
            std::array::from_fn(|k| match k {
                0..=2 => rng.random_range(-3.0..3.0),
                3..=5 => rng.random_range(-0.5..0.5),
                6..=8 => rng.random_range(0.0..0.4),
                9 => rng.random_range(0.2..2.0),
                _ => rng.random_range(0.0..6.0),
            })
        })
        .collect();
    let rots: Vec<Vec<Quat>> = (0..objects.len()).map(|_| (0..n).map(|_| unit_quat(&mut rng)).collect()).collect();
    let movable: Vec<bool> = objects.iter().map(|o| o.movable).collect();
    session_from(objects, n, |k, i| {
        let p = &params[i];
        let t = k as f64 / FPS;
        if !movable[i] {
            return (Vec3::new(p[0], p[1], p[2]), rots[i][0]);
        }
        let w = (p[9] * t + p[10]).sin();
        let pos = Vec3::new(p[0] + p[3] * t + p[6] * w, p[1] + p[4] * t + p[7] * w * w, p[2] + p[5] * t - p[8] * w);
        (pos, rots[i][k])
    })
}

fn v3(v: Vec3) -> Vector3<f64> {
    Vector3::new(v.x, v.y, v.z)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

fn first_min(xs: &[f64]) -> usize {
    let m = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    xs.iter().position(|&x| x == m).unwrap()
}

fn first_max(xs: &[f64]) -> usize {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    xs.iter().position(|&x| x == m).unwrap()
}

/// Raw frame indices of the 50 clip snapshots: every 9th of the 450-frame window.
pub fn snapshot_indices(first: usize) -> Vec<usize> {
    (0..50).map(|j| first + 9 * j).collect()
}

pub struct OracleOutput {
    pub object: String,
    pub features: Vec<f64>,
}

/// All 72 features of the clip whose window starts at raw frame `first`.
pub fn oracle_features(s: &Session, first: usize) -> OracleOutput {
    let idx = snapshot_indices(first);
    let head = s.objects.iter().position(|o| o.class == ObjectClass::Head).unwrap();
    let pos = |k: usize, i: usize| v3(s.frames[k].states[i].pos);
    let vel = |k: usize, i: usize| if k == 0 { Vector3::zeros() } else { (pos(k, i) - pos(k - 1, i)) * s.fps };

    let mut order: Vec<usize> = (0..s.objects.len()).collect();
    order.sort_by(|&a, &b| s.objects[a].id.cmp(&s.objects[b].id));
    let mut target: Option<(usize, f64)> = None;
    for &i in &order {
        let o = &s.objects[i];
        if !o.movable || o.class == ObjectClass::Head {
            continue;
        }
        let speed = idx.iter().map(|&k| vel(k, i).norm()).sum::<f64>() / idx.len() as f64;
        if target.is_none_or(|(_, best)| speed > best) {
            target = Some((i, speed));
        }
    }
    let (i, _) = target.expect("a movable object");

    let rel = |k: usize| {
        let st = s.frames[k].states[head];
        let q = UnitQuaternion::from_quaternion(Quaternion::new(st.rot.w, st.rot.x, st.rot.y, st.rot.z));
        q.inverse_transform_vector(&(pos(k, i) - pos(k, head)))
    };

    let mut out = Vec::with_capacity(72);
    let six = |xs: &[f64]| {
        vec![
            mean(xs),
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            xs[0],
            xs[xs.len() - 1],
            var(xs),
        ]
    };
    for a in 0..3 {
        let xs: Vec<f64> = idx.iter().map(|&k| vel(k, i)[a]).collect();
        out.extend(six(&xs));
    }
    for a in 0..3 {
        let xs: Vec<f64> = idx.iter().map(|&k| rel(k)[a]).collect();
        out.extend(six(&xs));
    }
    for a in 0..3 {
        let xs: Vec<f64> = idx.iter().map(|&k| (pos(k, i)[a] - pos(k, head)[a]).abs()).collect();
        let (lo, hi) = (first_min(&xs), first_max(&xs));
        out.extend([xs[0], xs[49], mean(&xs), var(&xs), xs[lo], xs[hi], lo as f64 / 49.0, hi as f64 / 49.0]);
    }
    for a in 0..3 {
        let xs: Vec<f64> = idx.iter().map(|&k| pos(k, i)[a]).collect();
        let (lo, hi) = (first_min(&xs), first_max(&xs));
        let (kp1, kp2) = if hi < lo {
            (xs[hi], xs[lo])
        } else if lo < hi {
            (xs[lo], xs[hi])
        } else {
            (xs[lo], xs[lo])
        };
        out.extend([kp1 - xs[0], kp2 - kp1, xs[49] - kp2, xs[49] - xs[0]]);
    }
    OracleOutput { object: s.objects[i].id.clone(), features: out }
}

/// Three handcrafted 460-frame scenes: everything still; an apple sliding
/// along +x at 0.9 m/s; a ball tossed up that comes to rest below its launch point.
pub fn handcrafted_sessions() -> Vec<Session> {
    let n = 460;
    let mut objs = body();
    objs.push(meta("apple", ObjectClass::Apple, true));
    objs.push(meta("table", ObjectClass::Table, false));
    let head_rot = Quat::from_axis_angle(Vec3::Y, std::f64::consts::FRAC_PI_2);
    let rest = |i: usize| match i {
        0 => Vec3::new(0.0, 1.6, 0.0),
        1 => Vec3::new(0.2, 1.0, 0.3),
        2 => Vec3::new(-0.2, 1.0, 0.3),
        3 => Vec3::new(0.0, 0.9, 0.6),
        _ => Vec3::new(0.0, 0.45, 0.6),
    };
    let still = session_from(objs.clone(), n, |_, i| (rest(i), if i == 0 { head_rot } else { Quat::IDENTITY }));
    let slide = session_from(objs.clone(), n, |k, i| {
        let p = if i == 3 { rest(3) + Vec3::new(0.01, 0.0, 0.0) * k as f64 } else { rest(i) };
        (p, Quat::IDENTITY)
    });
    let mut toss_objs = body();
    toss_objs.push(meta("ball", ObjectClass::Ball, true));
    let toss = session_from(toss_objs, n, |k, i| {
        let t = k as f64 / FPS;
        // launched at t = 0.5 s, apex 4.905 m up at 1.5 s, frozen at 2.6 s
        // 1.03005 m below the launch height
        let p = if i == 3 {
            let u = (t - 0.5).clamp(0.0, 2.1);
            rest(3) + Vec3::new(0.0, 9.81 * u - 0.5 * 9.81 * u * u, 0.0)
        } else {
            rest(i)
        };
        (p, Quat::IDENTITY)
    });
    vec![still, slide, toss]
}
