//! Object-based clip encoding: the most-moving object's velocity, relative
//! position, distance to the head and trajectory shape, 72 features.
//!
//! Layout, each block axis-major (x, y, z):
//!
//! | block          | per axis                                                 | dims |
//! |----------------|----------------------------------------------------------|------|
//! | `vel`          | mean, min, max, start, end, var                          | 18   |
//! | `relPos`       | mean, min, max, start, end, var                          | 18   |
//! | `dist_to_head` | start, end, mean, var, min, max, min_idx, max_idx        | 24   |
//! | `trajectory`   | kp1-start, kp2-kp1, end-kp2, end-start                   | 12   |

use crate::clip::Clip;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::session::ObjectClass;

pub const FEATURE_DIM: usize = 72;
const AXES: [&str; 3] = ["x", "y", "z"];
const STATS: [&str; 6] = ["mean", "min", "max", "start", "end", "var"];
const DIST: [&str; 8] = ["start", "end", "mean", "var", "min", "max", "min_idx", "max_idx"];
const TRAJ: [&str; 4] = ["kp1-start", "kp2-kp1", "end-kp2", "end-start"];

/// Maps a clip to a fixed-length feature vector.
pub trait ClipEncoder {
    fn name(&self) -> &str;
    fn feature_names(&self) -> Vec<String>;
    fn encode(&self, clip: &Clip) -> Result<Vec<f64>>;

    fn dim(&self) -> usize {
        self.feature_names().len()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ObjectEncoder;

impl ClipEncoder for ObjectEncoder {
    fn name(&self) -> &str {
        "object"
    }

    fn feature_names(&self) -> Vec<String> {
        feature_names()
    }

    fn encode(&self, clip: &Clip) -> Result<Vec<f64>> {
        encode_clip(clip)
    }
}

pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_DIM);
    for block in ["vel", "relPos"] {
        for a in AXES {
            names.extend(STATS.iter().map(|s| format!("{block}.{a}.{s}")));
        }
    }
    for a in AXES {
        names.extend(DIST.iter().map(|s| format!("dist_to_head.{a}.{s}")));
    }
    for a in AXES {
        names.extend(TRAJ.iter().map(|s| format!("trajectory.{a}.{s}")));
    }
    names
}

/// `(mean, min, max, start, end, population variance)`.
pub fn stats_features(series: &[f64]) -> Result<[f64; 6]> {
    let (&start, &end) = match (series.first(), series.last()) {
        (Some(s), Some(e)) => (s, e),
        _ => return Err(Error::Empty("series")),
    };
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok([mean, min, max, start, end, var])
}

/// First indices of the minimum and maximum.
fn arg_extrema(series: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &v) in series.iter().enumerate() {
        if v < series[lo] {
            lo = i;
        }
        if v > series[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

/// `(start, end, mean, var, min, max, min_idx, max_idx)`, indices as a
/// fraction of the way through the series.
pub fn dist_stats(series: &[f64]) -> Result<[f64; 8]> {
    let [mean, min, max, start, end, var] = stats_features(series)?;
    let (lo, hi) = arg_extrema(series);
    let denom = (series.len() - 1).max(1) as f64;
    Ok([start, end, mean, var, min, max, lo as f64 / denom, hi as f64 / denom])
}

/// Key point 1 is whichever extremum comes first; the maximum on a tie.
pub fn trajectory_stats(series: &[f64]) -> Result<[f64; 4]> {
    let (&start, &end) = match (series.first(), series.last()) {
        (Some(s), Some(e)) => (s, e),
        _ => return Err(Error::Empty("series")),
    };
    let (lo, hi) = arg_extrema(series);
    let (kp1, kp2) = if hi <= lo { (series[hi], series[lo]) } else { (series[lo], series[hi]) };
    Ok([kp1 - start, kp2 - kp1, end - kp2, end - start])
}

fn eligible(clip: &Clip, i: usize) -> bool {
    let o = &clip.objects[i];
    o.movable && o.class != ObjectClass::Head
}

/// Index of the eligible object with the highest mean speed; ties go to the
/// lexicographically smallest id.
pub fn most_moving_index(clip: &Clip) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in (0..clip.objects.len()).filter(|&i| eligible(clip, i)) {
        let speed = clip.frames.iter().map(|f| f.objects[i].vel.norm()).sum::<f64>() / clip.frames.len() as f64;
        best = match best {
            Some((b, s)) if s > speed || (s == speed && clip.objects[b].id < clip.objects[i].id) => Some((b, s)),
            _ => Some((i, speed)),
        };
    }
    best.map(|(i, _)| i).ok_or_else(|| Error::InvalidArgument("clip has no movable non-head object".into()))
}

pub fn most_moving_object(clip: &Clip) -> Result<&str> {
    Ok(&clip.objects[most_moving_index(clip)?].id)
}

fn head_index(clip: &Clip) -> Result<usize> {
    clip.objects
        .iter()
        .position(|o| o.class == ObjectClass::Head)
        .ok_or_else(|| Error::Schema("clip has no head object".into()))
}

fn series(clip: &Clip, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..clip.frames.len()).map(f).collect()
}

fn object_index(clip: &Clip, id: &str) -> Result<usize> {
    clip.object_index(id).ok_or_else(|| Error::UnknownObject(id.to_string()))
}

pub fn dist_head_features(clip: &Clip, id: &str) -> Result<Vec<f64>> {
    let i = object_index(clip, id)?;
    let h = head_index(clip)?;
    let mut out = Vec::with_capacity(24);
    for a in 0..3 {
        let s = series(clip, |j| (clip.frames[j].objects[i].pos.axis(a) - clip.frames[j].objects[h].pos.axis(a)).abs());
        out.extend(dist_stats(&s)?);
    }
    Ok(out)
}

pub fn trajectory_features(clip: &Clip, id: &str) -> Result<Vec<f64>> {
    let i = object_index(clip, id)?;
    let mut out = Vec::with_capacity(12);
    for a in 0..3 {
        out.extend(trajectory_stats(&series(clip, |j| clip.frames[j].objects[i].pos.axis(a)))?);
    }
    Ok(out)
}

fn axis_stats(clip: &Clip, pick: impl Fn(usize) -> Vec3) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(18);
    for a in 0..3 {
        out.extend(stats_features(&series(clip, |j| pick(j).axis(a)))?);
    }
    Ok(out)
}

pub fn encode_clip(clip: &Clip) -> Result<Vec<f64>> {
    clip.validate()?;
    let i = most_moving_index(clip)?;
    let id = clip.objects[i].id.as_str();
    let mut v = Vec::with_capacity(FEATURE_DIM);
    v.extend(axis_stats(clip, |j| clip.frames[j].objects[i].vel)?);
    v.extend(axis_stats(clip, |j| clip.frames[j].objects[i].rel_pos)?);
    v.extend(dist_head_features(clip, id)?);
    v.extend(trajectory_features(clip, id)?);
    debug_assert_eq!(v.len(), FEATURE_DIM);
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("encoded clip"));
    }
    Ok(v)
}
