mod common;

use approx::assert_abs_diff_eq;
use groundverb::clip::clip_at;
use groundverb::encoder::{encode_clip, feature_names, most_moving_object, ClipEncoder, ObjectEncoder};
use groundverb::geometry::Vec3;
use groundverb::{FrustumParams, Session};

fn encode(s: &Session, first: usize) -> Vec<f64> {
    encode_clip(&clip_at(s, first, None, &FrustumParams::default()).unwrap()).unwrap()
}

fn feature(values: &[f64], name: &str) -> f64 {
    values[feature_names().iter().position(|n| n == name).unwrap()]
}

#[test]
fn still_scene_by_hand() {
    let s = &common::handcrafted_sessions()[0];
    let clip = clip_at(s, 0, None, &FrustumParams::default()).unwrap();
    // every candidate is still: the smallest id wins
    assert_eq!(most_moving_object(&clip).unwrap(), "apple");
    let f = encode_clip(&clip).unwrap();
    assert!(f[..18].iter().all(|x| *x == 0.0));
    // head turned 90 degrees left: world +z is head -x
    for (axis, want) in ["x", "y", "z"].iter().zip([-0.6, -0.7, 0.0]) {
        assert_abs_diff_eq!(feature(&f, &format!("relPos.{axis}.mean")), want, epsilon = 1e-12);
        assert_abs_diff_eq!(feature(&f, &format!("relPos.{axis}.var")), 0.0, epsilon = 1e-12);
    }
    for (axis, want) in ["x", "y", "z"].iter().zip([0.0, 0.7, 0.6]) {
        assert_abs_diff_eq!(feature(&f, &format!("dist_to_head.{axis}.start")), want, epsilon = 1e-12);
        assert_eq!(feature(&f, &format!("dist_to_head.{axis}.min_idx")), 0.0);
        assert_eq!(feature(&f, &format!("dist_to_head.{axis}.max_idx")), 0.0);
    }
    assert!(f[60..].iter().all(|x| *x == 0.0));
}

#[test]
fn sliding_apple_by_hand() {
    let s = &common::handcrafted_sessions()[1];
    let f = encode(s, 10);
    assert_abs_diff_eq!(feature(&f, "vel.x.mean"), 0.9, epsilon = 1e-9);
    assert_abs_diff_eq!(feature(&f, "vel.x.var"), 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(feature(&f, "vel.y.max"), 0.0, epsilon = 1e-12);
    // x runs from 0.10 (frame 10) to 4.51 (frame 451)
    assert_abs_diff_eq!(feature(&f, "relPos.x.start"), 0.10, epsilon = 1e-12);
    assert_abs_diff_eq!(feature(&f, "relPos.x.end"), 4.51, epsilon = 1e-12);
    assert_abs_diff_eq!(feature(&f, "relPos.x.mean"), 2.305, epsilon = 1e-12);
    assert_eq!(feature(&f, "dist_to_head.x.min_idx"), 0.0);
    assert_eq!(feature(&f, "dist_to_head.x.max_idx"), 1.0);
    let traj: Vec<f64> = ["kp1-start", "kp2-kp1", "end-kp2", "end-start"]
        .iter()
        .map(|k| feature(&f, &format!("trajectory.x.{k}")))
        .collect();
    for (got, want) in traj.iter().zip([0.0, 4.41, 0.0, 4.41]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
    }
}

#[test]
fn tossed_ball_by_hand() {
    let s = &common::handcrafted_sessions()[2];
    let clip = clip_at(s, 0, None, &FrustumParams::default()).unwrap();
    assert_eq!(most_moving_object(&clip).unwrap(), "ball");
    let f = encode_clip(&clip).unwrap();
    // apex first (kp1), then the resting point below launch (kp2)
    let traj: Vec<f64> = ["kp1-start", "kp2-kp1", "end-kp2", "end-start"]
        .iter()
        .map(|k| feature(&f, &format!("trajectory.y.{k}")))
        .collect();
    for (got, want) in traj.iter().zip([4.905, -5.93505, 0.0, -1.03005]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
    }
    assert_eq!(feature(&f, "vel.y.start"), 0.0);
    // farthest from the head at the apex, t = 1.5 s
    assert_eq!(feature(&f, "dist_to_head.y.max_idx"), 15.0 / 49.0);
}

#[test]
fn matches_oracle_on_random_scenes() {
    for seed in 0..20 {
        let s = common::random_session(seed, 500);
        for first in [0, 1, 37] {
            let got = encode(&s, first);
            let want = common::oracle_features(&s, first).features;
            for (k, (a, b)) in got.iter().zip(&want).enumerate() {
                assert!((a - b).abs() <= 1e-9, "seed {seed} first {first} {}: {a} vs {b}", feature_names()[k]);
            }
        }
    }
}

#[test]
fn invariant_under_scene_translation() {
    let s = common::random_session(7, 500);
    let mut moved = s.clone();
    let shift = Vec3::new(12.5, -3.25, 0.75);
    for f in &mut moved.frames {
        for st in &mut f.states {
            st.pos += shift;
        }
    }
    let (a, b) = (encode(&s, 20), encode(&moved, 20));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn invariant_under_object_reordering() {
    let s = common::random_session(8, 500);
    let mut shuffled = s.clone();
    let n = s.objects.len();
    let perm: Vec<usize> = (0..n).rev().collect();
    shuffled.objects = perm.iter().map(|&i| s.objects[i].clone()).collect();
    for (f, orig) in shuffled.frames.iter_mut().zip(&s.frames) {
        f.states = perm.iter().map(|&i| orig.states[i]).collect();
    }
    assert_eq!(encode(&s, 5), encode(&shuffled, 5));
}

#[test]
fn encoder_trait_surface() {
    let e = ObjectEncoder;
    assert_eq!(e.name(), "object");
    assert_eq!(e.dim(), 72);
    assert_eq!(e.feature_names(), feature_names());
}

const ORACLE_SEED: u64 = 3;
const ORACLE_FIRST: usize = 5;

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn oracle_table(out: &common::OracleOutput) -> String {
    let mut t = format!("# object: {}\nfeature\tvalue\n", out.object);
    for (n, v) in feature_names().iter().zip(&out.features) {
        t.push_str(&format!("{n}\t{v:?}\n"));
    }
    t
}

/// Rewrites the committed oracle clip and its feature table.
#[test]
#[ignore]
fn regenerate_oracle_fixture() {
    let s = common::random_session(ORACLE_SEED, 460);
    let clip = clip_at(&s, ORACLE_FIRST, None, &FrustumParams::default()).unwrap();
    std::fs::write(fixture("oracle_clip.json"), clip.to_json().unwrap() + "\n").unwrap();
    std::fs::write(fixture("oracle_clip.features.tsv"), oracle_table(&common::oracle_features(&s, ORACLE_FIRST)))
        .unwrap();
}

#[test]
fn committed_oracle_table_is_current() {
    let s = common::random_session(ORACLE_SEED, 460);
    let want = oracle_table(&common::oracle_features(&s, ORACLE_FIRST));
    assert_eq!(std::fs::read_to_string(fixture("oracle_clip.features.tsv")).unwrap(), want);
    let clip = groundverb::Clip::load(fixture("oracle_clip.json")).unwrap();
    assert_eq!(clip, clip_at(&s, ORACLE_FIRST, None, &FrustumParams::default()).unwrap());
}
