//! Nearest-verb prediction, ground-truth judging and bootstrap intervals.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsm::ReducedModel;
use crate::error::{Error, Result};
use crate::session::ActionAnnotation;
use crate::sim::derive_seed;
use crate::verb::Verb;

pub const DEFAULT_BOOTSTRAP: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Vectors shorter than this have no direction.
pub const MIN_NORM: f64 = 1e-12;
pub const JUDGING_MODE: &str = "ground-truth-overlap";

const STREAM_BOOTSTRAP: u64 = 11;
const STREAM_RANDOM: u64 = 12;

/// `None` when either vector is (numerically) zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<Option<f64>> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!("cosine of {}- and {}-vectors", u.len(), v.len())));
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu < MIN_NORM || nv < MIN_NORM {
        return Ok(None);
    }
    Ok(Some(u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv)))
}

/// Highest-cosine verb; ties go to the lexicographically first verb, and
/// `None` means every similarity was undefined.
pub fn nearest_verb(query: &[f64], type_vectors: &BTreeMap<Verb, Vec<f64>>) -> Result<Option<Verb>> {
    let mut best: Option<(Verb, f64)> = None;
    for (verb, tv) in type_vectors {
        if let Some(c) = cosine(query, tv)? {
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((*verb, c));
            }
        }
    }
    Ok(best.map(|(v, _)| v))
}

/// Prediction for a clip's raw encoder features.
pub fn predict_verb(features: &[f64], model: &ReducedModel) -> Result<Option<Verb>> {
    nearest_verb(&model.embed(features)?, &model.type_vectors)
}

/// True iff an annotation of the predicted verb overlaps `[start, end)`.
pub fn judge(prediction: Option<Verb>, start: f64, end: f64, annotations: &[ActionAnnotation]) -> bool {
    prediction.is_some_and(|v| annotations.iter().any(|a| a.verb == v && a.overlaps(start, end)))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap interval of the mean. Replicate `r` resamples with
/// its own generator seeded from `(seed, r)`, so replicates are independent
/// of evaluation order.
pub fn bootstrap_ci(outcomes: &[bool], b: usize, alpha: f64, seed: u64) -> Result<(f64, f64)> {
    if outcomes.is_empty() {
        return Err(Error::Empty("bootstrap outcomes"));
    }
    if b == 0 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("bootstrap needs B >= 1 and 0 < alpha < 1, got {b}, {alpha}")));
    }
    let n = outcomes.len();
    let mut means: Vec<f64> = (0..b)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_BOOTSTRAP, r as u64));
            let hits = (0..n).filter(|_| outcomes[rng.random_range(0..n)]).count();
            hits as f64 / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    Ok((quantile(&means, alpha / 2.0), quantile(&means, 1.0 - alpha / 2.0)))
}

/// One evaluated clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub session_id: String,
    pub start: f64,
    pub end: f64,
    pub prediction: Option<Verb>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbRow {
    /// Times the verb was predicted.
    pub n: usize,
    pub correct: usize,
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub clips: usize,
    pub correct: usize,
    /// Clips with no defined similarity, counted incorrect.
    pub abstained: usize,
    pub precision: f64,
    pub ci: (f64, f64),
    pub per_verb: BTreeMap<Verb, VerbRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec { replicates: DEFAULT_BOOTSTRAP, alpha: DEFAULT_ALPHA, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub judging: String,
    pub method: String,
    pub encoder: String,
    pub dims: usize,
    pub bootstrap: BootstrapSpec,
    pub model: Summary,
    /// Uniform draws over `baseline_verbs`, judged the same way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Summary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub baseline_verbs: Vec<Verb>,
}

pub fn summarize(outcomes: &[Outcome], boot: &BootstrapSpec) -> Result<Summary> {
    if outcomes.is_empty() {
        return Err(Error::Empty("test clips"));
    }
    let mut per_verb: BTreeMap<Verb, VerbRow> = BTreeMap::new();
    let mut abstained = 0;
    for o in outcomes {
        match o.prediction {
            Some(v) => {
                let row = per_verb.entry(v).or_insert(VerbRow { n: 0, correct: 0, precision: None });
                row.n += 1;
                row.correct += o.correct as usize;
            }
            None => abstained += 1,
        }
    }
    for row in per_verb.values_mut() {
        row.precision = Some(row.correct as f64 / row.n as f64);
    }
    let flags: Vec<bool> = outcomes.iter().map(|o| o.correct).collect();
    let correct = flags.iter().filter(|c| **c).count();
    Ok(Summary {
        clips: outcomes.len(),
        correct,
        abstained,
        precision: correct as f64 / outcomes.len() as f64,
        ci: bootstrap_ci(&flags, boot.replicates, boot.alpha, boot.seed)?,
        per_verb,
    })
}

/// Replaces each prediction with a uniform draw over `verbs` and re-judges.
pub fn random_baseline(
    outcomes: &[Outcome],
    annotations_of: impl Fn(&str) -> Option<Vec<ActionAnnotation>>,
    verbs: &[Verb],
    seed: u64,
) -> Result<Vec<Outcome>> {
    if verbs.is_empty() {
        return Err(Error::InvalidArgument("random baseline needs at least one verb".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_RANDOM, 0));
    let mut cache: BTreeMap<String, Vec<ActionAnnotation>> = BTreeMap::new();
    outcomes
        .iter()
        .map(|o| {
            let v = verbs[rng.random_range(0..verbs.len())];
            if !cache.contains_key(&o.session_id) {
                let anns = annotations_of(&o.session_id).ok_or_else(|| Error::UnknownSubject(o.session_id.clone()))?;
                cache.insert(o.session_id.clone(), anns);
            }
            let correct = judge(Some(v), o.start, o.end, &cache[&o.session_id]);
            Ok(Outcome { prediction: Some(v), correct, ..o.clone() })
        })
        .collect()
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `verb, N, precision` rows like a per-verb breakdown table, then the
    /// overall line and, when present, the baseline line.
    pub fn to_tsv(&self) -> String {
        let fmt_p = |p: Option<f64>| p.map_or_else(|| "-".to_string(), |p| format!("{p:.2}"));
        let mut out = String::from("verb\tN\tprecision\n");
        for (v, row) in &self.model.per_verb {
            out.push_str(&format!("{v}\t{}\t{}\n", row.n, fmt_p(row.precision)));
        }
        if self.model.abstained > 0 {
            out.push_str(&format!("(abstain)\t{}\t-\n", self.model.abstained));
        }
        let line = |name: &str, s: &Summary| {
            format!("{name}\t{}\t{:.2} ({:.2}-{:.2})\n", s.clips, s.precision, s.ci.0, s.ci.1)
        };
        out.push_str(&line("overall", &self.model));
        if let Some(b) = &self.baseline {
            out.push_str(&line("random", b));
        }
        out
    }
}
