//! Train and evaluate over a stream of sessions, holding one at a time.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::clip::{clip_at, tiling_starts, training_anchors, SplitSpec};
use crate::dsm::{Method, ReducedModel, WordContextMatrix};
use crate::encoder::{ClipEncoder, ObjectEncoder};
use crate::error::{Error, Result};
use crate::eval::{predict_verb, random_baseline, summarize, BootstrapSpec, EvalReport, Outcome, JUDGING_MODE};
use crate::geometry::FrustumParams;
use crate::lexicon::Lexicon;
use crate::session::{load_session, ActionAnnotation, Session};
use crate::verb::Verb;

/// Encoders by name. Only the object-based encoder exists; a pixel encoder
/// would need rendered frames, which sessions do not carry.
pub fn encoder_by_name(name: &str) -> Result<Box<dyn ClipEncoder>> {
    match name {
        "object" => Ok(Box::new(ObjectEncoder)),
        "cnn" => Err(Error::InvalidArgument(
            "the cnn encoder needs rendered video frames, which sessions do not contain".into(),
        )),
        _ => Err(Error::InvalidArgument(format!("unknown encoder {name:?} (available: object)"))),
    }
}

/// `*.json` files in `dir`, sorted by name.
pub fn session_paths(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Empty("session directory (no .json files)"));
    }
    Ok(paths)
}

pub fn load_sessions_lazily(paths: &[PathBuf]) -> impl Iterator<Item = Result<Session>> + '_ {
    paths.iter().map(load_session)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub method: Method,
    pub dims: usize,
    pub split: SplitSpec,
    /// Restrict training to these subjects; must not intersect the split.
    pub train_subjects: Option<Vec<String>>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            method: Method::Lda,
            dims: crate::dsm::DEFAULT_DIMS,
            split: SplitSpec::default(),
            train_subjects: None,
        }
    }
}

/// Appends one row per target-verb token of `session`.
pub fn add_training_rows(
    session: &Session,
    lexicon: &Lexicon,
    encoder: &dyn ClipEncoder,
    matrix: &mut WordContextMatrix,
) -> Result<usize> {
    let frustum = FrustumParams::default();
    let anchors = training_anchors(session, lexicon)?;
    for &(frame, verb) in &anchors {
        let clip = clip_at(session, frame, Some(verb), &frustum)?;
        matrix.push(encoder.encode(&clip)?, verb)?;
    }
    Ok(anchors.len())
}

pub fn train(
    sessions: impl IntoIterator<Item = Result<Session>>,
    lexicon: &Lexicon,
    encoder: &dyn ClipEncoder,
    opts: &TrainOptions,
) -> Result<ReducedModel> {
    if let Some(subjects) = &opts.train_subjects {
        if let Some(bad) = subjects.iter().find(|s| opts.split.is_heldout(s)) {
            return Err(Error::InvalidArgument(format!("subject {bad:?} is held out and cannot be used for training")));
        }
    }
    let mut matrix = WordContextMatrix::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut trained: Vec<String> = Vec::new();
    for s in sessions {
        let s = s?;
        if !seen.insert(s.subject_id.clone()) {
            return Err(Error::InvalidArgument(format!("subject {:?} appears twice in the corpus", s.subject_id)));
        }
        let wanted = opts.train_subjects.as_ref().is_none_or(|t| t.contains(&s.subject_id));
        if opts.split.is_heldout(&s.subject_id) || !wanted {
            continue;
        }
        add_training_rows(&s, lexicon, encoder, &mut matrix)?;
        trained.push(s.subject_id.clone());
    }
    opts.split.check(seen.iter().map(String::as_str))?;
    if let Some(t) = &opts.train_subjects {
        if let Some(missing) = t.iter().find(|s| !seen.contains(*s)) {
            return Err(Error::UnknownSubject(missing.clone()));
        }
    }
    if matrix.is_empty() {
        return Err(Error::Empty("training clips (no target-verb tokens in the training sessions)"));
    }
    let mut model = ReducedModel::fit(&matrix, opts.method, opts.dims, encoder)?;
    model.train_subjects = trained;
    model.heldout_subjects = opts.split.heldout.clone();
    Ok(model)
}

/// Predicts and judges every clip of the session's consecutive tiling.
pub fn evaluate_session(session: &Session, model: &ReducedModel, encoder: &dyn ClipEncoder) -> Result<Vec<Outcome>> {
    if encoder.name() != model.encoder {
        return Err(Error::InvalidArgument(format!(
            "model was trained with the {} encoder, not {}",
            model.encoder,
            encoder.name()
        )));
    }
    let frustum = FrustumParams::default();
    tiling_starts(session)?
        .into_iter()
        .map(|f| {
            let clip = clip_at(session, f, None, &frustum)?;
            let prediction = predict_verb(&encoder.encode(&clip)?, model)?;
            let correct = crate::eval::judge(prediction, clip.start, clip.end, &session.annotations);
            Ok(Outcome { session_id: clip.session_id, start: clip.start, end: clip.end, prediction, correct })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Subjects to evaluate; the model's heldout subjects when `None`.
    pub subjects: Option<Vec<String>>,
    pub bootstrap: BootstrapSpec,
    /// Verbs the uniform-random baseline draws from; no baseline when empty.
    pub baseline_verbs: Vec<Verb>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { subjects: None, bootstrap: BootstrapSpec::default(), baseline_verbs: Verb::ALL.to_vec() }
    }
}

pub fn evaluate(
    sessions: impl IntoIterator<Item = Result<Session>>,
    model: &ReducedModel,
    encoder: &dyn ClipEncoder,
    opts: &EvalOptions,
) -> Result<(EvalReport, Vec<Outcome>)> {
    let subjects = opts.subjects.clone().unwrap_or_else(|| model.heldout_subjects.clone());
    if subjects.is_empty() {
        return Err(Error::InvalidArgument("no evaluation subjects given and the model lists none".into()));
    }
    if let Some(bad) = subjects.iter().find(|s| model.train_subjects.contains(s)) {
        return Err(Error::InvalidArgument(format!("subject {bad:?} was used to train this model")));
    }
    let mut outcomes = Vec::new();
    let mut annotations: BTreeMap<String, Vec<ActionAnnotation>> = BTreeMap::new();
    for s in sessions {
        let s = s?;
        if !subjects.contains(&s.subject_id) {
            continue;
        }
        outcomes.extend(evaluate_session(&s, model, encoder)?);
        annotations.insert(s.subject_id.clone(), s.annotations);
    }
    if let Some(missing) = subjects.iter().find(|s| !annotations.contains_key(*s)) {
        return Err(Error::UnknownSubject(missing.clone()));
    }
    let summary = summarize(&outcomes, &opts.bootstrap)?;
    let baseline = if opts.baseline_verbs.is_empty() {
        None
    } else {
        let b =
            random_baseline(&outcomes, |id| annotations.get(id).cloned(), &opts.baseline_verbs, opts.bootstrap.seed)?;
        Some(summarize(&b, &opts.bootstrap)?)
    };
    let report = EvalReport {
        judging: JUDGING_MODE.to_string(),
        method: match model.method {
            Method::Svd => "svd".into(),
            Method::Lda => "lda".into(),
        },
        encoder: model.encoder.clone(),
        dims: model.dims(),
        bootstrap: opts.bootstrap.clone(),
        model: summary,
        baseline,
        baseline_verbs: opts.baseline_verbs.clone(),
    };
    Ok((report, outcomes))
}
