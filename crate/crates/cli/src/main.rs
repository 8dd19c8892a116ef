#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use groundverb::clip::{clip_at, tiling_starts, SplitSpec};
use groundverb::encoder::{feature_names, most_moving_object};
use groundverb::eval::{BootstrapSpec, DEFAULT_ALPHA, DEFAULT_BOOTSTRAP};
use groundverb::lexicon::Category;
use groundverb::pipeline::{
    encoder_by_name, evaluate, load_sessions_lazily, session_paths, train, EvalOptions, TrainOptions,
};
use groundverb::session::load_session;
use groundverb::sim::{simulate_session, SimPlan};
use groundverb::stats::{category_distribution, lexicon_lemmas, load_token_corpus, signal_tsv, SignalTally};
use groundverb::{Clip, FrustumParams, Lexicon, Method, ReducedModel, Verb};

/// Grounded verb learning from simulated VR kitchen sessions.
#[derive(Parser)]
#[command(name = "groundverb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one session JSON per subject.
    Simulate(SimulateArgs),
    /// Category distribution of a corpus of sessions and text files.
    Stats(StatsArgs),
    /// Word-context precision of every noun and verb in a session corpus.
    Signal(SignalArgs),
    /// Fit a reduced word-context model on the training subjects.
    Train(TrainArgs),
    /// Evaluate a model on held-out subjects.
    Eval(EvalArgs),
    /// Dump the named encoder features of one clip.
    OracleFeatures(OracleArgs),
    /// Cut the clip starting at a given time out of a session.
    ExportClip(ExportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Plan JSON; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the plan seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of subjects.
    #[arg(long)]
    subjects: Option<usize>,
    /// Overrides the session length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LexiconArg {
    /// `word<TAB>lemma<TAB>category` TSV; the built-in lexicon when omitted.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

impl LexiconArg {
    fn load(&self) -> Result<Lexicon> {
        match &self.lexicon {
            Some(p) => Lexicon::load(p).with_context(|| format!("reading lexicon {}", p.display())),
            None => Ok(Lexicon::builtin()),
        }
    }
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    corpus_dir: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArg,
    /// Lemmas listed per category in the top table.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Receives distribution.tsv and top.tsv; stdout when omitted.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SignalArgs {
    #[arg(long)]
    corpus_dir: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArg,
    /// Seconds after each word in which a matching action counts.
    #[arg(long, default_value_t = groundverb::stats::DEFAULT_WINDOW)]
    window: f64,
    /// Occurrences judged per word; all when omitted.
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduce {
    Svd,
    Lda,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus_dir: PathBuf,
    #[arg(long, default_value = "object")]
    encoder: String,
    #[arg(long, value_enum, default_value_t = Reduce::Lda)]
    reduce: Reduce,
    #[arg(long, default_value_t = groundverb::dsm::DEFAULT_DIMS)]
    dims: usize,
    /// Comma-separated held-out subjects.
    #[arg(long, value_delimiter = ',', default_value = "s17,s18")]
    holdout: Vec<String>,
    /// Comma-separated training subjects; every non-held-out subject when omitted.
    #[arg(long, value_delimiter = ',')]
    train_subjects: Option<Vec<String>>,
    #[command(flatten)]
    lexicon: LexiconArg,
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus_dir: PathBuf,
    /// Comma-separated subjects; the model's held-out subjects when omitted.
    #[arg(long, value_delimiter = ',')]
    subjects: Option<Vec<String>>,
    /// Receives report.json and report.tsv.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Comma-separated verbs the random baseline draws from.
    #[arg(long, value_delimiter = ',', conflicts_with = "no_baseline")]
    baseline_verbs: Option<Vec<Verb>>,
    /// Skip the random baseline.
    #[arg(long)]
    no_baseline: bool,
}

#[derive(Args)]
struct OracleArgs {
    clip: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    session: PathBuf,
    /// Clip start in seconds, rounded to the nearest frame.
    #[arg(long)]
    start: f64,
    #[arg(long)]
    out: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut plan: SimPlan = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => SimPlan::default(),
    };
    if let Some(s) = a.seed {
        plan.seed = s;
    }
    if let Some(n) = a.subjects {
        plan.subjects = n;
    }
    if let Some(d) = a.duration {
        plan.duration = d;
    }
    let configs = plan.configs()?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for c in &configs {
        let s = simulate_session(c)?;
        s.save(a.out_dir.join(format!("{}.json", s.subject_id)))?;
    }
    eprintln!("wrote {} sessions to {}", configs.len(), a.out_dir.display());
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let lexicon = a.lexicon.load()?;
    let corpus =
        load_token_corpus(&a.corpus_dir).with_context(|| format!("reading corpus {}", a.corpus_dir.display()))?;
    let report = category_distribution(&corpus, &lexicon, a.top)?;
    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write(&dir.join("distribution.tsv"), &report.to_tsv())?;
            write(&dir.join("top.tsv"), &report.top_tsv())
        }
        None => emit(None, &(report.to_tsv() + "\n" + &report.top_tsv())),
    }
}

fn signal(a: SignalArgs) -> Result<()> {
    let lexicon = a.lexicon.load()?;
    let paths = session_paths(&a.corpus_dir).with_context(|| format!("reading corpus {}", a.corpus_dir.display()))?;
    let mut tally = SignalTally::new(a.window)?;
    for s in load_sessions_lazily(&paths) {
        tally.add_session(&s?, &lexicon);
    }
    // lexicon words that never occur still get an "absent" row
    let seen: BTreeSet<String> = tally.words().map(str::to_string).collect();
    let mut rows = tally.rows(a.sample_size, a.seed);
    for category in [Category::Noun, Category::Verb] {
        for lemma in lexicon_lemmas(&lexicon, category) {
            if !seen.contains(&lemma) {
                rows.push(tally.row(&lemma, category, a.sample_size, a.seed));
            }
        }
    }
    rows.sort_by(|x, y| (x.category, &x.word).cmp(&(y.category, &y.word)));
    emit(a.out.as_deref(), &signal_tsv(&rows))
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let encoder = encoder_by_name(&a.encoder)?;
    let lexicon = a.lexicon.load()?;
    let paths = session_paths(&a.corpus_dir).with_context(|| format!("reading corpus {}", a.corpus_dir.display()))?;
    let opts = TrainOptions {
        method: match a.reduce {
            Reduce::Svd => Method::Svd,
            Reduce::Lda => Method::Lda,
        },
        dims: a.dims,
        split: SplitSpec::new(a.holdout),
        train_subjects: a.train_subjects,
    };
    let model = train(load_sessions_lazily(&paths), &lexicon, encoder.as_ref(), &opts)?;
    model.save(&a.model_out).with_context(|| format!("writing {}", a.model_out.display()))?;
    eprintln!(
        "trained on {} instances from {} subjects; {} verbs, {} dims",
        model.instances,
        model.train_subjects.len(),
        model.type_vectors.len(),
        model.dims()
    );
    Ok(())
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let model = ReducedModel::load(&a.model).with_context(|| format!("reading model {}", a.model.display()))?;
    let encoder = encoder_by_name(&model.encoder)?;
    let paths = session_paths(&a.corpus_dir).with_context(|| format!("reading corpus {}", a.corpus_dir.display()))?;
    let subjects = a.subjects.clone().unwrap_or_else(|| model.heldout_subjects.clone());
    for p in &paths {
        let s = load_session(p)?;
        if subjects.contains(&s.subject_id) && tiling_starts(&s)?.is_empty() {
            eprintln!("warning: {} is shorter than one clip and contributes no clips", s.subject_id);
        }
    }
    let opts = EvalOptions {
        subjects: Some(subjects),
        bootstrap: BootstrapSpec { replicates: a.bootstrap, alpha: a.alpha, seed: a.seed },
        baseline_verbs: match (a.no_baseline, a.baseline_verbs) {
            (true, _) => vec![],
            (false, Some(v)) => v,
            (false, None) => Verb::ALL.to_vec(),
        },
    };
    let (report, _) = evaluate(load_sessions_lazily(&paths), &model, encoder.as_ref(), &opts)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    write(&a.out_dir.join("report.json"), &report.to_json()?)?;
    write(&a.out_dir.join("report.tsv"), &report.to_tsv())?;
    print!("{}", report.to_tsv());
    Ok(())
}

fn oracle_features(a: OracleArgs) -> Result<()> {
    let clip = Clip::load(&a.clip).with_context(|| format!("reading clip {}", a.clip.display()))?;
    let object = most_moving_object(&clip)?;
    let values = groundverb::encoder::encode_clip(&clip)?;
    let mut out = format!("# object: {object}\nfeature\tvalue\n");
    for (n, v) in feature_names().iter().zip(&values) {
        out.push_str(&format!("{n}\t{v:?}\n"));
    }
    emit(None, &out)
}

fn export_clip(a: ExportArgs) -> Result<()> {
    let s = load_session(&a.session).with_context(|| format!("reading session {}", a.session.display()))?;
    if !(a.start >= 0.0) {
        bail!("clip start must be non-negative, got {}", a.start);
    }
    let first = (a.start * s.fps).round() as usize;
    let clip = clip_at(&s, first, None, &FrustumParams::default())?;
    write(&a.out, &(clip.to_json()? + "\n"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Stats(a) => stats(a),
        Command::Signal(a) => signal(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::OracleFeatures(a) => oracle_features(a),
        Command::ExportClip(a) => export_clip(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
