//! Grounded verb learning from 3D object trajectories.
//!
//! The pipeline turns recorded (or simulated) sessions into five-second clips,
//! encodes each clip from the kinematics of its most-moving object, reduces the
//! word-context matrix with SVD or Fisher LDA, and predicts verbs for held-out
//! clips by cosine similarity to per-verb type vectors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clip;
pub mod dsm;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod lexicon;
pub mod pipeline;
pub mod session;
pub mod sim;
pub mod stats;
pub mod verb;

pub use clip::{Clip, SplitSpec};
pub use dsm::{Method, ReducedModel, WordContextMatrix};
pub use encoder::{ClipEncoder, ObjectEncoder};
pub use error::{Error, Result};
pub use eval::EvalReport;
pub use geometry::{FrustumParams, Quat, Vec3};
pub use lexicon::{Category, Lexicon};
pub use session::{ActionAnnotation, Aesthetic, DerivedFrame, ObjectClass, ObjectMeta, Session, TranscriptToken};
pub use verb::Verb;
