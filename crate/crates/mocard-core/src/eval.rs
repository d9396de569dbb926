//! Offline and streamed evaluation.
//!
//! Offline: integer-threshold ROC curves over genuine/impostor Hamming
//! distances, EER and TPR@FAR operating points. Streamed: the same probes
//! replayed as real enrol/verify APDU transactions against per-identity
//! cards, tallied from status words alone. A synthetic embedding generator
//! and two embedding file formats stand in for a face-encoder pipeline.

mod embeddings;
mod replay;
mod roc;
mod synth;

pub use embeddings::{
    read_csv, read_embeddings_file, read_emb1, write_csv, write_embeddings_file, write_emb1,
};
pub use replay::{
    all_pairs_scores, build_report, encode_dataset, streamed_replay, EvalReport, ReplayOutcome,
    StreamedStats, TargetOperatingPoint, TransactionRecord,
};
pub use roc::{binomial_ci, compute_roc, find_eer, tpr_at_far, EerPoint, Z_99};
pub use synth::{generate_synthetic, SyntheticDatasetSpec};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::pcaitq::{FloatEmbedding, PcaItqError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("score lists must both be non-empty")]
    EmptyScores,
    #[error("distance {value} out of range for {bits}-bit templates")]
    ScoreOutOfRange { value: u32, bits: u16 },
    #[error("FAR target {0} must lie strictly between 0 and 1")]
    BadFarTarget(f64),
    #[error("invalid synthetic dataset spec: {0}")]
    BadSyntheticSpec(&'static str),
    #[error("replay needs at least 2 identities with 3+ images, found {usable}")]
    NotEnoughIdentities { usable: usize },
    #[error("card rejected enrollment for identity {label} with SW {sw:04X}")]
    EnrollRejected { label: u32, sw: u16 },
    #[error("malformed embedding file: {0}")]
    EmbeddingFormat(&'static str),
    #[error("malformed CSV at line {line}: {reason}")]
    CsvFormat { line: usize, reason: &'static str },
    #[error("thread pool: {0}")]
    Parallel(String),
    #[error(transparent)]
    Pca(#[from] PcaItqError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Genuine and impostor Hamming distances for one template length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreSet {
    pub genuine: Vec<u32>,
    pub impostor: Vec<u32>,
    pub length_bits: u16,
}

/// One ROC row at an integer threshold; accept means distance <= tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocRow {
    pub tau: u32,
    pub tpr: f64,
    pub far: f64,
    pub frr: f64,
}

/// Full integer-threshold ROC: one row per tau in 0..=L.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub length_bits: u16,
    pub rows: Vec<RocRow>,
}

impl RocCurve {
    pub fn row(&self, tau: u32) -> Option<&RocRow> {
        self.rows.get(tau as usize)
    }
}

/// A selected threshold and the rates it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub tau: u32,
    pub tpr: f64,
    pub far: f64,
    pub target_far: Option<f64>,
}

/// Streamed decision tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn genuine_trials(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn impostor_trials(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn tpr(&self) -> f64 {
        self.tp as f64 / self.genuine_trials() as f64
    }

    pub fn far(&self) -> f64 {
        self.fp as f64 / self.impostor_trials() as f64
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.fp += other.fp;
        self.tn += other.tn;
    }
}

/// Group embeddings by identity label, preserving input order within each
/// group.
pub fn group_by_label(embeddings: &[FloatEmbedding]) -> BTreeMap<u32, Vec<&FloatEmbedding>> {
    let mut groups: BTreeMap<u32, Vec<&FloatEmbedding>> = BTreeMap::new();
    for e in embeddings {
        groups.entry(e.label).or_default().push(e);
    }
    groups
}
