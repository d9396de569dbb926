//! Offline scoring and streamed enrol/verify replay.
//!
//! Replay follows the evaluation protocol end to end: per identity, two
//! seeded-random enrollment images are encoded and fused by bit-wise
//! majority, the fused reference is enrolled on a fresh card via a real
//! ENROLL_TEMPLATE APDU, the identity's remaining images become genuine
//! probes and every other identity's probe images become impostor probes.
//! Decisions are tallied purely from status words; the host-side distance
//! of each transaction is kept alongside so tests can check the card is a
//! faithful thresholder.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{group_by_label, ConfusionMatrix, EvalError, OperatingPoint, ScoreSet};
use crate::apdu::{trace, ApduCommand, BinaryTemplate, TemplatePayload, CLA_MOC, INS_ENROLL_TEMPLATE, INS_VERIFY_BINARY};
use crate::card::{Card, CardConfig, StatusWord};
use crate::eval::EerPoint;
use crate::pcaitq::{majority_fuse, FloatEmbedding, PcaItqModel};

/// Encode every embedding with the model, keeping labels and input order.
pub fn encode_dataset(
    embeddings: &[FloatEmbedding],
    model: &PcaItqModel,
) -> Result<Vec<(u32, BinaryTemplate)>, EvalError> {
    embeddings
        .iter()
        .map(|e| Ok((e.label, model.encode_embedding(e)?)))
        .collect()
}

/// All-pairs offline scores: every unordered same-label pair is genuine,
/// every cross-label pair is impostor.
pub fn all_pairs_scores(templates: &[(u32, BinaryTemplate)]) -> Result<ScoreSet, EvalError> {
    let bits = match templates.first() {
        Some((_, t)) => t.length_bits(),
        None => return Err(EvalError::EmptyScores),
    };
    let mut genuine = Vec::new();
    let mut impostor = Vec::new();
    for i in 0..templates.len() {
        for j in (i + 1)..templates.len() {
            let (la, ta) = &templates[i];
            let (lb, tb) = &templates[j];
            let d = ta.hamming(tb).ok_or(EvalError::ScoreOutOfRange {
                value: 0,
                bits,
            })?;
            if la == lb {
                genuine.push(d);
            } else {
                impostor.push(d);
            }
        }
    }
    Ok(ScoreSet {
        genuine,
        impostor,
        length_bits: bits,
    })
}

/// One replayed verify transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionRecord {
    pub card_label: u32,
    pub probe_label: u32,
    pub probe_index: usize,
    /// Host-side Hamming distance between the enrolled reference and the
    /// probe, recomputed independently of the card.
    pub offline_distance: u32,
    pub sw: u16,
    pub command_trace: String,
    pub response_trace: String,
}

impl TransactionRecord {
    pub fn genuine(&self) -> bool {
        self.card_label == self.probe_label
    }

    pub fn accepted(&self) -> bool {
        self.sw == StatusWord::Ok.value()
    }
}

/// Result of a streamed replay run.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub tau: u32,
    pub length_bits: u16,
    pub confusion: ConfusionMatrix,
    pub transactions: Vec<TransactionRecord>,
    /// Identities excluded for having fewer than 3 images.
    pub skipped_labels: Vec<u32>,
}

impl ReplayOutcome {
    /// True iff every card decision equals offline thresholding of the same
    /// probe distance at the same tau.
    pub fn decisions_coherent(&self) -> bool {
        self.transactions
            .iter()
            .all(|t| t.accepted() == (t.offline_distance <= self.tau))
    }

    pub fn trace_lines(&self) -> impl Iterator<Item = &str> {
        self.transactions
            .iter()
            .flat_map(|t| [t.command_trace.as_str(), t.response_trace.as_str()])
    }
}

struct IdentitySplit {
    label: u32,
    reference: BinaryTemplate,
    probes: Vec<BinaryTemplate>,
}

/// Replay enrol/verify transactions for every identity at threshold `tau`.
///
/// Identities with fewer than 3 images are skipped entirely (no card, no
/// impostor probes). `jobs` bounds the worker threads; 0 uses the rayon
/// default. The result is independent of `jobs`.
pub fn streamed_replay(
    embeddings: &[FloatEmbedding],
    model: &PcaItqModel,
    tau: u32,
    seed: u64,
    jobs: usize,
) -> Result<ReplayOutcome, EvalError> {
    let groups = group_by_label(embeddings);
    let mut skipped_labels = Vec::new();
    let mut splits = Vec::new();
    for (&label, images) in &groups {
        if images.len() < 3 {
            skipped_labels.push(label);
            continue;
        }
        let templates = images
            .iter()
            .map(|e| model.encode_embedding(e))
            .collect::<Result<Vec<_>, _>>()?;
        // Two distinct seeded enrollment picks; the remaining images probe.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(label).wrapping_add(1));
        let picked = rand::seq::index::sample(&mut rng, templates.len(), 2);
        let enrollment: Vec<BinaryTemplate> =
            picked.iter().map(|i| templates[i].clone()).collect();
        let reference = majority_fuse(&enrollment)?;
        let probes = templates
            .iter()
            .enumerate()
            .filter(|(i, _)| !picked.iter().any(|p| p == *i))
            .map(|(_, t)| t.clone())
            .collect();
        splits.push(IdentitySplit {
            label,
            reference,
            probes,
        });
    }
    if splits.len() < 2 {
        return Err(EvalError::NotEnoughIdentities {
            usable: splits.len(),
        });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| EvalError::Parallel(e.to_string()))?;
    let per_card: Vec<Result<Vec<TransactionRecord>, EvalError>> = pool.install(|| {
        splits
            .par_iter()
            .map(|split| replay_one_card(split, &splits, model, tau))
            .collect()
    });

    let mut confusion = ConfusionMatrix::default();
    let mut transactions = Vec::new();
    for result in per_card {
        for record in result? {
            match (record.genuine(), record.accepted()) {
                (true, true) => confusion.tp += 1,
                (true, false) => confusion.fn_ += 1,
                (false, true) => confusion.fp += 1,
                (false, false) => confusion.tn += 1,
            }
            transactions.push(record);
        }
    }
    Ok(ReplayOutcome {
        tau,
        length_bits: model.length_bits,
        confusion,
        transactions,
        skipped_labels,
    })
}

fn replay_one_card(
    split: &IdentitySplit,
    all: &[IdentitySplit],
    model: &PcaItqModel,
    tau: u32,
) -> Result<Vec<TransactionRecord>, EvalError> {
    let tau_u16 = u16::try_from(tau).map_err(|_| EvalError::ScoreOutOfRange {
        value: tau,
        bits: model.length_bits,
    })?;
    let config = CardConfig {
        thresholds: [(model.length_bits, tau_u16)].into_iter().collect(),
        eeprom_quota_bytes: 64,
        ..CardConfig::default()
    };
    let mut card = Card::new(config).map_err(|e| EvalError::Parallel(e.to_string()))?;

    let enroll = ApduCommand::new(
        CLA_MOC,
        INS_ENROLL_TEMPLATE,
        TemplatePayload::new(model.rotation_id, split.reference.clone()).encode(),
    )
    .serialize()
    .expect("enroll payload fits a short APDU");
    let resp = card.process(&enroll);
    if resp.sw != StatusWord::Ok.value() {
        return Err(EvalError::EnrollRejected {
            label: split.label,
            sw: resp.sw,
        });
    }

    let mut records = Vec::new();
    let run_probe = |card: &mut Card,
                         probe_label: u32,
                         probe_index: usize,
                         probe: &BinaryTemplate|
     -> TransactionRecord {
        let raw = ApduCommand::new(
            CLA_MOC,
            INS_VERIFY_BINARY,
            TemplatePayload::new(model.rotation_id, probe.clone()).encode(),
        )
        .serialize()
        .expect("verify payload fits a short APDU");
        let resp = card.process(&raw);
        TransactionRecord {
            card_label: split.label,
            probe_label,
            probe_index,
            offline_distance: split
                .reference
                .hamming(probe)
                .expect("probe length matches reference"),
            sw: resp.sw,
            command_trace: trace::command_line(&raw),
            response_trace: trace::response_line(&resp),
        }
    };

    for (i, probe) in split.probes.iter().enumerate() {
        records.push(run_probe(&mut card, split.label, i, probe));
    }
    for other in all.iter().filter(|o| o.label != split.label) {
        for (i, probe) in other.probes.iter().enumerate() {
            records.push(run_probe(&mut card, other.label, i, probe));
        }
    }
    Ok(records)
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

/// Streamed decision tally with derived rates, as reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamedStats {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
    pub tpr: f64,
    pub far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetOperatingPoint {
    pub target: f64,
    pub tau: u32,
    pub tpr: f64,
    pub far: f64,
}

/// The JSON evaluation report. Field order is fixed and floats are rounded
/// to four decimals so reports diff cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub length_bits: u16,
    pub tau: u32,
    pub eer: f64,
    pub tau_eer: u32,
    pub tpr_at_far: Vec<TargetOperatingPoint>,
    pub streamed: StreamedStats,
    pub seed: u64,
}

pub fn build_report(
    eer: &EerPoint,
    targets: &[OperatingPoint],
    outcome: &ReplayOutcome,
    seed: u64,
) -> EvalReport {
    EvalReport {
        length_bits: outcome.length_bits,
        tau: outcome.tau,
        eer: round4(eer.eer),
        tau_eer: eer.tau,
        tpr_at_far: targets
            .iter()
            .map(|op| TargetOperatingPoint {
                target: op.target_far.unwrap_or(f64::NAN),
                tau: op.tau,
                tpr: round4(op.tpr),
                far: round4(op.far),
            })
            .collect(),
        streamed: StreamedStats {
            tp: outcome.confusion.tp,
            fn_: outcome.confusion.fn_,
            fp: outcome.confusion.fp,
            tn: outcome.confusion.tn,
            tpr: round4(outcome.confusion.tpr()),
            far: round4(outcome.confusion.far()),
        },
        seed,
    }
}
