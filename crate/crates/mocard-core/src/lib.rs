//! Match-on-card face verification with short binary templates.
//!
//! The host side turns float face embeddings into compact binary templates
//! (PCA projection, ITQ rotation, sign binarization), frames them into
//! fixed-length APDUs, and talks to a simulated secure element that stores
//! one template per identity and answers verification requests with a
//! decision-only status word. An evaluation harness derives operating
//! thresholds from ROC curves and replays enrol/verify transactions through
//! the card, and a transport model bounds end-to-end latency by link speed
//! plus a constant on-card budget.

pub mod apdu;
pub mod card;
pub mod cli;
pub mod eval;
pub mod pcaitq;
pub mod transport;
