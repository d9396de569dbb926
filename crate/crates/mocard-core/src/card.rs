//! Simulated secure element.
//!
//! A [`Card`] is a deterministic state machine: feed it raw command APDUs,
//! get back decision-only responses. Templates live in an EEPROM-model
//! store with a byte quota, matching runs in constant time over `L/8`
//! bytes, and every outcome is encoded entirely in one of eight status
//! words. The response data field is always empty.

mod config;
mod matcher;
mod persist;
mod status;

pub use config::{CardConfig, ConfigError, TemplateRecord};
pub use matcher::{hamming_ct, MatchError, OpCount};
pub use persist::PersistError;
pub use status::StatusWord;

use std::collections::BTreeMap;

use crate::apdu::{
    ApduCommand, ApduResponse, CodecErrorClass, RekeyPayload, TemplatePayload, CLA_MOC,
    INS_ENROLL_TEMPLATE, INS_REKEY_ROTATION, INS_VERIFY_BINARY,
};

/// Scratch area for the probe template; sized for the largest template.
const PROBE_BUFFER_LEN: usize = 16;

/// One simulated card. Callers must serialize access to a single instance;
/// distinct instances are independent.
#[derive(Debug, Clone)]
pub struct Card {
    config: CardConfig,
    records: BTreeMap<Option<u16>, TemplateRecord>,
    active_rotation_id: Option<u16>,
    issuer_authenticated: bool,
    failed_verify_attempts: u32,
    probe_buffer: [u8; PROBE_BUFFER_LEN],
    last_verify_ops: OpCount,
}

impl Card {
    pub fn new(config: CardConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self {
            config,
            records: BTreeMap::new(),
            active_rotation_id: None,
            issuer_authenticated: false,
            failed_verify_attempts: 0,
            probe_buffer: [0u8; PROBE_BUFFER_LEN],
            last_verify_ops: OpCount::default(),
        })
    }

    pub fn config(&self) -> &CardConfig {
        &self.config
    }

    /// Session flag for issuer operations; toggled by the host simulator,
    /// not by an APDU.
    pub fn set_issuer_authenticated(&mut self, authenticated: bool) {
        self.issuer_authenticated = authenticated;
    }

    pub fn issuer_authenticated(&self) -> bool {
        self.issuer_authenticated
    }

    /// Drop session state (authentication, attempt counter) as if the card
    /// had been powered off and on.
    pub fn reset_session(&mut self) {
        self.issuer_authenticated = false;
        self.failed_verify_attempts = 0;
    }

    /// Debug hook for the buffer-hygiene invariant: outside of a command in
    /// flight this must be all zeros.
    pub fn probe_buffer(&self) -> &[u8] {
        &self.probe_buffer
    }

    /// Byte-operation counts from the most recent VERIFY_BINARY. Zero when
    /// the last verify never reached the matcher.
    pub fn last_verify_ops(&self) -> OpCount {
        self.last_verify_ops
    }

    /// Sum of stored record footprints.
    pub fn stored_bytes(&self) -> usize {
        self.records.values().map(|r| r.footprint_bytes()).sum()
    }

    pub fn record(&self, template_id: Option<u16>) -> Option<&TemplateRecord> {
        self.records.get(&template_id)
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn active_rotation_id(&self) -> Option<u16> {
        self.active_rotation_id
    }

    /// Execute one command APDU against the card state.
    ///
    /// Total and deterministic: malformed input maps to a status word, the
    /// card never panics and never returns response data.
    pub fn process(&mut self, raw: &[u8]) -> ApduResponse {
        let sw = self.dispatch(raw);
        self.probe_buffer.fill(0);
        ApduResponse::status(sw.value())
    }

    fn dispatch(&mut self, raw: &[u8]) -> StatusWord {
        let cmd = match ApduCommand::parse(raw) {
            Ok(cmd) => cmd,
            Err(_) => return StatusWord::WrongLength,
        };
        if cmd.cla != CLA_MOC {
            return StatusWord::InsNotSupported;
        }
        let handler = match cmd.ins {
            INS_ENROLL_TEMPLATE => Self::handle_enroll as fn(&mut Self, &ApduCommand) -> StatusWord,
            INS_VERIFY_BINARY => Self::handle_verify,
            INS_REKEY_ROTATION => Self::handle_rekey,
            _ => return StatusWord::InsNotSupported,
        };
        if cmd.p1 != 0x00 || cmd.p2 != 0x00 {
            return StatusWord::WrongData;
        }
        handler(self, &cmd)
    }

    fn decode_template_payload(data: &[u8]) -> Result<TemplatePayload, StatusWord> {
        TemplatePayload::decode(data).map_err(|e| match e.class() {
            CodecErrorClass::Length => StatusWord::WrongLength,
            CodecErrorClass::Format => StatusWord::WrongData,
        })
    }

    fn handle_enroll(&mut self, cmd: &ApduCommand) -> StatusWord {
        let payload = match Self::decode_template_payload(&cmd.data) {
            Ok(p) => p,
            Err(sw) => return sw,
        };
        if self.config.require_issuer_auth && !self.issuer_authenticated {
            return StatusWord::SecurityStatusNotSatisfied;
        }
        // After a rekey (or a first enrollment) the card is bound to one
        // RotationID; enrolling under a different one is inconsistent.
        if let Some(active) = self.active_rotation_id {
            if payload.rotation_id != active {
                return StatusWord::WrongData;
            }
        }
        let key = payload.extension.map(|e| e.template_id);
        let record = TemplateRecord {
            template: payload.template,
            rotation_id: payload.rotation_id,
            policy_flags: 0x00,
            salt_id: payload.extension.map(|e| e.salt_id),
            template_id: key,
            integrity_tag: self
                .config
                .integrity_tag_bytes
                .map(|n| vec![0u8; usize::from(n)]),
        };
        let replaced = self.records.get(&key).map_or(0, |r| r.footprint_bytes());
        let new_total = self.stored_bytes() - replaced + record.footprint_bytes();
        if new_total > self.config.eeprom_quota_bytes {
            return StatusWord::NotEnoughMemory;
        }
        if self.active_rotation_id.is_none() {
            self.active_rotation_id = Some(record.rotation_id);
        }
        self.records.insert(key, record);
        StatusWord::Ok
    }

    fn handle_verify(&mut self, cmd: &ApduCommand) -> StatusWord {
        self.last_verify_ops = OpCount::default();
        let payload = match Self::decode_template_payload(&cmd.data) {
            Ok(p) => p,
            Err(sw) => return sw,
        };
        if let Some(limit) = self.config.rate_limit {
            if self.failed_verify_attempts >= limit {
                // Locked out: reject without touching the matcher.
                return StatusWord::ConditionsNotSatisfied;
            }
        }
        let key = payload.extension.map(|e| e.template_id);
        let record = match self.records.get(&key) {
            Some(r) if r.template.length_bits() == payload.template.length_bits() => r,
            _ => return StatusWord::RecordNotFound,
        };
        if record.rotation_id != payload.rotation_id {
            return StatusWord::WrongData;
        }
        let tau = match self.config.thresholds.get(&payload.template.length_bits()) {
            Some(&tau) => u32::from(tau),
            // No threshold provisioned for this length: fail closed.
            None => return StatusWord::ConditionsNotSatisfied,
        };
        let n = payload.template.byte_len();
        self.probe_buffer[..n].copy_from_slice(payload.template.as_bytes());
        let mut ops = OpCount::default();
        let distance =
            matcher::hamming_ct_counted(&self.probe_buffer[..n], record.template.as_bytes(), &mut ops);
        let accept = matcher::ct_le(distance, tau, &mut ops);
        self.probe_buffer.fill(0);
        self.last_verify_ops = ops;
        if accept {
            self.failed_verify_attempts = 0;
            StatusWord::Ok
        } else {
            self.failed_verify_attempts += 1;
            StatusWord::ConditionsNotSatisfied
        }
    }

    fn handle_rekey(&mut self, cmd: &ApduCommand) -> StatusWord {
        let payload = match RekeyPayload::decode(&cmd.data) {
            Ok(p) => p,
            Err(e) => {
                return match e.class() {
                    CodecErrorClass::Length => StatusWord::WrongLength,
                    CodecErrorClass::Format => StatusWord::WrongData,
                }
            }
        };
        if self.config.require_issuer_auth && !self.issuer_authenticated {
            return StatusWord::SecurityStatusNotSatisfied;
        }
        // Overwrite before dropping: the EEPROM model erases, not just forgets.
        for record in self.records.values_mut() {
            record.zeroize();
        }
        self.records.clear();
        self.active_rotation_id = Some(payload.new_rotation_id);
        StatusWord::Ok
    }
}
