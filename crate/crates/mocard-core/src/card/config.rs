//! Personalization config and the stored record type.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apdu::BinaryTemplate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("threshold {tau} exceeds template length {bits}")]
    ThresholdTooLarge { bits: u16, tau: u16 },
    #[error("threshold declared for unsupported length {0} bits")]
    UnsupportedLength(u16),
    #[error("integrity tag length {0} outside 8..=16")]
    TagLengthOutOfRange(u8),
}

/// Card personalization: thresholds per template length, storage quota and
/// policy switches. Fixed at construction, the way issuance would fix them.
///
/// Thresholds are provisioned here rather than carried in any APDU, so the
/// wire format stays fixed-length and decision-only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardConfig {
    /// Accept threshold per template length: distance <= tau accepts.
    pub thresholds: BTreeMap<u16, u16>,
    /// Total bytes available for template records.
    pub eeprom_quota_bytes: usize,
    /// Gate ENROLL_TEMPLATE and REKEY_ROTATION behind the issuer session
    /// flag.
    #[serde(default)]
    pub require_issuer_auth: bool,
    /// Maximum consecutive failed VERIFY_BINARY attempts per session before
    /// lockout; None disables rate limiting.
    #[serde(default)]
    pub rate_limit: Option<u32>,
    /// Reserve this many opaque integrity-tag bytes per record (8..=16).
    #[serde(default)]
    pub integrity_tag_bytes: Option<u8>,
}

impl Default for CardConfig {
    fn default() -> Self {
        Self {
            thresholds: BTreeMap::new(),
            eeprom_quota_bytes: 256,
            require_issuer_auth: false,
            rate_limit: None,
            integrity_tag_bytes: None,
        }
    }
}

impl CardConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (&bits, &tau) in &self.thresholds {
            if !crate::apdu::TEMPLATE_LENGTHS_BITS.contains(&bits) {
                return Err(ConfigError::UnsupportedLength(bits));
            }
            if tau > bits {
                return Err(ConfigError::ThresholdTooLarge { bits, tau });
            }
        }
        if let Some(n) = self.integrity_tag_bytes {
            if !(8..=16).contains(&n) {
                return Err(ConfigError::TagLengthOutOfRange(n));
            }
        }
        Ok(())
    }
}

/// One enrolled reference as it sits in EEPROM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRecord {
    pub template: BinaryTemplate,
    pub rotation_id: u16,
    pub policy_flags: u8,
    pub salt_id: Option<u16>,
    pub template_id: Option<u16>,
    /// Reserved opaque bytes; no MAC is computed over them here.
    pub integrity_tag: Option<Vec<u8>>,
}

impl TemplateRecord {
    /// Storage footprint: template bytes + 2 (RotationID) + 1 (policy
    /// flags), plus the optional tag. 5/7/11/19 bytes for L=16/32/64/128
    /// without a tag.
    pub fn footprint_bytes(&self) -> usize {
        self.template.byte_len()
            + 2
            + 1
            + self.integrity_tag.as_ref().map_or(0, |t| t.len())
    }

    /// Overwrite secret material with zeros before the record is dropped.
    pub fn zeroize(&mut self) {
        let zeroed = BinaryTemplate::from_bytes(&vec![0u8; self.template.byte_len()])
            .expect("template length already validated");
        self.template = zeroed;
        if let Some(tag) = &mut self.integrity_tag {
            tag.fill(0);
        }
    }
}
