//! Transport-bounded latency model.
//!
//! End-to-end verification time is pure link time plus a constant on-card
//! budget: `t_total = wire_bytes * bits_per_byte / bitrate + T_CARD_MS`.
//! The byte accounting covers the command payload (4-byte header plus the
//! packed template and any helper bytes) and the 2-byte status word;
//! everything else a given link adds per transaction (command headers,
//! TPDU procedure bytes, frame prologues) is folded into a per-profile
//! overhead constant so alternative accountings are a config edit, not a
//! code change. The default contact profiles use 10 bits per byte (start +
//! 8 data + stop) and a 28-byte overhead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apdu::TEMPLATE_LENGTHS_BITS;

/// Constant on-card budget: XOR + popcount + status word.
pub const T_CARD_MS: f64 = 0.128;
/// Status word bytes on the wire per transaction.
pub const SW_BYTES: u32 = 2;
/// Short-form payload header: version, length, RotationID.
pub const PAYLOAD_HEADER_BYTES: u32 = 4;

/// Contact bitrates swept (bits per second).
pub const CONTACT_BITRATES: [u32; 3] = [9_600, 38_400, 115_200];
/// Contactless bitrates swept (bits per second).
pub const CONTACTLESS_BITRATES: [u32; 4] = [106_000, 212_000, 424_000, 848_000];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("unsupported template length: {0} bits")]
    UnsupportedLength(u16),
    #[error("bitrate {bitrate} b/s is not in the {standard:?} sweep")]
    BitrateOutOfSweep { standard: LinkStandard, bitrate: u32 },
    #[error("bits_per_byte {0} must be at least 8")]
    FramingTooSmall(f64),
    #[error("profile list is empty")]
    NoProfiles,
    #[error("payload config list is empty")]
    NoConfigs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkStandard {
    Contact,
    Contactless,
}

/// One link configuration: a bitrate from the sweep plus the serial framing
/// factor and per-transaction byte overhead that calibrate the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkProfile {
    pub name: String,
    pub standard: LinkStandard,
    /// Bits per second.
    pub bitrate: u32,
    /// Serial framing factor: bits on the line per payload byte.
    pub bits_per_byte: f64,
    pub per_transaction_overhead_bytes: u32,
}

impl LinkProfile {
    pub fn validate(&self) -> Result<(), TransportError> {
        let in_sweep = match self.standard {
            LinkStandard::Contact => CONTACT_BITRATES.contains(&self.bitrate),
            LinkStandard::Contactless => CONTACTLESS_BITRATES.contains(&self.bitrate),
        };
        if !in_sweep {
            return Err(TransportError::BitrateOutOfSweep {
                standard: self.standard,
                bitrate: self.bitrate,
            });
        }
        if self.bits_per_byte < 8.0 {
            return Err(TransportError::FramingTooSmall(self.bits_per_byte));
        }
        Ok(())
    }
}

/// A template length plus optional helper bytes (e.g. a parity helper
/// carried alongside a 64-bit template).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayloadConfig {
    pub length_bits: u16,
    pub helper_bytes: u32,
}

impl PayloadConfig {
    pub fn label(&self) -> String {
        if self.helper_bytes == 0 {
            format!("{} b", self.length_bits)
        } else {
            format!("{} b + {} B", self.length_bits, self.helper_bytes)
        }
    }
}

/// Bytes on the wire for one verify transaction.
pub fn wire_bytes(
    length_bits: u16,
    helper_bytes: u32,
    profile: &LinkProfile,
) -> Result<u32, TransportError> {
    if !TEMPLATE_LENGTHS_BITS.contains(&length_bits) {
        return Err(TransportError::UnsupportedLength(length_bits));
    }
    Ok(PAYLOAD_HEADER_BYTES
        + u32::from(length_bits / 8)
        + helper_bytes
        + SW_BYTES
        + profile.per_transaction_overhead_bytes)
}

/// Link time in milliseconds for a given byte count.
pub fn t_io_ms(bytes: u32, profile: &LinkProfile) -> f64 {
    f64::from(bytes) * profile.bits_per_byte / f64::from(profile.bitrate) * 1_000.0
}

/// Total transaction time: link time plus the constant on-card budget.
pub fn t_total_ms(
    length_bits: u16,
    helper_bytes: u32,
    profile: &LinkProfile,
) -> Result<f64, TransportError> {
    profile.validate()?;
    let bytes = wire_bytes(length_bits, helper_bytes, profile)?;
    Ok(t_io_ms(bytes, profile) + T_CARD_MS)
}

/// One row of the latency report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub profile: String,
    pub standard: LinkStandard,
    pub bitrate: u32,
    pub length_bits: u16,
    pub helper_bytes: u32,
    pub wire_bytes: u32,
    pub t_io_ms: f64,
    pub t_card_ms: f64,
    pub t_total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub rows: Vec<LatencyRow>,
}

impl LatencyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "profile,standard,bitrate_bps,length_bits,helper_bytes,wire_bytes,t_io_ms,t_card_ms,t_total_ms\n",
        );
        for r in &self.rows {
            let standard = match r.standard {
                LinkStandard::Contact => "contact",
                LinkStandard::Contactless => "contactless",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.4},{:.4},{:.4}\n",
                r.profile,
                standard,
                r.bitrate,
                r.length_bits,
                r.helper_bytes,
                r.wire_bytes,
                r.t_io_ms,
                r.t_card_ms,
                r.t_total_ms
            ));
        }
        out
    }
}

/// Cartesian product of profiles and payload configs.
pub fn sweep(
    profiles: &[LinkProfile],
    configs: &[PayloadConfig],
) -> Result<LatencyReport, TransportError> {
    if profiles.is_empty() {
        return Err(TransportError::NoProfiles);
    }
    if configs.is_empty() {
        return Err(TransportError::NoConfigs);
    }
    let mut rows = Vec::with_capacity(profiles.len() * configs.len());
    for profile in profiles {
        profile.validate()?;
        for config in configs {
            let bytes = wire_bytes(config.length_bits, config.helper_bytes, profile)?;
            let t_io = t_io_ms(bytes, profile);
            rows.push(LatencyRow {
                profile: profile.name.clone(),
                standard: profile.standard,
                bitrate: profile.bitrate,
                length_bits: config.length_bits,
                helper_bytes: config.helper_bytes,
                wire_bytes: bytes,
                t_io_ms: t_io,
                t_card_ms: T_CARD_MS,
                t_total_ms: t_io + T_CARD_MS,
            });
        }
    }
    Ok(LatencyReport { rows })
}

/// The calibrated default sweep: three contact rates at 10 bits/byte with
/// 28 bytes of overhead, four contactless rates at 8 bits/byte with a
/// 16-byte framing allowance.
pub fn default_profiles() -> Vec<LinkProfile> {
    let mut profiles = Vec::new();
    for bitrate in CONTACT_BITRATES {
        profiles.push(LinkProfile {
            name: format!("contact-{:.1}k", f64::from(bitrate) / 1_000.0),
            standard: LinkStandard::Contact,
            bitrate,
            bits_per_byte: 10.0,
            per_transaction_overhead_bytes: 28,
        });
    }
    for bitrate in CONTACTLESS_BITRATES {
        profiles.push(LinkProfile {
            name: format!("contactless-{}k", bitrate / 1_000),
            standard: LinkStandard::Contactless,
            bitrate,
            bits_per_byte: 8.0,
            per_transaction_overhead_bytes: 16,
        });
    }
    profiles
}

/// The swept payload variants: 64 b, 128 b, and 64 b with a 6-byte helper.
pub fn default_configs() -> Vec<PayloadConfig> {
    vec![
        PayloadConfig {
            length_bits: 64,
            helper_bytes: 0,
        },
        PayloadConfig {
            length_bits: 128,
            helper_bytes: 0,
        },
        PayloadConfig {
            length_bits: 64,
            helper_bytes: 6,
        },
    ]
}
