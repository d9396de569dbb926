//! APDU framing and payload codec.
//!
//! Everything on the wire is a short APDU: a 4-byte header, an optional
//! Lc-prefixed data field (at most 255 bytes) and an optional trailing Le.
//! Command payloads carry binary templates packed MSB-first, with all
//! multi-byte integers big-endian. Decoders are total: arbitrary input
//! yields a [`CodecError`], never a panic.

mod bits;
mod command;
mod payload;
pub mod trace;

pub use bits::{pack_bits, unpack_bits, BinaryTemplate, TEMPLATE_LENGTHS_BITS};
pub use command::{
    ApduCommand, ApduResponse, CLA_MOC, INS_ENROLL_TEMPLATE, INS_REKEY_ROTATION, INS_VERIFY_BINARY,
};
pub use payload::{
    PayloadExtension, RekeyPayload, TemplatePayload, LONG_HEADER_LEN, PROTOCOL_VERSION,
    SHORT_HEADER_LEN,
};

use thiserror::Error;

/// Decode failures, split into the two classes the card cares about:
/// length/framing trouble and well-framed-but-wrong content.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("frame too short: {0} bytes, need at least 4")]
    FrameTooShort(usize),
    #[error("Lc mismatch: Lc={lc} but {actual} data bytes follow")]
    LcMismatch { lc: usize, actual: usize },
    #[error("Le must be 0x00 when present, got {0:#04x}")]
    LeUnsupported(u8),
    #[error("command data exceeds short-APDU limit: {0} bytes")]
    DataTooLong(usize),
    #[error("payload too short: {0} bytes")]
    PayloadTooShort(usize),
    #[error("payload length {actual} is not canonical for a {bits}-bit template")]
    NonCanonicalLength { bits: u16, actual: usize },
    #[error("rekey payload must be exactly 2 bytes, got {0}")]
    RekeyLength(usize),
    #[error("unsupported protocol version {0:#04x}")]
    UnsupportedVersion(u8),
    #[error("unsupported template length: {0} bits")]
    UnsupportedLength(u16),
    #[error("bit count {0} is not a multiple of 8")]
    BitCountNotByteAligned(usize),
}

/// Error class used to pick a status word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecErrorClass {
    /// Wrong or inconsistent length (maps to SW 0x6700).
    Length,
    /// Well-framed but malformed content (maps to SW 0x6A80).
    Format,
}

impl CodecError {
    pub fn class(&self) -> CodecErrorClass {
        match self {
            CodecError::FrameTooShort(_)
            | CodecError::LcMismatch { .. }
            | CodecError::LeUnsupported(_)
            | CodecError::DataTooLong(_)
            | CodecError::PayloadTooShort(_)
            | CodecError::NonCanonicalLength { .. }
            | CodecError::RekeyLength(_)
            | CodecError::BitCountNotByteAligned(_) => CodecErrorClass::Length,
            CodecError::UnsupportedVersion(_) | CodecError::UnsupportedLength(_) => {
                CodecErrorClass::Format
            }
        }
    }
}
