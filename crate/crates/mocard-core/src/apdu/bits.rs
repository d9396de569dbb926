//! MSB-first bit packing and the fixed-length binary template type.

use std::fmt;

use super::CodecError;

/// Template lengths the protocol accepts, in bits.
pub const TEMPLATE_LENGTHS_BITS: [u16; 4] = [16, 32, 64, 128];

/// Pack a bit sequence into bytes, MSB-first: bit `8i` of the input lands in
/// the most significant position of output byte `i`.
pub fn pack_bits(bits: &[bool]) -> Result<Vec<u8>, CodecError> {
    if !bits.len().is_multiple_of(8) {
        return Err(CodecError::BitCountNotByteAligned(bits.len()));
    }
    let mut out = vec![0u8; bits.len() / 8];
    for (i, &bit) in bits.iter().enumerate() {
        if bit {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    Ok(out)
}

/// Exact inverse of [`pack_bits`].
pub fn unpack_bits(bytes: &[u8]) -> Vec<bool> {
    let mut out = Vec::with_capacity(bytes.len() * 8);
    for &byte in bytes {
        for shift in (0..8).rev() {
            out.push((byte >> shift) & 1 == 1);
        }
    }
    out
}

/// A packed binary template of 16, 32, 64 or 128 bits.
///
/// The packed byte string is used verbatim in APDU payloads and in card
/// storage, so the representation is the wire representation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryTemplate {
    bytes: Vec<u8>,
    length_bits: u16,
}

impl BinaryTemplate {
    /// Build from an unpacked bit sequence; the bit count must be one of
    /// [`TEMPLATE_LENGTHS_BITS`].
    pub fn from_bits(bits: &[bool]) -> Result<Self, CodecError> {
        let length_bits = u16::try_from(bits.len())
            .map_err(|_| CodecError::UnsupportedLength(u16::MAX))?;
        if !TEMPLATE_LENGTHS_BITS.contains(&length_bits) {
            return Err(CodecError::UnsupportedLength(length_bits));
        }
        Ok(Self {
            bytes: pack_bits(bits)?,
            length_bits,
        })
    }

    /// Build from already-packed bytes; the byte count must be L/8 for a
    /// supported L.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let length_bits = u16::try_from(bytes.len() * 8)
            .map_err(|_| CodecError::UnsupportedLength(u16::MAX))?;
        if !TEMPLATE_LENGTHS_BITS.contains(&length_bits) {
            return Err(CodecError::UnsupportedLength(length_bits));
        }
        Ok(Self {
            bytes: bytes.to_vec(),
            length_bits,
        })
    }

    pub fn from_hex(hex_str: &str) -> Result<Self, CodecError> {
        let bytes = hex::decode(hex_str.trim())
            .map_err(|_| CodecError::UnsupportedLength(0))?;
        Self::from_bytes(&bytes)
    }

    pub fn length_bits(&self) -> u16 {
        self.length_bits
    }

    pub fn byte_len(&self) -> usize {
        self.bytes.len()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bits(&self) -> Vec<bool> {
        unpack_bits(&self.bytes)
    }

    /// Bit `i` in MSB-first order.
    pub fn bit(&self, i: usize) -> bool {
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn to_hex(&self) -> String {
        hex::encode_upper(&self.bytes)
    }

    /// Number of differing bits against another template of the same length.
    pub fn hamming(&self, other: &BinaryTemplate) -> Option<u32> {
        if self.length_bits != other.length_bits {
            return None;
        }
        Some(
            self.bytes
                .iter()
                .zip(&other.bytes)
                .map(|(a, b)| (a ^ b).count_ones())
                .sum(),
        )
    }
}

impl fmt::Debug for BinaryTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryTemplate({} b, {})", self.length_bits, self.to_hex())
    }
}
