//! Command data payloads.
//!
//! ENROLL_TEMPLATE and VERIFY_BINARY share one layout:
//!
//! ```text
//! offset 0  u8   version        (0x01)
//! offset 1  u8   hash_len_bits  (16 | 32 | 64 | 128)
//! offset 2  u16  rotation_id    (big-endian)
//! offset 4  u16  salt_id        (long form only)
//! offset 6  u16  template_id    (long form only)
//! then      L/8  template bytes (MSB-first packing)
//! ```
//!
//! Two canonical lengths exist per template length: the 4-byte-header short
//! form and the 8-byte-header long form, discriminated purely by the data
//! length. Every other length is rejected.

use super::{BinaryTemplate, CodecError, TEMPLATE_LENGTHS_BITS};

/// The only protocol version this codec speaks.
pub const PROTOCOL_VERSION: u8 = 0x01;
/// Header length without the optional SaltID/TemplateID words.
pub const SHORT_HEADER_LEN: usize = 4;
/// Header length with SaltID and TemplateID present.
pub const LONG_HEADER_LEN: usize = 8;

/// Optional long-form header fields. They travel together: a payload either
/// has both words on the wire or neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadExtension {
    pub salt_id: u16,
    pub template_id: u16,
}

/// Data payload for ENROLL_TEMPLATE and VERIFY_BINARY.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePayload {
    pub version: u8,
    pub rotation_id: u16,
    pub extension: Option<PayloadExtension>,
    pub template: BinaryTemplate,
}

impl TemplatePayload {
    pub fn new(rotation_id: u16, template: BinaryTemplate) -> Self {
        Self {
            version: PROTOCOL_VERSION,
            rotation_id,
            extension: None,
            template,
        }
    }

    pub fn with_extension(mut self, extension: PayloadExtension) -> Self {
        self.extension = Some(extension);
        self
    }

    pub fn hash_len_bits(&self) -> u16 {
        self.template.length_bits()
    }

    /// Encode to the canonical byte layout (short form unless an extension
    /// is present).
    pub fn encode(&self) -> Vec<u8> {
        let header_len = if self.extension.is_some() {
            LONG_HEADER_LEN
        } else {
            SHORT_HEADER_LEN
        };
        let mut out = Vec::with_capacity(header_len + self.template.byte_len());
        out.push(self.version);
        out.push(self.template.length_bits() as u8);
        out.extend_from_slice(&self.rotation_id.to_be_bytes());
        if let Some(ext) = &self.extension {
            out.extend_from_slice(&ext.salt_id.to_be_bytes());
            out.extend_from_slice(&ext.template_id.to_be_bytes());
        }
        out.extend_from_slice(self.template.as_bytes());
        out
    }

    /// Decode a payload, accepting exactly the two canonical lengths for the
    /// declared template length.
    pub fn decode(data: &[u8]) -> Result<Self, CodecError> {
        if data.len() < 2 {
            return Err(CodecError::PayloadTooShort(data.len()));
        }
        let version = data[0];
        if version != PROTOCOL_VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        let bits = u16::from(data[1]);
        if !TEMPLATE_LENGTHS_BITS.contains(&bits) {
            return Err(CodecError::UnsupportedLength(bits));
        }
        let template_len = usize::from(bits / 8);
        let header_len = if data.len() == SHORT_HEADER_LEN + template_len {
            SHORT_HEADER_LEN
        } else if data.len() == LONG_HEADER_LEN + template_len {
            LONG_HEADER_LEN
        } else {
            return Err(CodecError::NonCanonicalLength {
                bits,
                actual: data.len(),
            });
        };
        let rotation_id = u16::from_be_bytes([data[2], data[3]]);
        let extension = if header_len == LONG_HEADER_LEN {
            Some(PayloadExtension {
                salt_id: u16::from_be_bytes([data[4], data[5]]),
                template_id: u16::from_be_bytes([data[6], data[7]]),
            })
        } else {
            None
        };
        let template = BinaryTemplate::from_bytes(&data[header_len..])?;
        Ok(Self {
            version,
            rotation_id,
            extension,
            template,
        })
    }
}

/// Data payload for REKEY_ROTATION: a single big-endian RotationID.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RekeyPayload {
    pub new_rotation_id: u16,
}

impl RekeyPayload {
    pub fn encode(&self) -> Vec<u8> {
        self.new_rotation_id.to_be_bytes().to_vec()
    }

    pub fn decode(data: &[u8]) -> Result<Self, CodecError> {
        if data.len() != 2 {
            return Err(CodecError::RekeyLength(data.len()));
        }
        Ok(Self {
            new_rotation_id: u16::from_be_bytes([data[0], data[1]]),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apdu::CodecErrorClass;

    fn template(bits: u16) -> BinaryTemplate {
        BinaryTemplate::from_bytes(&vec![0x5A; usize::from(bits / 8)]).unwrap()
    }

    #[test]
    fn decodes_short_form_64() {
        let mut data = vec![0x01, 0x40, 0x00, 0x01];
        data.extend_from_slice(&[0x11; 8]);
        let p = TemplatePayload::decode(&data).unwrap();
        assert_eq!(p.version, 0x01);
        assert_eq!(p.hash_len_bits(), 64);
        assert_eq!(p.rotation_id, 0x0001);
        assert_eq!(p.extension, None);
        assert_eq!(p.template.as_bytes(), &[0x11; 8]);
    }

    #[test]
    fn decodes_long_form_64() {
        let mut data = vec![0x01, 0x40, 0x00, 0x01, 0x00, 0x07, 0x00, 0x03];
        data.extend_from_slice(&[0x22; 8]);
        let p = TemplatePayload::decode(&data).unwrap();
        assert_eq!(
            p.extension,
            Some(PayloadExtension {
                salt_id: 0x0007,
                template_id: 0x0003
            })
        );
    }

    #[test]
    fn rejects_truncated_template() {
        let mut data = vec![0x01, 0x40, 0x00, 0x01];
        data.extend_from_slice(&[0x11; 7]);
        let err = TemplatePayload::decode(&data).unwrap_err();
        assert_eq!(
            err,
            CodecError::NonCanonicalLength {
                bits: 64,
                actual: 11
            }
        );
        assert_eq!(err.class(), CodecErrorClass::Length);
    }

    #[test]
    fn rejects_unsupported_hash_len() {
        let mut data = vec![0x01, 0x21, 0x00, 0x01];
        data.extend_from_slice(&[0x11; 8]);
        let err = TemplatePayload::decode(&data).unwrap_err();
        assert_eq!(err, CodecError::UnsupportedLength(33));
        assert_eq!(err.class(), CodecErrorClass::Format);
    }

    #[test]
    fn rejects_bad_version() {
        let mut data = vec![0x02, 0x40, 0x00, 0x01];
        data.extend_from_slice(&[0x11; 8]);
        let err = TemplatePayload::decode(&data).unwrap_err();
        assert_eq!(err, CodecError::UnsupportedVersion(0x02));
        assert_eq!(err.class(), CodecErrorClass::Format);
    }

    #[test]
    fn rotation_id_is_big_endian() {
        let p = TemplatePayload::new(0x0102, template(16));
        let encoded = p.encode();
        assert_eq!(&encoded[2..4], &[0x01, 0x02]);
    }

    #[test]
    fn short_and_long_forms_round_trip() {
        for bits in TEMPLATE_LENGTHS_BITS {
            let short = TemplatePayload::new(0x0A0B, template(bits));
            assert_eq!(TemplatePayload::decode(&short.encode()).unwrap(), short);
            let long = TemplatePayload::new(0x0A0B, template(bits)).with_extension(
                PayloadExtension {
                    salt_id: 0xBEEF,
                    template_id: 0x0001,
                },
            );
            assert_eq!(TemplatePayload::decode(&long.encode()).unwrap(), long);
        }
    }

    #[test]
    fn exactly_two_canonical_lengths_per_template_length() {
        for bits in TEMPLATE_LENGTHS_BITS {
            let n = usize::from(bits / 8);
            for len in 0..=64usize {
                let mut data = vec![0u8; len];
                if len >= 1 {
                    data[0] = PROTOCOL_VERSION;
                }
                if len >= 2 {
                    data[1] = bits as u8;
                }
                let ok = TemplatePayload::decode(&data).is_ok();
                let canonical = len == SHORT_HEADER_LEN + n || len == LONG_HEADER_LEN + n;
                assert_eq!(ok, canonical, "bits={bits} len={len}");
            }
        }
    }

    #[test]
    fn rekey_round_trip_and_length_check() {
        let p = RekeyPayload {
            new_rotation_id: 0x0002,
        };
        assert_eq!(p.encode(), vec![0x00, 0x02]);
        assert_eq!(RekeyPayload::decode(&[0x00, 0x02]).unwrap(), p);
        let err = RekeyPayload::decode(&[0x00, 0x02, 0x03]).unwrap_err();
        assert_eq!(err, CodecError::RekeyLength(3));
        assert_eq!(err.class(), CodecErrorClass::Length);
    }
}
