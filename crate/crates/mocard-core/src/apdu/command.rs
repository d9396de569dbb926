//! Short-APDU command and response frames.

use super::CodecError;

/// Class byte for all commands in this interface.
pub const CLA_MOC: u8 = 0x80;
/// Store a reference template.
pub const INS_ENROLL_TEMPLATE: u8 = 0x10;
/// Match a probe template against the stored reference.
pub const INS_VERIFY_BINARY: u8 = 0x20;
/// Rotate the parameter handle and erase stored references.
pub const INS_REKEY_ROTATION: u8 = 0x30;

/// A parsed short-form command APDU.
///
/// Only short APDUs exist here (Lc and Le are single bytes); that is enough
/// for every payload up to 128-bit templates. Le, when present, must be
/// 0x00 because responses never carry data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApduCommand {
    pub cla: u8,
    pub ins: u8,
    pub p1: u8,
    pub p2: u8,
    pub data: Vec<u8>,
    pub le: Option<u8>,
}

impl ApduCommand {
    /// Convenience constructor with P1 = P2 = 0 and no Le.
    pub fn new(cla: u8, ins: u8, data: Vec<u8>) -> Self {
        Self {
            cla,
            ins,
            p1: 0x00,
            p2: 0x00,
            data,
            le: None,
        }
    }

    /// Parse raw bytes as a short APDU with strict Lc checking.
    ///
    /// Accepted shapes: header only (4 bytes), header + Le (5 bytes),
    /// header + Lc + data, and header + Lc + data + Le. Anything else is a
    /// framing error.
    pub fn parse(raw: &[u8]) -> Result<Self, CodecError> {
        if raw.len() < 4 {
            return Err(CodecError::FrameTooShort(raw.len()));
        }
        let (cla, ins, p1, p2) = (raw[0], raw[1], raw[2], raw[3]);
        let (data, le) = match raw.len() {
            4 => (Vec::new(), None),
            5 => (Vec::new(), Some(raw[4])),
            _ => {
                let lc = usize::from(raw[4]);
                let body = &raw[5..];
                if body.len() == lc {
                    (body.to_vec(), None)
                } else if body.len() == lc + 1 {
                    (body[..lc].to_vec(), Some(body[lc]))
                } else {
                    return Err(CodecError::LcMismatch {
                        lc,
                        actual: body.len(),
                    });
                }
            }
        };
        if let Some(le) = le {
            if le != 0x00 {
                return Err(CodecError::LeUnsupported(le));
            }
        }
        Ok(Self {
            cla,
            ins,
            p1,
            p2,
            data,
            le,
        })
    }

    /// Serialize back to bytes. `parse(serialize(cmd)) == cmd` for every
    /// command whose data fits a short APDU.
    pub fn serialize(&self) -> Result<Vec<u8>, CodecError> {
        if self.data.len() > 255 {
            return Err(CodecError::DataTooLong(self.data.len()));
        }
        let mut out = Vec::with_capacity(6 + self.data.len());
        out.extend_from_slice(&[self.cla, self.ins, self.p1, self.p2]);
        if !self.data.is_empty() {
            out.push(self.data.len() as u8);
            out.extend_from_slice(&self.data);
        }
        if let Some(le) = self.le {
            if le != 0x00 {
                return Err(CodecError::LeUnsupported(le));
            }
            out.push(le);
        }
        Ok(out)
    }
}

/// A response APDU: optional data plus a 2-byte status word.
///
/// In this decision-only interface the data field is always empty; the type
/// still carries it so traces and tests can assert that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApduResponse {
    pub data: Vec<u8>,
    pub sw: u16,
}

impl ApduResponse {
    pub fn status(sw: u16) -> Self {
        Self {
            data: Vec::new(),
            sw,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.data.clone();
        out.extend_from_slice(&self.sw.to_be_bytes());
        out
    }

    pub fn parse(raw: &[u8]) -> Result<Self, CodecError> {
        if raw.len() < 2 {
            return Err(CodecError::FrameTooShort(raw.len()));
        }
        let (data, sw) = raw.split_at(raw.len() - 2);
        Ok(Self {
            data: data.to_vec(),
            sw: u16::from_be_bytes([sw[0], sw[1]]),
        })
    }

    pub fn sw1(&self) -> u8 {
        (self.sw >> 8) as u8
    }

    pub fn sw2(&self) -> u8 {
        (self.sw & 0xFF) as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_verify_frame() {
        let mut raw = vec![0x80, 0x20, 0x00, 0x00, 0x0C];
        raw.extend_from_slice(&[0xAB; 12]);
        let cmd = ApduCommand::parse(&raw).unwrap();
        assert_eq!(cmd.cla, CLA_MOC);
        assert_eq!(cmd.ins, INS_VERIFY_BINARY);
        assert_eq!(cmd.data.len(), 12);
        assert_eq!(cmd.le, None);
    }

    #[test]
    fn rejects_lc_mismatch() {
        let mut raw = vec![0x80, 0x20, 0x00, 0x00, 0x0C];
        raw.extend_from_slice(&[0xAB; 11]);
        assert!(matches!(
            ApduCommand::parse(&raw),
            Err(CodecError::LcMismatch { lc: 12, actual: 11 })
        ));
    }

    #[test]
    fn rejects_short_frames() {
        assert_eq!(ApduCommand::parse(&[]), Err(CodecError::FrameTooShort(0)));
        assert_eq!(
            ApduCommand::parse(&[0x80, 0x20, 0x00]),
            Err(CodecError::FrameTooShort(3))
        );
    }

    #[test]
    fn serializes_rekey_example() {
        let cmd = ApduCommand::new(CLA_MOC, INS_REKEY_ROTATION, vec![0x00, 0x02]);
        assert_eq!(
            cmd.serialize().unwrap(),
            vec![0x80, 0x30, 0x00, 0x00, 0x02, 0x00, 0x02]
        );
    }

    #[test]
    fn header_only_command_is_four_bytes() {
        let cmd = ApduCommand::new(0x80, 0x99, Vec::new());
        let raw = cmd.serialize().unwrap();
        assert_eq!(raw.len(), 4);
        assert_eq!(ApduCommand::parse(&raw).unwrap(), cmd);
    }

    #[test]
    fn le_must_be_zero() {
        assert_eq!(
            ApduCommand::parse(&[0x80, 0x20, 0x00, 0x00, 0x01]),
            Err(CodecError::LeUnsupported(0x01))
        );
        // 4S shape: Lc + data + nonzero Le
        assert_eq!(
            ApduCommand::parse(&[0x80, 0x20, 0x00, 0x00, 0x01, 0xAA, 0x05]),
            Err(CodecError::LeUnsupported(0x05))
        );
        let ok = ApduCommand::parse(&[0x80, 0x20, 0x00, 0x00, 0x01, 0xAA, 0x00]).unwrap();
        assert_eq!(ok.le, Some(0x00));
        assert_eq!(ok.data, vec![0xAA]);
    }

    #[test]
    fn serialize_rejects_oversized_data() {
        let cmd = ApduCommand::new(0x80, 0x10, vec![0u8; 256]);
        assert_eq!(cmd.serialize(), Err(CodecError::DataTooLong(256)));
    }

    #[test]
    fn response_round_trip() {
        let resp = ApduResponse::status(0x9000);
        assert_eq!(resp.to_bytes(), vec![0x90, 0x00]);
        assert_eq!(ApduResponse::parse(&[0x90, 0x00]).unwrap(), resp);
        assert_eq!(resp.sw1(), 0x90);
        assert_eq!(resp.sw2(), 0x00);
    }
}
