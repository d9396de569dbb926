//! Card state persistence.
//!
//! A compact little-endian container (magic `MOCS`) holding the
//! personalization config, the active RotationID and the record store.
//! Session state (issuer authentication, attempt counter) is deliberately
//! not persisted: loading a card starts a fresh session.

use std::collections::BTreeMap;
use std::io::{Cursor, Read};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::{Card, CardConfig, ConfigError, TemplateRecord, PROBE_BUFFER_LEN};
use crate::apdu::BinaryTemplate;
use crate::card::matcher::OpCount;

const MAGIC: &[u8; 4] = b"MOCS";
const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("truncated or unreadable card state: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a card state file (bad magic)")]
    BadMagic,
    #[error("unsupported card state version {0}")]
    BadVersion(u8),
    #[error("malformed card state: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn write_opt_u16(out: &mut Vec<u8>, value: Option<u16>) {
    match value {
        Some(v) => {
            out.push(1);
            out.write_u16::<LittleEndian>(v).expect("vec write");
        }
        None => out.push(0),
    }
}

fn read_opt_u16(cur: &mut Cursor<&[u8]>) -> Result<Option<u16>, PersistError> {
    match cur.read_u8()? {
        0 => Ok(None),
        1 => Ok(Some(cur.read_u16::<LittleEndian>()?)),
        _ => Err(PersistError::Malformed("bad option tag")),
    }
}

impl Card {
    /// Serialize persistent card contents (config, rotation binding,
    /// records).
    pub fn save(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);

        let config = &self.config;
        out.write_u16::<LittleEndian>(config.thresholds.len() as u16)
            .expect("vec write");
        for (&bits, &tau) in &config.thresholds {
            out.write_u16::<LittleEndian>(bits).expect("vec write");
            out.write_u16::<LittleEndian>(tau).expect("vec write");
        }
        out.write_u64::<LittleEndian>(config.eeprom_quota_bytes as u64)
            .expect("vec write");
        out.push(u8::from(config.require_issuer_auth));
        match config.rate_limit {
            Some(limit) => {
                out.push(1);
                out.write_u32::<LittleEndian>(limit).expect("vec write");
            }
            None => out.push(0),
        }
        match config.integrity_tag_bytes {
            Some(n) => out.extend_from_slice(&[1, n]),
            None => out.push(0),
        }

        write_opt_u16(&mut out, self.active_rotation_id);

        out.write_u16::<LittleEndian>(self.records.len() as u16)
            .expect("vec write");
        for record in self.records.values() {
            write_opt_u16(&mut out, record.template_id);
            out.write_u16::<LittleEndian>(record.rotation_id)
                .expect("vec write");
            out.push(record.policy_flags);
            write_opt_u16(&mut out, record.salt_id);
            out.write_u16::<LittleEndian>(record.template.length_bits())
                .expect("vec write");
            out.extend_from_slice(record.template.as_bytes());
            match &record.integrity_tag {
                Some(tag) => {
                    out.extend_from_slice(&[1, tag.len() as u8]);
                    out.extend_from_slice(tag);
                }
                None => out.push(0),
            }
        }
        out
    }

    /// Rebuild a card from [`Card::save`] output. The loaded card starts a
    /// fresh session.
    pub fn load(bytes: &[u8]) -> Result<Self, PersistError> {
        let mut cur = Cursor::new(bytes);
        let mut magic = [0u8; 4];
        cur.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(PersistError::BadMagic);
        }
        let version = cur.read_u8()?;
        if version != FORMAT_VERSION {
            return Err(PersistError::BadVersion(version));
        }

        let threshold_count = cur.read_u16::<LittleEndian>()?;
        let mut thresholds = BTreeMap::new();
        for _ in 0..threshold_count {
            let bits = cur.read_u16::<LittleEndian>()?;
            let tau = cur.read_u16::<LittleEndian>()?;
            thresholds.insert(bits, tau);
        }
        let eeprom_quota_bytes = usize::try_from(cur.read_u64::<LittleEndian>()?)
            .map_err(|_| PersistError::Malformed("quota out of range"))?;
        let require_issuer_auth = cur.read_u8()? != 0;
        let rate_limit = match cur.read_u8()? {
            0 => None,
            1 => Some(cur.read_u32::<LittleEndian>()?),
            _ => return Err(PersistError::Malformed("bad option tag")),
        };
        let integrity_tag_bytes = match cur.read_u8()? {
            0 => None,
            1 => Some(cur.read_u8()?),
            _ => return Err(PersistError::Malformed("bad option tag")),
        };
        let config = CardConfig {
            thresholds,
            eeprom_quota_bytes,
            require_issuer_auth,
            rate_limit,
            integrity_tag_bytes,
        };
        config.validate()?;

        let active_rotation_id = read_opt_u16(&mut cur)?;

        let record_count = cur.read_u16::<LittleEndian>()?;
        let mut records = BTreeMap::new();
        for _ in 0..record_count {
            let template_id = read_opt_u16(&mut cur)?;
            let rotation_id = cur.read_u16::<LittleEndian>()?;
            let policy_flags = cur.read_u8()?;
            let salt_id = read_opt_u16(&mut cur)?;
            let bits = cur.read_u16::<LittleEndian>()?;
            if bits % 8 != 0 {
                return Err(PersistError::Malformed("template length"));
            }
            let mut template_bytes = vec![0u8; usize::from(bits / 8)];
            cur.read_exact(&mut template_bytes)?;
            let template = BinaryTemplate::from_bytes(&template_bytes)
                .map_err(|_| PersistError::Malformed("template length"))?;
            let integrity_tag = match cur.read_u8()? {
                0 => None,
                1 => {
                    let len = usize::from(cur.read_u8()?);
                    let mut tag = vec![0u8; len];
                    cur.read_exact(&mut tag)?;
                    Some(tag)
                }
                _ => return Err(PersistError::Malformed("bad option tag")),
            };
            records.insert(
                template_id,
                TemplateRecord {
                    template,
                    rotation_id,
                    policy_flags,
                    salt_id,
                    template_id,
                    integrity_tag,
                },
            );
        }

        Ok(Card {
            config,
            records,
            active_rotation_id,
            issuer_authenticated: false,
            failed_verify_attempts: 0,
            probe_buffer: [0u8; PROBE_BUFFER_LEN],
            last_verify_ops: OpCount::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apdu::{ApduCommand, TemplatePayload, CLA_MOC, INS_ENROLL_TEMPLATE, INS_VERIFY_BINARY};

    #[test]
    fn save_load_round_trip_preserves_records_and_config() {
        let mut config = CardConfig::default();
        config.thresholds.insert(64, 23);
        config.rate_limit = Some(3);
        config.integrity_tag_bytes = Some(8);
        let mut card = Card::new(config).unwrap();

        let template = BinaryTemplate::from_bytes(&[0x3C; 8]).unwrap();
        let enroll = ApduCommand::new(
            CLA_MOC,
            INS_ENROLL_TEMPLATE,
            TemplatePayload::new(7, template.clone()).encode(),
        )
        .serialize()
        .unwrap();
        assert_eq!(card.process(&enroll).sw, 0x9000);

        let restored = Card::load(&card.save()).unwrap();
        assert_eq!(restored.config(), card.config());
        assert_eq!(restored.active_rotation_id(), Some(7));
        assert_eq!(restored.record(None), card.record(None));
        assert!(!restored.issuer_authenticated());

        let mut restored = restored;
        let verify = ApduCommand::new(
            CLA_MOC,
            INS_VERIFY_BINARY,
            TemplatePayload::new(7, template).encode(),
        )
        .serialize()
        .unwrap();
        assert_eq!(restored.process(&verify).sw, 0x9000);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(Card::load(b"no"), Err(PersistError::Io(_))));
        assert!(matches!(
            Card::load(b"XXXX\x01\x00\x00"),
            Err(PersistError::BadMagic)
        ));
        let mut good = Card::new(CardConfig::default()).unwrap().save();
        good[4] = 9;
        assert!(matches!(Card::load(&good), Err(PersistError::BadVersion(9))));
    }
}
