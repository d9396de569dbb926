//! Randomized invariants over the codec, the card state machine and the
//! ROC machinery.

use proptest::prelude::*;

use mocard_core::apdu::{
    pack_bits, unpack_bits, ApduCommand, BinaryTemplate, PayloadExtension, TemplatePayload,
    CLA_MOC, INS_ENROLL_TEMPLATE, INS_REKEY_ROTATION, INS_VERIFY_BINARY,
};
use mocard_core::card::{Card, CardConfig, StatusWord, TemplateRecord};
use mocard_core::eval::{compute_roc, ScoreSet};

fn template_byte_len() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(8), Just(16)]
}

fn arb_template() -> impl Strategy<Value = BinaryTemplate> {
    template_byte_len()
        .prop_flat_map(|n| prop::collection::vec(any::<u8>(), n))
        .prop_map(|bytes| BinaryTemplate::from_bytes(&bytes).unwrap())
}

fn arb_payload() -> impl Strategy<Value = TemplatePayload> {
    (arb_template(), any::<u16>(), any::<Option<(u16, u16)>>()).prop_map(
        |(template, rotation_id, ext)| {
            let mut payload = TemplatePayload::new(rotation_id, template);
            if let Some((salt_id, template_id)) = ext {
                payload = payload.with_extension(PayloadExtension {
                    salt_id,
                    template_id,
                });
            }
            payload
        },
    )
}

fn arb_command() -> impl Strategy<Value = ApduCommand> {
    (
        any::<u8>(),
        any::<u8>(),
        any::<u8>(),
        any::<u8>(),
        prop::collection::vec(any::<u8>(), 0..=255),
        prop::bool::ANY,
    )
        .prop_map(|(cla, ins, p1, p2, data, with_le)| ApduCommand {
            cla,
            ins,
            p1,
            p2,
            data,
            le: with_le.then_some(0x00),
        })
}

proptest! {
    #[test]
    fn bit_packing_round_trips(bits in prop::collection::vec(any::<bool>(), 0..=256)) {
        let aligned = bits.len() % 8 == 0;
        match pack_bits(&bits) {
            Ok(packed) => {
                prop_assert!(aligned);
                prop_assert_eq!(unpack_bits(&packed), bits);
            }
            Err(_) => prop_assert!(!aligned),
        }
    }

    #[test]
    fn command_round_trips(cmd in arb_command()) {
        let raw = cmd.serialize().unwrap();
        prop_assert_eq!(ApduCommand::parse(&raw).unwrap(), cmd);
    }

    #[test]
    fn payload_round_trips(payload in arb_payload()) {
        prop_assert_eq!(TemplatePayload::decode(&payload.encode()).unwrap(), payload.clone());
    }

    #[test]
    fn parser_is_total(raw in prop::collection::vec(any::<u8>(), 0..=300)) {
        // Whatever happens, it happens through Result, not a panic.
        let _ = ApduCommand::parse(&raw);
        let _ = TemplatePayload::decode(&raw);
    }

    #[test]
    fn card_never_leaks_data_and_stays_in_budget(
        ops in prop::collection::vec(
            prop_oneof![
                // Raw junk frames.
                prop::collection::vec(any::<u8>(), 0..=40).prop_map(CardOp::Raw),
                // Well-formed traffic with varying parameters.
                (template_byte_len(), any::<u8>(), 0u16..4, any::<Option<u16>>(), prop::bool::ANY)
                    .prop_map(|(n, fill, rot, tid, verify)| CardOp::Template {
                        byte_len: n,
                        fill,
                        rotation_id: rot,
                        template_id: tid,
                        verify,
                    }),
                (0u16..4).prop_map(CardOp::Rekey),
            ],
            1..60,
        )
    ) {
        let config = CardConfig {
            thresholds: [(16u16, 4u16), (32, 8), (64, 16), (128, 32)].into_iter().collect(),
            eeprom_quota_bytes: 48,
            ..CardConfig::default()
        };
        let mut card = Card::new(config).unwrap();
        for op in ops {
            let raw = op.frame();
            let before = card.clone();
            let response = card.process(&raw);
            // Decision-only: no data, in-table status words.
            prop_assert!(response.data.is_empty());
            prop_assert!(StatusWord::from_value(response.sw).is_some());
            // Quota holds after every command.
            prop_assert!(card.stored_bytes() <= 48);
            // Buffer hygiene.
            prop_assert!(card.probe_buffer().iter().all(|&b| b == 0));
            // Determinism: the same command on the same state gives the
            // same response and the same successor state.
            let mut replayed = before;
            let response2 = replayed.process(&raw);
            prop_assert_eq!(response2.sw, response.sw);
            prop_assert_eq!(replayed.record_count(), card.record_count());
            prop_assert_eq!(replayed.stored_bytes(), card.stored_bytes());
        }
    }

    #[test]
    fn roc_is_monotone_and_matches_recount(
        genuine in prop::collection::vec(0u32..=16, 1..40),
        impostor in prop::collection::vec(0u32..=16, 1..40),
    ) {
        let scores = ScoreSet { genuine: genuine.clone(), impostor: impostor.clone(), length_bits: 16 };
        let curve = compute_roc(&scores).unwrap();
        prop_assert_eq!(curve.rows.len(), 17);
        for pair in curve.rows.windows(2) {
            prop_assert!(pair[1].tpr >= pair[0].tpr);
            prop_assert!(pair[1].far >= pair[0].far);
        }
        for row in &curve.rows {
            let tp = genuine.iter().filter(|&&g| g <= row.tau).count();
            let fa = impostor.iter().filter(|&&i| i <= row.tau).count();
            prop_assert_eq!(row.tpr, tp as f64 / genuine.len() as f64);
            prop_assert_eq!(row.far, fa as f64 / impostor.len() as f64);
            prop_assert_eq!(row.frr, 1.0 - row.tpr);
        }
    }
}

#[derive(Debug, Clone)]
enum CardOp {
    Raw(Vec<u8>),
    Template {
        byte_len: usize,
        fill: u8,
        rotation_id: u16,
        template_id: Option<u16>,
        verify: bool,
    },
    Rekey(u16),
}

impl CardOp {
    fn frame(&self) -> Vec<u8> {
        match self {
            CardOp::Raw(bytes) => bytes.clone(),
            CardOp::Template {
                byte_len,
                fill,
                rotation_id,
                template_id,
                verify,
            } => {
                let template = BinaryTemplate::from_bytes(&vec![*fill; *byte_len]).unwrap();
                let mut payload = TemplatePayload::new(*rotation_id, template);
                if let Some(tid) = template_id {
                    payload = payload.with_extension(PayloadExtension {
                        salt_id: 0,
                        template_id: *tid,
                    });
                }
                let ins = if *verify {
                    INS_VERIFY_BINARY
                } else {
                    INS_ENROLL_TEMPLATE
                };
                ApduCommand::new(CLA_MOC, ins, payload.encode())
                    .serialize()
                    .unwrap()
            }
            CardOp::Rekey(rotation_id) => ApduCommand::new(
                CLA_MOC,
                INS_REKEY_ROTATION,
                mocard_core::apdu::RekeyPayload {
                    new_rotation_id: *rotation_id,
                }
                .encode(),
            )
            .serialize()
            .unwrap(),
        }
    }
}

#[test]
fn quota_is_tight_not_just_bounded() {
    // Two 64-bit records (11 bytes each) fit a 22-byte quota exactly; a
    // third identity-keyed record must be refused.
    let config = CardConfig {
        thresholds: [(64u16, 16u16)].into_iter().collect(),
        eeprom_quota_bytes: 22,
        ..CardConfig::default()
    };
    let mut card = Card::new(config).unwrap();
    let enroll = |tid: u16| {
        let template = BinaryTemplate::from_bytes(&[tid as u8; 8]).unwrap();
        ApduCommand::new(
            CLA_MOC,
            INS_ENROLL_TEMPLATE,
            TemplatePayload::new(1, template)
                .with_extension(PayloadExtension {
                    salt_id: 0,
                    template_id: tid,
                })
                .encode(),
        )
        .serialize()
        .unwrap()
    };
    assert_eq!(card.process(&enroll(1)).sw, 0x9000);
    assert_eq!(card.process(&enroll(2)).sw, 0x9000);
    assert_eq!(card.stored_bytes(), 22);
    assert_eq!(card.process(&enroll(3)).sw, 0x6A84);
    assert_eq!(card.stored_bytes(), 22);
}

#[test]
fn record_footprint_is_what_quota_accounting_uses() {
    let template = BinaryTemplate::from_bytes(&[0u8; 8]).unwrap();
    let record = TemplateRecord {
        template,
        rotation_id: 1,
        policy_flags: 0,
        salt_id: None,
        template_id: None,
        integrity_tag: Some(vec![0u8; 12]),
    };
    assert_eq!(record.footprint_bytes(), 8 + 2 + 1 + 12);
}
