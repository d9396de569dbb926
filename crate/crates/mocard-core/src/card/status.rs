//! The eight status words the card can emit.

/// Decision-only response codes. No similarity score or distance ever
/// accompanies them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum StatusWord {
    /// Success; for VERIFY_BINARY this is the accept decision.
    Ok = 0x9000,
    /// Conditions not satisfied; for VERIFY_BINARY this is the reject
    /// decision, also used for rate-limit lockout.
    ConditionsNotSatisfied = 0x6985,
    /// Wrong data: unsupported HashLenBits, inconsistent headers,
    /// malformed payload.
    WrongData = 0x6A80,
    /// Record not found.
    RecordNotFound = 0x6A82,
    /// Not enough memory space in the record store.
    NotEnoughMemory = 0x6A84,
    /// Security status not satisfied (issuer authentication missing).
    SecurityStatusNotSatisfied = 0x6982,
    /// Wrong length (Lc/Le mismatch, non-canonical payload size).
    WrongLength = 0x6700,
    /// Instruction code not supported.
    InsNotSupported = 0x6D00,
}

impl StatusWord {
    pub const ALL: [StatusWord; 8] = [
        StatusWord::Ok,
        StatusWord::ConditionsNotSatisfied,
        StatusWord::WrongData,
        StatusWord::RecordNotFound,
        StatusWord::NotEnoughMemory,
        StatusWord::SecurityStatusNotSatisfied,
        StatusWord::WrongLength,
        StatusWord::InsNotSupported,
    ];

    pub fn value(self) -> u16 {
        self as u16
    }

    pub fn from_value(value: u16) -> Option<Self> {
        Self::ALL.into_iter().find(|sw| sw.value() == value)
    }

    pub fn description(self) -> &'static str {
        match self {
            StatusWord::Ok => "OK / accept",
            StatusWord::ConditionsNotSatisfied => "conditions not satisfied / reject",
            StatusWord::WrongData => "wrong data",
            StatusWord::RecordNotFound => "record not found",
            StatusWord::NotEnoughMemory => "not enough memory space",
            StatusWord::SecurityStatusNotSatisfied => "security status not satisfied",
            StatusWord::WrongLength => "wrong length",
            StatusWord::InsNotSupported => "instruction not supported",
        }
    }
}
