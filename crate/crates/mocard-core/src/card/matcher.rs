//! Constant-time Hamming matching.
//!
//! The matcher executes a fixed sequence of byte operations determined only
//! by the template length: one XOR and one popcount per byte, then a single
//! branchless threshold comparison. [`OpCount`] instruments that sequence so
//! tests can check it never varies with data values.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("length mismatch: {a} vs {b} bytes")]
    LengthMismatch { a: usize, b: usize },
}

/// Counts of byte-level operations executed by the matcher.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub xor: u64,
    pub popcount: u64,
    pub compare: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.xor + self.popcount + self.compare
    }
}

/// Hamming distance over equal-length byte strings with a fixed loop bound.
pub fn hamming_ct(a: &[u8], b: &[u8]) -> Result<u32, MatchError> {
    if a.len() != b.len() {
        return Err(MatchError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let mut ops = OpCount::default();
    Ok(hamming_ct_counted(a, b, &mut ops))
}

/// Matching loop with instrumentation. Callers guarantee equal lengths.
pub(crate) fn hamming_ct_counted(a: &[u8], b: &[u8], ops: &mut OpCount) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    let mut distance = 0u32;
    for i in 0..a.len() {
        let x = a[i] ^ b[i];
        ops.xor += 1;
        distance += x.count_ones();
        ops.popcount += 1;
    }
    distance
}

/// Branchless `distance <= tau` via the sign bit of the difference.
pub(crate) fn ct_le(distance: u32, tau: u32, ops: &mut OpCount) -> bool {
    ops.compare += 1;
    let diff = i64::from(distance) - i64::from(tau) - 1;
    ((diff >> 63) & 1) == 1
}
