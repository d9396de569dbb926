//! C ABI for the match-on-card verification core.
//!
//! Handles are opaque pointers created and destroyed by this library;
//! every other function returns a [`MocardStatus`] code and writes results
//! through out-parameters. The card handle wraps the full simulated secure
//! element, so a C (or any other) host can drive raw APDUs against it and
//! read back nothing but status words.

use std::ffi::CStr;
use std::os::raw::c_char;
use std::ptr;

use mocard_core::apdu::TEMPLATE_LENGTHS_BITS;
use mocard_core::card::{hamming_ct, Card, CardConfig};
use mocard_core::pcaitq::{PcaItqError, PcaItqModel};
use mocard_core::transport::{PAYLOAD_HEADER_BYTES, SW_BYTES, T_CARD_MS};

/// Result codes for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MocardStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument value is out of range or inconsistent.
    InvalidArgument = 2,
    /// A byte container failed to parse.
    InvalidFormat = 3,
    /// Buffer lengths disagree with the expected template size.
    LengthMismatch = 4,
    /// The provided output buffer is too small.
    BufferTooSmall = 5,
    /// File I/O failed.
    IoError = 6,
}

fn status_from_model_error(e: &PcaItqError) -> MocardStatus {
    match e {
        PcaItqError::Io(_) => MocardStatus::IoError,
        PcaItqError::ModelFormat(_) | PcaItqError::Codec(_) => MocardStatus::InvalidFormat,
        PcaItqError::DimensionMismatch { .. } => MocardStatus::LengthMismatch,
        _ => MocardStatus::InvalidArgument,
    }
}

/// Card personalization being assembled; feed it to [`mocard_card_new`].
pub struct MocardCardConfig {
    inner: CardConfig,
}

/// One simulated secure element.
pub struct MocardCard {
    inner: Card,
}

/// Trained PCA-ITQ parameters for one RotationID.
pub struct MocardModel {
    inner: PcaItqModel,
}

/// Allocate a config with defaults: 256-byte quota, no thresholds, no
/// issuer-auth requirement, no rate limit, no integrity tag.
#[no_mangle]
pub extern "C" fn mocard_config_new() -> *mut MocardCardConfig {
    Box::into_raw(Box::new(MocardCardConfig {
        inner: CardConfig::default(),
    }))
}

/// # Safety
/// `config` must come from [`mocard_config_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mocard_config_free(config: *mut MocardCardConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Set the accept threshold for one template length.
///
/// # Safety
/// `config` must be a live pointer from [`mocard_config_new`].
#[no_mangle]
pub unsafe extern "C" fn mocard_config_set_threshold(
    config: *mut MocardCardConfig,
    length_bits: u16,
    tau: u16,
) -> MocardStatus {
    let Some(config) = config.as_mut() else {
        return MocardStatus::NullArgument;
    };
    if !TEMPLATE_LENGTHS_BITS.contains(&length_bits) || tau > length_bits {
        return MocardStatus::InvalidArgument;
    }
    config.inner.thresholds.insert(length_bits, tau);
    MocardStatus::Ok
}

/// # Safety
/// `config` must be a live pointer from [`mocard_config_new`].
#[no_mangle]
pub unsafe extern "C" fn mocard_config_set_quota(
    config: *mut MocardCardConfig,
    quota_bytes: u32,
) -> MocardStatus {
    let Some(config) = config.as_mut() else {
        return MocardStatus::NullArgument;
    };
    config.inner.eeprom_quota_bytes = quota_bytes as usize;
    MocardStatus::Ok
}

/// # Safety
/// `config` must be a live pointer from [`mocard_config_new`].
#[no_mangle]
pub unsafe extern "C" fn mocard_config_set_require_issuer_auth(
    config: *mut MocardCardConfig,
    require: bool,
) -> MocardStatus {
    let Some(config) = config.as_mut() else {
        return MocardStatus::NullArgument;
    };
    config.inner.require_issuer_auth = require;
    MocardStatus::Ok
}

/// Lock out after `max_failures` consecutive failed verifies; 0 disables.
///
/// # Safety
/// `config` must be a live pointer from [`mocard_config_new`].
#[no_mangle]
pub unsafe extern "C" fn mocard_config_set_rate_limit(
    config: *mut MocardCardConfig,
    max_failures: u32,
) -> MocardStatus {
    let Some(config) = config.as_mut() else {
        return MocardStatus::NullArgument;
    };
    config.inner.rate_limit = (max_failures > 0).then_some(max_failures);
    MocardStatus::Ok
}

/// Reserve per-record integrity-tag bytes (8..=16); 0 disables.
///
/// # Safety
/// `config` must be a live pointer from [`mocard_config_new`].
#[no_mangle]
pub unsafe extern "C" fn mocard_config_set_integrity_tag_bytes(
    config: *mut MocardCardConfig,
    tag_bytes: u8,
) -> MocardStatus {
    let Some(config) = config.as_mut() else {
        return MocardStatus::NullArgument;
    };
    if tag_bytes != 0 && !(8..=16).contains(&tag_bytes) {
        return MocardStatus::InvalidArgument;
    }
    config.inner.integrity_tag_bytes = (tag_bytes > 0).then_some(tag_bytes);
    MocardStatus::Ok
}

/// Create a card from a config (null uses defaults). Returns null if the
/// config is invalid.
///
/// # Safety
/// `config`, when non-null, must be a live pointer from
/// [`mocard_config_new`]; it remains owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn mocard_card_new(config: *const MocardCardConfig) -> *mut MocardCard {
    let config = match config.as_ref() {
        Some(c) => c.inner.clone(),
        None => CardConfig::default(),
    };
    match Card::new(config) {
        Ok(card) => Box::into_raw(Box::new(MocardCard { inner: card })),
        Err(_) => ptr::null_mut(),
    }
}

/// # Safety
/// `card` must come from [`mocard_card_new`] or [`mocard_card_load`] and
/// not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mocard_card_free(card: *mut MocardCard) {
    if !card.is_null() {
        drop(Box::from_raw(card));
    }
}

/// Execute one raw command APDU. The response carries no data, so only the
/// status word is written to `sw_out`.
///
/// # Safety
/// `card` must be live; `command` must point to `command_len` readable
/// bytes; `sw_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mocard_card_process(
    card: *mut MocardCard,
    command: *const u8,
    command_len: usize,
    sw_out: *mut u16,
) -> MocardStatus {
    let Some(card) = card.as_mut() else {
        return MocardStatus::NullArgument;
    };
    if sw_out.is_null() || (command.is_null() && command_len > 0) {
        return MocardStatus::NullArgument;
    }
    let raw = if command_len == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(command, command_len)
    };
    let response = card.inner.process(raw);
    debug_assert!(response.data.is_empty());
    *sw_out = response.sw;
    MocardStatus::Ok
}

/// # Safety
/// `card` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocard_card_set_issuer_authenticated(
    card: *mut MocardCard,
    authenticated: bool,
) -> MocardStatus {
    let Some(card) = card.as_mut() else {
        return MocardStatus::NullArgument;
    };
    card.inner.set_issuer_authenticated(authenticated);
    MocardStatus::Ok
}

/// Drop session state as if the card were power-cycled.
///
/// # Safety
/// `card` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocard_card_reset_session(card: *mut MocardCard) -> MocardStatus {
    let Some(card) = card.as_mut() else {
        return MocardStatus::NullArgument;
    };
    card.inner.reset_session();
    MocardStatus::Ok
}

/// Serialize persistent card state. Call with a null `buffer` to query the
/// required size through `written`.
///
/// # Safety
/// `card` must be live; `written` must be writable; `buffer`, when
/// non-null, must have `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mocard_card_save(
    card: *const MocardCard,
    buffer: *mut u8,
    capacity: usize,
    written: *mut usize,
) -> MocardStatus {
    let Some(card) = card.as_ref() else {
        return MocardStatus::NullArgument;
    };
    if written.is_null() {
        return MocardStatus::NullArgument;
    }
    let bytes = card.inner.save();
    *written = bytes.len();
    if buffer.is_null() {
        return MocardStatus::Ok;
    }
    if capacity < bytes.len() {
        return MocardStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buffer, bytes.len());
    MocardStatus::Ok
}

/// Rebuild a card from saved state; returns null on malformed input. The
/// loaded card starts a fresh session.
///
/// # Safety
/// `bytes` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn mocard_card_load(bytes: *const u8, len: usize) -> *mut MocardCard {
    if bytes.is_null() {
        return ptr::null_mut();
    }
    let slice = std::slice::from_raw_parts(bytes, len);
    match Card::load(slice) {
        Ok(card) => Box::into_raw(Box::new(MocardCard { inner: card })),
        Err(_) => ptr::null_mut(),
    }
}

/// Load a model container from a file path; returns null on failure.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mocard_model_load_file(path: *const c_char) -> *mut MocardModel {
    if path.is_null() {
        return ptr::null_mut();
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return ptr::null_mut();
    };
    match PcaItqModel::read_file(path) {
        Ok(model) => Box::into_raw(Box::new(MocardModel { inner: model })),
        Err(_) => ptr::null_mut(),
    }
}

/// Parse a model container from memory; returns null on failure.
///
/// # Safety
/// `bytes` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn mocard_model_load_bytes(
    bytes: *const u8,
    len: usize,
) -> *mut MocardModel {
    if bytes.is_null() {
        return ptr::null_mut();
    }
    let slice = std::slice::from_raw_parts(bytes, len);
    match PcaItqModel::read_from(slice) {
        Ok(model) => Box::into_raw(Box::new(MocardModel { inner: model })),
        Err(_) => ptr::null_mut(),
    }
}

/// # Safety
/// `model` must come from a `mocard_model_load_*` call and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn mocard_model_free(model: *mut MocardModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocard_model_length_bits(model: *const MocardModel) -> u16 {
    model.as_ref().map_or(0, |m| m.inner.length_bits)
}

/// # Safety
/// `model` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocard_model_rotation_id(model: *const MocardModel) -> u16 {
    model.as_ref().map_or(0, |m| m.inner.rotation_id)
}

/// # Safety
/// `model` must be live.
#[no_mangle]
pub unsafe extern "C" fn mocard_model_dim(model: *const MocardModel) -> u32 {
    model.as_ref().map_or(0, |m| m.inner.dim() as u32)
}

/// Encode one embedding into packed template bytes (L/8 of them).
///
/// # Safety
/// `model` must be live; `embedding` must point to `dim` doubles;
/// `template_out` must have `capacity` writable bytes; `written` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mocard_model_encode(
    model: *const MocardModel,
    embedding: *const f64,
    dim: usize,
    template_out: *mut u8,
    capacity: usize,
    written: *mut usize,
) -> MocardStatus {
    let Some(model) = model.as_ref() else {
        return MocardStatus::NullArgument;
    };
    if embedding.is_null() || template_out.is_null() || written.is_null() {
        return MocardStatus::NullArgument;
    }
    let values = std::slice::from_raw_parts(embedding, dim);
    let template = match model.inner.encode(values) {
        Ok(t) => t,
        Err(e) => return status_from_model_error(&e),
    };
    let bytes = template.as_bytes();
    *written = bytes.len();
    if capacity < bytes.len() {
        return MocardStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), template_out, bytes.len());
    MocardStatus::Ok
}

/// Constant-time Hamming distance over equal-length byte strings.
///
/// # Safety
/// `a` and `b` must each point to `len` readable bytes; `distance_out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn mocard_hamming(
    a: *const u8,
    b: *const u8,
    len: usize,
    distance_out: *mut u32,
) -> MocardStatus {
    if a.is_null() || b.is_null() || distance_out.is_null() {
        return MocardStatus::NullArgument;
    }
    let a = std::slice::from_raw_parts(a, len);
    let b = std::slice::from_raw_parts(b, len);
    match hamming_ct(a, b) {
        Ok(d) => {
            *distance_out = d;
            MocardStatus::Ok
        }
        Err(_) => MocardStatus::LengthMismatch,
    }
}

/// Transport-bounded latency: payload header + template + helper + status
/// word + per-transaction overhead, at `bits_per_byte` serial framing over
/// `bitrate`, plus the constant on-card budget.
///
/// # Safety
/// `ms_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mocard_t_total_ms(
    length_bits: u16,
    helper_bytes: u32,
    bitrate: u32,
    bits_per_byte: f64,
    overhead_bytes: u32,
    ms_out: *mut f64,
) -> MocardStatus {
    if ms_out.is_null() {
        return MocardStatus::NullArgument;
    }
    if !TEMPLATE_LENGTHS_BITS.contains(&length_bits) || bitrate == 0 || bits_per_byte < 8.0 {
        return MocardStatus::InvalidArgument;
    }
    let wire_bytes = PAYLOAD_HEADER_BYTES
        + u32::from(length_bits / 8)
        + helper_bytes
        + SW_BYTES
        + overhead_bytes;
    *ms_out = f64::from(wire_bytes) * bits_per_byte / f64::from(bitrate) * 1_000.0 + T_CARD_MS;
    MocardStatus::Ok
}
