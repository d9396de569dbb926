/* C ABI for the match-on-card verification core. */

#ifndef MOCARD_H
#define MOCARD_H

/* Generated by cbindgen from mocard-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible call.
 */
typedef enum MocardStatus {
  MOCARD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MOCARD_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument value is out of range or inconsistent.
   */
  MOCARD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A byte container failed to parse.
   */
  MOCARD_STATUS_INVALID_FORMAT = 3,
  /**
   * Buffer lengths disagree with the expected template size.
   */
  MOCARD_STATUS_LENGTH_MISMATCH = 4,
  /**
   * The provided output buffer is too small.
   */
  MOCARD_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * File I/O failed.
   */
  MOCARD_STATUS_IO_ERROR = 6,
} MocardStatus;

/**
 * One simulated secure element.
 */
typedef struct MocardCard MocardCard;

/**
 * Card personalization being assembled; feed it to [`mocard_card_new`].
 */
typedef struct MocardCardConfig MocardCardConfig;

/**
 * Trained PCA-ITQ parameters for one RotationID.
 */
typedef struct MocardModel MocardModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Allocate a config with defaults: 256-byte quota, no thresholds, no
 * issuer-auth requirement, no rate limit, no integrity tag.
 */
struct MocardCardConfig *mocard_config_new(void);

/**
 * # Safety
 * `config` must come from [`mocard_config_new`] and not be freed twice.
 */
void mocard_config_free(struct MocardCardConfig *config);

/**
 * Set the accept threshold for one template length.
 *
 * # Safety
 * `config` must be a live pointer from [`mocard_config_new`].
 */
enum MocardStatus mocard_config_set_threshold(struct MocardCardConfig *config,
                                              uint16_t length_bits,
                                              uint16_t tau);

/**
 * # Safety
 * `config` must be a live pointer from [`mocard_config_new`].
 */
enum MocardStatus mocard_config_set_quota(struct MocardCardConfig *config, uint32_t quota_bytes);

/**
 * # Safety
 * `config` must be a live pointer from [`mocard_config_new`].
 */
enum MocardStatus mocard_config_set_require_issuer_auth(struct MocardCardConfig *config,
                                                        bool require);

/**
 * Lock out after `max_failures` consecutive failed verifies; 0 disables.
 *
 * # Safety
 * `config` must be a live pointer from [`mocard_config_new`].
 */
enum MocardStatus mocard_config_set_rate_limit(struct MocardCardConfig *config,
                                               uint32_t max_failures);

/**
 * Reserve per-record integrity-tag bytes (8..=16); 0 disables.
 *
 * # Safety
 * `config` must be a live pointer from [`mocard_config_new`].
 */
enum MocardStatus mocard_config_set_integrity_tag_bytes(struct MocardCardConfig *config,
                                                        uint8_t tag_bytes);

/**
 * Create a card from a config (null uses defaults). Returns null if the
 * config is invalid.
 *
 * # Safety
 * `config`, when non-null, must be a live pointer from
 * [`mocard_config_new`]; it remains owned by the caller.
 */
struct MocardCard *mocard_card_new(const struct MocardCardConfig *config);

/**
 * # Safety
 * `card` must come from [`mocard_card_new`] or [`mocard_card_load`] and
 * not be freed twice.
 */
void mocard_card_free(struct MocardCard *card);

/**
 * Execute one raw command APDU. The response carries no data, so only the
 * status word is written to `sw_out`.
 *
 * # Safety
 * `card` must be live; `command` must point to `command_len` readable
 * bytes; `sw_out` must be writable.
 */
enum MocardStatus mocard_card_process(struct MocardCard *card,
                                      const uint8_t *command,
                                      size_t command_len,
                                      uint16_t *sw_out);

/**
 * # Safety
 * `card` must be live.
 */
enum MocardStatus mocard_card_set_issuer_authenticated(struct MocardCard *card, bool authenticated);

/**
 * Drop session state as if the card were power-cycled.
 *
 * # Safety
 * `card` must be live.
 */
enum MocardStatus mocard_card_reset_session(struct MocardCard *card);

/**
 * Serialize persistent card state. Call with a null `buffer` to query the
 * required size through `written`.
 *
 * # Safety
 * `card` must be live; `written` must be writable; `buffer`, when
 * non-null, must have `capacity` writable bytes.
 */
enum MocardStatus mocard_card_save(const struct MocardCard *card,
                                   uint8_t *buffer,
                                   size_t capacity,
                                   size_t *written);

/**
 * Rebuild a card from saved state; returns null on malformed input. The
 * loaded card starts a fresh session.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes.
 */
struct MocardCard *mocard_card_load(const uint8_t *bytes, size_t len);

/**
 * Load a model container from a file path; returns null on failure.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct MocardModel *mocard_model_load_file(const char *path);

/**
 * Parse a model container from memory; returns null on failure.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes.
 */
struct MocardModel *mocard_model_load_bytes(const uint8_t *bytes, size_t len);

/**
 * # Safety
 * `model` must come from a `mocard_model_load_*` call and not be freed
 * twice.
 */
void mocard_model_free(struct MocardModel *model);

/**
 * # Safety
 * `model` must be live.
 */
uint16_t mocard_model_length_bits(const struct MocardModel *model);

/**
 * # Safety
 * `model` must be live.
 */
uint16_t mocard_model_rotation_id(const struct MocardModel *model);

/**
 * # Safety
 * `model` must be live.
 */
uint32_t mocard_model_dim(const struct MocardModel *model);

/**
 * Encode one embedding into packed template bytes (L/8 of them).
 *
 * # Safety
 * `model` must be live; `embedding` must point to `dim` doubles;
 * `template_out` must have `capacity` writable bytes; `written` must be
 * writable.
 */
enum MocardStatus mocard_model_encode(const struct MocardModel *model,
                                      const double *embedding,
                                      size_t dim,
                                      uint8_t *template_out,
                                      size_t capacity,
                                      size_t *written);

/**
 * Constant-time Hamming distance over equal-length byte strings.
 *
 * # Safety
 * `a` and `b` must each point to `len` readable bytes; `distance_out`
 * must be writable.
 */
enum MocardStatus mocard_hamming(const uint8_t *a,
                                 const uint8_t *b,
                                 size_t len,
                                 uint32_t *distance_out);

/**
 * Transport-bounded latency: payload header + template + helper + status
 * word + per-transaction overhead, at `bits_per_byte` serial framing over
 * `bitrate`, plus the constant on-card budget.
 *
 * # Safety
 * `ms_out` must be writable.
 */
enum MocardStatus mocard_t_total_ms(uint16_t length_bits,
                                    uint32_t helper_bytes,
                                    uint32_t bitrate,
                                    double bits_per_byte,
                                    uint32_t overhead_bytes,
                                    double *ms_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOCARD_H */
