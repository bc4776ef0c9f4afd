/* C interface to the clicksim simulation library. */

#ifndef CLICKSIM_H
#define CLICKSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a C API call.
 */
typedef enum ClicksimStatus {
  /**
   * Success.
   */
  CLICKSIM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CLICKSIM_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CLICKSIM_STATUS_INVALID_UTF8 = 2,
  /**
   * Reading the configuration failed.
   */
  CLICKSIM_STATUS_IO = 3,
  /**
   * The configuration is not valid JSON for the expected schema.
   */
  CLICKSIM_STATUS_PARSE = 4,
  /**
   * The configuration was rejected (covariance, factor, or fields).
   */
  CLICKSIM_STATUS_INVALID = 5,
  /**
   * The simulation or a statistic could not be computed.
   */
  CLICKSIM_STATUS_DOMAIN = 6,
  /**
   * A channel index was out of range.
   */
  CLICKSIM_STATUS_OUT_OF_RANGE = 7,
} ClicksimStatus;

/**
 * Opaque handle to a parsed and validated experiment configuration.
 */
typedef struct ClicksimConfig ClicksimConfig;

/**
 * Opaque handle to the click log of a completed run.
 */
typedef struct ClicksimLog ClicksimLog;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static NUL-terminated string.
 */
const char *clicksim_version(void);

/**
 * Copies the most recent error message of this thread into `buffer`
 * (truncated to `capacity` bytes including the NUL terminator) and returns
 * the full length of the message including the terminator. A null or empty
 * buffer queries the required capacity.
 */
size_t clicksim_last_error_message(char *buffer, size_t capacity);

/**
 * Parses and validates a JSON configuration file.
 */
enum ClicksimStatus clicksim_config_parse(const char *path, struct ClicksimConfig **out);

/**
 * Parses and validates a configuration from a JSON string.
 */
enum ClicksimStatus clicksim_config_parse_json(const char *json, struct ClicksimConfig **out);

/**
 * Releases a configuration handle. Null is ignored.
 */
void clicksim_config_free(struct ClicksimConfig *config);

/**
 * Number of channels of the configured process.
 */
enum ClicksimStatus clicksim_config_dim(const struct ClicksimConfig *config, uint32_t *out);

/**
 * Replaces the seed of a configuration.
 */
enum ClicksimStatus clicksim_config_set_seed(struct ClicksimConfig *config, uint64_t seed);

/**
 * Replaces the worker count of a configuration. Zero is rejected.
 */
enum ClicksimStatus clicksim_config_set_workers(struct ClicksimConfig *config, uint32_t workers);

/**
 * Resolved detection threshold of a configuration.
 */
enum ClicksimStatus clicksim_config_threshold(const struct ClicksimConfig *config, double *out);

/**
 * Predicted detection probability of `channel` for the configured
 * covariance.
 */
enum ClicksimStatus clicksim_config_born(const struct ClicksimConfig *config,
                                         uint32_t channel,
                                         double *out);

/**
 * Runs the configured experiment and returns the click log.
 */
enum ClicksimStatus clicksim_run(const struct ClicksimConfig *config, struct ClicksimLog **out);

/**
 * Releases a log handle. Null is ignored.
 */
void clicksim_log_free(struct ClicksimLog *log);

/**
 * Number of channels in a log.
 */
enum ClicksimStatus clicksim_log_channels(const struct ClicksimLog *log, uint32_t *out);

/**
 * Total number of clicks across all channels.
 */
enum ClicksimStatus clicksim_log_total(const struct ClicksimLog *log, uint64_t *out);

/**
 * Number of clicks in one channel.
 */
enum ClicksimStatus clicksim_log_count(const struct ClicksimLog *log,
                                       uint32_t channel,
                                       uint64_t *out);

/**
 * Sum-normalized detection frequency of one channel.
 */
enum ClicksimStatus clicksim_log_frequency(const struct ClicksimLog *log,
                                           uint32_t channel,
                                           double *out);

/**
 * Coincidences between the two channels within `tau_steps`.
 */
enum ClicksimStatus clicksim_log_coincidences(const struct ClicksimLog *log,
                                              uint64_t tau_steps,
                                              uint64_t *out);

/**
 * Second-order coherence at the given window.
 */
enum ClicksimStatus clicksim_log_g2(const struct ClicksimLog *log, uint64_t tau_steps, double *out);

/**
 * Mean inter-click time of one channel, in physical time units.
 */
enum ClicksimStatus clicksim_log_mean_interclick(const struct ClicksimLog *log,
                                                 uint32_t channel,
                                                 double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CLICKSIM_H */
