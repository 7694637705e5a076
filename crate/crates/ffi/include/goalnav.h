#ifndef GOALNAV_H
#define GOALNAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GnAction {
  GN_ACTION_MOVE_FORWARD = 0,
  GN_ACTION_TURN_LEFT = 1,
  GN_ACTION_TURN_RIGHT = 2,
  GN_ACTION_FOUND = 3,
} GnAction;

typedef enum GnEpisodeStatus {
  GN_EPISODE_STATUS_ONGOING = 0,
  GN_EPISODE_STATUS_SUCCESS = 1,
  GN_EPISODE_STATUS_FAIL_WRONG_FOUND = 2,
  GN_EPISODE_STATUS_FAIL_TIMEOUT = 3,
} GnEpisodeStatus;

/**
 * Result code of every fallible call.
 */
typedef enum GnStatus {
  GN_STATUS_OK = 0,
  GN_STATUS_NULL_POINTER = 1,
  GN_STATUS_INVALID_INPUT = 2,
  GN_STATUS_CONTRACT_VIOLATION = 3,
  GN_STATUS_CONFIG = 4,
  GN_STATUS_IO = 5,
  GN_STATUS_PARSE = 6,
  GN_STATUS_GENERATION = 7,
  GN_STATUS_UNREACHABLE = 8,
  GN_STATUS_GEOMETRY_MISMATCH = 9,
  GN_STATUS_UTF8 = 10,
  GN_STATUS_PANIC = 11,
} GnStatus;

/**
 * The navigation agent of one episode.
 */
typedef struct GnAgent GnAgent;

/**
 * A generated or loaded episode.
 */
typedef struct GnEpisode GnEpisode;

/**
 * A running simulator.
 */
typedef struct GnSim GnSim;

/**
 * World-frame pose; `theta` in radians, 0 faces +y, counter-clockwise.
 */
typedef struct GnPose {
  double x;
  double y;
  double theta;
} GnPose;

typedef struct GnStepResult {
  struct GnPose pose;
  bool collided;
  uint32_t goals_found;
  enum GnEpisodeStatus status;
} GnStepResult;

typedef struct GnMetrics {
  double success;
  double progress;
  double spl;
  double ppl;
  /**
   * Steps for one episode, episode count for a suite.
   */
  uint64_t count;
} GnMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the calling thread's most recent failure, or NULL. The string
 * stays valid until the next failing call on the same thread.
 */
const char *gn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gn_version(void);

/**
 * Generates the episode for `seed` from the `[world]` section of
 * `config_toml` (NULL for defaults).
 *
 * # Safety
 * `config_toml` is NULL or a NUL-terminated string; `out` is writable.
 */
enum GnStatus gn_episode_generate(uint64_t seed, const char *config_toml, struct GnEpisode **out);

/**
 * Loads an episode from its `.episode.toml` sidecar.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum GnStatus gn_episode_load(const char *path, struct GnEpisode **out);

/**
 * Writes `<dir>/<stem>.world` and `<dir>/<stem>.episode.toml`.
 *
 * # Safety
 * `episode` is a live handle; `dir` and `stem` are NUL-terminated strings.
 */
enum GnStatus gn_episode_save(const struct GnEpisode *episode, const char *dir, const char *stem);

/**
 * Number of goals in the episode.
 *
 * # Safety
 * `episode` is a live handle; `out` is writable.
 */
enum GnStatus gn_episode_goal_count(const struct GnEpisode *episode, uint32_t *out);

/**
 * # Safety
 * `episode` is NULL or a handle not yet freed.
 */
void gn_episode_free(struct GnEpisode *episode);

/**
 * Starts a simulator at the episode's start pose.
 *
 * # Safety
 * `episode` is a live handle; `out` is writable.
 */
enum GnStatus gn_sim_new(const struct GnEpisode *episode, struct GnSim **out);

/**
 * Applies one action. Stepping a finished episode is a contract violation.
 *
 * # Safety
 * `sim` is a live handle; `out` is writable.
 */
enum GnStatus gn_sim_step(struct GnSim *sim, enum GnAction action, struct GnStepResult *out);

/**
 * # Safety
 * `sim` is a live handle; `out` is writable.
 */
enum GnStatus gn_sim_pose(const struct GnSim *sim, struct GnPose *out);

/**
 * # Safety
 * `sim` is NULL or a handle not yet freed.
 */
void gn_sim_free(struct GnSim *sim);

/**
 * Creates an agent for the episode from the `[agent]` section of
 * `config_toml` (NULL for defaults).
 *
 * # Safety
 * `episode` is a live handle; `config_toml` is NULL or a NUL-terminated
 * string; `out` is writable.
 */
enum GnStatus gn_agent_new(const struct GnEpisode *episode,
                           const char *config_toml,
                           struct GnAgent **out);

/**
 * Chooses the next action from the simulator's current observation.
 *
 * # Safety
 * `agent` and `sim` are live handles; `out` is writable.
 */
enum GnStatus gn_agent_decide(struct GnAgent *agent, const struct GnSim *sim, enum GnAction *out);

/**
 * Feeds the outcome of the last step back to the agent: the pose before
 * the step and what the simulator reported.
 *
 * # Safety
 * `agent` is a live handle.
 */
enum GnStatus gn_agent_acknowledge(struct GnAgent *agent,
                                   struct GnPose before,
                                   bool collided,
                                   uint32_t goals_found);

/**
 * # Safety
 * `agent` is NULL or a handle not yet freed.
 */
void gn_agent_free(struct GnAgent *agent);

/**
 * Runs a whole episode with the agent from `config_toml` (NULL for
 * defaults). `out->count` is the number of steps.
 *
 * # Safety
 * `episode` is a live handle; `config_toml` is NULL or a NUL-terminated
 * string; `out` is writable.
 */
enum GnStatus gn_run_episode(const struct GnEpisode *episode,
                             const char *config_toml,
                             struct GnMetrics *out);

/**
 * Runs the suite described by `config_toml` (NULL for defaults), writing
 * its outputs like the command line tool. `out->count` is the number of
 * episodes.
 *
 * # Safety
 * `config_toml` is NULL or a NUL-terminated string; `out` is writable.
 */
enum GnStatus gn_run_suite(const char *config_toml, struct GnMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GOALNAV_H */
