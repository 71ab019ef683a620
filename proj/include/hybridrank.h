/* C interface to the hybrid reranking engine. A session wraps one loaded
 * configuration; commands run synchronously and write their artifacts under
 * the configured output directory. All functions are thread-compatible but a
 * single session must not be used from two threads at once. */

#ifndef HYBRIDRANK_H
#define HYBRIDRANK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct hr_session hr_session;

/* Status codes double as process exit codes. */
enum {
  HR_OK = 0,
  HR_ERR_RUN = 1,    /* a pipeline stage failed */
  HR_ERR_CONFIG = 2  /* the configuration is invalid */
};

hr_session* hr_session_new(void);
void hr_session_free(hr_session* session);

/* Parses and validates a JSON config file. Returns HR_ERR_CONFIG and sets the
 * session error message on rejection. */
int hr_session_load_config(hr_session* session, const char* config_path);

/* Optional overrides; call after load_config. */
int hr_session_set_output_dir(hr_session* session, const char* path);
int hr_session_set_seed(hr_session* session, uint64_t seed);

/* Full pipeline: train, assess, rerank weak users, report. */
int hr_session_run(hr_session* session);
/* Assessment only: train (or reuse cache) and write per-user assessment. */
int hr_session_assess(hr_session* session);
/* Render prompt files for the weak users of a previous assess run. */
int hr_session_prompts(hr_session* session);

/* Last error message; empty string when the last call succeeded. Owned by the
 * session, valid until the next call on it. */
const char* hr_session_last_error(const hr_session* session);

/* Human-readable result summary of the last successful command (may be
 * empty). Owned by the session, valid until the next call on it. */
const char* hr_session_summary(const hr_session* session);

/* Progress log accumulated by the last command. */
const char* hr_session_log(const hr_session* session);

const char* hr_version(void);

#ifdef __cplusplus
}
#endif

#endif /* HYBRIDRANK_H */
