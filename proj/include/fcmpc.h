/* fcmpc: fuel cell neural-network MPC toolkit, C interface.
 *
 * All functions return an fcmpc_status code (FCMPC_OK on success); on
 * failure fcmpc_last_error() describes what went wrong (thread-local).
 * Objects are opaque handles released with their matching _free call.
 */
#ifndef FCMPC_H
#define FCMPC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef FCMPC_API
#define FCMPC_API __attribute__((visibility("default")))
#endif

typedef enum fcmpc_status {
  FCMPC_OK = 0,
  FCMPC_ERR_INVALID_ARG = 1,
  FCMPC_ERR_CONFIG = 2,     /* bad config file or field */
  FCMPC_ERR_TRAINING = 3,   /* training diverged */
  FCMPC_ERR_SIMULATION = 4, /* plant or controller failure mid-run */
  FCMPC_ERR_IO = 5,         /* file missing, unreadable or unwritable */
  FCMPC_ERR_INTERNAL = 6
} fcmpc_status;

typedef struct fcmpc_config fcmpc_config; /* parsed run configuration */
typedef struct fcmpc_model fcmpc_model;   /* trained network + scaler */
typedef struct fcmpc_trace fcmpc_trace;   /* closed-loop record */

FCMPC_API const char *fcmpc_version(void);
FCMPC_API const char *fcmpc_status_name(int status);
FCMPC_API const char *fcmpc_last_error(void);

/* Configuration ---------------------------------------------------------- */
FCMPC_API int fcmpc_config_load(const char *path, fcmpc_config **out);
FCMPC_API int fcmpc_config_set_seed(fcmpc_config *cfg, uint64_t seed);
FCMPC_API int fcmpc_config_set_out_dir(fcmpc_config *cfg, const char *dir);
/* kind: "nn-mpc" or "plant-mpc" */
FCMPC_API int fcmpc_config_set_controller(fcmpc_config *cfg, const char *kind);
FCMPC_API void fcmpc_config_free(fcmpc_config *cfg);

/* Pipeline stages --------------------------------------------------------
 * Artifacts land under the config's out_dir: dataset.csv(+.meta.json),
 * weights.json, train_report.json, <scenario>_<controller>.csv(+.meta.json)
 * and the SVG figures. */
FCMPC_API int fcmpc_datagen(const fcmpc_config *cfg);
FCMPC_API int fcmpc_train(const fcmpc_config *cfg);
FCMPC_API int fcmpc_simulate(const fcmpc_config *cfg, fcmpc_trace **out_trace);
/* Runs nn-mpc and plant-mpc on the same scenario and seed; *report_json
 * receives a malloc'd JSON summary (free with fcmpc_string_free). */
FCMPC_API int fcmpc_compare(const fcmpc_config *cfg, char **report_json);
/* Re-render figures from the trace CSV of the configured run. */
FCMPC_API int fcmpc_plot(const fcmpc_config *cfg);
FCMPC_API void fcmpc_string_free(char *s);

/* Trained model ----------------------------------------------------------
 * input  = [Q_H2 lpm, Q_air lpm, I A, V_FC V, P_H2 atm]
 * output = [V_FC V, P_H2 atm] one control interval ahead. */
FCMPC_API int fcmpc_model_load(const char *path, fcmpc_model **out);
FCMPC_API int fcmpc_model_predict(const fcmpc_model *m, const double input[5], double output[2]);
/* Row-major 2x5 Jacobian at the operating point (forward-mode AD). */
FCMPC_API int fcmpc_model_jacobian(const fcmpc_model *m, const double input[5],
                                   double jacobian[10]);
FCMPC_API void fcmpc_model_free(fcmpc_model *m);

/* Trace access ------------------------------------------------------------
 * Columns: t, i, v_true, v_meas, p_true, p_meas, qh2, qair, dqh2, dqair,
 * slack, iters, ms. */
FCMPC_API size_t fcmpc_trace_rows(const fcmpc_trace *t);
FCMPC_API int fcmpc_trace_value(const fcmpc_trace *t, size_t row, const char *column,
                                double *out);
FCMPC_API int fcmpc_trace_status(const fcmpc_trace *t, size_t row, const char **out);
FCMPC_API void fcmpc_trace_free(fcmpc_trace *t);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FCMPC_H */
