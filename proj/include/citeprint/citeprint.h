/* Copyright 2026 The citeprint Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libciteprint.
 *
 * Every function that can fail returns a cp_status. On failure the message
 * is available from cp_last_error() on the same thread until the next call
 * into the library. Handles are opaque and owned by the caller; each has a
 * matching destroy function that accepts NULL.
 *
 * Subcommands take a key/value option bag and return a JSON summary. Keys
 * are listed in docs/formats.md; unknown keys are rejected with
 * CP_ERR_USAGE.
 */

#ifndef CITEPRINT_CITEPRINT_H_
#define CITEPRINT_CITEPRINT_H_

#include <stddef.h>

#if defined(_WIN32)
#define CP_API __declspec(dllexport)
#else
#define CP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values are also the exit codes of the command-line tool. */
typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_USAGE = 1,
  CP_ERR_DATA = 2,
  CP_ERR_NUMERIC = 3,
  CP_ERR_IO = 4,
  CP_ERR_SIDECAR_TRANSPORT = 5,
  CP_ERR_SIDECAR_ENCODER = 6,
  CP_ERR_INTERNAL = 7
} cp_status;

typedef struct cp_options cp_options;
typedef struct cp_text cp_text;
typedef struct cp_model cp_model;
typedef struct cp_prediction cp_prediction;

/* Receives one progress line at a time; the pointer is valid for the call. */
typedef void (*cp_log_fn)(const char *line, void *user);

CP_API const char *cp_version(void);
CP_API const char *cp_last_error(void);
CP_API const char *cp_status_name(cp_status status);

CP_API cp_status cp_options_create(cp_options **out);
CP_API void cp_options_destroy(cp_options *options);
/* Later values for the same key replace earlier ones. */
CP_API cp_status cp_options_set(cp_options *options, const char *key, const char *value);
CP_API cp_status cp_options_set_log(cp_options *options, cp_log_fn fn, void *user);

CP_API const char *cp_text_data(const cp_text *text);
CP_API size_t cp_text_size(const cp_text *text);
CP_API void cp_text_destroy(cp_text *text);

/* On success *summary receives a JSON object; on failure it is set to NULL. */
CP_API cp_status cp_run_synth(const cp_options *options, cp_text **summary);
CP_API cp_status cp_run_build(const cp_options *options, cp_text **summary);
CP_API cp_status cp_run_train(const cp_options *options, cp_text **summary);
CP_API cp_status cp_run_eval(const cp_options *options, cp_text **summary);
CP_API cp_status cp_run_tune_dbscan(const cp_options *options, cp_text **summary);

/* sidecar_endpoint may be NULL when the checkpoint uses the native encoder. */
CP_API cp_status cp_model_open(const char *checkpoint_path, const char *sidecar_endpoint,
                               cp_model **out);
CP_API void cp_model_close(cp_model *model);
CP_API size_t cp_model_label_count(const cp_model *model);
CP_API const char *cp_model_label(const cp_model *model, size_t index);

CP_API cp_status cp_model_predict_file(cp_model *model, const char *manuscript_path,
                                       int top_k, double ratio, cp_prediction **out);
CP_API cp_status cp_model_predict_text(cp_model *model, const char *id, const char *text,
                                       int top_k, double ratio, cp_prediction **out);

CP_API size_t cp_prediction_count(const cp_prediction *prediction);
CP_API const char *cp_prediction_name(const cp_prediction *prediction, size_t rank);
CP_API double cp_prediction_probability(const cp_prediction *prediction, size_t rank);
CP_API int cp_prediction_estimated_authors(const cp_prediction *prediction);
CP_API int cp_prediction_chunks_used(const cp_prediction *prediction);
CP_API void cp_prediction_destroy(cp_prediction *prediction);

#ifdef __cplusplus
}
#endif

#endif /* CITEPRINT_CITEPRINT_H_ */
