/* corrseg: training-free open-vocabulary segmentation engine.
 *
 * C interface to the shared library. All pipeline state lives behind an
 * opaque context handle; functions report corrseg_status and leave a
 * human-readable message retrievable via corrseg_last_error().
 */
#ifndef CORRSEG_H
#define CORRSEG_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CORRSEG_API __declspec(dllexport)
#else
#define CORRSEG_API __attribute__((visibility("default")))
#endif

typedef struct corrseg_context corrseg_context;

typedef enum corrseg_status {
    CORRSEG_OK = 0,
    CORRSEG_ERR_INVALID_ARGUMENT = 1,
    CORRSEG_ERR_CONFIG = 2,
    CORRSEG_ERR_IO = 3,
    CORRSEG_ERR_PROVIDER = 4,
    CORRSEG_ERR_INTERNAL = 5,
} corrseg_status;

CORRSEG_API const char* corrseg_version(void);
CORRSEG_API const char* corrseg_status_name(corrseg_status status);

/* Creates a context from a JSON configuration string (see README for the
 * schema). Returns NULL on failure; when err/err_len are given the error
 * message is copied there. */
CORRSEG_API corrseg_context* corrseg_context_create(const char* config_json, char* err,
                                                    size_t err_len);
CORRSEG_API void corrseg_context_destroy(corrseg_context* ctx);

/* Message of the most recent failure on this context. Owned by the context;
 * valid until the next call on it. */
CORRSEG_API const char* corrseg_last_error(const corrseg_context* ctx);

/* Effective configuration echo as a JSON string. Free with
 * corrseg_string_free. */
CORRSEG_API corrseg_status corrseg_effective_config(corrseg_context* ctx, char** json_out);

/* Runs the full pipeline on one image and writes <out_prefix>.labels.png
 * (8-bit class indices) and <out_prefix>.overlay.png. report_json_out, when
 * non-NULL, receives a summary (per-class pixel share, dimensions, config
 * echo); free it with corrseg_string_free. */
CORRSEG_API corrseg_status corrseg_segment(corrseg_context* ctx, const char* image_path,
                                           const char* out_prefix, char** report_json_out);

/* Benchmark run over a dataset described by a JSON config file. ablate_csv
 * may be NULL, or a comma list such as "sr,vr,mc,nc" to produce cumulative
 * ablation rows. sample_limit < 0 evaluates every sample. When out_prefix is
 * non-NULL, writes <out_prefix>.report.json and <out_prefix>.report.txt. */
CORRSEG_API corrseg_status corrseg_evaluate(corrseg_context* ctx, const char* dataset_config_path,
                                            int sample_limit, const char* ablate_csv,
                                            const char* out_prefix, char** report_json_out);

/* Replays the configured providers on one image, recording every provider
 * response into a fixture archive at out_dir (manifest.json + blobs). An
 * existing non-empty out_dir is refused unless force is nonzero. */
CORRSEG_API corrseg_status corrseg_extract(corrseg_context* ctx, const char* image_path,
                                           const char* out_dir, int force);

CORRSEG_API void corrseg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CORRSEG_H */
