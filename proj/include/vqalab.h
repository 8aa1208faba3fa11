/* vqalab — a desk-scale laboratory for question-bias analysis in VQA.
 *
 * C interface over the C++ core. All functions return vqalab_status;
 * on failure vqalab_last_error() carries a diagnostic for the calling
 * thread. Opaque handles are created and released by the library.
 */
#ifndef VQALAB_H
#define VQALAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VQALAB_API __declspec(dllexport)
#else
#define VQALAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vqalab_status {
  VQALAB_OK = 0,
  VQALAB_ERR_INVALID_ARG = 1,
  VQALAB_ERR_IO = 2,
  VQALAB_ERR_PARSE = 3,
  VQALAB_ERR_CONFIG = 4,
  VQALAB_ERR_INVALID_QUESTION = 5,
  VQALAB_ERR_GENERATION = 6,
  VQALAB_ERR_ORACLE = 7,
  VQALAB_ERR_MODEL = 8,
  VQALAB_ERR_SIM = 9,
  VQALAB_ERR_BATCH = 10,
  VQALAB_ERR_TRAINER = 11,
  VQALAB_ERR_METRICS = 12,
  VQALAB_ERR_INTERNAL = 13
} vqalab_status;

VQALAB_API const char* vqalab_version(void);
VQALAB_API const char* vqalab_status_name(vqalab_status status);

/* Message of the most recent failure on this thread ("" when none). The
 * pointer stays valid until the next failing call on the same thread. */
VQALAB_API const char* vqalab_last_error(void);

/* Strings returned by the library are released with this. */
VQALAB_API void vqalab_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

typedef struct vqalab_config vqalab_config;

/* Parses a TOML (or .json) run config / recipe; unknown keys fail. */
VQALAB_API vqalab_status vqalab_config_load(const char* path, vqalab_config** out);
/* format: "toml" or "json". */
VQALAB_API vqalab_status vqalab_config_parse(const char* text, const char* format,
                                             vqalab_config** out);
/* Effective configuration (defaults filled in) as canonical JSON. */
VQALAB_API vqalab_status vqalab_config_dump(const vqalab_config* cfg, char** out_json);
/* Overrides one dotted key, e.g. ("train.seed", "43") or
 * ("debias.method", "\"mixing\""); the value is JSON-encoded. */
VQALAB_API vqalab_status vqalab_config_set(vqalab_config* cfg, const char* dotted_key,
                                           const char* value_json);
VQALAB_API void vqalab_config_free(vqalab_config* cfg);

/* ---- pipeline steps ---------------------------------------------------- */

/* Synthesizes the benchmark into out_dir (questions/scenes/answers per
 * split, lexicon.tsv, gen_manifest.json). */
VQALAB_API vqalab_status vqalab_generate(const vqalab_config* cfg, const char* out_dir);

/* Rewrites a questions JSONL with one variant operator.
 * variant: 1 = prefix/postfix swap, 2 = seeded shuffle, 3 = reversal.
 * lexicon_path may be NULL for the built-in generator lexicon. */
VQALAB_API vqalab_status vqalab_morph(const char* questions_in, const char* questions_out,
                                      int variant, uint64_t seed,
                                      const char* lexicon_path);

/* Trains one cell on the benchmark under data_dir. cell_json may be NULL
 * or a JSON object overriding {"name","train_input","model_mode","debias",
 * "epochs","seed","eval"}. Writes the checkpoint and, when loss_log_out is
 * non-NULL, the per-epoch loss log. */
VQALAB_API vqalab_status vqalab_train(const vqalab_config* cfg, const char* data_dir,
                                      const char* cell_json, const char* checkpoint_out,
                                      const char* loss_log_out);

typedef struct vqalab_model vqalab_model;

VQALAB_API vqalab_status vqalab_model_load(const char* checkpoint_path, vqalab_model** out);
VQALAB_API void vqalab_model_free(vqalab_model* model);

/* Evaluates a checkpoint on one split. split: train|test_id|test_ood.
 * eval_input: question|prefix|postfix|variant1|variant2|variant3|identity.
 * attention_out / encodings_out are optional JSONL side dumps (NULL to
 * skip). perturb_seed drives variant-2 rendering. */
VQALAB_API vqalab_status vqalab_eval(const vqalab_model* model, const char* data_dir,
                                     const char* split, const char* eval_input,
                                     uint64_t perturb_seed, const char* predictions_out,
                                     const char* attention_out, const char* encodings_out);

/* Emits the report tables for a finished run directory (the reproduce
 * layout: data/, cells/); tables land in <run_dir>/reports. */
VQALAB_API vqalab_status vqalab_report_run(const vqalab_config* cfg, const char* run_dir);

/* Pairwise dump analysis: accuracy, Rob, flip ratios, flip breakdown. */
VQALAB_API vqalab_status vqalab_report_pair(const char* baseline_predictions,
                                            const char* target_predictions,
                                            const char* out_dir, int top_k);

/* generate + train matrix + evaluate + report + manifest. Returns
 * VQALAB_ERR_TRAINER when any cell failed (details in the manifest). */
VQALAB_API vqalab_status vqalab_reproduce(const vqalab_config* cfg, const char* run_dir);

#ifdef __cplusplus
}
#endif

#endif /* VQALAB_H */
