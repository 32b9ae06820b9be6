#ifndef EGOGRAPH_H
#define EGOGRAPH_H

/* C interface to the egograph engine. All functions return eg_status; on
 * failure eg_last_error() holds a thread-local message describing what went
 * wrong. Strings returned through char** parameters are owned by the caller
 * and must be released with eg_string_free(). */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    EG_OK = 0,
    EG_ERROR = 1,            /* runtime failure */
    EG_INVALID_ARGUMENT = 2  /* bad usage, input files or configuration */
} eg_status;

typedef struct eg_dataset eg_dataset;
typedef struct eg_model eg_model;

const char* eg_version(void);
const char* eg_last_error(void);

/* -- datasets (benchmark text layout: <name>_A.txt etc.) ------------------ */

/* name may be NULL to autodetect the unique *_A.txt in the directory. */
eg_status eg_dataset_load(const char* directory, const char* name, eg_dataset** out);

/* kind: "alcohol" (alkanes vs alcohols), "isomer" (symmetric vs asymmetric
 * methyl isomers) or "kronecker" (two-class scale-free graphs). size_min /
 * size_max bound the carbon count (alcohol), chain length (isomer) or
 * Kronecker power; pass 0, 0 for the per-kind defaults. per_class <= 0
 * defaults to 200. */
eg_status eg_dataset_generate(const char* kind, unsigned long long seed, int size_min,
                              int size_max, int per_class, eg_dataset** out);

eg_status eg_dataset_save(const eg_dataset* d, const char* directory);
void eg_dataset_free(eg_dataset* d);

eg_status eg_dataset_graph_count(const eg_dataset* d, int* out);
eg_status eg_dataset_class_count(const eg_dataset* d, int* out);

/* JSON object with graph_count, class_count, class_histogram,
 * degree_histogram and (with_power_law != 0) the power-law fit. */
eg_status eg_dataset_stats_json(const eg_dataset* d, int with_power_law, char** json_out);

/* -- training -------------------------------------------------------------- */

/* config_text uses the documented key = value format; pass "" for defaults.
 * tied_override: -1 keep the config value, 0 force untied, 1 force tied.
 * out_dir may be NULL; otherwise metrics.csv and per-fold models are
 * written there. report_json_out receives fold accuracies, mean/std,
 * parameter count and wall time. */
eg_status eg_train_cv(const eg_dataset* d, const char* config_text, int folds, int tied_override,
                      const char* out_dir, char** report_json_out);

/* -- models ---------------------------------------------------------------- */

eg_status eg_model_load(const char* path, eg_model** out);
void eg_model_free(eg_model* m);
eg_status eg_model_info_json(const eg_model* m, char** json_out);

/* Fits (or reloads from probe_cache_path) the attention probe, backtracks
 * graph_index and writes <dot_path>, plus node/edge importance CSVs next to
 * it. threshold < 0 selects the default 1/(2N). */
eg_status eg_visualize(const eg_model* m, const eg_dataset* d, int graph_index, double threshold,
                       const char* dot_path, const char* probe_cache_path, char** info_json_out);

void eg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* EGOGRAPH_H */
