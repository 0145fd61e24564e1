/* C interface to the hotspot planning library.
 *
 * All objects are opaque handles created and destroyed here. Functions
 * return HS_OK on success; on failure hs_last_error() carries a
 * thread-local description of what went wrong.
 */
#ifndef HOTSPOT_H
#define HOTSPOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HS_API __declspec(dllexport)
#else
#define HS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hs_status {
  HS_OK = 0,
  HS_ERR_INVALID_ARGUMENT = 1,
  HS_ERR_PARSE = 2,
  HS_ERR_IO = 3,
  HS_ERR_NUMERIC = 4,
  HS_ERR_UNKNOWN = 5
} hs_status;

typedef struct hs_config hs_config;
typedef struct hs_field hs_field;
typedef struct hs_grid hs_grid;
typedef struct hs_episode hs_episode;
typedef struct hs_table hs_table;

typedef enum hs_experiment {
  HS_EXPERIMENT_ABLATION = 0,
  HS_EXPERIMENT_COMPARE = 1,
  HS_EXPERIMENT_BUDGET_SWEEP = 2,
  HS_EXPERIMENT_SPARSITY_SWEEP = 3
} hs_experiment;

HS_API const char* hs_status_name(hs_status status);
/* Last error message of the calling thread; empty string if none. */
HS_API const char* hs_last_error(void);
HS_API void hs_string_free(char* text);

/* -------- configuration -------- */
HS_API hs_status hs_config_default(hs_config** out);
HS_API hs_status hs_config_load(const char* path, hs_config** out);
HS_API hs_status hs_config_save(const hs_config* config, const char* path);
/* key is "section.key" as in the config file, e.g. "planner.budget" */
HS_API hs_status hs_config_set(hs_config* config, const char* key,
                               const char* value);
/* *out is malloc'd; free with hs_string_free */
HS_API hs_status hs_config_get(const hs_config* config, const char* key,
                               char** out);
HS_API void hs_config_free(hs_config* config);

/* -------- ground-truth fields -------- */
HS_API hs_status hs_field_generate(const hs_config* config, uint64_t seed,
                                   hs_field** out);
HS_API hs_status hs_field_load(const char* path, hs_field** out);
HS_API hs_status hs_field_save(const hs_field* field, double cell_size,
                               const char* path);
HS_API hs_status hs_field_evaluate(const hs_field* field, double x, double y,
                                   double* value);
HS_API hs_status hs_field_optimum(const hs_field* field, double resolution,
                                  double* x, double* y, double* value);
HS_API void hs_field_free(hs_field* field);

/* -------- arm grids -------- */
HS_API hs_status hs_grid_build(const hs_config* config, hs_grid** out);
HS_API hs_status hs_grid_counts(const hs_grid* grid, int* num_arms,
                                int* num_test_points);
HS_API hs_status hs_grid_write_summary(const hs_grid* grid, const char* path);
HS_API void hs_grid_free(hs_grid* grid);

/* -------- single episodes -------- */
HS_API hs_status hs_episode_run(const hs_config* config, const hs_field* field,
                                const hs_grid* grid, uint64_t seed,
                                hs_episode** out);
HS_API hs_status hs_episode_metrics(const hs_episode* episode,
                                    double* point_metric, double* arm_metric);
HS_API hs_status hs_episode_counts(const hs_episode* episode, int* images,
                                   int* steps);
HS_API hs_status hs_episode_result(const hs_episode* episode, double* x,
                                   double* y);
HS_API hs_status hs_episode_spent(const hs_episode* episode, double* seconds);
HS_API hs_status hs_episode_gp_time(const hs_episode* episode, double* seconds);
HS_API hs_status hs_episode_write_row(const hs_episode* episode,
                                      const hs_config* config,
                                      const char* path);
HS_API hs_status hs_episode_write_steps(const hs_episode* episode,
                                        const char* path);
HS_API void hs_episode_free(hs_episode* episode);

/* -------- experiment matrices -------- */
HS_API hs_status hs_experiment_run(const hs_config* config,
                                   hs_experiment experiment, int workers,
                                   hs_table** out);
HS_API hs_status hs_table_write_csv(const hs_table* table, const char* path);
/* timing series exists only for HS_EXPERIMENT_SPARSITY_SWEEP */
HS_API hs_status hs_table_write_timing_csv(const hs_table* table,
                                           const char* path);
HS_API hs_status hs_table_num_rows(const hs_table* table, int* rows);
/* *out is malloc'd; free with hs_string_free */
HS_API hs_status hs_table_summary(const hs_table* table, char** out);
HS_API void hs_table_free(hs_table* table);

#ifdef __cplusplus
}
#endif

#endif /* HOTSPOT_H */
