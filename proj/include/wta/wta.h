#ifndef WTA_WTA_H
#define WTA_WTA_H

/* Behavioral simulator for a voltage-mode winner-take-all circuit.
 *
 * Every function returns a wta_status. On failure the thread-local message
 * from wta_last_error() describes the problem. Handles are opaque and owned by
 * the caller; release them with the matching *_free function (NULL is a no-op).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WTA_BUILDING_LIBRARY)
#    define WTA_API __declspec(dllexport)
#  else
#    define WTA_API __declspec(dllimport)
#  endif
#else
#  define WTA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wta_status {
    WTA_OK = 0,
    WTA_ERR_DOMAIN = 1,
    WTA_ERR_SATURATION = 2,
    WTA_ERR_CONFIG = 3,
    WTA_ERR_PARSE = 4,
    WTA_ERR_UNSUPPORTED_FORMAT = 5,
    WTA_ERR_SOLVER = 6,
    WTA_ERR_MEASUREMENT = 7,
    WTA_ERR_IO = 8,
    WTA_ERR_INVALID_ARGUMENT = 100,  /* NULL handle, index out of range, buffer too small */
    WTA_ERR_INTERNAL = 101
} wta_status;

WTA_API const char* wta_status_name(wta_status status);
WTA_API const char* wta_last_error(void);
WTA_API const char* wta_version(void);

/* ---- configuration ---- */

typedef struct wta_config wta_config;

WTA_API wta_status wta_config_new(wta_config** out);
WTA_API wta_status wta_config_load(const char* path, wta_config** out);
WTA_API wta_status wta_config_parse(const char* text, wta_config** out);
WTA_API wta_status wta_config_clone(const wta_config* cfg, wta_config** out);
WTA_API void wta_config_free(wta_config* cfg);

/* "section.key" override; not validated until wta_config_validate. */
WTA_API wta_status wta_config_set(wta_config* cfg, const char* key, const char* value);
WTA_API wta_status wta_config_validate(const wta_config* cfg);

/* String getters copy a NUL-terminated value into buf. *needed (optional)
 * receives the required size including the terminator. */
WTA_API wta_status wta_config_get(const wta_config* cfg, const char* key, char* buf, size_t cap, size_t* needed);
WTA_API wta_status wta_config_to_text(const wta_config* cfg, char* buf, size_t cap, size_t* needed);

/* ---- input files ---- */

/* Reads the v_in_V column of a CSV file. *count receives the row count; up to
 * cap values are copied into out (which may be NULL to query the size). */
WTA_API wta_status wta_load_inputs(const char* path, double* out, size_t cap, size_t* count);

/* ---- DC operating point ---- */

typedef struct wta_op_point wta_op_point;

typedef struct wta_cell_state {
    double v_in;            /* V */
    double branch_current;  /* A */
    double v_x;             /* V, comparator node */
    double output;          /* V */
    int winner;
} wta_cell_state;

/* The number of inputs sets network.k_cells. With feedback enabled the
 * network is re-solved until the winner set is stable. */
WTA_API wta_status wta_solve_dc(const wta_config* cfg, const double* v_in, size_t n, wta_op_point** out);
WTA_API void wta_op_point_free(wta_op_point* op);
WTA_API size_t wta_op_point_cell_count(const wta_op_point* op);
WTA_API double wta_op_point_common_node(const wta_op_point* op);
WTA_API size_t wta_op_point_winner_count(const wta_op_point* op);
/* Copies up to cap winner indices (ascending); returns the winner count. */
WTA_API size_t wta_op_point_winners(const wta_op_point* op, size_t* out, size_t cap);
WTA_API wta_status wta_op_point_cell(const wta_op_point* op, size_t cell, wta_cell_state* out);
WTA_API wta_status wta_op_point_write_csv(const wta_op_point* op, const char* path);

/* ---- DC sweeps ---- */

typedef struct wta_sweep wta_sweep;

typedef enum wta_sweep_direction { WTA_SWEEP_UP = 0, WTA_SWEEP_DOWN = 1 } wta_sweep_direction;

WTA_API wta_status wta_dc_sweep(const wta_config* cfg, const double* v_in, size_t n, size_t cell, double v_from,
                                double v_to, size_t points, wta_sweep_direction direction, wta_sweep** out);
WTA_API void wta_sweep_free(wta_sweep* sweep);
WTA_API size_t wta_sweep_point_count(const wta_sweep* sweep);
/* *found is 0 when the swept output never crosses vdd/2 in that sense. */
WTA_API wta_status wta_sweep_flip(const wta_sweep* sweep, int rising, double* v_flip, int* found);
WTA_API wta_status wta_sweep_write_csv(const wta_sweep* sweep, const char* path);

typedef struct wta_hysteresis_result {
    double v_flip_up;
    double v_flip_down;
    double width;
    double expected_width; /* 2 n U_T ln(1 + r), 0 with feedback disabled */
} wta_hysteresis_result;

/* Up sweep then down sweep of `cell`; CSV paths may be NULL. */
WTA_API wta_status wta_hysteresis(const wta_config* cfg, const double* v_in, size_t n, size_t cell, double v_from,
                                  double v_to, size_t points, const char* up_csv, const char* down_csv,
                                  wta_hysteresis_result* out);

/* ---- resolution ---- */

typedef struct wta_resolution_result {
    double measured;     /* V, bisection */
    double closed_form;  /* V */
    double kwta_bound;   /* V, for the configured k_cells and delta_winners */
    int at_or_below_balance;
} wta_resolution_result;

/* Two-cell copy of the configured network with feedback off, one cell at
 * fixed_v. The reference is network.i_m when set, else resolution.i_m_ratio
 * times g I_c. kwta_bound uses the network's own reference. */
WTA_API wta_status wta_resolution(const wta_config* cfg, double fixed_v, wta_resolution_result* out);

/* ---- transient ---- */

typedef struct wta_stimuli wta_stimuli;

/* n stimuli, all DC 0 V. */
WTA_API wta_status wta_stimuli_new(size_t n, wta_stimuli** out);
WTA_API void wta_stimuli_free(wta_stimuli* s);
WTA_API wta_status wta_stimuli_set_dc(wta_stimuli* s, size_t cell, double level);
WTA_API wta_status wta_stimuli_set_pulse(wta_stimuli* s, size_t cell, double v1, double v2, double delay, double rise,
                                         double fall, double width, double period);
WTA_API wta_status wta_stimuli_set_sine(wta_stimuli* s, size_t cell, double offset, double amplitude,
                                        double frequency, double delay, double phase);
WTA_API wta_status wta_stimuli_set_triangle(wta_stimuli* s, size_t cell, double v_low, double v_high, double period,
                                            double delay);
WTA_API wta_status wta_stimuli_set_pwl(wta_stimuli* s, size_t cell, const double* times, const double* values,
                                       size_t n);

typedef struct wta_trace wta_trace;

typedef struct wta_latency {
    size_t cell;
    double total;     /* s, edge to output at vdd/2 */
    double internal;  /* s, edge to comparator node at vdd/2 */
    double slew;      /* s, total - internal */
    double settle;    /* s, edge to output at vdd */
} wta_latency;

/* The stimulus count sets network.k_cells. record_cells may be NULL (all). */
WTA_API wta_status wta_transient(const wta_config* cfg, const wta_stimuli* stimuli, size_t stride,
                                 const size_t* record_cells, size_t n_record, wta_trace** out);
WTA_API void wta_trace_free(wta_trace* trace);
WTA_API size_t wta_trace_sample_count(const wta_trace* trace);
WTA_API wta_status wta_trace_latency(const wta_trace* trace, double edge_time, wta_latency* out);
WTA_API wta_status wta_trace_write_csv(const wta_trace* trace, const char* path);

/* ---- power ---- */

typedef struct wta_power_breakdown {
    double static_w;
    double dynamic_w;
    double total_w;
    double losing_w;
    double losing_share;
} wta_power_breakdown;

/* Activity from power.toggle_rate, power.toggling_outputs and transient.c_load. */
WTA_API wta_status wta_power(const wta_config* cfg, const double* v_in, size_t n, wta_power_breakdown* out);

/* ---- corners and Monte Carlo ---- */

typedef struct wta_report wta_report;

typedef struct wta_metric_summary {
    size_t count;
    double mean;
    double stddev;  /* sample (n - 1) */
    double min;
    double max;
    char argmax[64];
} wta_metric_summary;

WTA_API wta_status wta_corners(const wta_config* cfg, wta_report** out);
/* Nominal inputs v_in set the cell count; mismatch per monte-carlo.* keys. */
WTA_API wta_status wta_monte_carlo(const wta_config* cfg, const double* v_in, size_t n, wta_report** out);
WTA_API void wta_report_free(wta_report* report);
WTA_API size_t wta_report_row_count(const wta_report* report);
WTA_API size_t wta_report_failed_count(const wta_report* report);
WTA_API wta_status wta_report_power(const wta_report* report, wta_metric_summary* out);
WTA_API wta_status wta_report_latency(const wta_report* report, wta_metric_summary* out);
/* *has_rate is 0 for corner reports. */
WTA_API wta_status wta_report_flip_rate(const wta_report* report, double* rate, int* has_rate);
/* <dir>/<kind>.csv, <dir>/summary.json, <dir>/histogram.csv */
WTA_API wta_status wta_report_write(const wta_report* report, const char* dir, size_t bins);

/* ---- images ---- */

typedef struct wta_image wta_image;

typedef enum wta_binarize_path { WTA_BINARIZE_CIRCUIT = 0, WTA_BINARIZE_DIRECT = 1 } wta_binarize_path;

WTA_API wta_status wta_image_new(size_t width, size_t height, const uint8_t* pixels, wta_image** out);
WTA_API wta_status wta_image_load(const char* path, wta_image** out);
/* binary != 0 writes P5, otherwise P2. */
WTA_API wta_status wta_image_save(const wta_image* img, const char* path, int binary);
WTA_API void wta_image_free(wta_image* img);
WTA_API size_t wta_image_width(const wta_image* img);
WTA_API size_t wta_image_height(const wta_image* img);
WTA_API const uint8_t* wta_image_pixels(const wta_image* img);
WTA_API wta_status wta_binarize(const wta_config* cfg, const wta_image* img, uint8_t threshold,
                                wta_binarize_path path, wta_image** out);

/* ---- classification ---- */

typedef struct wta_activations wta_activations;
typedef struct wta_classification wta_classification;

/* sample_period <= 0 uses classify.sample_period from cfg (may be NULL otherwise). */
WTA_API wta_status wta_activations_load(const char* path, double sample_period, const wta_config* cfg,
                                        wta_activations** out);
WTA_API void wta_activations_free(wta_activations* a);
WTA_API size_t wta_activations_samples(const wta_activations* a);
WTA_API size_t wta_activations_classes(const wta_activations* a);

/* Requires network.k_cells == class count. */
WTA_API wta_status wta_classify(const wta_config* cfg, const wta_activations* a, wta_classification** out);
WTA_API void wta_classification_free(wta_classification* c);
WTA_API size_t wta_classification_count(const wta_classification* c);
/* Winner per sample, -1 where no single output is high. */
WTA_API size_t wta_classification_winners(const wta_classification* c, long* out, size_t cap);
WTA_API size_t wta_classification_ambiguous_count(const wta_classification* c);
WTA_API double wta_classification_resolution(const wta_classification* c);
/* *has_accuracy is 0 when the table carries no labels. */
WTA_API wta_status wta_classification_accuracy(const wta_classification* c, double* accuracy, int* has_accuracy);
WTA_API wta_status wta_classification_write_csv(const wta_classification* c, const char* path);

/* ---- diagnostics ---- */

/* Solves recorded since load (or the last reset) and the worst |sum I - I_c| / I_c. */
WTA_API void wta_kcl_stats(uint64_t* solves, double* max_relative_error);
WTA_API void wta_kcl_stats_reset(void);

#ifdef __cplusplus
}
#endif

#endif
