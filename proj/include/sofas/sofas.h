/* C interface to the sofas library: opaque handles, status codes, thread-local error text. */
#ifndef SOFAS_SOFAS_H
#define SOFAS_SOFAS_H

#include <stddef.h>
#include <stdint.h>

#if defined(SOFAS_BUILDING_LIBRARY)
#define SOFAS_API __attribute__((visibility("default")))
#else
#define SOFAS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sofas_status {
    SOFAS_OK = 0,
    SOFAS_E_NULL = 1,        /* a required pointer was NULL */
    SOFAS_E_ARGUMENT = 2,    /* value outside the operation's domain, bad index, unknown name */
    SOFAS_E_PARSE = 3,       /* malformed text input */
    SOFAS_E_GEOMETRY = 4,    /* coordinates or polarity do not fit the sensor */
    SOFAS_E_ORDERING = 5,    /* timestamps go backwards */
    SOFAS_E_CONFIG = 6,      /* bad or unknown configuration key */
    SOFAS_E_IO = 7,          /* file could not be opened, read or written */
    SOFAS_E_CONSISTENCY = 8, /* internal bookkeeping violated */
    SOFAS_E_INTERNAL = 9     /* anything else, including allocation failure */
} sofas_status;

typedef struct sofas_event {
    int32_t u;
    int32_t v;
    int64_t t; /* microseconds */
    int8_t s;  /* +1 or -1 */
} sofas_event;

/* segment is -1 and the flow NaN when the event has no estimate. The LK baseline sets a flow
   with segment -1. */
typedef struct sofas_labeled {
    sofas_event event;
    int32_t segment;
    double v_u;
    double v_v;
} sofas_labeled;

typedef struct sofas_plane_info {
    int32_t id;
    double v_u;
    double v_v;
    double h; /* radians */
    size_t cells;
    size_t events;
} sofas_plane_info;

typedef struct sofas_engine_stats {
    uint64_t processed;
    uint64_t labeled;
    uint64_t planes_created;
    uint64_t planes_merged;
    uint64_t planes_pruned;
    uint64_t maintenance_sweeps;
} sofas_engine_stats;

typedef struct sofas_synth_options {
    int32_t width;  /* sensor size, default 240 x 180 */
    int32_t height;
    double noise_rate; /* background events/s */
    int64_t jitter_us;
    int64_t refractory_us;
    uint64_t seed;
} sofas_synth_options;

typedef struct sofas_eval_summary {
    size_t events;
    size_t estimated;
    size_t evaluated;
    size_t noise_estimated;
    double coverage;
    int has_errors; /* 0 when nothing could be evaluated; the fields below are then NaN */
    double magnitude_mean;
    double magnitude_median;
    double magnitude_stddev;
    double magnitude_median_abs;
    double angle_mean;
    double angle_median;
    double angle_stddev;
    double magnitude_correlation; /* Pearson of |est| against |gt|; NaN if undefined */
} sofas_eval_summary;

typedef enum sofas_color_mode { SOFAS_COLOR_DIRECTION = 0, SOFAS_COLOR_SEGMENT = 1 } sofas_color_mode;

typedef struct sofas_render_options {
    int64_t frame_interval_us;
    sofas_color_mode mode;
    double v_sat;
} sofas_render_options;

typedef struct sofas_config sofas_config;
typedef struct sofas_stream sofas_stream;
typedef struct sofas_truth sofas_truth;
typedef struct sofas_engine sofas_engine;
typedef struct sofas_labels sofas_labels;
typedef struct sofas_report sofas_report;

SOFAS_API const char* sofas_version(void);
SOFAS_API const char* sofas_status_string(sofas_status status);
/* Message of the last failing call on this thread; "" after a success. */
SOFAS_API const char* sofas_last_error(void);
/* Key named by the last SOFAS_E_CONFIG on this thread, else "". */
SOFAS_API const char* sofas_last_error_key(void);

/* Configuration as flat key = value pairs. */
SOFAS_API sofas_status sofas_config_create(sofas_config** out);
SOFAS_API void sofas_config_destroy(sofas_config* cfg);
SOFAS_API sofas_status sofas_config_set(sofas_config* cfg, const char* key, const char* value);
/* Applies every pair of a key = value file, then validates. */
SOFAS_API sofas_status sofas_config_load(sofas_config* cfg, const char* path);
SOFAS_API sofas_status sofas_config_save(const sofas_config* cfg, const char* path);
SOFAS_API sofas_status sofas_config_validate(const sofas_config* cfg);

/* Event streams. */
SOFAS_API sofas_status sofas_stream_create(int32_t width, int32_t height, const sofas_event* events, size_t count,
                                           sofas_stream** out);
SOFAS_API sofas_status sofas_stream_load(const char* path, sofas_stream** out);
SOFAS_API sofas_status sofas_stream_save(const sofas_stream* stream, const char* path);
SOFAS_API void sofas_stream_destroy(sofas_stream* stream);
SOFAS_API sofas_status sofas_stream_size(const sofas_stream* stream, size_t* out);
SOFAS_API sofas_status sofas_stream_geometry(const sofas_stream* stream, int32_t* width, int32_t* height);
SOFAS_API sofas_status sofas_stream_get(const sofas_stream* stream, size_t index, sofas_event* out);

/* Per-event ground truth (`t v_u v_v structure`). */
SOFAS_API sofas_status sofas_truth_load(const char* path, sofas_truth** out);
SOFAS_API sofas_status sofas_truth_save(const sofas_truth* truth, const char* path);
SOFAS_API void sofas_truth_destroy(sofas_truth* truth);
SOFAS_API sofas_status sofas_truth_size(const sofas_truth* truth, size_t* out);

/* Synthetic recordings. */
SOFAS_API void sofas_synth_options_default(sofas_synth_options* out);
/* shape: "circle" (a = radius), "hexagon" (a = width), "rectangle" (a x b), "bar" (a = length,
   b = thickness). The shape is centered on the frame over its path. */
SOFAS_API sofas_status sofas_synth_shape(const char* shape, double a, double b, double v_u, double v_v,
                                         double duration, const sofas_synth_options* options,
                                         sofas_stream** events, sofas_truth** truth);
/* Named scenes: hexagon, rectangle, long_bar, two_bar, pendulum, entry, parallax, rotating_bar.
   `speed` is px/s (peak flow for pendulum, revolutions/s for rotating_bar, ignored by parallax);
   a non-positive `duration` keeps the scene's default. */
SOFAS_API sofas_status sofas_synth_preset(const char* name, double speed, double duration,
                                          const sofas_synth_options* options, sofas_stream** events,
                                          sofas_truth** truth);

/* Engine. A NULL config uses the defaults. */
SOFAS_API sofas_status sofas_engine_create(const sofas_config* cfg, sofas_engine** out);
SOFAS_API void sofas_engine_destroy(sofas_engine* engine);
SOFAS_API sofas_status sofas_engine_process(sofas_engine* engine, const sofas_event* event, sofas_labeled* out);
SOFAS_API sofas_status sofas_engine_run(sofas_engine* engine, const sofas_stream* stream, sofas_labels** out);
SOFAS_API sofas_status sofas_engine_stats_get(const sofas_engine* engine, sofas_engine_stats* out);
SOFAS_API sofas_status sofas_engine_plane_count(const sofas_engine* engine, size_t* out);
/* Live planes sorted by id. */
SOFAS_API sofas_status sofas_engine_plane(const sofas_engine* engine, size_t index, sofas_plane_info* out);
SOFAS_API sofas_status sofas_engine_save_history(const sofas_engine* engine, const char* path);
SOFAS_API sofas_status sofas_engine_save_stats(const sofas_engine* engine, const char* path);

/* Lucas-Kanade baseline; uses the lk.* keys of `cfg` (NULL for defaults). */
SOFAS_API sofas_status sofas_lk_run(const sofas_stream* stream, const sofas_config* cfg, sofas_labels** out);

/* Flow-labeled events. */
SOFAS_API sofas_status sofas_labels_load(const char* path, sofas_labels** out);
SOFAS_API sofas_status sofas_labels_save(const sofas_labels* labels, const char* path);
SOFAS_API void sofas_labels_destroy(sofas_labels* labels);
SOFAS_API sofas_status sofas_labels_size(const sofas_labels* labels, size_t* out);
SOFAS_API sofas_status sofas_labels_get(const sofas_labels* labels, size_t index, sofas_labeled* out);

/* Evaluation against per-event truth; estimates before t_start_us are skipped. */
SOFAS_API sofas_status sofas_evaluate(const sofas_labels* labels, const sofas_truth* truth, int64_t t_start_us,
                                      sofas_report** out);
SOFAS_API void sofas_report_destroy(sofas_report* report);
SOFAS_API sofas_status sofas_report_summary(const sofas_report* report, sofas_eval_summary* out);
/* Any path may be NULL to skip that file. Histograms are CSV with 5 % / 5 degree bins. */
SOFAS_API sofas_status sofas_report_save(const sofas_report* report, const char* summary_path,
                                         const char* magnitude_hist_path, const char* angle_hist_path);

/* Rendering: writes `<prefix>_NNNNN.ppm`, one per frame interval. */
SOFAS_API void sofas_render_options_default(sofas_render_options* out);
SOFAS_API sofas_status sofas_render(const sofas_labels* labels, const sofas_render_options* options,
                                    const char* prefix, size_t* frames_written);

#ifdef __cplusplus
}
#endif

#endif
