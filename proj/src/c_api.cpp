#include "sofas/sofas.h"

#include "sofas/baseline_lk.hpp"
#include "sofas/config.hpp"
#include "sofas/engine.hpp"
#include "sofas/error.hpp"
#include "sofas/eval.hpp"
#include "sofas/render.hpp"
#include "sofas/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <string_view>

struct sofas_config {
    sofas::RunConfig cfg;
};
struct sofas_stream {
    sofas::EventStream stream;
};
struct sofas_truth {
    std::vector<sofas::TruthRecord> records;
};
struct sofas_engine {
    explicit sofas_engine(const sofas::EngineConfig& cfg) : engine(cfg) {}
    sofas::Engine engine;
};
struct sofas_labels {
    sofas::SensorGeometry geometry;
    std::vector<sofas::FlowRecord> records;
};
struct sofas_report {
    sofas::EvalReport report;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;

sofas_status fail(sofas_status status, std::string message) {
    g_error = std::move(message);
    return status;
}

// Runs `body`, translating exceptions to status codes. Clears the error text on success.
template <typename F>
sofas_status guarded(F&& body) {
    g_error.clear();
    g_error_key.clear();
    try {
        body();
        return SOFAS_OK;
    } catch (const sofas::ConfigError& e) {
        g_error_key = e.key();
        return fail(SOFAS_E_CONFIG, e.what());
    } catch (const sofas::ParseError& e) {
        return fail(SOFAS_E_PARSE, e.what());
    } catch (const sofas::GeometryError& e) {
        return fail(SOFAS_E_GEOMETRY, e.what());
    } catch (const sofas::OrderingError& e) {
        return fail(SOFAS_E_ORDERING, e.what());
    } catch (const sofas::ConsistencyError& e) {
        return fail(SOFAS_E_CONSISTENCY, e.what());
    } catch (const sofas::IoError& e) {
        return fail(SOFAS_E_IO, e.what());
    } catch (const sofas::InvalidArgument& e) {
        return fail(SOFAS_E_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SOFAS_E_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SOFAS_E_INTERNAL, e.what());
    } catch (...) {
        return fail(SOFAS_E_INTERNAL, "unknown exception");
    }
}

sofas_status ok() {
    g_error.clear();
    g_error_key.clear();
    return SOFAS_OK;
}

#define SOFAS_REQUIRE(ptr)                                                                                          \
    do {                                                                                                            \
        if (!(ptr)) return fail(SOFAS_E_NULL, #ptr " is NULL");                                                     \
    } while (0)

sofas::Event to_event(const sofas_event& e) { return {e.u, e.v, e.t, e.s}; }
sofas_event from_event(const sofas::Event& e) { return {e.u, e.v, e.t, e.s}; }

sofas_labeled from_record(const sofas::FlowRecord& r) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    return {from_event(r.event), r.segment, r.flow ? r.flow->v_u : nan, r.flow ? r.flow->v_v : nan};
}

sofas::SynthOptions to_options(const sofas_synth_options* o, sofas::SensorGeometry& geometry) {
    sofas_synth_options d;
    sofas_synth_options_default(&d);
    if (!o) o = &d;
    geometry = {o->width, o->height};
    if (geometry.width <= 0 || geometry.height <= 0) throw sofas::GeometryError("sensor geometry must be positive");
    return {o->noise_rate, o->jitter_us, o->refractory_us, o->seed};
}

void emit(sofas::SyntheticRecording rec, sofas_stream** events, sofas_truth** truth) {
    auto s = std::make_unique<sofas_stream>();
    auto t = std::make_unique<sofas_truth>();
    s->stream = std::move(rec.stream);
    t->records = std::move(rec.per_event);
    *events = s.release();
    *truth = t.release();
}

} // namespace

extern "C" {

const char* sofas_version(void) { return "1.0.0"; }

const char* sofas_status_string(sofas_status status) {
    switch (status) {
    case SOFAS_OK: return "ok";
    case SOFAS_E_NULL: return "null pointer";
    case SOFAS_E_ARGUMENT: return "invalid argument";
    case SOFAS_E_PARSE: return "parse error";
    case SOFAS_E_GEOMETRY: return "geometry error";
    case SOFAS_E_ORDERING: return "ordering error";
    case SOFAS_E_CONFIG: return "configuration error";
    case SOFAS_E_IO: return "i/o error";
    case SOFAS_E_CONSISTENCY: return "consistency error";
    case SOFAS_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* sofas_last_error(void) { return g_error.c_str(); }
const char* sofas_last_error_key(void) { return g_error_key.c_str(); }

// --- config ----------------------------------------------------------------------------------

sofas_status sofas_config_create(sofas_config** out) {
    SOFAS_REQUIRE(out);
    return guarded([&] { *out = new sofas_config(); });
}

void sofas_config_destroy(sofas_config* cfg) { delete cfg; }

sofas_status sofas_config_set(sofas_config* cfg, const char* key, const char* value) {
    SOFAS_REQUIRE(cfg);
    SOFAS_REQUIRE(key);
    SOFAS_REQUIRE(value);
    return guarded([&] { sofas::set_key(cfg->cfg, key, value); });
}

sofas_status sofas_config_load(sofas_config* cfg, const char* path) {
    SOFAS_REQUIRE(cfg);
    SOFAS_REQUIRE(path);
    return guarded([&] {
        sofas::RunConfig next = cfg->cfg;
        sofas::apply(next, sofas::parse_key_values_file(path));
        cfg->cfg = next;
    });
}

sofas_status sofas_config_save(const sofas_config* cfg, const char* path) {
    SOFAS_REQUIRE(cfg);
    SOFAS_REQUIRE(path);
    return guarded([&] {
        std::ofstream out(path);
        if (!out) throw sofas::IoError(std::string("cannot write config '") + path + "'");
        sofas::write_config(out, cfg->cfg);
        if (!out) throw sofas::IoError(std::string("write failed for '") + path + "'");
    });
}

sofas_status sofas_config_validate(const sofas_config* cfg) {
    SOFAS_REQUIRE(cfg);
    return guarded([&] { cfg->cfg.validate(); });
}

// --- streams and truth -----------------------------------------------------------------------

sofas_status sofas_stream_create(int32_t width, int32_t height, const sofas_event* events, size_t count,
                                 sofas_stream** out) {
    SOFAS_REQUIRE(out);
    if (count > 0) SOFAS_REQUIRE(events);
    return guarded([&] {
        auto s = std::make_unique<sofas_stream>();
        s->stream.geometry = {width, height};
        s->stream.events.reserve(count);
        for (size_t k = 0; k < count; ++k) s->stream.events.push_back(to_event(events[k]));
        sofas::validate_stream(s->stream);
        *out = s.release();
    });
}

sofas_status sofas_stream_load(const char* path, sofas_stream** out) {
    SOFAS_REQUIRE(path);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        auto s = std::make_unique<sofas_stream>();
        s->stream = sofas::load_stream_file(path);
        sofas::validate_stream(s->stream);
        *out = s.release();
    });
}

sofas_status sofas_stream_save(const sofas_stream* stream, const char* path) {
    SOFAS_REQUIRE(stream);
    SOFAS_REQUIRE(path);
    return guarded([&] { sofas::save_stream_file(path, stream->stream); });
}

void sofas_stream_destroy(sofas_stream* stream) { delete stream; }

sofas_status sofas_stream_size(const sofas_stream* stream, size_t* out) {
    SOFAS_REQUIRE(stream);
    SOFAS_REQUIRE(out);
    *out = stream->stream.events.size();
    return ok();
}

sofas_status sofas_stream_geometry(const sofas_stream* stream, int32_t* width, int32_t* height) {
    SOFAS_REQUIRE(stream);
    SOFAS_REQUIRE(width);
    SOFAS_REQUIRE(height);
    *width = stream->stream.geometry.width;
    *height = stream->stream.geometry.height;
    return ok();
}

sofas_status sofas_stream_get(const sofas_stream* stream, size_t index, sofas_event* out) {
    SOFAS_REQUIRE(stream);
    SOFAS_REQUIRE(out);
    if (index >= stream->stream.events.size()) return fail(SOFAS_E_ARGUMENT, "event index out of range");
    *out = from_event(stream->stream.events[index]);
    return ok();
}

sofas_status sofas_truth_load(const char* path, sofas_truth** out) {
    SOFAS_REQUIRE(path);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        auto t = std::make_unique<sofas_truth>();
        t->records = sofas::load_truth_file(path);
        *out = t.release();
    });
}

sofas_status sofas_truth_save(const sofas_truth* truth, const char* path) {
    SOFAS_REQUIRE(truth);
    SOFAS_REQUIRE(path);
    return guarded([&] { sofas::save_truth_file(path, truth->records); });
}

void sofas_truth_destroy(sofas_truth* truth) { delete truth; }

sofas_status sofas_truth_size(const sofas_truth* truth, size_t* out) {
    SOFAS_REQUIRE(truth);
    SOFAS_REQUIRE(out);
    *out = truth->records.size();
    return ok();
}

// --- synthesis -------------------------------------------------------------------------------

void sofas_synth_options_default(sofas_synth_options* out) {
    if (!out) return;
    const sofas::SensorGeometry geometry;
    const sofas::SynthOptions options;
    *out = {geometry.width, geometry.height, options.noise_rate, options.jitter_us, options.refractory_us,
            options.seed};
}

sofas_status sofas_synth_shape(const char* shape, double a, double b, double v_u, double v_v, double duration,
                               const sofas_synth_options* options, sofas_stream** events, sofas_truth** truth) {
    SOFAS_REQUIRE(shape);
    SOFAS_REQUIRE(events);
    SOFAS_REQUIRE(truth);
    return guarded([&] {
        sofas::SensorGeometry geometry;
        const sofas::SynthOptions opts = to_options(options, geometry);
        const std::string_view kind = shape;
        sofas::ShapeSpec spec;
        if (kind == "circle") {
            spec = sofas::Circle{a};
        } else if (kind == "hexagon") {
            spec = sofas::Hexagon{a};
        } else if (kind == "rectangle") {
            spec = sofas::Rectangle{a, b};
        } else if (kind == "bar") {
            spec = sofas::Bar{a, b};
        } else {
            throw sofas::InvalidArgument("unknown shape '" + std::string(kind) + "'");
        }
        if (!(duration > 0.0)) throw sofas::InvalidArgument("duration must be positive");
        const sofas::Scene scene = sofas::shape_scene(spec, {v_u, v_v}, duration, geometry);
        emit(sofas::generate(scene, geometry, opts), events, truth);
    });
}

sofas_status sofas_synth_preset(const char* name, double speed, double duration, const sofas_synth_options* options,
                                sofas_stream** events, sofas_truth** truth) {
    SOFAS_REQUIRE(name);
    SOFAS_REQUIRE(events);
    SOFAS_REQUIRE(truth);
    return guarded([&] {
        sofas::SensorGeometry geometry;
        const sofas::SynthOptions opts = to_options(options, geometry);
        const std::string_view n = name;
        const bool keep = !(duration > 0.0);
        sofas::Scene scene;
        if (n == "hexagon") {
            scene = keep ? sofas::hexagon_scene({speed, 0.0}, 140.0, geometry)
                         : sofas::shape_scene(sofas::Hexagon{65.0}, {speed, 0.0}, duration, geometry);
        } else if (n == "rectangle") {
            scene = sofas::rectangle_scene(speed, keep ? 2.0 : duration, geometry);
        } else if (n == "long_bar") {
            scene = sofas::long_bar_scene(speed, sofas::deg_to_rad(50.0), keep ? 1.5 : duration, geometry);
        } else if (n == "two_bar") {
            scene = sofas::two_bar_scene(speed, keep ? 2.0 : duration, geometry);
        } else if (n == "pendulum") {
            const double period = sofas::make_pendulum(0.72, sofas::deg_to_rad(23.0), 9.82, speed).period();
            scene = sofas::pendulum_scene(keep ? 1.5 : duration / period, speed, geometry);
        } else if (n == "entry") {
            scene = sofas::entry_scene(speed, keep ? 3.5 : duration, geometry);
        } else if (n == "parallax") {
            scene = sofas::parallax_scene(keep ? 1.2 : duration, geometry);
        } else if (n == "rotating_bar") {
            scene = sofas::rotating_bar_scene(speed, keep ? 1.0 : duration, geometry);
        } else {
            throw sofas::InvalidArgument("unknown scene '" + std::string(n) + "'");
        }
        emit(sofas::generate(scene, geometry, opts), events, truth);
    });
}

// --- engine ----------------------------------------------------------------------------------

sofas_status sofas_engine_create(const sofas_config* cfg, sofas_engine** out) {
    SOFAS_REQUIRE(out);
    return guarded([&] { *out = new sofas_engine(cfg ? cfg->cfg.engine : sofas::EngineConfig{}); });
}

void sofas_engine_destroy(sofas_engine* engine) { delete engine; }

sofas_status sofas_engine_process(sofas_engine* engine, const sofas_event* event, sofas_labeled* out) {
    SOFAS_REQUIRE(engine);
    SOFAS_REQUIRE(event);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        const sofas::Event e = to_event(*event);
        if (e.s != 1 && e.s != -1) throw sofas::GeometryError("polarity must be +1 or -1");
        *out = from_record(sofas::to_record(engine->engine.process(e)));
    });
}

sofas_status sofas_engine_run(sofas_engine* engine, const sofas_stream* stream, sofas_labels** out) {
    SOFAS_REQUIRE(engine);
    SOFAS_REQUIRE(stream);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        auto labels = std::make_unique<sofas_labels>();
        labels->geometry = stream->stream.geometry;
        labels->records.reserve(stream->stream.events.size());
        for (const sofas::Event& e : stream->stream.events) {
            labels->records.push_back(sofas::to_record(engine->engine.process(e)));
        }
        *out = labels.release();
    });
}

sofas_status sofas_engine_stats_get(const sofas_engine* engine, sofas_engine_stats* out) {
    SOFAS_REQUIRE(engine);
    SOFAS_REQUIRE(out);
    const auto& s = engine->engine.stats();
    *out = {s.processed, s.labeled, s.planes_created, s.planes_merged, s.planes_pruned, s.maintenance_sweeps};
    return ok();
}

sofas_status sofas_engine_plane_count(const sofas_engine* engine, size_t* out) {
    SOFAS_REQUIRE(engine);
    SOFAS_REQUIRE(out);
    *out = engine->engine.planes().size();
    return ok();
}

sofas_status sofas_engine_plane(const sofas_engine* engine, size_t index, sofas_plane_info* out) {
    SOFAS_REQUIRE(engine);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        const auto snap = engine->engine.snapshot(engine->engine.now());
        if (index >= snap.size()) throw sofas::InvalidArgument("plane index out of range");
        const auto& p = snap[index];
        *out = {p.id, p.flow.v_u, p.flow.v_v, p.h, p.footprint.size(), p.event_count};
    });
}

sofas_status sofas_engine_save_history(const sofas_engine* engine, const char* path) {
    SOFAS_REQUIRE(engine);
    SOFAS_REQUIRE(path);
    return guarded([&] {
        std::ofstream out(path);
        if (!out) throw sofas::IoError(std::string("cannot write history '") + path + "'");
        sofas::save_history_csv(out, engine->engine.stats().history);
        if (!out) throw sofas::IoError(std::string("write failed for '") + path + "'");
    });
}

sofas_status sofas_engine_save_stats(const sofas_engine* engine, const char* path) {
    SOFAS_REQUIRE(engine);
    SOFAS_REQUIRE(path);
    return guarded([&] {
        std::ofstream out(path);
        if (!out) throw sofas::IoError(std::string("cannot write stats '") + path + "'");
        sofas::save_stats(out, engine->engine.stats());
        if (!out) throw sofas::IoError(std::string("write failed for '") + path + "'");
    });
}

// --- LK, labels, evaluation, rendering --------------------------------------------------------

sofas_status sofas_lk_run(const sofas_stream* stream, const sofas_config* cfg, sofas_labels** out) {
    SOFAS_REQUIRE(stream);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        auto labels = std::make_unique<sofas_labels>();
        labels->geometry = stream->stream.geometry;
        labels->records = sofas::lk_run(stream->stream, cfg ? cfg->cfg.lk : sofas::LKConfig{});
        *out = labels.release();
    });
}

sofas_status sofas_labels_load(const char* path, sofas_labels** out) {
    SOFAS_REQUIRE(path);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        auto labels = std::make_unique<sofas_labels>();
        labels->records = sofas::load_flow_records_file(path, &labels->geometry);
        *out = labels.release();
    });
}

sofas_status sofas_labels_save(const sofas_labels* labels, const char* path) {
    SOFAS_REQUIRE(labels);
    SOFAS_REQUIRE(path);
    return guarded([&] { sofas::save_flow_records_file(path, labels->records, labels->geometry); });
}

void sofas_labels_destroy(sofas_labels* labels) { delete labels; }

sofas_status sofas_labels_size(const sofas_labels* labels, size_t* out) {
    SOFAS_REQUIRE(labels);
    SOFAS_REQUIRE(out);
    *out = labels->records.size();
    return ok();
}

sofas_status sofas_labels_get(const sofas_labels* labels, size_t index, sofas_labeled* out) {
    SOFAS_REQUIRE(labels);
    SOFAS_REQUIRE(out);
    if (index >= labels->records.size()) return fail(SOFAS_E_ARGUMENT, "label index out of range");
    *out = from_record(labels->records[index]);
    return ok();
}

sofas_status sofas_evaluate(const sofas_labels* labels, const sofas_truth* truth, int64_t t_start_us,
                            sofas_report** out) {
    SOFAS_REQUIRE(labels);
    SOFAS_REQUIRE(truth);
    SOFAS_REQUIRE(out);
    return guarded([&] {
        sofas::EvalOptions options;
        options.t_start_us = t_start_us;
        auto r = std::make_unique<sofas_report>();
        r->report = sofas::evaluate(labels->records, truth->records, options);
        *out = r.release();
    });
}

void sofas_report_destroy(sofas_report* report) { delete report; }

sofas_status sofas_report_summary(const sofas_report* report, sofas_eval_summary* out) {
    SOFAS_REQUIRE(report);
    SOFAS_REQUIRE(out);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const auto& r = report->report;
    *out = {r.events, r.estimated, r.evaluated, r.noise_estimated, r.coverage, r.magnitude ? 1 : 0,
            nan, nan, nan, nan, nan, nan, nan, nan};
    if (r.magnitude) {
        out->magnitude_mean = r.magnitude->mean;
        out->magnitude_median = r.magnitude->median;
        out->magnitude_stddev = r.magnitude->stddev;
        out->magnitude_median_abs = *r.median_abs_magnitude;
        out->angle_mean = r.angle->mean;
        out->angle_median = r.angle->median;
        out->angle_stddev = r.angle->stddev;
        out->magnitude_correlation = r.magnitude_correlation.value_or(nan);
    }
    return ok();
}

sofas_status sofas_report_save(const sofas_report* report, const char* summary_path, const char* magnitude_hist_path,
                               const char* angle_hist_path) {
    SOFAS_REQUIRE(report);
    return guarded([&] {
        const auto write = [](const char* path, auto&& body) {
            if (!path) return;
            std::ofstream out(path);
            if (!out) throw sofas::IoError(std::string("cannot write '") + path + "'");
            body(out);
            if (!out) throw sofas::IoError(std::string("write failed for '") + path + "'");
        };
        const auto& r = report->report;
        write(summary_path, [&](std::ostream& o) { r.write_summary(o); });
        write(magnitude_hist_path, [&](std::ostream& o) {
            (r.magnitude ? r.magnitude->histogram : sofas::Histogram{}).write_csv(o);
        });
        write(angle_hist_path, [&](std::ostream& o) { (r.angle ? r.angle->histogram : sofas::Histogram{}).write_csv(o); });
    });
}

void sofas_render_options_default(sofas_render_options* out) {
    if (!out) return;
    const sofas::RenderOptions d;
    *out = {d.frame_interval_us, SOFAS_COLOR_DIRECTION, d.v_sat};
}

sofas_status sofas_render(const sofas_labels* labels, const sofas_render_options* options, const char* prefix,
                          size_t* frames_written) {
    SOFAS_REQUIRE(labels);
    SOFAS_REQUIRE(prefix);
    return guarded([&] {
        sofas::RenderOptions o;
        if (options) {
            o.frame_interval_us = options->frame_interval_us;
            o.mode = options->mode == SOFAS_COLOR_SEGMENT ? sofas::ColorMode::segment : sofas::ColorMode::direction;
            o.v_sat = options->v_sat;
        }
        const auto frames = sofas::render_frames(labels->records, labels->geometry, o);
        for (std::size_t k = 0; k < frames.size(); ++k) {
            char suffix[32];
            std::snprintf(suffix, sizeof suffix, "_%05zu.ppm", k);
            sofas::write_ppm_file(std::string(prefix) + suffix, frames[k]);
        }
        if (frames_written) *frames_written = frames.size();
    });
}

} // extern "C"
