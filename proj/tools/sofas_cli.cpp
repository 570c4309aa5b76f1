// sofas-cli: synth | run | lk | eval | render | bench, on top of the C API.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal invariant breach.

#include "sofas/sofas.h"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kInternal = 3;

struct Failure {
    int code;
    std::string message;
};

int exit_code(sofas_status s) {
    switch (s) {
    case SOFAS_OK: return kOk;
    case SOFAS_E_CONSISTENCY:
    case SOFAS_E_INTERNAL: return kInternal;
    case SOFAS_E_NULL: return kInternal;
    default: return kData;
    }
}

void check(sofas_status s, const std::string& what) {
    if (s == SOFAS_OK) return;
    std::string msg = what + ": " + sofas_status_string(s);
    if (*sofas_last_error()) msg += ": " + std::string(sofas_last_error());
    throw Failure{exit_code(s), msg};
}

// RAII owners for the C handles.
template <typename T, void (*Destroy)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Destroy(p); }
    T** out() { return &p; }
    operator T*() const { return p; }
};
using Config = Handle<sofas_config, sofas_config_destroy>;
using Stream = Handle<sofas_stream, sofas_stream_destroy>;
using Truth = Handle<sofas_truth, sofas_truth_destroy>;
using Engine = Handle<sofas_engine, sofas_engine_destroy>;
using Labels = Handle<sofas_labels, sofas_labels_destroy>;
using Report = Handle<sofas_report, sofas_report_destroy>;

struct ConfigArgs {
    std::string file;
    std::vector<std::string> sets;

    void add_to(CLI::App* app) {
        app->add_option("--config", file, "key = value config file")->check(CLI::ExistingFile);
        app->add_option("--set", sets, "override one key, e.g. --set track_plane.h0_deg=0.05");
    }

    void load(Config& cfg) const {
        check(sofas_config_create(cfg.out()), "config");
        if (!file.empty()) check(sofas_config_load(cfg, file.c_str()), "config '" + file + "'");
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Failure{kUsage, "--set expects key=value, got '" + kv + "'"};
            check(sofas_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
        }
        check(sofas_config_validate(cfg), "config");
    }
};

std::pair<double, double> parse_pair(const std::string& text, const char* flag) {
    double a = 0, b = 0;
    char comma = 0;
    std::istringstream in(text);
    if (!(in >> a >> comma >> b) || comma != ',' || !in.eof()) {
        in.clear();
        throw Failure{kUsage, std::string(flag) + " expects two comma-separated numbers, got '" + text + "'"};
    }
    return {a, b};
}

// --- synth -----------------------------------------------------------------------------------

struct SynthArgs {
    std::string shape, scene, out, truth, vel = "58,0", size = "240,180";
    double width = 65, height = 20, speed = 58, dur = 0, noise = 0;
    std::int64_t jitter = 0;
    std::uint64_t seed = 1;
};

void run_synth(const SynthArgs& a) {
    sofas_synth_options o;
    sofas_synth_options_default(&o);
    const auto [w, h] = parse_pair(a.size, "--sensor");
    o.width = static_cast<int32_t>(w);
    o.height = static_cast<int32_t>(h);
    o.noise_rate = a.noise;
    o.jitter_us = a.jitter;
    o.seed = a.seed;
    Stream events;
    Truth truth;
    if (!a.shape.empty() == !a.scene.empty()) throw Failure{kUsage, "give exactly one of --shape and --scene"};
    if (!a.shape.empty()) {
        const auto [vu, vv] = parse_pair(a.vel, "--vel");
        const double dur = a.dur > 0 ? a.dur : 2.0;
        check(sofas_synth_shape(a.shape.c_str(), a.width, a.height, vu, vv, dur, &o, events.out(), truth.out()),
              "synth");
    } else {
        check(sofas_synth_preset(a.scene.c_str(), a.speed, a.dur, &o, events.out(), truth.out()), "synth");
    }
    const std::string truth_path = a.truth.empty() ? a.out + ".truth" : a.truth;
    check(sofas_stream_save(events, a.out.c_str()), "write events");
    check(sofas_truth_save(truth, truth_path.c_str()), "write truth");
    size_t n = 0;
    check(sofas_stream_size(events, &n), "size");
    std::cout << "events=" << n << "\nevents_file=" << a.out << "\ntruth_file=" << truth_path << '\n';
}

// --- run / lk --------------------------------------------------------------------------------

struct RunArgs {
    std::string input, output, history, stats, manifest, replay;
    ConfigArgs config;
};

// Reads the `# input = ...` / `# output = ...` lines a manifest carries next to its config.
void apply_replay(RunArgs& a) {
    std::ifstream in(a.replay);
    if (!in) throw Failure{kData, "cannot open manifest '" + a.replay + "'"};
    std::string line;
    while (std::getline(in, line)) {
        const auto take = [&line](const std::string& key, std::string& field) {
            const std::string prefix = "# " + key + " = ";
            if (line.rfind(prefix, 0) == 0 && field.empty()) field = line.substr(prefix.size());
        };
        take("input", a.input);
        take("output", a.output);
    }
    if (a.config.file.empty()) a.config.file = a.replay;
}

void write_manifest(const std::string& path, const Config& cfg, const RunArgs& a, const char* mode, size_t events,
                    double seconds) {
    check(sofas_config_save(cfg, path.c_str()), "write manifest");
    std::ofstream out(path, std::ios::app);
    out << "# mode = " << mode << '\n'
        << "# input = " << a.input << '\n'
        << "# output = " << a.output << '\n'
        << "# version = " << sofas_version() << '\n'
        << "# events = " << events << '\n'
        << "# seconds = " << seconds << '\n'
        << "# events_per_s = " << (seconds > 0 ? static_cast<double>(events) / seconds : 0.0) << '\n';
    if (!out) throw Failure{kData, "write failed for manifest '" + path + "'"};
}

void run_pipeline(RunArgs a, bool lk) {
    if (!a.replay.empty()) apply_replay(a);
    if (a.input.empty() || a.output.empty()) throw Failure{kUsage, "--input and --output are required"};
    Config cfg;
    a.config.load(cfg);
    Stream stream;
    check(sofas_stream_load(a.input.c_str(), stream.out()), "read '" + a.input + "'");
    size_t n = 0;
    check(sofas_stream_size(stream, &n), "size");

    Labels labels;
    Engine engine;
    const auto start = std::chrono::steady_clock::now();
    if (lk) {
        check(sofas_lk_run(stream, cfg, labels.out()), "lk");
    } else {
        check(sofas_engine_create(cfg, engine.out()), "engine");
        check(sofas_engine_run(engine, stream, labels.out()), "run");
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    check(sofas_labels_save(labels, a.output.c_str()), "write '" + a.output + "'");
    if (!lk) {
        if (!a.history.empty()) check(sofas_engine_save_history(engine, a.history.c_str()), "history");
        if (!a.stats.empty()) check(sofas_engine_save_stats(engine, a.stats.c_str()), "stats");
    }
    write_manifest(a.manifest.empty() ? a.output + ".manifest" : a.manifest, cfg, a, lk ? "lk" : "run", n, seconds);

    std::cout << "events=" << n << "\nseconds=" << seconds << '\n';
    if (!lk) {
        size_t planes = 0;
        check(sofas_engine_plane_count(engine, &planes), "planes");
        std::cout << "planes=" << planes << '\n';
        for (size_t k = 0; k < planes; ++k) {
            sofas_plane_info p;
            check(sofas_engine_plane(engine, k, &p), "plane");
            std::cout << "plane " << p.id << " flow " << p.v_u << ',' << p.v_v << " cells " << p.cells << " events "
                      << p.events << '\n';
        }
    }
}

// --- eval ------------------------------------------------------------------------------------

struct EvalArgs {
    std::string labels, truth, summary, hist_prefix;
    double t_start = 0.0;
};

void run_eval(const EvalArgs& a) {
    Labels labels;
    Truth truth;
    check(sofas_labels_load(a.labels.c_str(), labels.out()), "read '" + a.labels + "'");
    const std::string truth_path = a.truth.empty() ? a.labels + ".truth" : a.truth;
    check(sofas_truth_load(truth_path.c_str(), truth.out()), "read '" + truth_path + "'");
    Report report;
    check(sofas_evaluate(labels, truth, static_cast<int64_t>(std::llround(a.t_start * 1e6)), report.out()), "eval");
    const std::string mag = a.hist_prefix.empty() ? "" : a.hist_prefix + "_magnitude.csv";
    const std::string ang = a.hist_prefix.empty() ? "" : a.hist_prefix + "_angle.csv";
    check(sofas_report_save(report, a.summary.empty() ? nullptr : a.summary.c_str(), mag.empty() ? nullptr : mag.c_str(),
                            ang.empty() ? nullptr : ang.c_str()),
          "write report");
    sofas_eval_summary s;
    check(sofas_report_summary(report, &s), "summary");
    std::cout << "events=" << s.events << "\nestimated=" << s.estimated << "\nevaluated=" << s.evaluated
              << "\ncoverage=" << s.coverage << '\n';
    if (s.has_errors) {
        std::cout << "magnitude_pct_median=" << s.magnitude_median << "\nmagnitude_pct_median_abs="
                  << s.magnitude_median_abs << "\nmagnitude_pct_stddev=" << s.magnitude_stddev
                  << "\nangle_deg_median=" << s.angle_median << "\nangle_deg_stddev=" << s.angle_stddev
                  << "\nmagnitude_correlation=" << s.magnitude_correlation << '\n';
    }
}

// --- render ----------------------------------------------------------------------------------

struct RenderArgs {
    std::string labels, prefix, mode = "direction";
    double interval_ms = 33.333;
    double v_sat = 100.0;
};

void run_render(const RenderArgs& a) {
    Labels labels;
    check(sofas_labels_load(a.labels.c_str(), labels.out()), "read '" + a.labels + "'");
    sofas_render_options o;
    sofas_render_options_default(&o);
    o.frame_interval_us = static_cast<int64_t>(std::llround(a.interval_ms * 1000.0));
    o.mode = a.mode == "segment" ? SOFAS_COLOR_SEGMENT : SOFAS_COLOR_DIRECTION;
    o.v_sat = a.v_sat;
    size_t frames = 0;
    check(sofas_render(labels, &o, a.prefix.c_str(), &frames), "render");
    std::cout << "frames=" << frames << '\n';
}

// --- bench -----------------------------------------------------------------------------------

struct BenchArgs {
    std::string input;
    ConfigArgs config;
    int repeat = 3;
    double noise = 500.0;
};

void run_bench(const BenchArgs& a) {
    Config cfg;
    a.config.load(cfg);
    Stream stream;
    if (!a.input.empty()) {
        check(sofas_stream_load(a.input.c_str(), stream.out()), "read '" + a.input + "'");
    } else {
        // 65 px hexagon at 58 px/s across the frame.
        sofas_synth_options o;
        sofas_synth_options_default(&o);
        o.noise_rate = a.noise;
        Truth truth;
        check(sofas_synth_shape("hexagon", 65.0, 0.0, 58.0, 0.0, 2.9, &o, stream.out(), truth.out()), "synth");
    }
    size_t n = 0;
    check(sofas_stream_size(stream, &n), "size");
    double best = 0.0;
    for (int r = 0; r < a.repeat; ++r) {
        Engine engine;
        Labels labels;
        check(sofas_engine_create(cfg, engine.out()), "engine");
        const auto start = std::chrono::steady_clock::now();
        check(sofas_engine_run(engine, stream, labels.out()), "run");
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        best = r == 0 ? s : std::min(best, s);
    }
    std::cout << "events=" << n << "\nbest_seconds=" << best
              << "\nevents_per_s=" << (best > 0 ? static_cast<double>(n) / best : 0.0) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera optical flow with velocity segmentation"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic event stream and its per-event truth");
    s->add_option("--shape", synth.shape, "circle | hexagon | rectangle | bar");
    s->add_option("--scene", synth.scene,
                  "hexagon | rectangle | long_bar | two_bar | pendulum | entry | parallax | rotating_bar");
    s->add_option("--width", synth.width, "shape size: hexagon/rectangle width, circle radius, bar length");
    s->add_option("--height", synth.height, "rectangle height or bar thickness");
    s->add_option("--vel", synth.vel, "shape velocity v_u,v_v in px/s");
    s->add_option("--speed", synth.speed, "scene speed (px/s; pendulum peak flow; rotating_bar rev/s)");
    s->add_option("--dur", synth.dur, "duration in seconds (scene default if omitted)");
    s->add_option("--noise", synth.noise, "background events/s");
    s->add_option("--jitter", synth.jitter, "timestamp jitter in microseconds");
    s->add_option("--seed", synth.seed, "noise seed");
    s->add_option("--sensor", synth.size, "sensor width,height");
    s->add_option("--out", synth.out, "event file")->required();
    s->add_option("--truth", synth.truth, "truth file (default <out>.truth)");

    RunArgs run;
    auto* r = app.add_subcommand("run", "label an event stream with flow and segments");
    r->add_option("--input", run.input, "event file");
    r->add_option("--output", run.output, "labeled event file");
    r->add_option("--history", run.history, "per-plane history CSV");
    r->add_option("--stats", run.stats, "engine counters, key=value");
    r->add_option("--manifest", run.manifest, "manifest path (default <output>.manifest)");
    r->add_option("--replay", run.replay, "rerun from a manifest")->check(CLI::ExistingFile);
    run.config.add_to(r);

    RunArgs lk;
    auto* l = app.add_subcommand("lk", "Lucas-Kanade baseline flow");
    l->add_option("--input", lk.input, "event file");
    l->add_option("--output", lk.output, "flow file");
    l->add_option("--manifest", lk.manifest, "manifest path (default <output>.manifest)");
    l->add_option("--replay", lk.replay, "rerun from a manifest")->check(CLI::ExistingFile);
    lk.config.add_to(l);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "compare a flow file with per-event truth");
    e->add_option("--labels", ev.labels, "flow or labeled file")->required();
    e->add_option("--truth", ev.truth, "truth file (default <labels>.truth)");
    e->add_option("--t-start", ev.t_start, "ignore estimates before this time, seconds");
    e->add_option("--summary", ev.summary, "write key=value summary here");
    e->add_option("--hist-prefix", ev.hist_prefix, "write <prefix>_magnitude.csv and <prefix>_angle.csv");

    RenderArgs rd;
    auto* v = app.add_subcommand("render", "write PPM frames of a labeled file");
    v->add_option("--labels", rd.labels, "flow or labeled file")->required();
    v->add_option("--prefix", rd.prefix, "output prefix; frames are <prefix>_NNNNN.ppm")->required();
    v->add_option("--interval", rd.interval_ms, "frame interval in milliseconds");
    v->add_option("--mode", rd.mode, "direction | segment")->check(CLI::IsMember({"direction", "segment"}));
    v->add_option("--vsat", rd.v_sat, "flow magnitude at full saturation, px/s");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "measure engine throughput");
    b->add_option("--input", bench.input, "event file (default: synthetic hexagon)");
    b->add_option("--repeat", bench.repeat, "runs; the fastest is reported")->check(CLI::PositiveNumber);
    b->add_option("--noise", bench.noise, "background events/s of the synthetic stream");
    bench.config.add_to(b);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*s) run_synth(synth);
        else if (*r) run_pipeline(run, false);
        else if (*l) run_pipeline(lk, true);
        else if (*e) run_eval(ev);
        else if (*v) run_render(rd);
        else if (*b) run_bench(bench);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << '\n';
        return kInternal;
    }
    return kOk;
}
