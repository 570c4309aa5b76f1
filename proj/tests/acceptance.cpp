// Acceptance run: one PASS/FAIL line per criterion with the measured numbers. Exit status is the
// number of failed criteria (capped at 1 for ctest).

#include "sofas/baseline_lk.hpp"
#include "sofas/engine.hpp"
#include "sofas/eval.hpp"
#include "sofas/flow_plane.hpp"
#include "sofas/projection.hpp"
#include "sofas/synth.hpp"
#include "sofas/track_plane.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sofas;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Every acceptance scene carries the same background noise.
constexpr double kNoiseRate = 500.0;

SyntheticRecording make(const Scene& scene, std::uint64_t seed = 1) {
    SynthOptions opt;
    opt.noise_rate = kNoiseRate;
    opt.seed = seed;
    return generate(scene, {}, opt);
}

std::vector<FlowRecord> records(const std::vector<FlowLabeledEvent>& labeled) {
    std::vector<FlowRecord> out;
    out.reserve(labeled.size());
    for (const auto& le : labeled) out.push_back(to_record(le));
    return out;
}

std::int64_t first_label_time(const std::vector<FlowRecord>& recs) {
    for (const auto& r : recs) {
        if (r.segment >= 0) return r.event.t;
    }
    return 0;
}

struct SofasRun {
    std::vector<FlowRecord> out;
    EvalReport report;
    std::size_t planes_final = 0;
    EngineStats stats;
};

// Full engine over a recording, evaluated from the first label on.
SofasRun run_sofas(const SyntheticRecording& rec, const EngineConfig& cfg = {}) {
    Engine eng(cfg);
    SofasRun run;
    run.out = records(eng.process_all(rec.stream.events));
    run.report = evaluate(run.out, rec.per_event, {.t_start_us = first_label_time(run.out)});
    run.planes_final = eng.snapshot(eng.now()).size();
    run.stats = eng.stats();
    return run;
}

Outcome criterion1() {
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pu(0, 239), pv(0, 179), pol(0, 1);
    std::uniform_int_distribution<std::int64_t> dt(0, 200);
    std::uniform_real_distribution<double> fv(-500.0, 500.0);

    std::vector<Event> events;
    std::int64_t t = 0;
    for (int k = 0; k < 10000; ++k) {
        t += dt(rng);
        events.push_back({pu(rng), pv(rng), t, static_cast<std::int8_t>(pol(rng) ? 1 : -1)});
    }
    std::size_t checks = 0, mismatches = 0;
    for (int f = 0; f < 50; ++f) {
        const FlowVector flow{fv(rng), fv(rng)};
        AccumulatorGrid grid(flow);
        std::vector<Event> live;
        for (std::size_t k = 0; k < events.size(); ++k) {
            grid.accumulate(events[k]);
            live.push_back(events[k]);
            if (k % 3 == 2) {
                std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
                const std::size_t victim = pick(rng);
                grid.retract(live[victim]);
                live[victim] = live.back();
                live.pop_back();
            }
            if (k % 1000 == 999) {
                ++checks;
                mismatches += grid.metric() != metric_bruteforce(live, flow, grid.t_ref()) ? 1 : 0;
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 10.0,
            fmt("%zu checkpoints over 50 flows, %zu mismatches, %.2f s", checks, mismatches, elapsed)};
}

Outcome criterion2() {
    const auto rec = make(hexagon_scene({58, 0}));
    MetricArray array(20, std::numbers::pi, {}, 100.0);
    const std::size_t n = std::min<std::size_t>(20000, rec.stream.events.size());
    for (std::size_t k = 0; k < n; ++k) array.add(rec.stream.events[k]);
    double nearest = 1e300;
    for (int j = 0; j < 20; ++j)
        for (int i = 0; i < 20; ++i) nearest = std::min(nearest, (array.flow_at(i, j) - FlowVector{58, 0}).magnitude());
    const auto peak = array.argmax();
    const FlowVector at = array.flow_at(peak.i, peak.j);
    const double dist = (at - FlowVector{58, 0}).magnitude();
    return {std::abs(dist - nearest) < 1e-9,
            fmt("argmax (%d,%d) flow (%.1f, %.1f) after %zu events; nearest cell is %.2f px/s from truth, argmax %.2f",
                peak.i, peak.j, at.v_u, at.v_v, n, nearest, dist)};
}

Outcome criterion3() {
    const auto hex = run_sofas(make(hexagon_scene({58, 0})));
    const bool hex_ok = hex.report.magnitude && *hex.report.median_abs_magnitude < 10.0 &&
                        hex.report.angle->median < 10.0;

    const auto rect_rec = make(rectangle_scene());
    const auto rect = run_sofas(rect_rec);
    const auto lk = evaluate(lk_run(rect_rec.stream), rect_rec.per_event);
    bool rect_ok = rect.report.magnitude && lk.magnitude;
    std::string detail = fmt("hexagon: median |mag| %.2f%%, median angle %.2f deg",
                             hex.report.median_abs_magnitude.value_or(NAN),
                             hex.report.angle ? hex.report.angle->median : NAN);
    if (rect_ok) {
        const double s_mag = rect.report.magnitude->median, l_mag = lk.magnitude->median;
        const double s_ang = rect.report.angle->median, l_ang = lk.angle->median;
        rect_ok = l_mag >= -50.0 && l_mag <= -20.0 && std::abs(s_mag) <= 10.0 &&
                  *rect.report.median_abs_magnitude <= 10.0 && s_ang < l_ang;
        detail += fmt("; rectangle: SOFAS median mag %+.2f%% (|.| %.2f%%), angle %.2f deg; LK median mag %+.2f%%, "
                      "angle %.2f deg, coverage %.0f%%",
                      s_mag, *rect.report.median_abs_magnitude, s_ang, l_mag, l_ang, 100.0 * lk.coverage);
    }
    return {hex_ok && rect_ok, detail};
}

Outcome criterion4() {
    bool ok = true;
    std::string detail;
    for (double speed : {5.8, 58.0, 289.0}) {
        const auto run = run_sofas(make(hexagon_scene({speed, 0})));
        const double m = run.report.median_abs_magnitude.value_or(INFINITY);
        ok = ok && m < 10.0;
        detail += fmt("%s%.1f px/s: median |mag| %.2f%% (angle %.2f deg, %zu labeled)", detail.empty() ? "" : "; ",
                      speed, m, run.report.angle ? run.report.angle->median : NAN, run.report.evaluated);
    }
    return {ok, detail};
}

Outcome criterion5() {
    const auto rec = make(two_bar_scene());
    const auto run = run_sofas(rec);
    Engine eng;
    eng.process_all(rec.stream.events);
    const auto planes = eng.snapshot(eng.now());

    bool flows_ok = planes.size() == 2;
    std::string flows;
    for (const auto& p : planes) {
        const FlowVector target{p.flow.v_u >= 0 ? 58.0 : -58.0, 0.0};
        flows_ok = flows_ok && (p.flow - target).magnitude() <= 0.1 * 58.0;
        flows += fmt(" (%.2f, %.2f)", p.flow.v_u, p.flow.v_v);
    }
    // Cross-labeling: a structure event whose flow is nearer the other bar's truth.
    std::size_t labeled = 0, crossed = 0;
    for (std::size_t k = 0; k < run.out.size(); ++k) {
        const auto& gt = rec.per_event[k];
        if (gt.structure < 0 || !run.out[k].flow) continue;
        ++labeled;
        const FlowVector other = -1.0 * gt.flow;
        if ((*run.out[k].flow - other).magnitude() < (*run.out[k].flow - gt.flow).magnitude()) ++crossed;
    }
    const double cross = labeled ? 100.0 * crossed / labeled : 100.0;
    return {flows_ok && cross < 5.0,
            fmt("%zu planes:%s; cross-labeled %.2f%% of %zu labeled bar events", planes.size(), flows.c_str(), cross,
                labeled)};
}

struct EntryResult {
    bool ok = false;
    std::string detail;
    std::uint64_t created = 0;
};

// Live plane count per sweep from the history; sweeps after full visibility, from the third on,
// must all show exactly one plane.
EntryResult entry_run(const EngineConfig& cfg, const char* label) {
    const Scene scene = entry_scene();
    const auto rec = make(scene);
    Engine eng(cfg);
    eng.process_all(rec.stream.events);
    const auto& obj = scene.objects.front();
    const double min_u = std::min_element(obj.contour.points.begin(), obj.contour.points.end(),
                                          [](const auto& a, const auto& b) { return a.u < b.u; })->u;
    const double speed = std::get<ConstantMotion>(obj.motion).velocity.v_u;
    const auto visible_us = static_cast<std::int64_t>(std::ceil(1e6 * -(obj.origin_u + min_u) / speed));

    std::map<std::int64_t, std::set<std::int32_t>> sweeps;
    for (const auto& r : eng.stats().history) sweeps[r.t].insert(r.id);
    std::vector<std::size_t> after;
    for (const auto& [t, ids] : sweeps) {
        if (t >= visible_us) after.push_back(ids.size());
    }
    std::size_t max_before = 0;
    for (const auto& [t, ids] : sweeps) {
        if (t < visible_us) max_before = std::max(max_before, ids.size());
    }
    bool ok = after.size() >= 3;
    std::size_t worst_late = 0;
    for (std::size_t k = 2; k < after.size(); ++k) worst_late = std::max(worst_late, after[k]);
    ok = ok && worst_late == 1;
    const auto& st = eng.stats();
    std::string first3;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, after.size()); ++k) first3 += fmt("%s%zu", k ? "," : "", after[k]);
    return {ok,
            fmt("%s: %lu seeded, %lu merged, %lu pruned; up to %zu live before full visibility at %.2f s; "
                "first sweeps after it [%s], later max %zu",
                label, static_cast<unsigned long>(st.planes_created), static_cast<unsigned long>(st.planes_merged),
                static_cast<unsigned long>(st.planes_pruned), max_before, visible_us * 1e-6, first3.c_str(), worst_late),
            st.planes_created};
}

Outcome criterion6() {
    // With the defaults, contour evolution lets the first plane absorb the parts that appear later,
    // so the split rarely happens; eager seeding forces it.
    const EntryResult plain = entry_run({}, "defaults");
    EngineConfig eager;
    eager.flow_plane.p_stable = 100;
    eager.flow_plane.min_travel_px = 0.0;
    const EntryResult split = entry_run(eager, "eager seeding");
    return {plain.ok && split.ok && split.created >= 2, plain.detail + "; " + split.detail};
}

Outcome criterion7() {
    const Scene scene = pendulum_scene();
    const auto rec = make(scene);
    const auto run = run_sofas(rec);
    const auto& pend = std::get<PendulumMotion>(scene.objects.front().motion);
    const auto period_us = static_cast<std::int64_t>(pend.period() * 1e6);
    const auto from = static_cast<std::int64_t>(scene.duration * 1e6) - period_us;

    std::vector<double> est, gt;
    std::map<std::int64_t, std::pair<double, int>> bins; // 20 ms bins
    for (std::size_t k = 0; k < run.out.size(); ++k) {
        const auto& r = run.out[k];
        if (r.event.t < from || !r.flow || rec.per_event[k].structure < 0) continue;
        est.push_back(r.flow->magnitude());
        gt.push_back(rec.per_event[k].flow.magnitude());
        auto& b = bins[r.event.t / 20000];
        b.first += r.flow->magnitude();
        ++b.second;
    }
    const auto r = pearson(est, gt);
    double peak = 0.0;
    for (const auto& [k, b] : bins) {
        if (b.second >= 5) peak = std::max(peak, b.first / b.second);
    }
    const double truth_peak = pend.peak_flow();
    const double peak_err = 100.0 * (peak - truth_peak) / truth_peak;
    return {r && *r > 0.8 && std::abs(peak_err) <= 25.0,
            fmt("Pearson r %.3f over the last period (%zu labeled events); peak of 20 ms bin means %.1f px/s vs "
                "%.1f (%+.1f%%)",
                r.value_or(NAN), est.size(), peak, truth_peak, peak_err)};
}

Outcome criterion8() {
    TrackPlaneSeed seed;
    seed.flow = {58, 0};
    seed.events = {{10, 10, 0, 1}};
    const TrackPlane tp(0, seed, {}, 100.0, 0);
    const double expected = 3.0 / 58.0;
    const double rel = std::abs(tp.lifetime() - expected) / expected;
    return {rel < 1e-12, fmt("lifetime %.9f s, 3/58 = %.9f s", tp.lifetime(), expected)};
}

Outcome criterion9() {
    const auto rec = make(two_bar_scene());
    const auto once = [&] {
        Engine eng;
        const auto out = eng.process_all(rec.stream.events);
        std::ostringstream text;
        save_labeled(text, out, rec.stream.geometry);
        save_history_csv(text, eng.stats().history);
        return text.str();
    };
    const std::string a = once(), b = once();
    return {a == b, fmt("%zu bytes of labeled output and history, %s", a.size(), a == b ? "identical" : "different")};
}

Outcome criterion10() {
    constexpr std::size_t kTarget = 81700;
    const Scene scene = shape_scene(Hexagon{65.0}, {58, 0}, 2.9);
    EventStream stream;
    std::int64_t offset = 0;
    for (std::uint64_t pass = 1; stream.events.size() < kTarget; ++pass) {
        const auto rec = make(scene, pass);
        for (Event e : rec.stream.events) {
            e.t += offset;
            stream.events.push_back(e);
        }
        offset = stream.events.back().t + 1;
    }
    stream.events.resize(kTarget);
    Engine eng;
    const auto start = Clock::now();
    for (const Event& e : stream.events) eng.process(e);
    const double elapsed = seconds_since(start);
    return {elapsed <= 13.6, fmt("%zu events in %.3f s (%.0f events/s); budget 13.6 s, 5x target %.2f s %s", kTarget,
                                 elapsed, kTarget / elapsed, 13.6 / 5, elapsed <= 13.6 / 5 ? "met" : "missed")};
}

Outcome criterion11() {
    const Scene scene = rotating_bar_scene();
    const auto rec = make(scene);
    const auto run = run_sofas(rec);
    const auto& rot = std::get<RotationMotion>(scene.objects.front().motion);
    std::vector<double> near_mag, near_ang, far_mag, far_ang;
    for (std::size_t k = 0; k < run.out.size(); ++k) {
        const auto& r = run.out[k];
        const auto& gt = rec.per_event[k];
        if (!r.flow || gt.structure < 0) continue;
        const auto m = magnitude_pct_error(*r.flow, gt.flow);
        const auto a = angle_error(*r.flow, gt.flow);
        if (!m || !a) continue;
        const double d = std::hypot(r.event.u - rot.center_u, r.event.v - rot.center_v);
        (d < 30.0 ? near_mag : far_mag).push_back(std::abs(*m));
        (d < 30.0 ? near_ang : far_ang).push_back(*a);
    }
    const auto med = [](const std::vector<double>& x) { return x.empty() ? NAN : summarize(x).median; };
    return {true, fmt("completed; %zu labeled events; within 30 px of the center median |mag| %.1f%%, angle %.1f deg "
                      "(%zu); beyond it %.1f%%, %.1f deg (%zu); %lu planes seeded",
                      run.report.estimated, med(near_mag), med(near_ang), near_mag.size(), med(far_mag), med(far_ang),
                      far_mag.size(), static_cast<unsigned long>(run.stats.planes_created))};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 incremental metric equals brute force", criterion1},
        {"2 metric peaks at the true flow", criterion2},
        {"3 flow accuracy and LK comparison", criterion3},
        {"4 velocity range", criterion4},
        {"5 two-structure segmentation", criterion5},
        {"6 entering object converges to one plane", criterion6},
        {"7 pendulum tracking", criterion7},
        {"8 event lifetime", criterion8},
        {"9 determinism", criterion9},
        {"10 throughput", criterion10},
        {"11 rotating bar", criterion11},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %s: %s (%.1f s)\n    %s\n", name, o.pass ? "PASS" : "FAIL", seconds_since(start),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
