#include <doctest.h>

#include "sofas/engine.hpp"
#include "sofas/error.hpp"
#include "sofas/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace sofas;

namespace {

SyntheticRecording noisy(const Scene& scene, double rate = 500.0) {
    SynthOptions opt;
    opt.noise_rate = rate;
    return generate(scene, {}, opt);
}

} // namespace

TEST_CASE("an empty engine has no planes") {
    Engine eng;
    CHECK(eng.snapshot(0).empty());
    CHECK(eng.stats().processed == 0);
}

TEST_CASE("out-of-order events are rejected") {
    Engine eng;
    eng.process({0, 0, 100, 1});
    CHECK_THROWS_AS(eng.process({0, 0, 99, 1}), OrderingError);
    CHECK_NOTHROW(eng.process({0, 0, 100, -1}));
}

TEST_CASE("config validation") {
    EngineConfig cfg;
    cfg.merge_overlap_tol = 1.5;
    CHECK_THROWS_AS(Engine{cfg}, ConfigError);
}

TEST_CASE("a single structure is labeled after the Flow Plane settles") {
    const auto rec = noisy(hexagon_scene({58, 0}));
    Engine eng;
    const auto out = eng.process_all(rec.stream.events);
    REQUIRE(out.size() == rec.stream.events.size());

    const auto first = std::find_if(out.begin(), out.end(), [](const auto& le) { return le.labeled(); });
    REQUIRE(first != out.end());
    CHECK(first - out.begin() >= eng.config().flow_plane.p_stable);

    std::size_t structure = 0, labeled = 0, noise = 0, noise_labeled = 0;
    for (std::size_t k = static_cast<std::size_t>(first - out.begin()); k < out.size(); ++k) {
        CHECK(out[k].segment.has_value() == out[k].flow.has_value());
        if (rec.per_event[k].structure < 0) {
            ++noise;
            noise_labeled += out[k].labeled();
        } else {
            ++structure;
            labeled += out[k].labeled();
        }
    }
    CHECK(static_cast<double>(labeled) > 0.9 * static_cast<double>(structure));
    CHECK(static_cast<double>(noise_labeled) < 0.1 * static_cast<double>(noise));
    CHECK(eng.stats().processed == out.size());
    CHECK(eng.stats().labeled == labeled + noise_labeled);
}

TEST_CASE("two opposite bars end as two planes") {
    const auto rec = noisy(two_bar_scene());
    Engine eng;
    eng.process_all(rec.stream.events);
    const auto planes = eng.snapshot(eng.now());
    REQUIRE(planes.size() == 2);
    std::vector<double> vu{planes[0].flow.v_u, planes[1].flow.v_u};
    std::sort(vu.begin(), vu.end());
    CHECK(vu[0] == doctest::Approx(-58).epsilon(0.1));
    CHECK(vu[1] == doctest::Approx(58).epsilon(0.1));
    CHECK(planes[0].id < planes[1].id);
}

TEST_CASE("an entering object ends as one plane") {
    const auto rec = noisy(entry_scene());
    Engine eng;
    eng.process_all(rec.stream.events);
    const auto planes = eng.snapshot(eng.now());
    REQUIRE(planes.size() == 1);
    CHECK(planes[0].flow.v_u == doctest::Approx(58).epsilon(0.1));
}

TEST_CASE("parallax gives one plane per speed") {
    const auto rec = noisy(parallax_scene());
    Engine eng;
    eng.process_all(rec.stream.events);
    CHECK(eng.snapshot(eng.now()).size() == rec.truth.structure_count());
}

TEST_CASE("identical input gives identical output") {
    const auto rec = noisy(two_bar_scene(58.0, 1.0));
    Engine a, b;
    CHECK(a.process_all(rec.stream.events) == b.process_all(rec.stream.events));
    std::ostringstream ha, hb;
    save_history_csv(ha, a.stats().history);
    save_history_csv(hb, b.stats().history);
    CHECK(ha.str() == hb.str());
}

TEST_CASE("flow records") {
    const std::vector<FlowRecord> recs{{{1, 2, 0, 1}, -1, std::nullopt},
                                       {{3, 4, 5, -1}, 2, FlowVector{58.25, -0.125}},
                                       {{5, 6, 5, 1}, -1, FlowVector{1e-3, 7}}};
    SUBCASE("round-trip") {
        std::stringstream io;
        save_flow_records(io, recs, {64, 48});
        SensorGeometry geo;
        CHECK(load_flow_records(io, &geo) == recs);
        CHECK(geo == SensorGeometry{64, 48});
    }
    SUBCASE("missing flow is written nan nan") {
        std::ostringstream out;
        save_flow_records(out, std::span(recs).first(1), {});
        CHECK(out.str() == "geometry 240 180\n0 1 2 1 -1 nan nan\n");
    }
    SUBCASE("parse errors") {
        std::istringstream bad_segment("0 1 2 1 -2 nan nan\n");
        CHECK_THROWS_AS(load_flow_records(bad_segment), ParseError);
        std::istringstream bad_flow("0 1 2 1 0 inf 0\n");
        CHECK_THROWS_AS(load_flow_records(bad_flow), ParseError);
        std::istringstream short_line("0 1 2 1 0 1\n");
        CHECK_THROWS_AS(load_flow_records(short_line), ParseError);
    }
    SUBCASE("labeled files need segment and flow together") {
        std::istringstream lk("0 1 2 1 -1 5 5\n");
        CHECK_THROWS_AS(load_labeled(lk), ParseError);
        std::istringstream ok("0 1 2 1 -1 nan nan\n1 1 2 1 3 5 5\n");
        const auto le = load_labeled(ok);
        REQUIRE(le.size() == 2);
        CHECK_FALSE(le[0].labeled());
        CHECK(le[1].segment == 3);
        CHECK(le[1].flow == FlowVector{5, 5});
    }
    SUBCASE("labeled round-trip") {
        const std::vector<FlowLabeledEvent> le{{{1, 1, 0, 1}, std::nullopt, std::nullopt},
                                               {{2, 2, 1, -1}, 0, FlowVector{-3, 4}}};
        std::stringstream io;
        save_labeled(io, le, {});
        CHECK(load_labeled(io) == le);
        CHECK(to_record(le[1]).segment == 0);
    }
}
