#include <doctest.h>

#include "sofas/error.hpp"
#include "sofas/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace sofas;

TEST_CASE("contours") {
    SUBCASE("circle samples at half-pixel spacing") {
        const auto c = build_contour(Circle{35.0});
        const double expected = 2.0 * std::numbers::pi * 35.0 / 0.5;
        CHECK(std::abs(static_cast<double>(c.points.size()) - expected) <= 2.0);
        CHECK(c.max_extent() == doctest::Approx(70.0).epsilon(0.01));
    }
    SUBCASE("unit rectangle is a valid 8-point ring") {
        CHECK(build_contour(Rectangle{1.0, 1.0}).points.size() == 8);
    }
    SUBCASE("hexagon extent") {
        CHECK(build_contour(Hexagon{65.0}).max_extent() == doctest::Approx(65.0).epsilon(1e-6));
    }
    SUBCASE("normals are unit and outward") {
        for (const auto& p : build_contour(Hexagon{40.0}).points) {
            CHECK(std::hypot(p.n_u, p.n_v) == doctest::Approx(1.0));
            CHECK(p.u * p.n_u + p.v * p.n_v > 0.0);
        }
    }
    SUBCASE("concave polygon normals point out of the material, either winding") {
        // U shape opening right: the inner edge at v = -2 faces into the gap, i.e. +v.
        std::vector<std::array<double, 2>> u_shape{{-10, -10}, {10, -10}, {10, -2}, {-2, -2},
                                                   {-2, 2},    {10, 2},   {10, 10}, {-10, 10}};
        for (int pass = 0; pass < 2; ++pass) {
            int inner = 0;
            for (const auto& p : build_contour(Polygon{u_shape}).points) {
                CHECK(std::hypot(p.n_u, p.n_v) == doctest::Approx(1.0));
                if (p.v == doctest::Approx(-2.0) && p.u > -1.0 && p.u < 9.0) {
                    ++inner;
                    CHECK(p.n_v == doctest::Approx(1.0));
                }
                if (p.u == doctest::Approx(-2.0) && std::abs(p.v) < 1.5) CHECK(p.n_u == doctest::Approx(1.0));
            }
            CHECK(inner > 10);
            std::reverse(u_shape.begin(), u_shape.end());
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_contour(Polygon{{{0, 0}, {1, 1}}}), InvalidArgument);
        CHECK_THROWS_AS(build_contour(Polygon{{{0, 0}, {1, 1}, {2, 2}}}), InvalidArgument);
        CHECK_THROWS_AS(build_contour(Polygon{{{0, 0}, {1, NAN}, {2, 0}}}), InvalidArgument);
        CHECK_THROWS_AS(build_contour(Circle{0.0}), InvalidArgument);
        CHECK_THROWS_AS(build_contour(Rectangle{300.0, 10.0}), GeometryError);
    }
}

TEST_CASE("polarity follows the edge normal") {
    CHECK(polarity_for(1, 0, {58, 0}) == 1);
    CHECK(polarity_for(-1, 0, {58, 0}) == -1);
    CHECK(polarity_for(0, 1, {58, 0}) == 0);
}

TEST_CASE("motion models") {
    SUBCASE("constant") {
        const MotionModel m = ConstantMotion{{58, 0}};
        CHECK(gt_flow_at(m, 0.0) == FlowVector{58, 0});
        CHECK(gt_flow_at(m, 12.3) == FlowVector{58, 0});
    }
    SUBCASE("pendulum closed forms") {
        PendulumMotion p;
        p.pixels_per_meter = 100.0;
        CHECK(p.v_max() == doctest::Approx(1.060).epsilon(1e-3));
        CHECK(p.period() == doctest::Approx(1.701).epsilon(1e-3));
        CHECK(gt_flow_at(p, 0.0).magnitude() == doctest::Approx(p.peak_flow()));
        CHECK(gt_flow_at(p, p.period() / 4).magnitude() == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("make_pendulum hits the requested peak") {
        CHECK(make_pendulum(0.72, deg_to_rad(23.0), 9.82, 200.0).peak_flow() == doctest::Approx(200.0));
    }
    SUBCASE("rotation is zero at its center") {
        const MotionModel r = RotationMotion{120, 90, 2.0};
        CHECK(gt_flow_at(r, 0.3, 120, 90).magnitude() == doctest::Approx(0.0));
        CHECK(gt_flow_at(r, 0.3, 130, 90).magnitude() == doctest::Approx(20.0));
    }
    SUBCASE("validation") {
        PendulumMotion bad;
        bad.length_m = 0.0;
        bad.pixels_per_meter = 1.0;
        CHECK_THROWS_AS(validate_motion(bad), InvalidArgument);
        CHECK_THROWS_AS(validate_motion(RotationMotion{0, 0, 0.0}), InvalidArgument);
    }
}

TEST_CASE("event generation") {
    const SensorGeometry geo;
    SUBCASE("a vertical bar crosses one column per pixel of travel") {
        const SceneObject bar{build_contour(Bar{10.0, 4.0}, geo), 60.0, 90.0, ConstantMotion{{100, 0}}};
        const auto rec = generate_events(bar, 1.0, geo);
        // 100 px of travel over a 10 px edge, leading plus trailing.
        CHECK(rec.stream.events.size() == doctest::Approx(2000.0).epsilon(0.1));
        const auto pos = std::count_if(rec.stream.events.begin(), rec.stream.events.end(),
                                       [](const Event& e) { return e.s > 0; });
        CHECK(pos == doctest::Approx(1000.0).epsilon(0.1));
        CHECK(rec.per_event.size() == rec.stream.events.size());
        CHECK(std::is_sorted(rec.stream.events.begin(), rec.stream.events.end(),
                             [](const Event& a, const Event& b) { return a.t < b.t; }));
        CHECK(rec.stream.events.back().t <= 1000000);
    }
    SUBCASE("no motion, no events") {
        const SceneObject still{build_contour(Circle{20.0}, geo), 120.0, 90.0, ConstantMotion{{0, 0}}};
        CHECK(generate_events(still, 1.0, geo).stream.events.empty());
    }
    SUBCASE("two bars give two structures") {
        const auto rec = generate(two_bar_scene());
        CHECK(rec.truth.structure_count() == 2);
        bool seen[2] = {false, false};
        for (const auto& r : rec.per_event) {
            REQUIRE(r.structure >= 0);
            seen[r.structure] = true;
            CHECK(std::abs(r.flow.v_u) == doctest::Approx(58.0));
        }
        CHECK((seen[0] && seen[1]));
    }
    SUBCASE("noise is labeled -1 with a NaN flow") {
        SynthOptions opt;
        opt.noise_rate = 1000.0;
        const auto rec = generate(hexagon_scene({58, 0}), geo, opt);
        const auto noise = std::count_if(rec.per_event.begin(), rec.per_event.end(),
                                         [](const TruthRecord& r) { return r.structure < 0; });
        CHECK(noise > 0);
        for (const auto& r : rec.per_event) {
            if (r.structure < 0) CHECK(std::isnan(r.flow.v_u));
        }
    }
    SUBCASE("same seed, same stream") {
        SynthOptions opt;
        opt.noise_rate = 500.0;
        opt.jitter_us = 300;
        opt.seed = 9;
        CHECK(generate(two_bar_scene(), geo, opt).stream.events == generate(two_bar_scene(), geo, opt).stream.events);
    }
}

TEST_CASE("truth round-trip") {
    const std::vector<TruthRecord> recs{{0, {58, 0}, 0}, {5, {std::nan(""), std::nan("")}, -1}, {9, {-1.5, 2.25}, 1}};
    std::stringstream io;
    save_truth(io, recs);
    const auto back = load_truth(io);
    REQUIRE(back.size() == 3);
    CHECK(back[0].flow == FlowVector{58, 0});
    CHECK(back[1].structure == -1);
    CHECK(std::isnan(back[1].flow.v_u));
    CHECK(back[2].flow == FlowVector{-1.5, 2.25});
    CHECK(back[2].t == 9);
}
