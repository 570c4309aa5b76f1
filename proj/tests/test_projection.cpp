#include <doctest.h>

#include "sofas/error.hpp"
#include "sofas/projection.hpp"

#include <random>

using namespace sofas;

TEST_CASE("project_event") {
    const Event e{10, 5, 500000, 1};
    CHECK(project_event(e, {4, -2}, 0) == Cell{8, 6});
    CHECK(project_event(e, {0, 0}, 0) == Cell{10, 5});
    CHECK(project_event(e, {0, 0}, 123456) == Cell{10, 5});
    // 10 - 1.5 = 8.5 rounds away from zero.
    CHECK(project_event(e, {3, 0}, 0) == Cell{9, 5});
    CHECK(round_coordinate(-2.5) == -3);
}

TEST_CASE("accumulate deltas") {
    AccumulatorGrid g({0, 0});
    const Event pos{0, 0, 0, 1}, neg{0, 0, 0, -1};
    CHECK(g.accumulate(pos) == 1);
    CHECK(g.value({0, 0}) == 1);
    CHECK(g.accumulate(pos) == 3);
    CHECK(g.value({0, 0}) == 2);
    // at 2, +1 -> 3
    AccumulatorGrid h = g;
    CHECK(h.accumulate(pos) == 5);
    CHECK(h.value({0, 0}) == 3);
    // at 2, -1 -> 1
    CHECK(g.accumulate(neg) == -3);
    CHECK(g.value({0, 0}) == 1);
    // at 3, retract +1
    CHECK(h.retract(pos) == -5);
    CHECK(h.value({0, 0}) == 2);
}

TEST_CASE("retract is the inverse of accumulate") {
    AccumulatorGrid g({12.5, -3.0});
    const Event a{3, 4, 1000, 1}, b{7, 1, 250000, -1};
    g.accumulate(a);
    const auto m = g.metric();
    const auto n = g.size();
    g.accumulate(b);
    g.retract(b);
    CHECK(g.metric() == m);
    CHECK(g.size() == n);
    CHECK(g.event_count() == 1);
}

TEST_CASE("cancelled cells stay occupied") {
    AccumulatorGrid g({0, 0});
    g.accumulate({2, 2, 0, 1});
    g.accumulate({2, 2, 5, -1});
    CHECK(g.value({2, 2}) == 0);
    CHECK(g.occupied({2, 2}));
    CHECK(g.metric() == 0);
    g.retract({2, 2, 5, -1});
    g.retract({2, 2, 0, 1});
    CHECK(g.empty());
}

TEST_CASE("retract from an untouched cell") {
    AccumulatorGrid g({0, 0});
    CHECK_THROWS_AS(g.retract({1, 1, 0, 1}), ConsistencyError);
    g.accumulate({0, 0, 0, 1});
    CHECK_THROWS_AS(g.retract({1, 1, 0, 1}), ConsistencyError);
}

TEST_CASE("metric_bruteforce hand sum") {
    const std::vector<Event> ev{{0, 0, 7, 1}, {0, 0, 7, 1}, {1, 0, 7, -1}};
    CHECK(metric_bruteforce(ev, {0, 0}) == 5);
    CHECK(metric_bruteforce({}, {3, 3}) == 0);
}

TEST_CASE("incremental metric equals the brute-force oracle") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> pu(0, 239), pv(0, 179), pol(0, 1);
    std::uniform_int_distribution<std::int64_t> dt(0, 400);
    std::uniform_real_distribution<double> fv(-300.0, 300.0);
    std::vector<Event> ev;
    std::int64_t t = 0;
    for (int k = 0; k < 1000; ++k) {
        t += dt(rng);
        ev.push_back({pu(rng), pv(rng), t, static_cast<std::int8_t>(pol(rng) ? 1 : -1)});
    }
    for (int trial = 0; trial < 5; ++trial) {
        const FlowVector flow{fv(rng), fv(rng)};
        AccumulatorGrid g(flow);
        std::int64_t running = 0;
        for (const Event& e : ev) running += g.accumulate(e);
        CHECK(g.metric() == running);
        CHECK(g.metric() == metric_bruteforce(ev, flow));
        // Retract every third event and compare with the survivors.
        std::vector<Event> kept;
        for (std::size_t k = 0; k < ev.size(); ++k) {
            if (k % 3 == 0) g.retract(ev[k]);
            else kept.push_back(ev[k]);
        }
        CHECK(g.metric() == metric_bruteforce(kept, flow, ev.front().t));
    }
}
