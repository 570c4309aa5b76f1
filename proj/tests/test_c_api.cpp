#include <doctest.h>

#include "sofas/sofas.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "sofas_c_api_test";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("status strings and the error slot") {
    CHECK(std::string(sofas_status_string(SOFAS_OK)) == "ok");
    CHECK(std::strlen(sofas_status_string(SOFAS_E_PARSE)) > 0);
    CHECK(std::strlen(sofas_status_string(static_cast<sofas_status>(99))) > 0);
    CHECK(std::strlen(sofas_version()) > 0);

    CHECK(sofas_config_create(nullptr) == SOFAS_E_NULL);
    CHECK(std::strlen(sofas_last_error()) > 0);
    sofas_config* cfg = nullptr;
    REQUIRE(sofas_config_create(&cfg) == SOFAS_OK);
    CHECK(std::string(sofas_last_error()).empty());
    sofas_config_destroy(cfg);
    sofas_config_destroy(nullptr);
}

TEST_CASE("config errors name the key") {
    sofas_config* cfg = nullptr;
    REQUIRE(sofas_config_create(&cfg) == SOFAS_OK);
    CHECK(sofas_config_set(cfg, "flow_plane.p_stable", "300") == SOFAS_OK);
    CHECK(sofas_config_set(cfg, "flow_plane.bogus", "1") == SOFAS_E_CONFIG);
    CHECK(std::string(sofas_last_error_key()) == "flow_plane.bogus");
    CHECK(sofas_config_set(cfg, "track_plane.m_grid", "4") == SOFAS_OK);
    CHECK(sofas_config_validate(cfg) == SOFAS_E_CONFIG);
    CHECK(std::string(sofas_last_error_key()) == "track_plane.m_grid");
    CHECK(sofas_config_set(cfg, "track_plane.m_grid", "5") == SOFAS_OK);
    CHECK(sofas_config_validate(cfg) == SOFAS_OK);
    CHECK(std::string(sofas_last_error_key()).empty());

    const auto path = (scratch_dir() / "cfg.txt").string();
    CHECK(sofas_config_save(cfg, path.c_str()) == SOFAS_OK);
    sofas_config* back = nullptr;
    REQUIRE(sofas_config_create(&back) == SOFAS_OK);
    CHECK(sofas_config_load(back, path.c_str()) == SOFAS_OK);
    CHECK(sofas_config_load(back, "/nonexistent/cfg.txt") == SOFAS_E_IO);
    sofas_config_destroy(back);
    sofas_config_destroy(cfg);
}

TEST_CASE("streams") {
    const sofas_event ev[] = {{1, 2, 0, 1}, {3, 4, 10, -1}};
    sofas_stream* s = nullptr;
    REQUIRE(sofas_stream_create(8, 8, ev, 2, &s) == SOFAS_OK);
    size_t n = 0;
    CHECK(sofas_stream_size(s, &n) == SOFAS_OK);
    CHECK(n == 2);
    sofas_event e{};
    CHECK(sofas_stream_get(s, 1, &e) == SOFAS_OK);
    CHECK(e.u == 3);
    CHECK(e.t == 10);
    CHECK(e.s == -1);
    CHECK(sofas_stream_get(s, 2, &e) == SOFAS_E_ARGUMENT);
    int32_t w = 0, h = 0;
    CHECK(sofas_stream_geometry(s, &w, &h) == SOFAS_OK);
    CHECK(w == 8);

    const auto path = (scratch_dir() / "ev.txt").string();
    CHECK(sofas_stream_save(s, path.c_str()) == SOFAS_OK);
    sofas_stream* back = nullptr;
    CHECK(sofas_stream_load(path.c_str(), &back) == SOFAS_OK);
    CHECK(sofas_stream_size(back, &n) == SOFAS_OK);
    CHECK(n == 2);
    sofas_stream_destroy(back);
    sofas_stream_destroy(s);

    const sofas_event outside[] = {{8, 0, 0, 1}};
    CHECK(sofas_stream_create(8, 8, outside, 1, &s) == SOFAS_E_GEOMETRY);
    const sofas_event backwards[] = {{0, 0, 5, 1}, {0, 0, 4, 1}};
    CHECK(sofas_stream_create(8, 8, backwards, 2, &s) == SOFAS_E_ORDERING);
    CHECK(sofas_stream_create(8, 8, nullptr, 1, &s) == SOFAS_E_NULL);
    CHECK(sofas_stream_create(8, 8, nullptr, 0, &s) == SOFAS_OK);
    sofas_stream_destroy(s);

    std::ofstream(scratch_dir() / "bad.txt") << "1 2 3 7\n";
    CHECK(sofas_stream_load((scratch_dir() / "bad.txt").string().c_str(), &s) == SOFAS_E_PARSE);
    CHECK(std::string(sofas_last_error()).find("line 1") != std::string::npos);
}

TEST_CASE("synthesis, engine, evaluation and rendering") {
    sofas_synth_options opt;
    sofas_synth_options_default(&opt);
    CHECK(opt.width == 240);
    opt.noise_rate = 500;
    sofas_stream* ev = nullptr;
    sofas_truth* gt = nullptr;
    CHECK(sofas_synth_shape("triangle", 10, 0, 1, 0, 1, &opt, &ev, &gt) == SOFAS_E_ARGUMENT);
    CHECK(sofas_synth_preset("nowhere", 58, 0, &opt, &ev, &gt) == SOFAS_E_ARGUMENT);
    REQUIRE(sofas_synth_shape("hexagon", 65, 0, 58, 0, 2.0, &opt, &ev, &gt) == SOFAS_OK);
    size_t n_ev = 0, n_gt = 0;
    sofas_stream_size(ev, &n_ev);
    sofas_truth_size(gt, &n_gt);
    CHECK(n_ev == n_gt);
    CHECK(n_ev > 10000);

    sofas_engine* eng = nullptr;
    REQUIRE(sofas_engine_create(nullptr, &eng) == SOFAS_OK);
    sofas_labels* labels = nullptr;
    REQUIRE(sofas_engine_run(eng, ev, &labels) == SOFAS_OK);
    size_t n_lab = 0;
    sofas_labels_size(labels, &n_lab);
    CHECK(n_lab == n_ev);

    sofas_engine_stats st{};
    CHECK(sofas_engine_stats_get(eng, &st) == SOFAS_OK);
    CHECK(st.processed == n_ev);
    CHECK(st.planes_created >= 1);
    size_t planes = 0;
    CHECK(sofas_engine_plane_count(eng, &planes) == SOFAS_OK);
    REQUIRE(planes == 1);
    sofas_plane_info info{};
    CHECK(sofas_engine_plane(eng, 0, &info) == SOFAS_OK);
    CHECK(std::abs(info.v_u - 58.0) < 5.8);
    CHECK(sofas_engine_plane(eng, 1, &info) == SOFAS_E_ARGUMENT);

    sofas_labeled one{};
    CHECK(sofas_labels_get(labels, 0, &one) == SOFAS_OK);
    CHECK(one.segment == -1);
    CHECK(std::isnan(one.v_u));
    CHECK(sofas_labels_get(labels, n_lab, &one) == SOFAS_E_ARGUMENT);

    const sofas_event stale{0, 0, 0, 1};
    CHECK(sofas_engine_process(eng, &stale, &one) == SOFAS_E_ORDERING);

    sofas_report* rep = nullptr;
    REQUIRE(sofas_evaluate(labels, gt, 500000, &rep) == SOFAS_OK);
    sofas_eval_summary sum{};
    CHECK(sofas_report_summary(rep, &sum) == SOFAS_OK);
    CHECK(sum.has_errors == 1);
    CHECK(sum.magnitude_median_abs < 10.0);
    CHECK(sum.angle_median < 10.0);
    const auto dir = scratch_dir();
    CHECK(sofas_report_save(rep, (dir / "summary.txt").string().c_str(), nullptr, nullptr) == SOFAS_OK);
    CHECK(fs::exists(dir / "summary.txt"));
    sofas_report_destroy(rep);

    sofas_labels* lk = nullptr;
    REQUIRE(sofas_lk_run(ev, nullptr, &lk) == SOFAS_OK);
    const auto lpath = (dir / "lk.txt").string();
    CHECK(sofas_labels_save(lk, lpath.c_str()) == SOFAS_OK);
    sofas_labels* lk_back = nullptr;
    CHECK(sofas_labels_load(lpath.c_str(), &lk_back) == SOFAS_OK);
    sofas_labels_destroy(lk_back);
    sofas_labels_destroy(lk);

    sofas_render_options ro;
    sofas_render_options_default(&ro);
    ro.frame_interval_us = 500000;
    size_t frames = 0;
    CHECK(sofas_render(labels, &ro, (dir / "frame").string().c_str(), &frames) == SOFAS_OK);
    CHECK(frames == 5);
    CHECK(fs::exists(dir / "frame_00000.ppm"));

    CHECK(sofas_engine_save_history(eng, (dir / "history.csv").string().c_str()) == SOFAS_OK);
    CHECK(sofas_engine_save_stats(eng, "/nonexistent/dir/stats.txt") == SOFAS_E_IO);

    sofas_labels_destroy(labels);
    sofas_engine_destroy(eng);
    sofas_truth_destroy(gt);
    sofas_stream_destroy(ev);
}

TEST_CASE("a bad config reaches engine creation as E_CONFIG") {
    sofas_config* cfg = nullptr;
    REQUIRE(sofas_config_create(&cfg) == SOFAS_OK);
    sofas_config_set(cfg, "engine.prune_fraction", "2");
    sofas_engine* eng = nullptr;
    CHECK(sofas_engine_create(cfg, &eng) == SOFAS_E_CONFIG);
    CHECK(eng == nullptr);
    sofas_config_destroy(cfg);
}
