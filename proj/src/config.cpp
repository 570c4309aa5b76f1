#include "sofas/config.hpp"

#include "sofas/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

namespace sofas {

void RunConfig::validate() const {
    engine.validate();
    lk.validate();
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(x)) {
        throw ConfigError(std::string(key), "expected a number, got '" + std::string(value) + "'");
    }
    return x;
}

int to_int(std::string_view key, std::string_view value) {
    int x = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(std::string(key), "expected an integer, got '" + std::string(value) + "'");
    }
    return x;
}

struct Binding {
    const char* key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
Binding real(const char* key, Field field) {
    return {key, [key, field](RunConfig& c, std::string_view v) { field(c) = to_double(key, v); },
            [field](const RunConfig& c) { return detail::format_double(field(c)); }};
}

template <typename Field>
Binding angle(const char* key, Field field) {
    return {key, [key, field](RunConfig& c, std::string_view v) { field(c) = deg_to_rad(to_double(key, v)); },
            [field](const RunConfig& c) { return detail::format_double(rad_to_deg(field(c))); }};
}

template <typename Field>
Binding integer(const char* key, Field field) {
    return {key, [key, field](RunConfig& c, std::string_view v) { field(c) = to_int(key, v); },
            [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table = {
        integer("flow_plane.n", [](auto& c) -> auto& { return c.engine.flow_plane.n; }),
        angle("flow_plane.range_deg", [](auto& c) -> auto& { return c.engine.flow_plane.range; }),
        integer("flow_plane.p_stable", [](auto& c) -> auto& { return c.engine.flow_plane.p_stable; }),
        real("flow_plane.q", [](auto& c) -> auto& { return c.engine.flow_plane.q; }),
        integer("flow_plane.depth_max", [](auto& c) -> auto& { return c.engine.flow_plane.depth_max; }),
        real("flow_plane.w", [](auto& c) -> auto& { return c.engine.flow_plane.w; }),
        real("flow_plane.v_ref", [](auto& c) -> auto& { return c.engine.flow_plane.v_ref; }),
        real("flow_plane.noise_lifespan", [](auto& c) -> auto& { return c.engine.flow_plane.noise_lifespan; }),
        real("flow_plane.motion_ratio", [](auto& c) -> auto& { return c.engine.flow_plane.motion_ratio; }),
        real("flow_plane.min_travel_px", [](auto& c) -> auto& { return c.engine.flow_plane.min_travel_px; }),
        integer("flow_plane.candidates", [](auto& c) -> auto& { return c.engine.flow_plane.candidates; }),
        real("flow_plane.candidate_floor", [](auto& c) -> auto& { return c.engine.flow_plane.candidate_floor; }),
        integer("track_plane.m_grid", [](auto& c) -> auto& { return c.engine.track_plane.m_grid; }),
        angle("track_plane.h0_deg", [](auto& c) -> auto& { return c.engine.track_plane.h0; }),
        real("track_plane.hit_fraction", [](auto& c) -> auto& { return c.engine.track_plane.hit_fraction; }),
        integer("track_plane.evolve_threshold",
                [](auto& c) -> auto& { return c.engine.track_plane.evolve_threshold; }),
        real("track_plane.lifetime_px", [](auto& c) -> auto& { return c.engine.track_plane.lifetime_px; }),
        angle("track_plane.h_min_deg", [](auto& c) -> auto& { return c.engine.track_plane.h_min; }),
        angle("track_plane.h_max_deg", [](auto& c) -> auto& { return c.engine.track_plane.h_max; }),
        real("track_plane.v_floor", [](auto& c) -> auto& { return c.engine.track_plane.v_floor; }),
        real("track_plane.win_margin", [](auto& c) -> auto& { return c.engine.track_plane.win_margin; }),
        real("engine.prune_fraction", [](auto& c) -> auto& { return c.engine.prune_fraction; }),
        real("engine.merge_flow_tol", [](auto& c) -> auto& { return c.engine.merge_flow_tol; }),
        real("engine.merge_overlap_tol", [](auto& c) -> auto& { return c.engine.merge_overlap_tol; }),
        integer("engine.maintenance_period", [](auto& c) -> auto& { return c.engine.maintenance_period; }),
        integer("lk.window", [](auto& c) -> auto& { return c.lk.window; }),
        integer("lk.min_valid_neighbors", [](auto& c) -> auto& { return c.lk.min_valid_neighbors; }),
        real("lk.eigen_floor", [](auto& c) -> auto& { return c.lk.eigen_floor; }),
        real("lk.aperture_ratio", [](auto& c) -> auto& { return c.lk.aperture_ratio; }),
        real("lk.max_age", [](auto& c) -> auto& { return c.lk.max_age; }),
    };
    return table;
}

} // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, 1);
        const std::string_view key = trim(body.substr(0, eq));
        const std::string_view value = trim(body.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no, 1);
        kv.emplace_back(std::string(key), std::string(value));
    }
    return kv;
}

KeyValues parse_key_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse_key_values(in);
}

void set_key(RunConfig& cfg, std::string_view key, std::string_view value) {
    for (const auto& b : bindings()) {
        if (key == b.key) {
            b.set(cfg, value);
            return;
        }
    }
    throw ConfigError(std::string(key), "unknown key");
}

void apply(RunConfig& cfg, const KeyValues& kv) {
    for (const auto& [k, v] : kv) set_key(cfg, k, v);
    cfg.validate();
}

void write_config(std::ostream& out, const RunConfig& cfg) {
    for (const auto& b : bindings()) out << b.key << " = " << b.get(cfg) << '\n';
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& b : bindings()) keys.emplace_back(b.key);
    return keys;
}

} // namespace sofas
