#include "sofas/engine.hpp"

#include "sofas/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace sofas {

void EngineConfig::validate() const {
    flow_plane.validate();
    track_plane.validate();
    auto unit = [](double x, const char* key) {
        if (!(x > 0.0 && x < 1.0)) throw ConfigError(key, "must lie in (0, 1)");
    };
    unit(prune_fraction, "engine.prune_fraction");
    unit(merge_flow_tol, "engine.merge_flow_tol");
    unit(merge_overlap_tol, "engine.merge_overlap_tol");
    if (maintenance_period < 1) throw ConfigError("engine.maintenance_period", "must be >= 1");
}

namespace {
EngineConfig checked(EngineConfig cfg) {
    cfg.validate();
    return cfg;
}
} // namespace

Engine::Engine(EngineConfig cfg) : cfg_(checked(cfg)), flow_plane_(cfg_.flow_plane) {}

FlowLabeledEvent Engine::process(const Event& e) {
    if (last_t_ && e.t < *last_t_) {
        throw OrderingError("timestamp " + std::to_string(e.t) + " precedes " + std::to_string(*last_t_),
                            stats_.processed);
    }
    last_t_ = e.t;
    ++stats_.processed;

    FlowLabeledEvent out{e, std::nullopt, std::nullopt};
    for (auto& plane : planes_) {
        plane->expire_events(e.t);
        const MatchResult r = plane->try_match(e);
        plane->maybe_recenter();
        if (r.hit) {
            out.segment = plane->id();
            out.flow = plane->flow();
            ++stats_.labeled;
            break;
        }
    }

    if (!out.labeled()) {
        if (auto seed = flow_plane_.push(e)) {
            planes_.push_back(std::make_unique<TrackPlane>(next_id_++, *seed, cfg_.track_plane,
                                                           cfg_.flow_plane.v_ref, e.t));
            ++stats_.planes_created;
        }
    }

    if (++since_maintenance_ >= static_cast<std::uint64_t>(cfg_.maintenance_period)) {
        since_maintenance_ = 0;
        maintenance(e.t);
    }
    return out;
}

std::vector<FlowLabeledEvent> Engine::process_all(std::span<const Event> events) {
    std::vector<FlowLabeledEvent> out;
    out.reserve(events.size());
    for (const Event& e : events) out.push_back(process(e));
    return out;
}

bool Engine::mergeable(const TrackPlane& a, const TrackPlane& b, std::int64_t now_us) const {
    const double scale = std::max({a.flow().magnitude(), b.flow().magnitude(), cfg_.track_plane.v_floor});
    if ((a.flow() - b.flow()).magnitude() / scale >= cfg_.merge_flow_tol) return false;
    const Footprint fa = a.footprint(now_us);
    const Footprint fb = b.footprint(now_us);
    const std::size_t smaller = std::min(fa.cells.size(), fb.cells.size());
    if (smaller == 0) return false;
    std::vector<Cell> common;
    std::set_intersection(fa.cells.begin(), fa.cells.end(), fb.cells.begin(), fb.cells.end(),
                          std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(smaller) > cfg_.merge_overlap_tol;
}

std::size_t Engine::try_merge_all() {
    const std::int64_t now_us = now();
    std::size_t merges = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < planes_.size() && !changed; ++i) {
            for (std::size_t j = i + 1; j < planes_.size() && !changed; ++j) {
                if (!mergeable(*planes_[i], *planes_[j], now_us)) continue;
                // planes_ is in creation order, so i holds the older id.
                planes_[i]->absorb(*planes_[j]);
                planes_.erase(planes_.begin() + static_cast<std::ptrdiff_t>(j));
                ++merges;
                changed = true;
            }
        }
    }
    stats_.planes_merged += merges;
    return merges;
}

std::size_t Engine::prune(std::int64_t now_us) {
    const auto before = planes_.size();
    std::erase_if(planes_, [&](const std::unique_ptr<TrackPlane>& p) {
        const double life = p->lifetime();
        const double age = to_seconds(now_us - p->birth());
        if (age < life) return false;
        const double window = std::min(2.0 * life, age);
        return p->expected_hit_fraction(window, now_us) < cfg_.prune_fraction;
    });
    const auto removed = before - planes_.size();
    stats_.planes_pruned += removed;
    return removed;
}

void Engine::maintenance(std::int64_t now_us) {
    for (auto& p : planes_) p->expire_events(now_us);
    try_merge_all();
    prune(now_us);
    ++stats_.maintenance_sweeps;
    record_history(now_us);
}

void Engine::record_history(std::int64_t now_us) {
    for (const auto& p : planes_) {
        stats_.history.push_back({p->id(), now_us, p->flow(), p->h(), p->accumulator_cells(), p->event_count()});
    }
}

std::vector<PlaneSnapshot> Engine::snapshot(std::int64_t now_us) const {
    std::vector<PlaneSnapshot> out;
    for (const auto& p : planes_) {
        out.push_back({p->id(), p->flow(), p->footprint(now_us).cells, p->event_count(), p->h()});
    }
    std::sort(out.begin(), out.end(), [](const PlaneSnapshot& a, const PlaneSnapshot& b) { return a.id < b.id; });
    return out;
}

void save_flow_records(std::ostream& out, std::span<const FlowRecord> records, const SensorGeometry& geometry) {
    out << "geometry " << geometry.width << ' ' << geometry.height << '\n';
    for (const auto& r : records) {
        out << encode_event(r.event) << ' ' << r.segment << ' ';
        if (r.flow) {
            out << detail::format_double(r.flow->v_u) << ' ' << detail::format_double(r.flow->v_v) << '\n';
        } else {
            out << "nan nan\n";
        }
    }
}

void save_flow_records_file(const std::string& path, std::span<const FlowRecord> records,
                            const SensorGeometry& geometry) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write flow file '" + path + "'");
    save_flow_records(out, records, geometry);
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<FlowRecord> load_flow_records(std::istream& in, SensorGeometry* geometry) {
    std::vector<FlowRecord> out;
    SensorGeometry geo;
    std::string line;
    std::size_t line_no = 0;
    bool seen_record = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        const auto fields = detail::split_fields(line);
        if (!seen_record) {
            seen_record = true;
            if (!fields.empty() && fields[0].text == "geometry") {
                if (fields.size() != 3) throw ParseError("expected 'geometry W H'", line_no, fields[0].column);
                const auto w = detail::parse_int(fields[1], line_no, "width");
                const auto h = detail::parse_int(fields[2], line_no, "height");
                if (w <= 0 || h <= 0) throw GeometryError("sensor geometry must be positive");
                geo = {static_cast<std::int32_t>(w), static_cast<std::int32_t>(h)};
                continue;
            }
        }
        if (fields.size() != 7) {
            throw ParseError("expected 7 fields 't u v s segment v_u v_v', got " + std::to_string(fields.size()),
                             line_no, fields.empty() ? 1 : fields.back().column);
        }
        const std::string_view head(line.data(), fields[4].column - 1);
        FlowRecord r{decode_event(head, geo, line_no), -1, std::nullopt};
        const auto seg = detail::parse_int(fields[4], line_no, "segment");
        if (seg < -1 || seg > std::numeric_limits<std::int32_t>::max()) {
            throw ParseError("segment must be >= -1", line_no, fields[4].column);
        }
        r.segment = static_cast<std::int32_t>(seg);
        const double vu = detail::parse_double(fields[5], line_no, "v_u");
        const double vv = detail::parse_double(fields[6], line_no, "v_v");
        if (std::isfinite(vu) && std::isfinite(vv)) {
            r.flow = FlowVector{vu, vv};
        } else if (!std::isnan(vu) || !std::isnan(vv)) {
            throw ParseError("flow must be finite or 'nan nan'", line_no, fields[5].column);
        }
        if (!out.empty() && r.event.t < out.back().event.t) {
            throw OrderingError("timestamp regression on line " + std::to_string(line_no), out.size());
        }
        out.push_back(r);
    }
    if (geometry) *geometry = geo;
    return out;
}

std::vector<FlowRecord> load_flow_records_file(const std::string& path, SensorGeometry* geometry) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open flow file '" + path + "'");
    return load_flow_records(in, geometry);
}

FlowRecord to_record(const FlowLabeledEvent& le) {
    return {le.event, le.segment.value_or(-1), le.flow};
}

void save_labeled(std::ostream& out, std::span<const FlowLabeledEvent> events, const SensorGeometry& geometry) {
    std::vector<FlowRecord> records;
    records.reserve(events.size());
    for (const auto& le : events) records.push_back(to_record(le));
    save_flow_records(out, records, geometry);
}

void save_labeled_file(const std::string& path, std::span<const FlowLabeledEvent> events,
                       const SensorGeometry& geometry) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write labeled file '" + path + "'");
    save_labeled(out, events, geometry);
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<FlowLabeledEvent> load_labeled(std::istream& in, SensorGeometry* geometry) {
    const auto records = load_flow_records(in, geometry);
    std::vector<FlowLabeledEvent> out;
    out.reserve(records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        const FlowRecord& r = records[k];
        if ((r.segment >= 0) != r.flow.has_value()) {
            throw ParseError("record " + std::to_string(k + 1) + ": segment and flow must both be set or both absent",
                             k + 1, 1);
        }
        FlowLabeledEvent le{r.event, std::nullopt, r.flow};
        if (r.segment >= 0) le.segment = r.segment;
        out.push_back(le);
    }
    return out;
}

std::vector<FlowLabeledEvent> load_labeled_file(const std::string& path, SensorGeometry* geometry) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labeled file '" + path + "'");
    return load_labeled(in, geometry);
}

void save_history_csv(std::ostream& out, std::span<const PlaneRecord> records) {
    out << "id,t,v_u,v_v,h,cells,event_count\n";
    for (const auto& r : records) {
        out << r.id << ',' << r.t << ',' << detail::format_double(r.flow.v_u) << ','
            << detail::format_double(r.flow.v_v) << ',' << detail::format_double(r.h) << ',' << r.cells << ','
            << r.event_count << '\n';
    }
}

void save_stats(std::ostream& out, const EngineStats& stats) {
    out << "events_processed=" << stats.processed << '\n'
        << "events_labeled=" << stats.labeled << '\n'
        << "planes_created=" << stats.planes_created << '\n'
        << "planes_merged=" << stats.planes_merged << '\n'
        << "planes_pruned=" << stats.planes_pruned << '\n'
        << "maintenance_sweeps=" << stats.maintenance_sweeps << '\n';
}

} // namespace sofas
