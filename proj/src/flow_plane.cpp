#include "sofas/flow_plane.hpp"

#include "sofas/error.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sofas {

void FlowPlaneConfig::validate() const {
    if (n < 3) throw ConfigError("flow_plane.n", "must be >= 3");
    if (!(range > 0.0 && range <= std::numbers::pi)) throw ConfigError("flow_plane.range", "must lie in (0, pi]");
    if (p_stable < 1) throw ConfigError("flow_plane.p_stable", "must be >= 1");
    if (!(q > 1.0)) throw ConfigError("flow_plane.q", "must be > 1");
    if (depth_max < 0) throw ConfigError("flow_plane.depth_max", "must be >= 0");
    if (!(w > 0.0)) throw ConfigError("flow_plane.w", "must be > 0");
    if (!(v_ref > 0.0)) throw ConfigError("flow_plane.v_ref", "must be > 0");
    if (!(noise_lifespan > 0.0)) throw ConfigError("flow_plane.noise_lifespan", "must be > 0");
    if (!(motion_ratio >= 1.0)) throw ConfigError("flow_plane.motion_ratio", "must be >= 1");
    if (!(min_travel_px >= 0.0)) throw ConfigError("flow_plane.min_travel_px", "must be >= 0");
    if (candidates < 1) throw ConfigError("flow_plane.candidates", "must be >= 1");
    if (!(candidate_floor > 0.0 && candidate_floor <= 1.0)) {
        throw ConfigError("flow_plane.candidate_floor", "must lie in (0, 1]");
    }
}

FlowVector index_to_flow(int i, int j, int n, double range, FlowVector center, double v_ref) {
    const double theta_u = range * ((i + 0.5) / n - 0.5);
    const double theta_v = range * ((j + 0.5) / n - 0.5);
    return tilt_flow(center, theta_u, theta_v, v_ref);
}

// ---------------------------------------------------------------------------------------------

MetricArray::MetricArray(int n, double range, FlowVector center, double v_ref)
    : n_(n), range_(range), center_(center) {
    grids_.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) grids_.emplace_back(index_to_flow(i, j, n, range, center, v_ref));
    }
}

FlowVector MetricArray::step() const {
    const int lo = (n_ - 1) / 2;
    const FlowVector a = flow_at(lo, lo);
    const FlowVector b = flow_at(lo + 1, lo + 1);
    return {std::abs(b.v_u - a.v_u), std::abs(b.v_v - a.v_v)};
}

void MetricArray::add(const Event& e) {
    for (auto& g : grids_) g.accumulate(e);
}

void MetricArray::remove(const Event& e) {
    for (auto& g : grids_) g.retract(e);
}

void MetricArray::clear() {
    for (auto& g : grids_) g.clear();
}

MetricArray::Peak MetricArray::argmax() const {
    Peak best{0, 0, grids_.front().metric()};
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const std::int64_t m = grids_[index(i, j)].metric();
            if (m > best.metric) best = {i, j, m};
        }
    }
    return best;
}

MetricArray::Peak MetricArray::plateau_center() const {
    const Peak top = argmax();
    double ci = 0.0, cj = 0.0;
    int tied = 0;
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            if (metric(i, j) != top.metric) continue;
            ci += i;
            cj += j;
            ++tied;
        }
    }
    ci /= tied;
    cj /= tied;
    Peak best = top;
    double best_d = std::hypot(top.i - ci, top.j - cj);
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            if (metric(i, j) != top.metric) continue;
            const double d = std::hypot(i - ci, j - cj);
            if (d < best_d) {
                best = {i, j, top.metric};
                best_d = d;
            }
        }
    }
    return best;
}

std::vector<MetricArray::Peak> MetricArray::local_maxima(double floor_fraction) const {
    const Peak global = argmax();
    std::vector<Peak> peaks;
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const std::int64_t m = metric(i, j);
            if (static_cast<double>(m) <= floor_fraction * static_cast<double>(global.metric)) continue;
            bool is_max = true;
            for (int dj = -1; dj <= 1 && is_max; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dj == 0) continue;
                    const int ni = i + di, nj = j + dj;
                    if (ni < 0 || nj < 0 || ni >= n_ || nj >= n_) continue;
                    if (metric(ni, nj) > m) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) peaks.push_back({i, j, m});
        }
    }
    return peaks;
}

void MetricArray::dump_csv(std::ostream& out) const {
    out << "i,j,v_u,v_v,m\n";
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const FlowVector f = flow_at(i, j);
            out << i << ',' << j << ',' << detail::format_double(f.v_u) << ',' << detail::format_double(f.v_v) << ','
                << metric(i, j) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------------------------

CellStatistics cell_statistics(const AccumulatorGrid& grid) {
    // Integer sums keep the result independent of hash iteration order.
    std::int64_t s1 = 0;
    std::int64_t s2 = 0;
    std::size_t n = 0;
    for (const auto& [cell, state] : grid.cells()) {
        if (state.sum == 0) continue;
        const std::int64_t a = std::abs(state.sum);
        s1 += a;
        s2 += a * a;
        ++n;
    }
    CellStatistics stats;
    stats.nonzero = n;
    if (n == 0) return stats;
    const double N = static_cast<double>(n);
    stats.mean = static_cast<double>(s1) / N;
    const double var = static_cast<double>(s2 * static_cast<std::int64_t>(n) - s1 * s1) / (N * N);
    stats.stddev = std::sqrt(std::max(0.0, var));
    return stats;
}

std::optional<AssociationResult> extract_associated(const AccumulatorGrid& grid, std::span<const Event> held,
                                                    double w) {
    const CellStatistics stats = cell_statistics(grid);
    if (stats.nonzero == 0) return std::nullopt;
    const double threshold = stats.mean + w * stats.stddev;

    std::vector<Cell> frontier;
    absl::flat_hash_set<Cell> footprint;
    for (const auto& [cell, state] : grid.cells()) {
        if (static_cast<double>(std::abs(state.sum)) > threshold) {
            footprint.insert(cell);
            frontier.push_back(cell);
        }
    }
    if (frontier.empty()) {
        // One structure dominating the nonzero cells pushes mu + w*sigma above all of its cells.
        // Seed from the strongest cells instead.
        std::int32_t top = 0;
        for (const auto& [cell, state] : grid.cells()) top = std::max(top, std::abs(state.sum));
        if (top == 0) return std::nullopt;
        for (const auto& [cell, state] : grid.cells()) {
            if (std::abs(state.sum) == top) {
                footprint.insert(cell);
                frontier.push_back(cell);
            }
        }
    }

    while (!frontier.empty()) {
        const Cell c = frontier.back();
        frontier.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const Cell nb{c.x + dx, c.y + dy};
                if (grid.occupied(nb) && footprint.insert(nb).second) frontier.push_back(nb);
            }
        }
    }

    AssociationResult result;
    result.flow = grid.flow();
    result.footprint.assign(footprint.begin(), footprint.end());
    std::sort(result.footprint.begin(), result.footprint.end());
    for (std::size_t k = 0; k < held.size(); ++k) {
        if (footprint.contains(grid.cell_of(held[k]))) {
            result.indices.push_back(k);
            result.events.push_back(held[k]);
        }
    }
    if (result.events.empty()) return std::nullopt;
    return result;
}

MetricArray refine(const AssociationResult& assoc, const FlowPlaneConfig& cfg, int parent_level) {
    if (parent_level < 0 || parent_level >= cfg.depth_max) {
        throw InvalidArgument("refinement level " + std::to_string(parent_level) + " outside [0, depth_max)");
    }
    const double range = cfg.range / std::pow(cfg.q, parent_level + 1);
    MetricArray child(cfg.n, range, assoc.flow, cfg.v_ref);
    for (const Event& e : assoc.events) child.add(e);
    return child;
}

// ---------------------------------------------------------------------------------------------

namespace {
FlowPlaneConfig checked(FlowPlaneConfig cfg) {
    cfg.validate();
    return cfg;
}
} // namespace

FlowPlane::FlowPlane(FlowPlaneConfig cfg) : cfg_(checked(cfg)), top_(cfg_.n, cfg_.range, {}, cfg_.v_ref) {}

void FlowPlane::ingest(const Event& e) {
    top_.add(e);
    still_.accumulate(e);
    held_.push_back(e);
    const MetricArray::Peak peak = top_.argmax();
    if (static_cast<double>(peak.metric) <= cfg_.motion_ratio * static_cast<double>(still_.metric())) {
        streak_ = 0;
    } else if (last_peak_ && last_peak_->same_cell(peak)) {
        ++streak_;
    } else {
        streak_ = 1;
    }
    last_peak_ = peak;
}

void FlowPlane::reset_stability() noexcept {
    streak_ = 0;
    last_peak_.reset();
}

std::size_t FlowPlane::flush_noise(std::int64_t now_us) {
    const auto lifespan_us = static_cast<std::int64_t>(std::llround(cfg_.noise_lifespan * 1e6));
    std::size_t removed = 0;
    while (!held_.empty() && now_us - held_.front().t > lifespan_us) {
        top_.remove(held_.front());
        still_.retract(held_.front());
        held_.pop_front();
        ++removed;
    }
    if (removed > 0 && held_.empty()) {
        top_.clear();
        still_.clear();
        reset_stability();
    }
    return removed;
}

std::optional<AssociationResult> FlowPlane::extract_associated() const {
    const auto peak = top_.argmax();
    const std::vector<Event> events(held_.begin(), held_.end());
    return sofas::extract_associated(top_.grid(peak.i, peak.j), events, cfg_.w);
}

AssociationResult FlowPlane::refine_fully(AssociationResult assoc) const {
    for (int level = 0; level < cfg_.depth_max; ++level) {
        const MetricArray child = refine(assoc, cfg_, level);
        const auto peak = child.plateau_center();
        auto narrowed = sofas::extract_associated(child.grid(peak.i, peak.j), assoc.events, cfg_.w);
        if (!narrowed) {
            assoc.flow = child.flow_at(peak.i, peak.j);
            continue;
        }
        for (auto& idx : narrowed->indices) idx = assoc.indices[idx];
        assoc = std::move(*narrowed);
    }
    return assoc;
}

std::optional<AssociationResult> FlowPlane::best_candidate() const {
    auto peaks = top_.local_maxima(cfg_.candidate_floor);
    const auto global = top_.argmax();
    std::stable_sort(peaks.begin(), peaks.end(), [&](const MetricArray::Peak& a, const MetricArray::Peak& b) {
        // The global argmax first, then by metric; local_maxima() already lists ties in (j, i) order.
        const bool ga = a.same_cell(global), gb = b.same_cell(global);
        if (ga != gb) return ga;
        return a.metric > b.metric;
    });
    if (peaks.empty() || !peaks.front().same_cell(global)) peaks.insert(peaks.begin(), global);
    if (peaks.size() > static_cast<std::size_t>(cfg_.candidates)) peaks.resize(cfg_.candidates);

    const std::vector<Event> events(held_.begin(), held_.end());
    std::optional<AssociationResult> best;
    std::int64_t best_score = 0;
    for (const auto& peak : peaks) {
        auto assoc = sofas::extract_associated(top_.grid(peak.i, peak.j), events, cfg_.w);
        if (!assoc) continue;
        AssociationResult refined = refine_fully(std::move(*assoc));
        if (cfg_.candidates == 1) return refined;
        const std::int64_t score = metric_bruteforce(events, refined.flow, events.front().t);
        if (!best || score > best_score) {
            best_score = score;
            best = std::move(refined);
        }
    }
    return best;
}

TrackPlaneSeed FlowPlane::emit_track_plane(const AssociationResult& assoc) {
    TrackPlaneSeed seed{assoc.events, assoc.flow, assoc.footprint};

    std::vector<bool> taken(held_.size(), false);
    for (std::size_t idx : assoc.indices) taken.at(idx) = true;
    std::deque<Event> remaining;
    for (std::size_t k = 0; k < held_.size(); ++k) {
        if (!taken[k]) remaining.push_back(held_[k]);
    }
    top_.clear();
    still_.clear();
    held_.clear();
    reset_stability();
    for (const Event& e : remaining) {
        top_.add(e);
        still_.accumulate(e);
    }
    held_ = std::move(remaining);
    ++detections_;
    return seed;
}

std::optional<TrackPlaneSeed> FlowPlane::push(const Event& e) {
    flush_noise(e.t);
    ingest(e);
    if (!stability_check()) return std::nullopt;
    auto assoc = best_candidate();
    if (!assoc) {
        ++failed_;
        reset_stability();
        return std::nullopt;
    }
    const double span = to_seconds(assoc->events.back().t - assoc->events.front().t);
    // Slow structures cannot travel far within the lifespan; a span near it is as long as it gets.
    if (assoc->flow.magnitude() * span < cfg_.min_travel_px && span < 0.8 * cfg_.noise_lifespan) {
        reset_stability();
        return std::nullopt;
    }
    return emit_track_plane(*assoc);
}

} // namespace sofas
