#include "sofas/track_plane.hpp"

#include "sofas/error.hpp"

#include <algorithm>
#include <cmath>

namespace sofas {

void TrackPlaneConfig::validate() const {
    if (m_grid < 3 || m_grid % 2 == 0) throw ConfigError("track_plane.m_grid", "must be odd and >= 3");
    if (!(h0 > 0.0)) throw ConfigError("track_plane.h0_deg", "must be > 0");
    if (!(hit_fraction > 0.0 && hit_fraction < 1.0)) throw ConfigError("track_plane.hit_fraction", "must lie in (0, 1)");
    if (evolve_threshold < 1) throw ConfigError("track_plane.evolve_threshold", "must be >= 1");
    if (!(lifetime_px >= 1.0)) throw ConfigError("track_plane.lifetime_px", "must be >= 1");
    if (!(h_min > 0.0 && h_min <= h_max)) throw ConfigError("track_plane.h_min_deg", "must lie in (0, h_max]");
    if (!(v_floor > 0.0)) throw ConfigError("track_plane.v_floor", "must be > 0");
    if (!(win_margin >= 0.0)) throw ConfigError("track_plane.win_margin", "must be >= 0");
}

TrackPlane::TrackPlane(int id, const TrackPlaneSeed& seed, const TrackPlaneConfig& cfg, double v_ref,
                       std::int64_t now_us)
    : id_(id), cfg_(cfg), v_ref_(v_ref), center_(seed.flow), h_(std::clamp(cfg.h0, cfg.h_min, cfg.h_max)),
      events_(seed.events.begin(), seed.events.end()), birth_(now_us), last_activity_(now_us) {
    cfg_.validate();
    if (!(v_ref > 0.0)) throw InvalidArgument("v_ref must be positive");
    hits_.assign(static_cast<std::size_t>(cfg_.m_grid) * cfg_.m_grid, 0);
    for (const Event& e : events_) hit_times_.push_back(e.t);
    rebuild(center_, h_);
}

FlowVector TrackPlane::neighbour_flow(int a, int b) const {
    const int half = cfg_.m_grid / 2;
    return tilt_flow(center_, (a - half) * h_, (b - half) * h_, v_ref_);
}

Cell TrackPlane::translate(Cell c, std::int64_t at_us, FlowVector from_flow, std::int64_t from_ref,
                           FlowVector to_flow, std::int64_t to_ref) const {
    const double dt_from = to_seconds(at_us - from_ref);
    const double dt_to = to_seconds(at_us - to_ref);
    return {round_coordinate(c.x + from_flow.v_u * dt_from - to_flow.v_u * dt_to),
            round_coordinate(c.y + from_flow.v_v * dt_from - to_flow.v_v * dt_to)};
}

void TrackPlane::rebuild(FlowVector center, double h) {
    const FlowVector old_flow = center_;
    const std::int64_t old_ref = t_ref_;
    const bool had_grids = !grids_.empty();

    center_ = center;
    h_ = h;
    t_ref_ = events_.empty() ? last_activity_ : events_.front().t;

    const int m = cfg_.m_grid;
    grids_.clear();
    grids_.reserve(static_cast<std::size_t>(m) * m);
    for (int b = 0; b < m; ++b) {
        for (int a = 0; a < m; ++a) grids_.emplace_back(neighbour_flow(a, b), t_ref_);
    }
    for (const Event& e : events_) {
        for (auto& g : grids_) g.accumulate(e);
    }

    // Miss counts are discarded; promoted cells follow the structure into the new frame.
    misses_.clear();
    miss_log_.clear();
    if (had_grids && !evolved_.empty()) {
        std::vector<MissLog> moved;
        for (const auto& [cell, t] : evolved_) moved.push_back({t, translate(cell, t, old_flow, old_ref, center_, t_ref_)});
        std::sort(moved.begin(), moved.end(), [](const MissLog& x, const MissLog& y) {
            return std::tie(x.t, x.cell) < std::tie(y.t, y.cell);
        });
        evolved_.clear();
        evolved_log_.clear();
        for (const MissLog& ml : moved) {
            if (center_grid().occupied(ml.cell)) continue;
            evolved_[ml.cell] = ml.t;
            evolved_log_.push_back(ml);
        }
    }
    std::fill(hits_.begin(), hits_.end(), 0);
}

void TrackPlane::rebuild_neighbours(double h) {
    h_ = h;
    const int m = cfg_.m_grid;
    for (int b = 0; b < m; ++b) {
        for (int a = 0; a < m; ++a) {
            const std::size_t k = static_cast<std::size_t>(b) * m + a;
            if (k == center_index()) continue;
            AccumulatorGrid g(neighbour_flow(a, b), t_ref_);
            for (const Event& e : events_) g.accumulate(e);
            grids_[k] = std::move(g);
        }
    }
    std::fill(hits_.begin(), hits_.end(), 0);
}

void TrackPlane::reanchor(std::int64_t t_ref) {
    const std::int64_t old_ref = t_ref_;
    t_ref_ = t_ref;
    for (auto& g : grids_) {
        AccumulatorGrid fresh(g.flow(), t_ref_);
        for (const Event& e : events_) fresh.accumulate(e);
        g = std::move(fresh);
    }
    auto move = [&](Cell c) { return translate(c, t_ref_, center_, old_ref, center_, t_ref_); };
    absl::flat_hash_map<Cell, int> misses;
    for (const auto& [cell, n] : misses_) misses[move(cell)] += n;
    misses_ = std::move(misses);
    for (auto& ml : miss_log_) ml.cell = move(ml.cell);
    absl::flat_hash_map<Cell, std::int64_t> evolved;
    for (const auto& [cell, t] : evolved_) {
        const Cell c = move(cell);
        if (!center_grid().occupied(c)) evolved[c] = std::max(evolved[c], t);
    }
    evolved_ = std::move(evolved);
    for (auto& ml : evolved_log_) ml.cell = move(ml.cell);
}

MatchResult TrackPlane::try_match(const Event& e) {
    // A stale reference time turns the angular offset between projections into a growing
    // uniform shift, and rounding of that shift would dominate the hit counts.
    if (to_seconds(e.t - t_ref_) > 2.0 * lifetime()) reanchor(events_.empty() ? e.t : events_.front().t);
    const std::size_t ci = center_index();
    const Cell cell = grids_[ci].cell_of(e);
    const bool hit = in_accumulator(cell);
    for (std::size_t k = 0; k < grids_.size(); ++k) {
        if (k == ci) {
            hits_[k] += hit ? 1 : 0;
        } else if (grids_[k].occupied(grids_[k].cell_of(e))) {
            ++hits_[k];
        }
    }

    if (hit) {
        for (auto& g : grids_) g.accumulate(e);
        events_.push_back(e);
        hit_times_.push_back(e.t);
        last_activity_ = e.t;
        evolved_.erase(cell);
        return {true, cell, false};
    }

    int& count = misses_[cell];
    ++count;
    miss_log_.push_back({e.t, cell});
    if (count >= cfg_.evolve_threshold) {
        misses_.erase(cell);
        evolved_[cell] = e.t;
        evolved_log_.push_back({e.t, cell});
        return {false, cell, true};
    }
    return {false, cell, false};
}

double TrackPlane::adapt_perturbation(bool winner_was_center) {
    h_ = std::clamp(winner_was_center ? 0.5 * h_ : 2.0 * h_, cfg_.h_min, cfg_.h_max);
    return h_;
}

bool TrackPlane::maybe_recenter() {
    const std::size_t cells = accumulator_cells();
    if (cells == 0) return false;
    const double threshold = cfg_.hit_fraction * static_cast<double>(cells);
    const std::int64_t best = *std::max_element(hits_.begin(), hits_.end());
    if (static_cast<double>(best) <= threshold) return false;
    ++recenters_;

    // The strongest neighbour only takes over when it leads the center by more than the
    // counting noise of its own tally; otherwise the center counts as the winner.
    const std::size_t ci = center_index();
    std::size_t rival = ci == 0 ? 1 : 0;
    for (std::size_t k = 0; k < hits_.size(); ++k) {
        if (k != ci && hits_[k] > hits_[rival]) rival = k;
    }
    const double lead = static_cast<double>(hits_[rival] - hits_[ci]);
    if (lead <= cfg_.win_margin * std::sqrt(static_cast<double>(hits_[rival]))) {
        const double old_h = h_;
        const double new_h = adapt_perturbation(true);
        if (new_h != old_h) {
            rebuild_neighbours(new_h);
        } else {
            std::fill(hits_.begin(), hits_.end(), 0);
        }
        return new_h != old_h;
    }
    const FlowVector next = grids_[rival].flow();
    const double new_h = adapt_perturbation(false);
    rebuild(next, new_h);
    return true;
}

double TrackPlane::lifetime() const noexcept {
    return cfg_.lifetime_px / std::max(center_.magnitude(), cfg_.v_floor);
}

std::size_t TrackPlane::expire_events(std::int64_t now_us) {
    const auto life_us = static_cast<std::int64_t>(std::llround(lifetime() * 1e6));
    const std::int64_t cutoff = now_us - life_us;
    std::size_t removed = 0;
    while (!events_.empty() && events_.front().t < cutoff) {
        for (auto& g : grids_) g.retract(events_.front());
        events_.pop_front();
        ++removed;
    }
    while (!miss_log_.empty() && miss_log_.front().t < cutoff) {
        auto it = misses_.find(miss_log_.front().cell);
        if (it != misses_.end() && --it->second <= 0) misses_.erase(it);
        miss_log_.pop_front();
    }
    while (!evolved_log_.empty() && evolved_log_.front().t < cutoff) {
        auto it = evolved_.find(evolved_log_.front().cell);
        if (it != evolved_.end() && it->second == evolved_log_.front().t) evolved_.erase(it);
        evolved_log_.pop_front();
    }
    while (!hit_times_.empty() && hit_times_.front() < now_us - 2 * life_us) hit_times_.pop_front();
    return removed;
}

double TrackPlane::expected_hit_fraction(double window_s, std::int64_t now_us) const {
    const double expected = static_cast<double>(accumulator_cells()) * std::max(center_.magnitude(), cfg_.v_floor) * window_s;
    if (!(expected > 0.0)) return 0.0;
    const auto from = now_us - static_cast<std::int64_t>(std::llround(window_s * 1e6));
    const auto first = std::upper_bound(hit_times_.begin(), hit_times_.end(), from);
    const auto observed = std::distance(first, std::upper_bound(first, hit_times_.end(), now_us));
    return static_cast<double>(observed) / expected;
}

Footprint TrackPlane::footprint(std::int64_t at_us) const {
    Footprint fp;
    fp.flow = center_;
    const double dt = to_seconds(at_us - t_ref_);
    auto to_frame = [&](Cell c) {
        return Cell{round_coordinate(c.x + center_.v_u * dt), round_coordinate(c.y + center_.v_v * dt)};
    };
    for (const auto& [cell, _] : center_grid().cells()) fp.cells.push_back(to_frame(cell));
    for (const auto& [cell, _] : evolved_) fp.cells.push_back(to_frame(cell));
    std::sort(fp.cells.begin(), fp.cells.end());
    fp.cells.erase(std::unique(fp.cells.begin(), fp.cells.end()), fp.cells.end());
    return fp;
}

void TrackPlane::absorb(const TrackPlane& other) {
    const double na = static_cast<double>(events_.size());
    const double nb = static_cast<double>(other.events_.size());
    FlowVector flow = center_;
    if (na + nb > 0.0) flow = (1.0 / (na + nb)) * (na * center_ + nb * other.center_);

    // Carry both planes' promoted cells over in frame coordinates.
    std::vector<MissLog> promoted;
    for (const auto& [cell, t] : evolved_) promoted.push_back({t, translate(cell, t, center_, t_ref_, {}, 0)});
    for (const auto& [cell, t] : other.evolved_) {
        promoted.push_back({t, translate(cell, t, other.center_, other.t_ref_, {}, 0)});
    }

    std::deque<Event> merged;
    std::merge(events_.begin(), events_.end(), other.events_.begin(), other.events_.end(), std::back_inserter(merged),
               [](const Event& x, const Event& y) { return x.t < y.t; });
    events_ = std::move(merged);
    std::deque<std::int64_t> times;
    std::merge(hit_times_.begin(), hit_times_.end(), other.hit_times_.begin(), other.hit_times_.end(),
               std::back_inserter(times));
    hit_times_ = std::move(times);
    birth_ = std::min(birth_, other.birth_);
    last_activity_ = std::max(last_activity_, other.last_activity_);

    evolved_.clear();
    evolved_log_.clear();
    rebuild(flow, std::min(h_, other.h_));

    std::sort(promoted.begin(), promoted.end(),
              [](const MissLog& x, const MissLog& y) { return std::tie(x.t, x.cell) < std::tie(y.t, y.cell); });
    for (const MissLog& ml : promoted) {
        const Cell c = translate(ml.cell, ml.t, {}, 0, center_, t_ref_);
        if (center_grid().occupied(c) || evolved_.contains(c)) continue;
        evolved_[c] = ml.t;
        evolved_log_.push_back({ml.t, c});
    }
}

} // namespace sofas
