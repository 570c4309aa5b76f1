#pragma once

#include "sofas/event.hpp"
#include "sofas/flow.hpp"
#include "sofas/flow_plane.hpp"
#include "sofas/projection.hpp"

#include <absl/container/flat_hash_map.h>

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace sofas {

struct TrackPlaneConfig {
    int m_grid = 3;                       // side of the projection array, odd
    double h0 = deg_to_rad(0.02);         // initial perturbation, radians
    double hit_fraction = 0.10;           // recenter when hits exceed this share of |A|
    int evolve_threshold = 3;             // misses that promote a cell into A
    double lifetime_px = 3.0;             // event lifetime in pixels of travel
    double h_min = deg_to_rad(0.001);
    double h_max = deg_to_rad(5.0);
    double v_floor = 1.0;                 // px/s; caps the lifetime at lifetime_px seconds
    double win_margin = 1.0;              // lead over the center, in sqrt(hits), a neighbour needs to win

    void validate() const;
};

struct MatchResult {
    bool hit = false;
    Cell cell;             // center-projection cell of the event
    bool promoted = false; // a miss that turned its cell into an accumulator cell
};

/// Accumulator cells in frame coordinates at a reference time.
struct Footprint {
    std::vector<Cell> cells; // sorted
    FlowVector flow;
};

/// Tracks one structure with an m x m array of projections around its current flow estimate.
///
/// The accumulator-cell set A is the occupied-cell set of the center grid plus cells promoted by
/// repeated misses that have not received an event yet. A projection scores a hit whenever an
/// offered event lands on one of its occupied cells (A for the center).
class TrackPlane {
public:
    TrackPlane(int id, const TrackPlaneSeed& seed, const TrackPlaneConfig& cfg, double v_ref, std::int64_t now_us);

    int id() const noexcept { return id_; }
    const FlowVector& flow() const noexcept { return center_; }
    double h() const noexcept { return h_; }
    const TrackPlaneConfig& config() const noexcept { return cfg_; }

    std::size_t accumulator_cells() const noexcept { return center_grid().size() + evolved_.size(); }
    bool in_accumulator(Cell c) const noexcept { return center_grid().occupied(c) || evolved_.contains(c); }

    const std::deque<Event>& events() const noexcept { return events_; }
    std::size_t event_count() const noexcept { return events_.size(); }
    std::int64_t birth() const noexcept { return birth_; }
    std::int64_t last_activity() const noexcept { return last_activity_; }
    std::size_t recenters() const noexcept { return recenters_; }

    int side() const noexcept { return cfg_.m_grid; }
    const AccumulatorGrid& grid(int a, int b) const { return grids_.at(static_cast<std::size_t>(b) * cfg_.m_grid + a); }
    const AccumulatorGrid& center_grid() const noexcept { return grids_[center_index()]; }
    std::span<const std::int64_t> hit_counts() const noexcept { return hits_; }

    /// Projects `e` with the current estimate. On a hit the event joins every grid; on a miss
    /// the cell's miss count grows and the cell is promoted into A at evolve_threshold.
    MatchResult try_match(const Event& e);

    /// Recenters once some projection has more than hit_fraction * |A| hits. A neighbour wins when
    /// it leads the center by more than win_margin * sqrt(its hits); it becomes the new center and
    /// h doubles. Otherwise the center wins and h halves. Returns true when flow or h changed.
    bool maybe_recenter();

    /// Halves h when the center won, doubles it otherwise, clamped to [h_min, h_max].
    double adapt_perturbation(bool winner_was_center);

    /// Time for the structure to cross lifetime_px pixels at the current speed, seconds.
    double lifetime() const noexcept;

    /// Retracts events older than lifetime(); returns how many were removed.
    std::size_t expire_events(std::int64_t now_us);

    /// Observed hits in (now - window, now] over the expected |A| * |v| * window.
    double expected_hit_fraction(double window_s, std::int64_t now_us) const;

    Footprint footprint(std::int64_t at_us) const;

    /// Takes over another plane's events; the flow becomes the event-count-weighted mean.
    void absorb(const TrackPlane& other);

private:
    std::size_t center_index() const noexcept {
        return static_cast<std::size_t>(cfg_.m_grid / 2) * cfg_.m_grid + cfg_.m_grid / 2;
    }
    FlowVector neighbour_flow(int a, int b) const;
    Cell translate(Cell c, std::int64_t at_us, FlowVector from_flow, std::int64_t from_ref, FlowVector to_flow,
                   std::int64_t to_ref) const;
    void rebuild(FlowVector center, double h);
    void rebuild_neighbours(double h);
    void reanchor(std::int64_t t_ref);

    struct MissLog {
        std::int64_t t;
        Cell cell;
    };

    int id_;
    TrackPlaneConfig cfg_;
    double v_ref_;
    FlowVector center_;
    double h_;
    std::int64_t t_ref_ = 0; // shared by all grids; kept within about one lifetime of the newest event
    std::vector<AccumulatorGrid> grids_;
    std::vector<std::int64_t> hits_;
    std::deque<Event> events_;
    absl::flat_hash_map<Cell, int> misses_;
    std::deque<MissLog> miss_log_;
    absl::flat_hash_map<Cell, std::int64_t> evolved_;
    std::deque<MissLog> evolved_log_;
    std::deque<std::int64_t> hit_times_;
    std::int64_t birth_;
    std::int64_t last_activity_;
    std::size_t recenters_ = 0;
};

} // namespace sofas
