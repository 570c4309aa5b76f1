#pragma once

#include "sofas/event.hpp"
#include "sofas/flow.hpp"
#include "sofas/projection.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace sofas {

struct FlowPlaneConfig {
    int n = 20;                          // grid side
    double range = std::numbers::pi;     // tilt range spanned by the top-level grid, radians
    int p_stable = 500;                  // ingests the argmax must persist
    double q = 9.0;                      // range divisor per refinement level
    int depth_max = 3;                   // refinement levels below the top-level grid
    double w = 2.0;                      // association threshold factor
    double v_ref = 100.0;                // px/s at 45 degrees tilt
    double noise_lifespan = 0.5;         // seconds
    double motion_ratio = 1.25;          // peak metric over the zero-flow metric needed to count as stable
    double min_travel_px = 5.0;          // seeds spanning less travel are held back, unless their span nears noise_lifespan
    int candidates = 1;                  // level-0 local maxima refined at emission; 1 = argmax only
    double candidate_floor = 0.5;        // candidates need this share of the global maximum

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Cell-centered flow sample: tilts range*((i+0.5)/n - 0.5) on each axis applied to `center`.
FlowVector index_to_flow(int i, int j, int n, double range, FlowVector center, double v_ref);

/// n x n projections of a shared event set, one per perturbed flow.
class MetricArray {
public:
    struct Peak {
        int i = 0;
        int j = 0;
        std::int64_t metric = 0;

        bool same_cell(const Peak& o) const noexcept { return i == o.i && j == o.j; }
    };

    MetricArray(int n, double range, FlowVector center, double v_ref);

    int side() const noexcept { return n_; }
    double range() const noexcept { return range_; }
    const FlowVector& center() const noexcept { return center_; }
    /// Distance in flow between neighbouring cells nearest the center, per axis.
    FlowVector step() const;

    FlowVector flow_at(int i, int j) const { return grid(i, j).flow(); }
    const AccumulatorGrid& grid(int i, int j) const { return grids_[index(i, j)]; }
    std::int64_t metric(int i, int j) const { return grid(i, j).metric(); }

    void add(const Event& e);
    void remove(const Event& e);
    void clear();

    /// Global maximum; ties go to the lowest (j, i).
    Peak argmax() const;

    /// Maximum cell nearest the centroid of all cells sharing the maximum metric; ties go to
    /// the lowest (j, i). Differs from argmax() only when the maximum is a plateau.
    Peak plateau_center() const;

    /// Cells whose metric is >= every 8-neighbour and > floor_fraction * global max.
    std::vector<Peak> local_maxima(double floor_fraction) const;

    /// `i,j,v_u,v_v,m` rows.
    void dump_csv(std::ostream& out) const;

private:
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }

    int n_;
    double range_;
    FlowVector center_;
    std::vector<AccumulatorGrid> grids_;
};

/// Events extracted from a winning grid.
struct AssociationResult {
    std::vector<std::size_t> indices; // positions in the event sequence the extraction ran on
    std::vector<Event> events;
    FlowVector flow;
    std::vector<Cell> footprint; // sorted
};

/// mu and sigma of |f| over the grid's nonzero cells.
struct CellStatistics {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t nonzero = 0;
};
CellStatistics cell_statistics(const AccumulatorGrid& grid);

/// Seeds are cells with |f| > mu + w*sigma, or the cells holding the maximum |f| when none
/// passes; the footprint is their 8-connected closure over occupied cells; associated events are
/// those of `held` that project into the footprint. Returns nullopt when every cell is zero.
std::optional<AssociationResult> extract_associated(const AccumulatorGrid& grid, std::span<const Event> held,
                                                    double w);

/// Child array at `parent_level + 1`: range / q^(parent_level+1) around the association's flow,
/// holding only the associated events.
MetricArray refine(const AssociationResult& assoc, const FlowPlaneConfig& cfg, int parent_level);

/// What the Flow Plane hands to a new Track Plane.
struct TrackPlaneSeed {
    std::vector<Event> events;
    FlowVector flow;
    std::vector<Cell> footprint;
};

/// Initialisation stage: discovers one structure at a time from events no Track Plane claimed.
class FlowPlane {
public:
    explicit FlowPlane(FlowPlaneConfig cfg = {});

    const FlowPlaneConfig& config() const noexcept { return cfg_; }
    const MetricArray& metric_array() const noexcept { return top_; }
    const std::deque<Event>& held() const noexcept { return held_; }
    std::size_t stable_streak() const noexcept { return streak_; }

    /// Projects the event into every top-level grid and updates the argmax streak.
    void ingest(const Event& e);

    /// Metric of the held events projected with zero flow, i.e. without motion compensation.
    std::int64_t still_metric() const noexcept { return still_.metric(); }

    /// True iff the argmax cell has not changed over the last p_stable ingests. Ingests where the
    /// peak metric does not exceed motion_ratio times still_metric() restart the count: until then
    /// the events do not show enough motion to tell flows apart.
    bool stability_check() const noexcept { return streak_ >= static_cast<std::size_t>(cfg_.p_stable); }

    void reset_stability() noexcept;

    /// Retracts held events older than noise_lifespan relative to `now_us`.
    std::size_t flush_noise(std::int64_t now_us);

    /// Association over the top-level argmax grid.
    std::optional<AssociationResult> extract_associated() const;

    /// Refines the strongest level-0 local maxima (see FlowPlaneConfig::candidates) and returns the
    /// refined association whose flow gives the crispest projection of all held events. A long
    /// straight edge leaves a ridge of near-equal metrics along the edge; a coarse sample on the
    /// ridge can beat the one nearest the true flow, and refinement cannot leave its own range.
    std::optional<AssociationResult> best_candidate() const;

    /// Runs the refinement levels on an association and returns the final one.
    AssociationResult refine_fully(AssociationResult assoc) const;

    /// Returns the seed and rebuilds the plane from the events that were not associated.
    TrackPlaneSeed emit_track_plane(const AssociationResult& assoc);

    /// flush + ingest + (when stable) association, refinement and emission.
    std::optional<TrackPlaneSeed> push(const Event& e);

    std::size_t detections() const noexcept { return detections_; }
    std::size_t failed_associations() const noexcept { return failed_; }

private:
    FlowPlaneConfig cfg_;
    MetricArray top_;
    AccumulatorGrid still_;
    std::deque<Event> held_;
    std::optional<MetricArray::Peak> last_peak_;
    std::size_t streak_ = 0;
    std::size_t detections_ = 0;
    std::size_t failed_ = 0;
};

} // namespace sofas
