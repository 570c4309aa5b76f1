#pragma once

#include "sofas/event.hpp"
#include "sofas/flow_plane.hpp"
#include "sofas/track_plane.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sofas {

struct EngineConfig {
    FlowPlaneConfig flow_plane;
    TrackPlaneConfig track_plane;
    double prune_fraction = 0.1;     // minimum expected-hit fraction
    double merge_flow_tol = 0.15;    // relative flow difference
    double merge_overlap_tol = 0.25; // |A ∩ B| / min(|A|, |B|)
    int maintenance_period = 1000;   // events between merge/prune sweeps

    void validate() const;
};

/// An event plus the segment that claimed it. Both `segment` and `flow` are set or neither is.
struct FlowLabeledEvent {
    Event event;
    std::optional<std::int32_t> segment;
    std::optional<FlowVector> flow;

    bool labeled() const noexcept { return segment.has_value(); }
    bool operator==(const FlowLabeledEvent&) const = default;
};

struct PlaneRecord {
    std::int32_t id = 0;
    std::int64_t t = 0;
    FlowVector flow;
    double h = 0.0;
    std::size_t cells = 0;
    std::size_t event_count = 0;
};

struct EngineStats {
    std::uint64_t processed = 0;
    std::uint64_t labeled = 0;
    std::uint64_t planes_created = 0;
    std::uint64_t planes_merged = 0;
    std::uint64_t planes_pruned = 0;
    std::uint64_t maintenance_sweeps = 0;
    std::vector<PlaneRecord> history; // one record per live plane per maintenance sweep
};

struct PlaneSnapshot {
    std::int32_t id = 0;
    FlowVector flow;
    std::vector<Cell> footprint;
    std::size_t event_count = 0;
    double h = 0.0;
};

class Engine {
public:
    explicit Engine(EngineConfig cfg = {});

    const EngineConfig& config() const noexcept { return cfg_; }
    const EngineStats& stats() const noexcept { return stats_; }
    const FlowPlane& flow_plane() const noexcept { return flow_plane_; }
    const std::vector<std::unique_ptr<TrackPlane>>& planes() const noexcept { return planes_; }

    /// Labels one event. Throws OrderingError if `e` is older than the previous event.
    FlowLabeledEvent process(const Event& e);
    std::vector<FlowLabeledEvent> process_all(std::span<const Event> events);

    /// Merges plane pairs with similar flow and overlapping footprints; returns merges performed.
    std::size_t try_merge_all();

    /// Removes planes older than one lifetime whose expected-hit fraction fell below prune_fraction.
    std::size_t prune(std::int64_t now_us);

    /// Expiry, merge and prune, as run every maintenance_period events.
    void maintenance(std::int64_t now_us);

    /// Live planes sorted by id.
    std::vector<PlaneSnapshot> snapshot(std::int64_t now_us) const;

    std::int64_t now() const noexcept { return last_t_.value_or(0); }

private:
    bool mergeable(const TrackPlane& a, const TrackPlane& b, std::int64_t now_us) const;
    void record_history(std::int64_t now_us);

    EngineConfig cfg_;
    FlowPlane flow_plane_;
    std::vector<std::unique_ptr<TrackPlane>> planes_; // creation order, so oldest first
    std::int32_t next_id_ = 0;
    std::optional<std::int64_t> last_t_;
    std::uint64_t since_maintenance_ = 0;
    EngineStats stats_;
};

/// One line of a flow file: any estimator's output. Unlike FlowLabeledEvent, a flow may come
/// without a segment (the LK baseline never segments).
struct FlowRecord {
    Event event;
    std::int32_t segment = -1;
    std::optional<FlowVector> flow;

    bool operator==(const FlowRecord&) const = default;
};

FlowRecord to_record(const FlowLabeledEvent& le);

/// `t u v s segment v_u v_v` after a `geometry W H` line. A missing flow is written `nan nan`.
void save_flow_records(std::ostream& out, std::span<const FlowRecord> records, const SensorGeometry& geometry);
void save_flow_records_file(const std::string& path, std::span<const FlowRecord> records,
                            const SensorGeometry& geometry);
std::vector<FlowRecord> load_flow_records(std::istream& in, SensorGeometry* geometry = nullptr);
std::vector<FlowRecord> load_flow_records_file(const std::string& path, SensorGeometry* geometry = nullptr);

/// Flow-file layout with segment -1 and `nan nan` for unlabeled events. Loading rejects records
/// whose segment and flow disagree.
void save_labeled(std::ostream& out, std::span<const FlowLabeledEvent> events, const SensorGeometry& geometry);
void save_labeled_file(const std::string& path, std::span<const FlowLabeledEvent> events,
                       const SensorGeometry& geometry);
std::vector<FlowLabeledEvent> load_labeled(std::istream& in, SensorGeometry* geometry = nullptr);
std::vector<FlowLabeledEvent> load_labeled_file(const std::string& path, SensorGeometry* geometry = nullptr);

/// `id,t,v_u,v_v,h,cells,event_count` with a header line.
void save_history_csv(std::ostream& out, std::span<const PlaneRecord> records);
/// key=value lines.
void save_stats(std::ostream& out, const EngineStats& stats);

} // namespace sofas
