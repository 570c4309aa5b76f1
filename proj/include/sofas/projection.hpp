#pragma once

#include "sofas/event.hpp"
#include "sofas/flow.hpp"

#include <absl/container/flat_hash_map.h>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace sofas {

/// A cell of the projection plane. Not clipped to the sensor.
struct Cell {
    std::int32_t x = 0;
    std::int32_t y = 0;

    bool operator==(const Cell&) const = default;
    auto operator<=>(const Cell&) const = default;

    template <typename H>
    friend H AbslHashValue(H h, const Cell& c) {
        return H::combine(std::move(h), c.x, c.y);
    }
};

/// Round half away from zero, the single rounding rule for all projected coordinates.
inline std::int32_t round_coordinate(double x) noexcept { return static_cast<std::int32_t>(std::lround(x)); }

/// Projects `e` along `flow`, collapsing time: (u - v_u*dt, v - v_v*dt) with dt = t - t_ref in seconds.
inline Cell project_event(const Event& e, const FlowVector& flow, std::int64_t t_ref_us) noexcept {
    const double dt = to_seconds(e.t - t_ref_us);
    return {round_coordinate(e.u - flow.v_u * dt), round_coordinate(e.v - flow.v_v * dt)};
}

/// Accumulation image f(x, y) of one projection plus its contrast metric m = sum f^2.
///
/// The metric is maintained incrementally. Each cell also counts the events it holds, so a
/// cell whose polarities cancel to f = 0 is still occupied and can be retracted from.
/// The reference time is taken from the first event accumulated and kept until clear().
class AccumulatorGrid {
public:
    struct CellState {
        std::int32_t sum = 0;
        std::int32_t count = 0;
    };
    using Map = absl::flat_hash_map<Cell, CellState>;

    AccumulatorGrid() = default;
    explicit AccumulatorGrid(FlowVector flow, std::optional<std::int64_t> t_ref_us = std::nullopt)
        : flow_(flow), t_ref_(t_ref_us) {}

    const FlowVector& flow() const noexcept { return flow_; }
    std::optional<std::int64_t> t_ref() const noexcept { return t_ref_; }

    /// Cell `e` falls into. Before the first event the event itself would set t_ref.
    Cell cell_of(const Event& e) const noexcept { return project_event(e, flow_, t_ref_.value_or(e.t)); }

    /// Adds e.s at the event's cell; returns the metric delta 2*c*s + s^2.
    std::int64_t accumulate(const Event& e);

    /// Exact inverse of accumulate(). Throws ConsistencyError if the cell holds no events.
    std::int64_t retract(const Event& e);

    std::int64_t metric() const noexcept { return metric_; }
    std::int32_t value(Cell c) const noexcept;
    std::int32_t count(Cell c) const noexcept;
    bool occupied(Cell c) const noexcept { return cells_.contains(c); }

    /// Number of occupied cells.
    std::size_t size() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }
    std::int64_t event_count() const noexcept { return events_; }
    const Map& cells() const noexcept { return cells_; }

    /// Drops every cell and forgets t_ref; the flow is kept.
    void clear() noexcept;

    /// Writes `x,y,f` lines sorted by (y, x).
    void dump_csv(std::ostream& out) const;

private:
    std::int64_t add(Cell c, int s);

    FlowVector flow_;
    std::optional<std::int64_t> t_ref_;
    Map cells_;
    std::int64_t metric_ = 0;
    std::int64_t events_ = 0;
};

/// Rebuilds f from scratch and returns sum f^2. t_ref defaults to the first event's timestamp.
std::int64_t metric_bruteforce(std::span<const Event> events, const FlowVector& flow,
                               std::optional<std::int64_t> t_ref_us = std::nullopt);

} // namespace sofas
