#pragma once

#include "sofas/engine.hpp"
#include "sofas/event.hpp"
#include "sofas/flow.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace sofas {

/// Most recent timestamp per pixel and polarity.
class TimestampSurface {
public:
    static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min();

    explicit TimestampSurface(SensorGeometry geometry = {});

    const SensorGeometry& geometry() const noexcept { return geometry_; }

    /// Throws GeometryError for an out-of-bounds pixel or bad polarity.
    void update(const Event& e);

    /// kNever until the pixel has fired with that polarity.
    std::int64_t at(std::int32_t u, std::int32_t v, int s) const;
    bool touched(std::int32_t u, std::int32_t v, int s) const { return at(u, v, s) != kNever; }

    /// Number of (pixel, polarity) slots that have fired.
    std::size_t touched_count() const noexcept { return touched_; }

    void set(std::int32_t u, std::int32_t v, int s, std::int64_t t_us);

private:
    std::size_t index(std::int32_t u, std::int32_t v, int s) const;

    SensorGeometry geometry_;
    std::vector<std::int64_t> t_;
    std::size_t touched_ = 0;
};

struct LKConfig {
    int window = 3;                // half-width: 3 gives the 7x7 window
    int min_valid_neighbors = 10;  // pixels with a usable gradient inside the window
    double eigen_floor = 1e-12;    // s^2/px^2; below this on the larger eigenvalue nothing is solvable
    double aperture_ratio = 1e-2;  // smaller/larger eigenvalue below this => normal flow only
    double max_age = 0.1;          // seconds; older neighbours are ignored

    void validate() const;
};

enum class LKStatus {
    full,        // both eigenvalues usable
    normal_only, // rank-deficient window (a straight edge): the minimum-norm, i.e. normal, flow
    unsolvable,
};

struct LKResult {
    LKStatus status = LKStatus::unsolvable;
    FlowVector flow; // meaningless when unsolvable
    int valid = 0;   // gradient samples used

    bool solved() const noexcept { return status != LKStatus::unsolvable; }
};

/// Fits t(x, y) over the window around (u, v) on polarity `s` by its gradients g and solves
/// sum(g g^T) v = sum(g), i.e. g . v = 1 for each sample, in least squares.
LKResult lk_flow(const TimestampSurface& surface, const Event& e, const LKConfig& cfg = {});

/// Streams the events through a surface, estimating each event's flow right after recording it.
/// Unsolvable events get no flow. Segments are always -1.
std::vector<FlowRecord> lk_run(const EventStream& stream, const LKConfig& cfg = {});

} // namespace sofas
