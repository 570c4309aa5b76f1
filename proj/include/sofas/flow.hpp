#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sofas {

/// Image-plane velocity in pixels/second. A flow (v_u, v_v) is the projection direction
/// (v_u, v_v, 1) through (u, v, t) space.
struct FlowVector {
    double v_u = 0.0;
    double v_v = 0.0;

    double magnitude() const noexcept { return std::hypot(v_u, v_v); }
    bool finite() const noexcept { return std::isfinite(v_u) && std::isfinite(v_v); }

    friend FlowVector operator+(FlowVector a, FlowVector b) noexcept { return {a.v_u + b.v_u, a.v_v + b.v_v}; }
    friend FlowVector operator-(FlowVector a, FlowVector b) noexcept { return {a.v_u - b.v_u, a.v_v - b.v_v}; }
    friend FlowVector operator*(double k, FlowVector a) noexcept { return {k * a.v_u, k * a.v_v}; }
    bool operator==(const FlowVector&) const = default;
};

constexpr double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

// Tilt angles of the projection normal away from the time axis, one per image axis.
// A tilt of theta corresponds to a velocity of v_ref * tan(theta). Tilts are kept just inside
// +-pi/2, where the velocity would be infinite.
inline constexpr double kMaxTilt = std::numbers::pi / 2 - 1e-3;

inline double tilt_of(double velocity, double v_ref) noexcept { return std::atan(velocity / v_ref); }

inline double velocity_of(double tilt, double v_ref) noexcept {
    return v_ref * std::tan(std::clamp(tilt, -kMaxTilt, kMaxTilt));
}

/// Tilts `center` by (d_u, d_v) radians on each axis. A zero tilt returns `center` unchanged.
inline FlowVector tilt_flow(FlowVector center, double d_u, double d_v, double v_ref) noexcept {
    FlowVector out = center;
    if (d_u != 0.0) out.v_u = velocity_of(tilt_of(center.v_u, v_ref) + d_u, v_ref);
    if (d_v != 0.0) out.v_v = velocity_of(tilt_of(center.v_v, v_ref) + d_v, v_ref);
    return out;
}

} // namespace sofas
