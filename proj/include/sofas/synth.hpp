#pragma once

#include "sofas/event.hpp"
#include "sofas/flow.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sofas {

/// A point on a shape edge, relative to the shape center, with the edge's outward normal.
struct ContourPoint {
    double u = 0.0;
    double v = 0.0;
    double n_u = 0.0;
    double n_v = 0.0;
};

/// Edge samples of a shape at <= 0.5 px spacing.
///
/// Polarity is not stored per point: it follows from the outward normal and the current
/// motion (see polarity_for), so the leading edge fires +1 and the trailing edge -1.
struct ShapeContour {
    std::vector<ContourPoint> points;

    double extent_u() const;
    double extent_v() const;
    /// Largest distance between any two points.
    double max_extent() const;
};

struct Circle {
    double radius = 0.0;
};
/// Regular hexagon; `width` is the vertex-to-vertex extent.
struct Hexagon {
    double width = 0.0;
};
struct Rectangle {
    double width = 0.0;
    double height = 0.0;
};
/// Vertical bar: `length` along v, `thickness` along u.
struct Bar {
    double length = 0.0;
    double thickness = 0.0;
};
/// Simple polygon, vertices in order (either orientation) relative to the shape center. May be
/// concave.
struct Polygon {
    std::vector<std::array<double, 2>> vertices;
};
using ShapeSpec = std::variant<Circle, Hexagon, Rectangle, Bar, Polygon>;

inline constexpr double kContourSpacing = 0.5;

/// Throws InvalidArgument for non-positive dimensions or a polygon with fewer than 3 vertices or
/// zero area, GeometryError if the shape's bounding box is not smaller than the sensor.
ShapeContour build_contour(const ShapeSpec& shape, const SensorGeometry& geometry = {});

/// Rotates points and normals by `angle` radians about the shape center.
ShapeContour rotate_contour(const ShapeContour& contour, double angle);

/// +1 when the point's edge leads the motion, -1 when it trails, 0 when the edge is parallel
/// to the motion (no intensity change, no event).
int polarity_for(double n_u, double n_v, FlowVector point_velocity) noexcept;

struct ConstantMotion {
    FlowVector velocity;
};

/// Lossless horizontal pendulum swing: v(t) = v_max * cos(2 pi t / T + phase).
struct PendulumMotion {
    double length_m = 0.72;
    double theta_max = deg_to_rad(23.0);
    double g = 9.82;
    double pixels_per_meter = 0.0;
    double phase = 0.0;

    /// sqrt(2 g L (1 - cos theta_max)), m/s.
    double v_max() const;
    /// 2 pi sqrt(L / g), seconds.
    double period() const;
    /// Peak image-plane speed, px/s.
    double peak_flow() const { return v_max() * pixels_per_meter; }
    /// Horizontal swing amplitude in pixels.
    double amplitude_px() const;
};

/// Pendulum whose pixels_per_meter is chosen so the peak flow equals `peak_flow` px/s.
PendulumMotion make_pendulum(double length_m, double theta_max, double g, double peak_flow = 200.0);

/// Rigid rotation about a fixed image point.
struct RotationMotion {
    double center_u = 0.0;
    double center_v = 0.0;
    double omega = 0.0; // rad/s
};

using MotionModel = std::variant<ConstantMotion, PendulumMotion, RotationMotion>;

/// Throws InvalidArgument on L <= 0, theta_max outside (0, pi/2), pixels_per_meter <= 0, omega == 0.
void validate_motion(const MotionModel& model);

/// Flow of a translating model at time t. Rotation has no single flow; this returns its value at
/// the rotation center, i.e. zero. Use the positional overload for rotation.
FlowVector gt_flow_at(const MotionModel& model, double t);

/// Flow of the model at image point (u, v) and time t.
FlowVector gt_flow_at(const MotionModel& model, double t, double u, double v);

/// A contour placed in the frame (origin = shape center at t = 0) with its motion.
struct SceneObject {
    ShapeContour contour;
    double origin_u = 0.0;
    double origin_v = 0.0;
    MotionModel motion;
};

/// Per-structure motion models; structure ids index `structures`.
struct GroundTruth {
    std::vector<MotionModel> structures;

    std::size_t structure_count() const noexcept { return structures.size(); }
    FlowVector flow_at(std::size_t structure, double t) const { return gt_flow_at(structures.at(structure), t); }
};

/// Sidecar ground-truth line for one event: `t v_u v_v structure_id`. Noise has structure -1
/// and a NaN flow.
struct TruthRecord {
    std::int64_t t = 0;
    FlowVector flow;
    std::int32_t structure = -1;
};

struct SynthOptions {
    double noise_rate = 0.0;        // background events/s over the whole array
    std::int64_t jitter_us = 0;     // uniform +-jitter on every structure event
    std::int64_t refractory_us = 0; // per-pixel dead time; 0 drops only exact duplicates
    std::uint64_t seed = 1;
};

struct SyntheticRecording {
    EventStream stream;
    GroundTruth truth;
    std::vector<TruthRecord> per_event; // parallel to stream.events
    std::size_t clipped = 0;            // structure events that fell outside the sensor
    std::vector<std::string> warnings;
};

/// Emits an event each time a contour point crosses an integer pixel boundary, at the crossing
/// time. Events are sorted by (t, u, v, s) and all timestamps lie in [0, duration].
SyntheticRecording generate_events(const SceneObject& object, double duration, const SensorGeometry& geometry,
                                   const SynthOptions& options = {});

/// Multi-structure scene: the merged, time-sorted union of each object's events plus noise.
SyntheticRecording generate_scene(std::span<const SceneObject> objects, double duration,
                                  const SensorGeometry& geometry, const SynthOptions& options = {});

void save_truth(std::ostream& out, std::span<const TruthRecord> records);
void save_truth_file(const std::string& path, std::span<const TruthRecord> records);
std::vector<TruthRecord> load_truth(std::istream& in);
std::vector<TruthRecord> load_truth_file(const std::string& path);

/// A ready-to-generate scene.
struct Scene {
    std::string name;
    std::vector<SceneObject> objects;
    double duration = 0.0;
};

/// A shape translating at `velocity` for `duration`, centered on the frame over its path.
Scene shape_scene(const ShapeSpec& shape, FlowVector velocity, double duration, const SensorGeometry& geometry = {});
/// 65 px hexagon travelling `travel_px` pixels at `velocity`.
Scene hexagon_scene(FlowVector velocity, double travel_px = 140.0, const SensorGeometry& geometry = {});
/// 120 x 20 px rectangle tilted 45 degrees, moving horizontally: every edge is oblique to the motion.
Scene rectangle_scene(double speed = 58.0, double duration = 2.0, const SensorGeometry& geometry = {});
/// Long thin bar tilted `tilt` radians from vertical, moving horizontally.
Scene long_bar_scene(double speed = 58.0, double tilt = deg_to_rad(50.0), double duration = 1.5,
                     const SensorGeometry& geometry = {});
/// Two vertical bars in separate rows moving at (+speed, 0) and (-speed, 0).
Scene two_bar_scene(double speed = 58.0, double duration = 2.0, const SensorGeometry& geometry = {});
/// A bar swinging horizontally as a pendulum, peak flow `peak_flow` px/s.
Scene pendulum_scene(double periods = 1.5, double peak_flow = 200.0, const SensorGeometry& geometry = {});
/// An 80 x 60 fork entering from beyond the left border at `speed` px/s, prongs first: the parts
/// that become visible first are disconnected.
Scene entry_scene(double speed = 58.0, double duration = 3.5, const SensorGeometry& geometry = {});
/// Four vertical bars at distinct speeds, like a camera panning past objects at different depths.
Scene parallax_scene(double duration = 1.2, const SensorGeometry& geometry = {});
/// A bar spanning most of the frame rotating about the frame center at `revs_per_s`.
Scene rotating_bar_scene(double revs_per_s = 1.0, double duration = 1.0, const SensorGeometry& geometry = {});

/// Generates a preset scene.
SyntheticRecording generate(const Scene& scene, const SensorGeometry& geometry = {}, const SynthOptions& options = {});

} // namespace sofas
