#include "sofas/synth.hpp"

#include "sofas/error.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <tuple>

namespace sofas {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vertex {
    double u;
    double v;
};

// Samples a closed polygon edge by edge; each vertex belongs to the edge that starts at it. The
// outward side comes from the signed area, so concave outlines get correct normals too.
ShapeContour sample_polygon(const std::vector<Vertex>& vertices) {
    ShapeContour contour;
    double area2 = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const Vertex& a = vertices[k];
        const Vertex& b = vertices[(k + 1) % vertices.size()];
        area2 += a.u * b.v - b.u * a.v;
    }
    const double side = area2 > 0.0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const Vertex a = vertices[k];
        const Vertex b = vertices[(k + 1) % vertices.size()];
        const double du = b.u - a.u;
        const double dv = b.v - a.v;
        const double len = std::hypot(du, dv);
        if (!(len > 0.0)) continue;
        const double n_u = side * dv / len;
        const double n_v = -side * du / len;
        const int steps = std::max(1, static_cast<int>(std::ceil(len / kContourSpacing - 1e-9)));
        for (int i = 0; i < steps; ++i) {
            const double f = static_cast<double>(i) / steps;
            contour.points.push_back({a.u + f * du, a.v + f * dv, n_u, n_v});
        }
    }
    return contour;
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be positive");
}

} // namespace

double ShapeContour::extent_u() const {
    if (points.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                        [](const auto& a, const auto& b) { return a.u < b.u; });
    return hi->u - lo->u;
}

double ShapeContour::extent_v() const {
    if (points.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                        [](const auto& a, const auto& b) { return a.v < b.v; });
    return hi->v - lo->v;
}

double ShapeContour::max_extent() const {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            best = std::max(best, std::hypot(points[i].u - points[j].u, points[i].v - points[j].v));
        }
    }
    return best;
}

ShapeContour build_contour(const ShapeSpec& shape, const SensorGeometry& geometry) {
    ShapeContour contour = std::visit(
        [](const auto& s) -> ShapeContour {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                require_positive(s.radius, "circle radius");
                const int n = std::max(3, static_cast<int>(std::ceil(kTwoPi * s.radius / kContourSpacing - 1e-9)));
                ShapeContour c;
                c.points.reserve(n);
                for (int i = 0; i < n; ++i) {
                    const double a = kTwoPi * i / n;
                    c.points.push_back({s.radius * std::cos(a), s.radius * std::sin(a), std::cos(a), std::sin(a)});
                }
                return c;
            } else if constexpr (std::is_same_v<T, Hexagon>) {
                require_positive(s.width, "hexagon width");
                std::vector<Vertex> vs;
                for (int k = 0; k < 6; ++k) {
                    const double a = kTwoPi * k / 6.0;
                    vs.push_back({0.5 * s.width * std::cos(a), 0.5 * s.width * std::sin(a)});
                }
                return sample_polygon(vs);
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                require_positive(s.width, "rectangle width");
                require_positive(s.height, "rectangle height");
                const double w = 0.5 * s.width;
                const double h = 0.5 * s.height;
                return sample_polygon({{-w, -h}, {-w, h}, {w, h}, {w, -h}});
            } else if constexpr (std::is_same_v<T, Polygon>) {
                if (s.vertices.size() < 3) throw InvalidArgument("polygon needs at least 3 vertices");
                std::vector<Vertex> vs;
                double area2 = 0.0;
                for (std::size_t k = 0; k < s.vertices.size(); ++k) {
                    const auto& a = s.vertices[k];
                    const auto& b = s.vertices[(k + 1) % s.vertices.size()];
                    if (!std::isfinite(a[0]) || !std::isfinite(a[1])) throw InvalidArgument("polygon vertex not finite");
                    area2 += a[0] * b[1] - b[0] * a[1];
                    vs.push_back({a[0], a[1]});
                }
                if (!(std::abs(area2) > 0.0)) throw InvalidArgument("polygon has zero area");
                return sample_polygon(vs);
            } else {
                require_positive(s.length, "bar length");
                require_positive(s.thickness, "bar thickness");
                const double w = 0.5 * s.thickness;
                const double h = 0.5 * s.length;
                return sample_polygon({{-w, -h}, {-w, h}, {w, h}, {w, -h}});
            }
        },
        shape);
    if (contour.extent_u() >= geometry.width || contour.extent_v() >= geometry.height) {
        throw GeometryError("shape extent " + detail::format_double(contour.extent_u()) + "x" +
                            detail::format_double(contour.extent_v()) + " does not fit the " +
                            std::to_string(geometry.width) + "x" + std::to_string(geometry.height) + " sensor");
    }
    return contour;
}

ShapeContour rotate_contour(const ShapeContour& contour, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    ShapeContour out;
    out.points.reserve(contour.points.size());
    for (const auto& p : contour.points) {
        out.points.push_back({c * p.u - s * p.v, s * p.u + c * p.v, c * p.n_u - s * p.n_v, s * p.n_u + c * p.n_v});
    }
    return out;
}

int polarity_for(double n_u, double n_v, FlowVector velocity) noexcept {
    const double speed = velocity.magnitude();
    if (speed == 0.0) return 0;
    const double d = (n_u * velocity.v_u + n_v * velocity.v_v) / speed;
    if (d > 1e-6) return 1;
    if (d < -1e-6) return -1;
    return 0;
}

// ---------------------------------------------------------------------------------------------
// Motion models

double PendulumMotion::v_max() const { return std::sqrt(2.0 * g * length_m * (1.0 - std::cos(theta_max))); }

double PendulumMotion::period() const { return kTwoPi * std::sqrt(length_m / g); }

double PendulumMotion::amplitude_px() const { return pixels_per_meter * v_max() * period() / kTwoPi; }

PendulumMotion make_pendulum(double length_m, double theta_max, double g, double peak_flow) {
    PendulumMotion p;
    p.length_m = length_m;
    p.theta_max = theta_max;
    p.g = g;
    validate_motion(MotionModel{PendulumMotion{length_m, theta_max, g, 1.0, 0.0}});
    p.pixels_per_meter = peak_flow / p.v_max();
    return p;
}

void validate_motion(const MotionModel& model) {
    if (const auto* c = std::get_if<ConstantMotion>(&model)) {
        if (!c->velocity.finite()) throw InvalidArgument("constant velocity must be finite");
    } else if (const auto* p = std::get_if<PendulumMotion>(&model)) {
        if (!(p->length_m > 0.0)) throw InvalidArgument("pendulum length must be positive");
        if (!(p->theta_max > 0.0 && p->theta_max < std::numbers::pi / 2)) {
            throw InvalidArgument("pendulum theta_max must lie in (0, pi/2)");
        }
        if (!(p->g > 0.0)) throw InvalidArgument("gravity must be positive");
        if (!(p->pixels_per_meter > 0.0)) throw InvalidArgument("pixels_per_meter must be positive");
    } else if (const auto* r = std::get_if<RotationMotion>(&model)) {
        if (r->omega == 0.0 || !std::isfinite(r->omega)) throw InvalidArgument("rotation omega must be nonzero");
    }
}

FlowVector gt_flow_at(const MotionModel& model, double t) {
    if (const auto* r = std::get_if<RotationMotion>(&model)) return gt_flow_at(model, t, r->center_u, r->center_v);
    return gt_flow_at(model, t, 0.0, 0.0);
}

FlowVector gt_flow_at(const MotionModel& model, double t, double u, double v) {
    if (const auto* c = std::get_if<ConstantMotion>(&model)) return c->velocity;
    if (const auto* p = std::get_if<PendulumMotion>(&model)) {
        return {p->peak_flow() * std::cos(kTwoPi * t / p->period() + p->phase), 0.0};
    }
    const auto& r = std::get<RotationMotion>(model);
    return {-r.omega * (v - r.center_v), r.omega * (u - r.center_u)};
}

// ---------------------------------------------------------------------------------------------
// Event generation

namespace {

struct Point2 {
    double u;
    double v;
};

class Kinematics {
public:
    explicit Kinematics(const SceneObject& object) : object_(object) {}

    Point2 position(const ContourPoint& p, double t) const {
        const double u0 = object_.origin_u + p.u;
        const double v0 = object_.origin_v + p.v;
        if (const auto* c = std::get_if<ConstantMotion>(&object_.motion)) {
            return {u0 + c->velocity.v_u * t, v0 + c->velocity.v_v * t};
        }
        if (const auto* pm = std::get_if<PendulumMotion>(&object_.motion)) {
            return {u0 + pm->amplitude_px() * std::sin(kTwoPi * t / pm->period() + pm->phase), v0};
        }
        const auto& r = std::get<RotationMotion>(object_.motion);
        const double a = r.omega * t;
        const double du = u0 - r.center_u;
        const double dv = v0 - r.center_v;
        return {r.center_u + std::cos(a) * du - std::sin(a) * dv, r.center_v + std::sin(a) * du + std::cos(a) * dv};
    }

    Point2 normal(const ContourPoint& p, double t) const {
        if (const auto* r = std::get_if<RotationMotion>(&object_.motion)) {
            const double a = r->omega * t;
            return {std::cos(a) * p.n_u - std::sin(a) * p.n_v, std::sin(a) * p.n_u + std::cos(a) * p.n_v};
        }
        return {p.n_u, p.n_v};
    }

    FlowVector velocity(const ContourPoint& p, double t) const {
        const Point2 x = position(p, t);
        return gt_flow_at(object_.motion, t, x.u, x.v);
    }

    double max_speed() const {
        if (const auto* c = std::get_if<ConstantMotion>(&object_.motion)) return c->velocity.magnitude();
        if (const auto* pm = std::get_if<PendulumMotion>(&object_.motion)) return pm->peak_flow();
        const auto& r = std::get<RotationMotion>(object_.motion);
        double radius = 0.0;
        for (const auto& p : object_.contour.points) {
            radius = std::max(radius, std::hypot(object_.origin_u + p.u - r.center_u, object_.origin_v + p.v - r.center_v));
        }
        return std::abs(r.omega) * radius;
    }

private:
    const SceneObject& object_;
};

struct Generated {
    Event event;
    TruthRecord truth;
};

bool generated_less(const Generated& a, const Generated& b) {
    return std::tie(a.event.t, a.event.u, a.event.v, a.event.s, a.truth.structure) <
           std::tie(b.event.t, b.event.u, b.event.v, b.event.s, b.truth.structure);
}

// Finds t in [t0, t1] where coordinate(t) == boundary, assuming a single monotone crossing.
template <typename F>
double bisect_crossing(F coordinate, double t0, double t1, double boundary) {
    const bool rising = coordinate(t1) > coordinate(t0);
    for (int it = 0; it < 60 && t1 - t0 > 1e-9; ++it) {
        const double mid = 0.5 * (t0 + t1);
        const bool past = rising ? coordinate(mid) >= boundary : coordinate(mid) < boundary;
        if (past) {
            t1 = mid;
        } else {
            t0 = mid;
        }
    }
    return t1;
}

void emit_object_events(const SceneObject& object, std::int32_t structure, double duration,
                        std::vector<Generated>& out) {
    const Kinematics kin(object);
    const double speed = kin.max_speed();
    if (speed <= 0.0) return;
    const double dt = std::clamp(0.25 / speed, 1e-6, duration);
    const auto steps = static_cast<std::int64_t>(std::ceil(duration / dt));
    const bool translating = std::holds_alternative<ConstantMotion>(object.motion);

    auto emit = [&](const ContourPoint& p, double t, std::int32_t pu, std::int32_t pv) {
        const Point2 n = kin.normal(p, t);
        const FlowVector vel = kin.velocity(p, t);
        const int s = polarity_for(n.u, n.v, vel);
        if (s == 0) return;
        const auto t_us = std::clamp<std::int64_t>(std::llround(t * 1e6), 0, std::llround(duration * 1e6));
        out.push_back({Event{pu, pv, t_us, static_cast<std::int8_t>(s)}, TruthRecord{t_us, vel, structure}});
    };

    for (const ContourPoint& p : object.contour.points) {
        if (translating) {
            const auto& c = std::get<ConstantMotion>(object.motion);
            if (polarity_for(p.n_u, p.n_v, c.velocity) == 0) continue;
        }
        double t0 = 0.0;
        Point2 x0 = kin.position(p, t0);
        for (std::int64_t k = 1; k <= steps; ++k) {
            const double t1 = std::min(duration, static_cast<double>(k) * dt);
            const Point2 x1 = kin.position(p, t1);
            const double fu0 = std::floor(x0.u), fu1 = std::floor(x1.u);
            const double fv0 = std::floor(x0.v), fv1 = std::floor(x1.v);
            if (fu0 != fu1) {
                const double boundary = std::max(fu0, fu1);
                const double tc = bisect_crossing([&](double t) { return kin.position(p, t).u; }, t0, t1, boundary);
                const auto pu = static_cast<std::int32_t>(fu1 > fu0 ? boundary : boundary - 1);
                const auto pv = static_cast<std::int32_t>(std::floor(kin.position(p, tc).v));
                emit(p, tc, pu, pv);
            }
            if (fv0 != fv1) {
                const double boundary = std::max(fv0, fv1);
                const double tc = bisect_crossing([&](double t) { return kin.position(p, t).v; }, t0, t1, boundary);
                const auto pv = static_cast<std::int32_t>(fv1 > fv0 ? boundary : boundary - 1);
                const auto pu = static_cast<std::int32_t>(std::floor(kin.position(p, tc).u));
                emit(p, tc, pu, pv);
            }
            t0 = t1;
            x0 = x1;
        }
    }
}

// Sorts, applies the per-pixel refractory rule and clips to the sensor.
std::vector<Generated> finalize(std::vector<Generated> raw, const SensorGeometry& geometry,
                                std::int64_t refractory_us, std::size_t& clipped) {
    std::sort(raw.begin(), raw.end(), generated_less);
    std::vector<Generated> kept;
    kept.reserve(raw.size());
    absl::flat_hash_map<std::int64_t, std::pair<std::int64_t, std::int8_t>> last;
    for (const Generated& g : raw) {
        if (!geometry.contains(g.event.u, g.event.v)) {
            ++clipped;
            continue;
        }
        const std::int64_t key = static_cast<std::int64_t>(g.event.v) * geometry.width + g.event.u;
        auto it = last.find(key);
        if (it != last.end()) {
            const auto [t_last, s_last] = it->second;
            const bool duplicate = g.event.t == t_last && g.event.s == s_last;
            const bool refractory = refractory_us > 0 && g.event.t - t_last < refractory_us;
            if (duplicate || refractory) continue;
        }
        last[key] = {g.event.t, g.event.s};
        kept.push_back(g);
    }
    return kept;
}

} // namespace

SyntheticRecording generate_events(const SceneObject& object, double duration, const SensorGeometry& geometry,
                                   const SynthOptions& options) {
    return generate_scene(std::span<const SceneObject>(&object, 1), duration, geometry, options);
}

SyntheticRecording generate_scene(std::span<const SceneObject> objects, double duration,
                                  const SensorGeometry& geometry, const SynthOptions& options) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw InvalidArgument("duration must be non-negative");
    if (geometry.width <= 0 || geometry.height <= 0) throw GeometryError("sensor geometry must be positive");
    if (options.noise_rate < 0.0 || options.jitter_us < 0 || options.refractory_us < 0) {
        throw InvalidArgument("noise rate, jitter and refractory period must be non-negative");
    }

    SyntheticRecording rec;
    rec.stream.geometry = geometry;
    std::mt19937_64 rng(options.seed);
    const std::int64_t duration_us = std::llround(duration * 1e6);

    std::vector<Generated> all;
    for (std::size_t k = 0; k < objects.size(); ++k) {
        const SceneObject& object = objects[k];
        validate_motion(object.motion);
        rec.truth.structures.push_back(object.motion);

        std::vector<Generated> raw;
        emit_object_events(object, static_cast<std::int32_t>(k), duration, raw);
        if (raw.empty()) {
            rec.warnings.push_back("structure " + std::to_string(k) + " produced no events (no motion)");
        }
        if (options.jitter_us > 0) {
            std::uniform_int_distribution<std::int64_t> jitter(-options.jitter_us, options.jitter_us);
            for (Generated& g : raw) {
                g.event.t = std::clamp<std::int64_t>(g.event.t + jitter(rng), 0, duration_us);
                g.truth.t = g.event.t;
            }
        }
        std::size_t clipped = 0;
        auto kept = finalize(std::move(raw), geometry, options.refractory_us, clipped);
        rec.clipped += clipped;
        all.insert(all.end(), kept.begin(), kept.end());
    }
    if (rec.clipped > 0) {
        rec.warnings.push_back(std::to_string(rec.clipped) + " events fell outside the sensor and were clipped");
    }

    if (options.noise_rate > 0.0 && duration > 0.0) {
        std::poisson_distribution<std::int64_t> count_dist(options.noise_rate * duration);
        const std::int64_t count = count_dist(rng);
        std::uniform_int_distribution<std::int64_t> t_dist(0, duration_us);
        std::uniform_int_distribution<std::int32_t> u_dist(0, geometry.width - 1);
        std::uniform_int_distribution<std::int32_t> v_dist(0, geometry.height - 1);
        std::bernoulli_distribution s_dist(0.5);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::int64_t i = 0; i < count; ++i) {
            const std::int64_t t = t_dist(rng);
            const std::int32_t u = u_dist(rng);
            const std::int32_t v = v_dist(rng);
            const std::int8_t s = s_dist(rng) ? 1 : -1;
            all.push_back({Event{u, v, t, s}, TruthRecord{t, {nan, nan}, -1}});
        }
    }

    std::stable_sort(all.begin(), all.end(), generated_less);
    rec.stream.events.reserve(all.size());
    rec.per_event.reserve(all.size());
    for (const Generated& g : all) {
        rec.stream.events.push_back(g.event);
        rec.per_event.push_back(g.truth);
    }
    return rec;
}

// ---------------------------------------------------------------------------------------------
// Ground-truth sidecar

void save_truth(std::ostream& out, std::span<const TruthRecord> records) {
    out << "# t v_u v_v structure_id\n";
    for (const TruthRecord& r : records) {
        out << r.t << ' ' << detail::format_double(r.flow.v_u) << ' ' << detail::format_double(r.flow.v_v) << ' '
            << r.structure << '\n';
    }
}

void save_truth_file(const std::string& path, std::span<const TruthRecord> records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write ground-truth file '" + path + "'");
    save_truth(out, records);
}

std::vector<TruthRecord> load_truth(std::istream& in) {
    std::vector<TruthRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        const auto f = detail::split_fields(line);
        if (f.size() != 4) throw ParseError("expected 't v_u v_v structure_id'", line_no, 1);
        TruthRecord r;
        r.t = detail::parse_int(f[0], line_no, "timestamp");
        r.flow.v_u = detail::parse_double(f[1], line_no, "v_u");
        r.flow.v_v = detail::parse_double(f[2], line_no, "v_v");
        r.structure = static_cast<std::int32_t>(detail::parse_int(f[3], line_no, "structure_id"));
        records.push_back(r);
    }
    return records;
}

std::vector<TruthRecord> load_truth_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ground-truth file '" + path + "'");
    return load_truth(in);
}

// ---------------------------------------------------------------------------------------------
// Preset scenes

Scene shape_scene(const ShapeSpec& shape, FlowVector velocity, double duration, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "shape";
    scene.duration = duration;
    scene.objects.push_back({build_contour(shape, geometry), 0.5 * geometry.width - 0.5 * velocity.v_u * duration,
                             0.5 * geometry.height - 0.5 * velocity.v_v * duration, ConstantMotion{velocity}});
    return scene;
}

Scene hexagon_scene(FlowVector velocity, double travel_px, const SensorGeometry& geometry) {
    const double speed = velocity.magnitude();
    Scene scene = shape_scene(Hexagon{65.0}, velocity, speed > 0.0 ? travel_px / speed : 1.0, geometry);
    scene.name = "hexagon";
    return scene;
}

Scene rectangle_scene(double speed, double duration, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "rectangle";
    scene.duration = duration;
    scene.objects.push_back({rotate_contour(build_contour(Rectangle{120.0, 20.0}, geometry), deg_to_rad(45.0)),
                             0.5 * geometry.width - 0.5 * speed * duration, 0.5 * geometry.height,
                             ConstantMotion{{speed, 0.0}}});
    return scene;
}

Scene long_bar_scene(double speed, double tilt, double duration, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "long-bar";
    scene.duration = duration;
    scene.objects.push_back({rotate_contour(build_contour(Bar{150.0, 4.0}, geometry), tilt),
                             0.5 * geometry.width - 0.5 * speed * duration, 0.5 * geometry.height,
                             ConstantMotion{{speed, 0.0}}});
    return scene;
}

Scene two_bar_scene(double speed, double duration, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "two-bars";
    scene.duration = duration;
    const ShapeContour bar = build_contour(Bar{60.0, 4.0}, geometry);
    const double half_travel = 0.5 * speed * duration;
    scene.objects.push_back({bar, 0.5 * geometry.width - half_travel, 0.25 * geometry.height, ConstantMotion{{speed, 0.0}}});
    scene.objects.push_back({bar, 0.5 * geometry.width + half_travel, 0.75 * geometry.height, ConstantMotion{{-speed, 0.0}}});
    return scene;
}

Scene pendulum_scene(double periods, double peak_flow, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "pendulum";
    const PendulumMotion pendulum = make_pendulum(0.72, deg_to_rad(23.0), 9.82, peak_flow);
    scene.duration = periods * pendulum.period();
    scene.objects.push_back(
        {build_contour(Bar{60.0, 6.0}, geometry), 0.5 * geometry.width, 0.5 * geometry.height, pendulum});
    return scene;
}

Scene entry_scene(double speed, double duration, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "entry";
    scene.duration = duration;
    // 80 x 60 fork: 8 px prongs at the front, an 8 px bar joining them at the back.
    const Polygon fork{{{-40, -30}, {40, -30}, {40, -22}, {-32, -22}, {-32, 22}, {40, 22}, {40, 30}, {-40, 30}}};
    scene.objects.push_back({build_contour(fork, geometry), -30.0, 0.5 * geometry.height, ConstantMotion{{speed, 0.0}}});
    return scene;
}

Scene parallax_scene(double duration, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "parallax";
    scene.duration = duration;
    const ShapeContour bar = build_contour(Bar{120.0, 4.0}, geometry);
    const double speeds[] = {20.0, 40.0, 60.0, 80.0};
    const double starts[] = {20.0, 60.0, 100.0, 140.0};
    for (int k = 0; k < 4; ++k) {
        scene.objects.push_back({bar, starts[k], 0.5 * geometry.height, ConstantMotion{{speeds[k], 0.0}}});
    }
    return scene;
}

Scene rotating_bar_scene(double revs_per_s, double duration, const SensorGeometry& geometry) {
    Scene scene;
    scene.name = "rotating-bar";
    scene.duration = duration;
    const double cu = 0.5 * geometry.width;
    const double cv = 0.5 * geometry.height;
    scene.objects.push_back(
        {build_contour(Bar{170.0, 4.0}, geometry), cu, cv, RotationMotion{cu, cv, kTwoPi * revs_per_s}});
    return scene;
}

SyntheticRecording generate(const Scene& scene, const SensorGeometry& geometry, const SynthOptions& options) {
    return generate_scene(scene.objects, scene.duration, geometry, options);
}

} // namespace sofas
