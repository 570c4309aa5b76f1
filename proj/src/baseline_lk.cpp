#include "sofas/baseline_lk.hpp"

#include "sofas/error.hpp"

#include <cmath>

namespace sofas {

TimestampSurface::TimestampSurface(SensorGeometry geometry)
    : geometry_(geometry),
      t_(static_cast<std::size_t>(std::max(geometry.width, 0)) * std::max(geometry.height, 0) * 2, kNever) {
    if (geometry.width <= 0 || geometry.height <= 0) throw GeometryError("sensor geometry must be positive");
}

std::size_t TimestampSurface::index(std::int32_t u, std::int32_t v, int s) const {
    if (!geometry_.contains(u, v)) {
        throw GeometryError("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside sensor");
    }
    if (s != 1 && s != -1) throw GeometryError("polarity must be +1 or -1");
    const std::size_t plane = s > 0 ? 0 : 1;
    return (plane * geometry_.height + static_cast<std::size_t>(v)) * geometry_.width + static_cast<std::size_t>(u);
}

void TimestampSurface::update(const Event& e) { set(e.u, e.v, e.s, e.t); }

void TimestampSurface::set(std::int32_t u, std::int32_t v, int s, std::int64_t t_us) {
    std::int64_t& slot = t_[index(u, v, s)];
    if (slot == kNever) ++touched_;
    slot = t_us;
}

std::int64_t TimestampSurface::at(std::int32_t u, std::int32_t v, int s) const { return t_[index(u, v, s)]; }

void LKConfig::validate() const {
    if (window < 1) throw ConfigError("lk.window", "must be >= 1");
    if (min_valid_neighbors < 1) throw ConfigError("lk.min_valid_neighbors", "must be >= 1");
    if (!(eigen_floor > 0.0)) throw ConfigError("lk.eigen_floor", "must be > 0");
    if (!(aperture_ratio > 0.0 && aperture_ratio < 1.0)) throw ConfigError("lk.aperture_ratio", "must lie in (0, 1)");
    if (!(max_age > 0.0)) throw ConfigError("lk.max_age", "must be > 0");
}

namespace {

struct Sampler {
    const TimestampSurface& surface;
    int s;
    std::int64_t now;
    std::int64_t max_age_us;

    // Timestamp in seconds relative to now, or nullopt when off-sensor, never set or stale.
    std::optional<double> operator()(std::int32_t u, std::int32_t v) const {
        if (!surface.geometry().contains(u, v)) return std::nullopt;
        const std::int64_t t = surface.at(u, v, s);
        if (t == TimestampSurface::kNever || now - t > max_age_us) return std::nullopt;
        return to_seconds(t - now);
    }
};

// Central difference where both sides exist, else one-sided against the center.
std::optional<double> derivative(const Sampler& at, std::int32_t u, std::int32_t v, int du, int dv,
                                 std::optional<double> center) {
    const auto plus = at(u + du, v + dv);
    const auto minus = at(u - du, v - dv);
    if (plus && minus) return (*plus - *minus) / 2.0;
    if (!center) return std::nullopt;
    if (plus) return *plus - *center;
    if (minus) return *center - *minus;
    return std::nullopt;
}

} // namespace

LKResult lk_flow(const TimestampSurface& surface, const Event& e, const LKConfig& cfg) {
    const Sampler at{surface, e.s, e.t, static_cast<std::int64_t>(std::llround(cfg.max_age * 1e6))};
    double sxx = 0.0, sxy = 0.0, syy = 0.0, bx = 0.0, by = 0.0;
    LKResult result;
    for (int dv = -cfg.window; dv <= cfg.window; ++dv) {
        for (int du = -cfg.window; du <= cfg.window; ++du) {
            const std::int32_t u = e.u + du, v = e.v + dv;
            const auto center = at(u, v);
            if (!center) continue;
            const auto gx = derivative(at, u, v, 1, 0, center);
            const auto gy = derivative(at, u, v, 0, 1, center);
            if (!gx || !gy) continue;
            sxx += *gx * *gx;
            sxy += *gx * *gy;
            syy += *gy * *gy;
            bx += *gx;
            by += *gy;
            ++result.valid;
        }
    }
    if (result.valid < cfg.min_valid_neighbors) return result;

    const double tr = sxx + syy;
    const double disc = std::sqrt(std::max(0.0, (sxx - syy) * (sxx - syy) / 4.0 + sxy * sxy));
    const double l1 = tr / 2.0 + disc;
    const double l2 = tr / 2.0 - disc;
    if (!(l1 > cfg.eigen_floor)) return result;

    if (l2 > cfg.aperture_ratio * l1) {
        const double det = sxx * syy - sxy * sxy;
        result.flow = {(syy * bx - sxy * by) / det, (sxx * by - sxy * bx) / det};
        result.status = LKStatus::full;
        return result;
    }
    // Major eigenvector of the structure matrix; the pseudo-inverse keeps only that component.
    double ex = sxy, ey = l1 - sxx;
    if (std::abs(ex) + std::abs(ey) < 1e-300) {
        ex = sxx >= syy ? 1.0 : 0.0;
        ey = sxx >= syy ? 0.0 : 1.0;
    }
    const double norm = std::hypot(ex, ey);
    ex /= norm;
    ey /= norm;
    const double k = (ex * bx + ey * by) / l1;
    result.flow = {k * ex, k * ey};
    result.status = LKStatus::normal_only;
    return result;
}

std::vector<FlowRecord> lk_run(const EventStream& stream, const LKConfig& cfg) {
    cfg.validate();
    TimestampSurface surface(stream.geometry);
    std::vector<FlowRecord> out;
    out.reserve(stream.events.size());
    for (std::size_t k = 0; k < stream.events.size(); ++k) {
        const Event& e = stream.events[k];
        if (k > 0 && e.t < stream.events[k - 1].t) throw OrderingError("timestamp regression", k);
        surface.update(e);
        const LKResult r = lk_flow(surface, e, cfg);
        out.push_back({e, -1, r.solved() ? std::optional<FlowVector>(r.flow) : std::nullopt});
    }
    return out;
}

} // namespace sofas
