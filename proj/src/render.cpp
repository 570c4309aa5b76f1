#include "sofas/render.hpp"

#include "sofas/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace sofas {

Image::Image(std::int32_t w, std::int32_t h, Rgb fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {
    if (w <= 0 || h <= 0) throw GeometryError("image size must be positive");
}

Rgb hsv_to_rgb(double h, double s, double v) {
    h = std::fmod(h, 360.0);
    if (h < 0.0) h += 360.0;
    s = std::clamp(s, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    const double c = v * s;
    const double x = c * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
    const double m = v - c;
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h / 60.0)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
    }
    const auto byte = [](double f) { return static_cast<std::uint8_t>(std::lround(std::clamp(f, 0.0, 1.0) * 255.0)); };
    return {byte(r + m), byte(g + m), byte(b + m)};
}

Rgb direction_color(FlowVector flow, double v_sat) {
    const double hue = rad_to_deg(std::atan2(flow.v_v, flow.v_u));
    return hsv_to_rgb(hue, v_sat > 0.0 ? flow.magnitude() / v_sat : 1.0, 1.0);
}

Rgb segment_color(std::int32_t segment) {
    const double hue = std::fmod(static_cast<double>(segment) * 137.507764, 360.0);
    return hsv_to_rgb(hue, 0.85, 1.0);
}

std::vector<Image> render_frames(std::span<const FlowRecord> records, const SensorGeometry& geometry,
                                 const RenderOptions& options) {
    if (options.frame_interval_us <= 0) throw InvalidArgument("frame interval must be positive");
    std::vector<Image> frames;
    if (records.empty()) return frames;
    const std::int64_t t0 = records.front().event.t;
    for (const FlowRecord& r : records) {
        const Event& e = r.event;
        if (!geometry.contains(e.u, e.v)) throw GeometryError("event outside sensor while rendering");
        if (e.t < t0) throw OrderingError("timestamp regression while rendering", 0);
        const auto k = static_cast<std::size_t>((e.t - t0) / options.frame_interval_us);
        while (frames.size() <= k) frames.emplace_back(geometry.width, geometry.height, options.background);
        Rgb color = options.unlabeled;
        if (options.mode == ColorMode::segment && r.segment >= 0) {
            color = segment_color(r.segment);
        } else if (options.mode == ColorMode::direction && r.flow) {
            color = direction_color(*r.flow, options.v_sat);
        }
        frames[k].at(e.u, e.v) = color;
    }
    return frames;
}

void write_ppm(std::ostream& out, const Image& image) {
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    for (const Rgb& p : image.pixels) out.write(reinterpret_cast<const char*>(p.data()), 3);
}

void write_ppm_file(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image '" + path + "'");
    write_ppm(out, image);
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace sofas
