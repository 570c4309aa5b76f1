#pragma once

#include "sofas/engine.hpp"
#include "sofas/event.hpp"
#include "sofas/flow.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sofas {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<Rgb> pixels; // row-major

    Image() = default;
    Image(std::int32_t w, std::int32_t h, Rgb fill = {0, 0, 0});

    Rgb& at(std::int32_t u, std::int32_t v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
    const Rgb& at(std::int32_t u, std::int32_t v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
};

/// h in degrees, s and v in [0, 1].
Rgb hsv_to_rgb(double h, double s, double v);

/// Hue = direction (0 deg = +u, counter-clockwise towards +v), saturation = |flow| / v_sat
/// clamped to 1, full value.
Rgb direction_color(FlowVector flow, double v_sat);

/// Well-separated hues from the segment id (golden-angle steps).
Rgb segment_color(std::int32_t segment);

enum class ColorMode { direction, segment };

struct RenderOptions {
    std::int64_t frame_interval_us = 33333;
    ColorMode mode = ColorMode::direction;
    double v_sat = 100.0;              // px/s at full saturation
    Rgb unlabeled = {90, 90, 90};      // events without a flow
    Rgb background = {0, 0, 0};
};

/// One frame per interval from the first event's timestamp; the last event closes the last
/// frame. Each event paints its pixel; later events overwrite earlier ones. Empty input gives
/// no frames.
std::vector<Image> render_frames(std::span<const FlowRecord> records, const SensorGeometry& geometry,
                                 const RenderOptions& options = {});

/// Binary PPM (P6).
void write_ppm(std::ostream& out, const Image& image);
void write_ppm_file(const std::string& path, const Image& image);

} // namespace sofas
