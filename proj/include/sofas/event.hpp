#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sofas {

/// Sensor array size in pixels. Defaults to the 240x180 DAVIS-240C class.
struct SensorGeometry {
    std::int32_t width = 240;
    std::int32_t height = 180;

    bool contains(std::int32_t u, std::int32_t v) const noexcept {
        return u >= 0 && v >= 0 && u < width && v < height;
    }
    bool operator==(const SensorGeometry&) const = default;
};

/// A single DVS event. Timestamps are integer microseconds; polarity is exactly +1 or -1.
struct Event {
    std::int32_t u = 0;
    std::int32_t v = 0;
    std::int64_t t = 0;
    std::int8_t s = 1;

    bool operator==(const Event&) const = default;
};

inline double to_seconds(std::int64_t us) noexcept { return static_cast<double>(us) * 1e-6; }

/// Time-ordered events recorded on one sensor.
struct EventStream {
    SensorGeometry geometry;
    std::vector<Event> events;
};

/// Parses one `t u v s` record. `line_no` is only used for error messages.
Event decode_event(std::string_view record, const SensorGeometry& geometry = {}, std::size_t line_no = 1);

/// Formats an event as `t u v s`, no trailing newline.
std::string encode_event(const Event& e);

/// Reads a text event file. `#` lines are comments; the first non-comment line may be
/// `geometry W H`, which overrides `geometry`. Throws OrderingError on timestamp regressions.
EventStream load_stream(std::istream& in, SensorGeometry geometry = {});
EventStream load_stream_file(const std::string& path, SensorGeometry geometry = {});

void save_stream(std::ostream& out, const EventStream& stream);
void save_stream_file(const std::string& path, const EventStream& stream);

/// Throws GeometryError for bad polarity/coordinates, OrderingError for regressions.
void validate_stream(const EventStream& stream);

namespace detail {
// Shared by the text readers: splits on ASCII whitespace and tracks 1-based columns.
struct Field {
    std::string_view text;
    std::size_t column;
};
std::vector<Field> split_fields(std::string_view line);
bool is_blank_or_comment(std::string_view line);
std::int64_t parse_int(const Field& f, std::size_t line_no, const char* name);
double parse_double(const Field& f, std::size_t line_no, const char* name);
std::string format_double(double x);
} // namespace detail

} // namespace sofas
