#include "sofas/event.hpp"

#include "sofas/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace sofas {

namespace detail {

std::vector<Field> split_fields(std::string_view line) {
    std::vector<Field> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        fields.push_back({line.substr(start, i - start), start + 1});
    }
    return fields;
}

bool is_blank_or_comment(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

std::int64_t parse_int(const Field& f, std::size_t line_no, const char* name) {
    std::int64_t value = 0;
    const char* end = f.text.data() + f.text.size();
    auto [ptr, ec] = std::from_chars(f.text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("malformed ") + name + " '" + std::string(f.text) + "'", line_no,
                         f.column);
    }
    return value;
}

double parse_double(const Field& f, std::size_t line_no, const char* name) {
    double value = 0.0;
    const char* end = f.text.data() + f.text.size();
    auto [ptr, ec] = std::from_chars(f.text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("malformed ") + name + " '" + std::string(f.text) + "'", line_no,
                         f.column);
    }
    return value;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace detail

using detail::Field;

Event decode_event(std::string_view record, const SensorGeometry& geometry, std::size_t line_no) {
    const auto fields = detail::split_fields(record);
    if (fields.size() != 4) {
        const std::size_t col = fields.size() > 4 ? fields[4].column : record.size() + 1;
        throw ParseError("expected 4 fields 't u v s', got " + std::to_string(fields.size()), line_no, col);
    }
    const std::int64_t t = detail::parse_int(fields[0], line_no, "timestamp");
    const std::int64_t u = detail::parse_int(fields[1], line_no, "u");
    const std::int64_t v = detail::parse_int(fields[2], line_no, "v");
    const std::int64_t s = detail::parse_int(fields[3], line_no, "polarity");
    if (t < 0) throw ParseError("negative timestamp", line_no, fields[0].column);
    if (s != 1 && s != -1) throw ParseError("invalid polarity " + std::to_string(s), line_no, fields[3].column);
    if (u < 0 || v < 0 || u >= geometry.width || v >= geometry.height) {
        throw GeometryError("line " + std::to_string(line_no) + ": pixel (" + std::to_string(u) + ", " +
                            std::to_string(v) + ") outside " + std::to_string(geometry.width) + "x" +
                            std::to_string(geometry.height) + " sensor");
    }
    return Event{static_cast<std::int32_t>(u), static_cast<std::int32_t>(v), t, static_cast<std::int8_t>(s)};
}

std::string encode_event(const Event& e) {
    std::string out = std::to_string(e.t);
    out += ' ';
    out += std::to_string(e.u);
    out += ' ';
    out += std::to_string(e.v);
    out += e.s > 0 ? " 1" : " -1";
    return out;
}

EventStream load_stream(std::istream& in, SensorGeometry geometry) {
    EventStream stream;
    std::string line;
    std::size_t line_no = 0;
    bool seen_record = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        if (!seen_record) {
            seen_record = true;
            const auto fields = detail::split_fields(line);
            if (!fields.empty() && fields[0].text == "geometry") {
                if (fields.size() != 3) throw ParseError("expected 'geometry W H'", line_no, fields[0].column);
                const auto w = detail::parse_int(fields[1], line_no, "width");
                const auto h = detail::parse_int(fields[2], line_no, "height");
                if (w <= 0 || h <= 0) throw GeometryError("sensor geometry must be positive");
                geometry = {static_cast<std::int32_t>(w), static_cast<std::int32_t>(h)};
                continue;
            }
        }
        const Event e = decode_event(line, geometry, line_no);
        if (!stream.events.empty() && e.t < stream.events.back().t) {
            throw OrderingError("timestamp " + std::to_string(e.t) + " precedes " +
                                    std::to_string(stream.events.back().t) + " on line " + std::to_string(line_no),
                                stream.events.size());
        }
        stream.events.push_back(e);
    }
    stream.geometry = geometry;
    return stream;
}

EventStream load_stream_file(const std::string& path, SensorGeometry geometry) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open event file '" + path + "'");
    return load_stream(in, geometry);
}

void save_stream(std::ostream& out, const EventStream& stream) {
    out << "geometry " << stream.geometry.width << ' ' << stream.geometry.height << '\n';
    for (const Event& e : stream.events) out << encode_event(e) << '\n';
}

void save_stream_file(const std::string& path, const EventStream& stream) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write event file '" + path + "'");
    save_stream(out, stream);
    if (!out) throw IoError("write failed for '" + path + "'");
}

void validate_stream(const EventStream& stream) {
    if (stream.geometry.width <= 0 || stream.geometry.height <= 0) {
        throw GeometryError("sensor geometry must be positive");
    }
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
        const Event& e = stream.events[i];
        if (e.s != 1 && e.s != -1) throw GeometryError("invalid polarity at index " + std::to_string(i));
        if (!stream.geometry.contains(e.u, e.v)) {
            throw GeometryError("event " + std::to_string(i) + " outside sensor");
        }
        if (i > 0 && e.t < stream.events[i - 1].t) throw OrderingError("timestamp regression", i);
    }
}

} // namespace sofas
