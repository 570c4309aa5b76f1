#include "sofas/eval.hpp"

#include "sofas/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace sofas {

std::optional<double> magnitude_pct_error(FlowVector est, FlowVector gt) {
    const double g = gt.magnitude();
    if (!(g > 0.0)) return std::nullopt;
    return 100.0 * (est.magnitude() - g) / g;
}

std::optional<double> angle_error(FlowVector est, FlowVector gt) {
    const double a = est.magnitude(), b = gt.magnitude();
    if (!(a > 0.0) || !(b > 0.0)) return std::nullopt;
    // atan2 of cross and dot stays accurate near 0 and 180 degrees, unlike acos.
    const double cross = est.v_u * gt.v_v - est.v_v * gt.v_u;
    const double dot = est.v_u * gt.v_u + est.v_v * gt.v_v;
    return rad_to_deg(std::atan2(std::abs(cross), dot));
}

double robot_gt(double w_c, double v_r, double w_fov) {
    if (!(w_c > 0.0)) throw InvalidArgument("camera width must be positive");
    if (!(w_fov > 0.0)) throw InvalidArgument("field-of-view width must be positive");
    if (!(v_r >= 0.0)) throw InvalidArgument("robot speed must be non-negative");
    return w_c * v_r / w_fov;
}

double pendulum_gt(double length_m, double theta_max, double g, double pixels_per_meter, double t, double phase) {
    PendulumMotion p;
    p.length_m = length_m;
    p.theta_max = theta_max;
    p.g = g;
    p.pixels_per_meter = pixels_per_meter;
    p.phase = phase;
    if (!(g > 0.0)) throw InvalidArgument("g must be positive");
    validate_motion(p);
    return p.peak_flow() * std::abs(std::cos(2.0 * std::numbers::pi * t / p.period() + phase));
}

void Histogram::write_csv(std::ostream& out) const {
    out << "lo,hi,count\n";
    for (const auto& [k, n] : counts) {
        out << detail::format_double(static_cast<double>(k) * bin_width) << ','
            << detail::format_double(static_cast<double>(k + 1) * bin_width) << ',' << n << '\n';
    }
}

Summary summarize(std::span<const double> values, double bin_width) {
    if (values.empty()) throw InvalidArgument("cannot summarize an empty error list");
    if (!(bin_width > 0.0)) throw InvalidArgument("histogram bin width must be positive");
    Summary s;
    s.count = values.size();
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : values) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / n);

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
    s.min = sorted.front();
    s.max = sorted.back();

    s.histogram.bin_width = bin_width;
    for (double x : values) ++s.histogram.counts[static_cast<std::int64_t>(std::floor(x / bin_width))];
    return s;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pearson: sample sizes differ");
    if (x.size() < 2) return std::nullopt;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

EvalReport evaluate(std::span<const FlowRecord> estimates, std::span<const TruthRecord> truth,
                    const EvalOptions& options) {
    if (estimates.size() != truth.size()) {
        throw InvalidArgument("estimate count " + std::to_string(estimates.size()) + " differs from truth count " +
                              std::to_string(truth.size()));
    }
    EvalReport report;
    std::size_t structure_events = 0, structure_estimated = 0;
    std::vector<double> mags, angles, abs_mags, est_mag, gt_mag;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        const FlowRecord& r = estimates[k];
        const TruthRecord& gt = truth[k];
        if (r.event.t != gt.t) {
            throw InvalidArgument("record " + std::to_string(k) + ": estimate at t=" + std::to_string(r.event.t) +
                                  " but truth at t=" + std::to_string(gt.t));
        }
        if (r.event.t < options.t_start_us) continue;
        ++report.events;
        const bool noise = gt.structure < 0;
        if (!noise) ++structure_events;
        if (!r.flow) continue;
        ++report.estimated;
        if (noise) {
            ++report.noise_estimated;
            continue;
        }
        ++structure_estimated;
        const auto m = magnitude_pct_error(*r.flow, gt.flow);
        const auto a = angle_error(*r.flow, gt.flow);
        if (!m || !a) continue;
        ++report.evaluated;
        report.errors.push_back({*m, *a, to_seconds(r.event.t), r.segment});
        mags.push_back(*m);
        angles.push_back(*a);
        abs_mags.push_back(std::abs(*m));
        est_mag.push_back(r.flow->magnitude());
        gt_mag.push_back(gt.flow.magnitude());
    }
    report.coverage = structure_events ? static_cast<double>(structure_estimated) / structure_events : 0.0;
    if (!mags.empty()) {
        report.magnitude = summarize(mags, options.magnitude_bin);
        report.angle = summarize(angles, options.angle_bin);
        report.median_abs_magnitude = summarize(abs_mags, options.magnitude_bin).median;
        report.magnitude_correlation = pearson(est_mag, gt_mag);
    }
    return report;
}

void EvalReport::write_summary(std::ostream& out) const {
    out << "events=" << events << '\n'
        << "estimated=" << estimated << '\n'
        << "evaluated=" << evaluated << '\n'
        << "noise_estimated=" << noise_estimated << '\n'
        << "coverage=" << detail::format_double(coverage) << '\n';
    if (!magnitude) {
        out << "magnitude_pct=none\nangle_deg=none\n";
        return;
    }
    const auto block = [&out](const char* name, const Summary& s) {
        out << name << "_mean=" << detail::format_double(s.mean) << '\n'
            << name << "_median=" << detail::format_double(s.median) << '\n'
            << name << "_stddev=" << detail::format_double(s.stddev) << '\n'
            << name << "_min=" << detail::format_double(s.min) << '\n'
            << name << "_max=" << detail::format_double(s.max) << '\n';
    };
    block("magnitude_pct", *magnitude);
    out << "magnitude_pct_median_abs=" << detail::format_double(*median_abs_magnitude) << '\n';
    block("angle_deg", *angle);
    out << "magnitude_correlation="
        << (magnitude_correlation ? detail::format_double(*magnitude_correlation) : std::string("none")) << '\n';
}

} // namespace sofas
