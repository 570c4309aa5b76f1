#pragma once

#include "sofas/engine.hpp"
#include "sofas/flow.hpp"
#include "sofas/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace sofas {

/// Signed 100 * (|est| - |gt|) / |gt|. nullopt when |gt| == 0.
std::optional<double> magnitude_pct_error(FlowVector est, FlowVector gt);

/// Unsigned angle between the vectors in [0, 180] degrees. nullopt when either is zero.
std::optional<double> angle_error(FlowVector est, FlowVector gt);

/// Flow of a target moving at v_r m/s seen by a w_c pixel wide camera covering w_fov meters.
double robot_gt(double w_c, double v_r, double w_fov);

/// pixels_per_meter * v_max * |cos(2 pi t / T + phase)| for a pendulum of length L released at theta_max.
double pendulum_gt(double length_m, double theta_max, double g, double pixels_per_meter, double t,
                   double phase = 0.0);

struct FlowError {
    double magnitude_pct = 0.0;
    double angle_deg = 0.0;
    double t = 0.0; // seconds
    std::int32_t segment = -1;
};

struct Histogram {
    double bin_width = 5.0;
    std::map<std::int64_t, std::size_t> counts; // bin k covers [k*w, (k+1)*w)

    void write_csv(std::ostream& out) const;
};

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0; // population
    double min = 0.0;
    double max = 0.0;
    Histogram histogram;
};

/// Throws InvalidArgument on empty input or a non-positive bin width.
Summary summarize(std::span<const double> values, double bin_width = 5.0);

/// Pearson correlation; nullopt if fewer than two samples or either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct EvalOptions {
    std::int64_t t_start_us = 0; // estimates before this are ignored (convergence)
    double magnitude_bin = 5.0;  // percent
    double angle_bin = 5.0;      // degrees
};

struct EvalReport {
    std::size_t events = 0;    // in the window
    std::size_t estimated = 0; // with a flow
    std::size_t evaluated = 0; // with a flow and a defined error
    std::size_t noise_estimated = 0; // flows assigned to noise events (no truth)
    double coverage = 0.0;     // estimated structure events / structure events
    std::optional<Summary> magnitude;
    std::optional<Summary> angle;
    std::optional<double> median_abs_magnitude;
    std::optional<double> magnitude_correlation; // Pearson of |est| against |gt|
    std::vector<FlowError> errors;

    /// key=value summary lines.
    void write_summary(std::ostream& out) const;
};

/// Compares each estimate with the per-event truth record at the same position. Throws
/// InvalidArgument when the sequences differ in length or timestamps.
EvalReport evaluate(std::span<const FlowRecord> estimates, std::span<const TruthRecord> truth,
                    const EvalOptions& options = {});

} // namespace sofas
