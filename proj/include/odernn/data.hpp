#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odernn/tensor.hpp"

namespace odernn {

struct TimeSeries {
    std::vector<double> timestamps;  // strictly increasing, seconds
    Tensor values;                   // n x d_obs
    std::optional<std::int64_t> label;
    std::string name;

    std::int64_t n_points() const { return values.rows(); }
    std::int64_t d_obs() const { return values.cols(); }
    Tensor row(std::int64_t i) const;
};

struct Dataset {
    std::vector<TimeSeries> series;
    std::int64_t d_obs = 0;
    std::optional<std::int64_t> n_classes;
};

/// Archimedean spirals r = 0.2 + 0.1*theta, theta over [0, 6*pi], direction
/// (counterclockwise = label 0, clockwise = label 1) drawn per series.
/// Sample times are uniform draws in [0, 6*pi], sorted; exact duplicates are
/// perturbed by +1e-9*index to keep strict monotonicity.
Dataset gen_spiral(std::int64_t n_series, std::int64_t n_points, std::uint64_t seed,
                   double noise_sd);

/// Base curve point of the spiral at traversal parameter theta in [0, 6*pi].
void spiral_point(double theta, bool clockwise, double& x, double& y);

/// (sin t, sin t * cos t) over [0, 2*pi], irregular sorted sample times.
TimeSeries gen_eight_curve(std::int64_t n_points, std::uint64_t seed);

/// Trefoil projection (sin t + 2 sin 2t, cos t - 2 cos 2t) over [0, 2*pi].
TimeSeries gen_triknot(std::int64_t n_points, std::uint64_t seed);

/// Keeps ceil(keep_fraction * n) points, uniformly without replacement,
/// always including the first point; order preserved.
TimeSeries subsample_irregular(const TimeSeries& ts, double keep_fraction, std::uint64_t seed);

/// CSV with header series_id,time,v1..vd[,label]; one TimeSeries per distinct
/// series_id value, rows in file order.
Dataset load_csv(const std::string& path, const std::string& time_column,
                 const std::vector<std::string>& value_columns,
                 const std::optional<std::string>& label_column = std::nullopt,
                 const std::string& series_column = "series_id");

/// Loads with value columns inferred from the header (everything that is not
/// series/time/label).
Dataset load_csv_auto(const std::string& path);

void save_csv(const Dataset& ds, const std::string& path);

struct NormStats {
    std::vector<double> mean, sd;  // per observable dimension, population sd
};

Dataset normalize(const Dataset& ds, NormStats& stats_out);
Dataset denormalize(const Dataset& ds, const NormStats& stats);

}  // namespace odernn
