#include "odernn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace odernn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : rng_(seed) {}

    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, one value per call; second draw discarded for simplicity.
    double normal(double sd) {
        const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = uniform01();
        return sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    std::uint64_t next_u64() { return rng_(); }

private:
    std::mt19937_64 rng_;
};

std::vector<double> irregular_times(Rng& rng, std::int64_t n, double t_max) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (auto& v : t) v = rng.uniform(0.0, t_max);
    std::sort(t.begin(), t.end());
    // duplicates perturbed, not dropped, so the point count is preserved
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] <= t[i - 1]) t[i] = t[i - 1] + 1e-9 * static_cast<double>(i);
    }
    return t;
}

void check_monotone(const TimeSeries& ts) {
    for (std::size_t i = 1; i < ts.timestamps.size(); ++i) {
        if (!(ts.timestamps[i] > ts.timestamps[i - 1])) {
            throw DataError("timestamps not strictly increasing in series '" + ts.name + "'");
        }
    }
}

}  // namespace

Tensor TimeSeries::row(std::int64_t i) const {
    Tensor out = Tensor::zeros({d_obs()});
    for (std::int64_t j = 0; j < d_obs(); ++j) out.at(j) = values.at(i, j);
    return out;
}

void spiral_point(double theta, bool clockwise, double& x, double& y) {
    const double r = 0.2 + 0.1 * theta;
    const double angle = clockwise ? -theta : theta;
    x = r * std::cos(angle);
    y = r * std::sin(angle);
}

Dataset gen_spiral(std::int64_t n_series, std::int64_t n_points, std::uint64_t seed,
                   double noise_sd) {
    if (n_series < 1 || n_points < 1) throw UsageError("gen_spiral: counts must be >= 1");
    Rng rng(seed);
    Dataset ds;
    ds.d_obs = 2;
    ds.n_classes = 2;
    const double t_max = 3.0 * kTwoPi;
    for (std::int64_t s = 0; s < n_series; ++s) {
        const bool clockwise = rng.uniform01() < 0.5;
        auto times = irregular_times(rng, n_points, t_max);
        Tensor vals = Tensor::zeros({n_points, 2});
        for (std::int64_t i = 0; i < n_points; ++i) {
            double x, y;
            spiral_point(times[static_cast<std::size_t>(i)], clockwise, x, y);
            if (noise_sd > 0.0) {
                x += rng.normal(noise_sd);
                y += rng.normal(noise_sd);
            }
            vals.at(i, 0) = x;
            vals.at(i, 1) = y;
        }
        TimeSeries ts;
        ts.timestamps = std::move(times);
        ts.values = std::move(vals);
        ts.label = clockwise ? 1 : 0;
        ts.name = "spiral_" + std::to_string(s);
        ds.series.push_back(std::move(ts));
    }
    return ds;
}

TimeSeries gen_eight_curve(std::int64_t n_points, std::uint64_t seed) {
    if (n_points < 2) throw UsageError("gen_eight_curve: need at least 2 points");
    Rng rng(seed);
    TimeSeries ts;
    ts.name = "eight";
    ts.timestamps = irregular_times(rng, n_points, kTwoPi);
    ts.values = Tensor::zeros({n_points, 2});
    for (std::int64_t i = 0; i < n_points; ++i) {
        const double t = ts.timestamps[static_cast<std::size_t>(i)];
        ts.values.at(i, 0) = std::sin(t);
        ts.values.at(i, 1) = std::sin(t) * std::cos(t);
    }
    return ts;
}

TimeSeries gen_triknot(std::int64_t n_points, std::uint64_t seed) {
    if (n_points < 2) throw UsageError("gen_triknot: need at least 2 points");
    Rng rng(seed);
    TimeSeries ts;
    ts.name = "triknot";
    ts.timestamps = irregular_times(rng, n_points, kTwoPi);
    ts.values = Tensor::zeros({n_points, 2});
    for (std::int64_t i = 0; i < n_points; ++i) {
        const double t = ts.timestamps[static_cast<std::size_t>(i)];
        ts.values.at(i, 0) = std::sin(t) + 2.0 * std::sin(2.0 * t);
        ts.values.at(i, 1) = std::cos(t) - 2.0 * std::cos(2.0 * t);
    }
    return ts;
}

TimeSeries subsample_irregular(const TimeSeries& ts, double keep_fraction, std::uint64_t seed) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
        throw UsageError("subsample_irregular: keep_fraction must be in (0, 1]");
    }
    const auto n = ts.n_points();
    const auto keep = static_cast<std::int64_t>(
        std::ceil(keep_fraction * static_cast<double>(n) - 1e-12));
    if (keep >= n) return ts;

    std::vector<std::int64_t> idx(static_cast<std::size_t>(n - 1));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i + 1);
    // Fisher-Yates prefix of keep-1 draws from indices 1..n-1; index 0 always kept.
    Rng rng(seed);
    for (std::int64_t i = 0; i < keep - 1; ++i) {
        const auto j = i + static_cast<std::int64_t>(
                               rng.next_u64() % static_cast<std::uint64_t>(idx.size() - static_cast<std::size_t>(i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    std::vector<std::int64_t> chosen(idx.begin(), idx.begin() + (keep - 1));
    chosen.push_back(0);
    std::sort(chosen.begin(), chosen.end());

    TimeSeries out;
    out.name = ts.name;
    out.label = ts.label;
    out.values = Tensor::zeros({keep, ts.d_obs()});
    out.timestamps.reserve(static_cast<std::size_t>(keep));
    for (std::int64_t r = 0; r < keep; ++r) {
        const auto src = chosen[static_cast<std::size_t>(r)];
        out.timestamps.push_back(ts.timestamps[static_cast<std::size_t>(src)]);
        for (std::int64_t j = 0; j < ts.d_obs(); ++j) out.values.at(r, j) = ts.values.at(src, j);
    }
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, std::size_t row) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError("non-numeric cell '" + s + "' at row " + std::to_string(row));
    }
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& time_column,
                 const std::vector<std::string>& value_columns,
                 const std::optional<std::string>& label_column,
                 const std::string& series_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty file: " + path);
    const auto header = split_line(line);

    auto col_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw FormatError("missing column '" + name + "' in " + path);
    };

    const std::size_t c_series = col_index(series_column);
    const std::size_t c_time = col_index(time_column);
    std::vector<std::size_t> c_vals;
    for (const auto& v : value_columns) c_vals.push_back(col_index(v));
    std::optional<std::size_t> c_label;
    if (label_column) c_label = col_index(*label_column);

    struct Rows {
        std::vector<double> times;
        std::vector<std::vector<double>> vals;
        std::optional<std::int64_t> label;
    };
    std::vector<std::string> order;
    std::map<std::string, Rows> by_series;

    std::size_t row_num = 1;
    while (std::getline(in, line)) {
        ++row_num;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) {
            throw FormatError("row " + std::to_string(row_num) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(header.size()));
        }
        const std::string& sid = fields[c_series];
        if (!by_series.count(sid)) order.push_back(sid);
        Rows& rows = by_series[sid];
        rows.times.push_back(parse_double(fields[c_time], row_num));
        std::vector<double> v;
        v.reserve(c_vals.size());
        for (auto ci : c_vals) v.push_back(parse_double(fields[ci], row_num));
        rows.vals.push_back(std::move(v));
        if (c_label) {
            rows.label = static_cast<std::int64_t>(parse_double(fields[*c_label], row_num));
        }
    }
    if (order.empty()) throw FormatError("no data rows in " + path);

    Dataset ds;
    ds.d_obs = static_cast<std::int64_t>(value_columns.size());
    std::int64_t max_label = -1;
    for (const auto& sid : order) {
        const Rows& rows = by_series[sid];
        const auto n = static_cast<std::int64_t>(rows.times.size());
        TimeSeries ts;
        ts.name = sid;
        ts.timestamps = rows.times;
        ts.label = rows.label;
        ts.values = Tensor::zeros({n, ds.d_obs});
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::int64_t j = 0; j < ds.d_obs; ++j) {
                ts.values.at(i, j) = rows.vals[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
        check_monotone(ts);
        if (ts.label) max_label = std::max(max_label, *ts.label);
        ds.series.push_back(std::move(ts));
    }
    if (max_label >= 0) ds.n_classes = max_label + 1;
    return ds;
}

Dataset load_csv_auto(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty file: " + path);
    const auto header = split_line(line);
    std::vector<std::string> value_cols;
    bool has_label = false;
    for (const auto& h : header) {
        if (h == "series_id" || h == "time") continue;
        if (h == "label") {
            has_label = true;
            continue;
        }
        value_cols.push_back(h);
    }
    if (value_cols.empty()) throw FormatError("no value columns in " + path);
    return load_csv(path, "time", value_cols,
                    has_label ? std::optional<std::string>("label") : std::nullopt);
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const bool has_label = !ds.series.empty() && ds.series.front().label.has_value();
    out << "series_id,time";
    for (std::int64_t j = 0; j < ds.d_obs; ++j) out << ",v" << (j + 1);
    if (has_label) out << ",label";
    out << "\n";
    char buf[64];
    for (const auto& ts : ds.series) {
        for (std::int64_t i = 0; i < ts.n_points(); ++i) {
            out << ts.name;
            std::snprintf(buf, sizeof buf, "%.17g", ts.timestamps[static_cast<std::size_t>(i)]);
            out << "," << buf;
            for (std::int64_t j = 0; j < ts.d_obs(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", ts.values.at(i, j));
                out << "," << buf;
            }
            if (has_label) out << "," << *ts.label;
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

Dataset normalize(const Dataset& ds, NormStats& stats_out) {
    if (ds.series.empty()) throw DataError("normalize: empty dataset");
    const auto d = ds.d_obs;
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    std::vector<double> sq(static_cast<std::size_t>(d), 0.0);
    std::int64_t n = 0;
    for (const auto& ts : ds.series) {
        for (std::int64_t i = 0; i < ts.n_points(); ++i) {
            for (std::int64_t j = 0; j < d; ++j) {
                mean[static_cast<std::size_t>(j)] += ts.values.at(i, j);
            }
        }
        n += ts.n_points();
    }
    if (n < 2) throw DataError("normalize: need at least 2 samples");
    for (auto& m : mean) m /= static_cast<double>(n);
    for (const auto& ts : ds.series) {
        for (std::int64_t i = 0; i < ts.n_points(); ++i) {
            for (std::int64_t j = 0; j < d; ++j) {
                const double c = ts.values.at(i, j) - mean[static_cast<std::size_t>(j)];
                sq[static_cast<std::size_t>(j)] += c * c;
            }
        }
    }
    stats_out.mean = mean;
    stats_out.sd.resize(static_cast<std::size_t>(d));
    for (std::int64_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(sq[static_cast<std::size_t>(j)] / static_cast<double>(n));
        if (sd == 0.0) throw DataError("normalize: dimension " + std::to_string(j) + " has zero variance");
        stats_out.sd[static_cast<std::size_t>(j)] = sd;
    }

    Dataset out = ds;
    for (auto& ts : out.series) {
        for (std::int64_t i = 0; i < ts.n_points(); ++i) {
            for (std::int64_t j = 0; j < d; ++j) {
                ts.values.at(i, j) = (ts.values.at(i, j) - stats_out.mean[static_cast<std::size_t>(j)]) /
                                     stats_out.sd[static_cast<std::size_t>(j)];
            }
        }
    }
    return out;
}

Dataset denormalize(const Dataset& ds, const NormStats& stats) {
    Dataset out = ds;
    for (auto& ts : out.series) {
        for (std::int64_t i = 0; i < ts.n_points(); ++i) {
            for (std::int64_t j = 0; j < ts.d_obs(); ++j) {
                ts.values.at(i, j) = ts.values.at(i, j) * stats.sd[static_cast<std::size_t>(j)] +
                                     stats.mean[static_cast<std::size_t>(j)];
            }
        }
    }
    return out;
}

}  // namespace odernn
