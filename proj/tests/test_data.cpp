#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "odernn/data.hpp"

using namespace odernn;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/odernn_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("spiral generator counts, base point, determinism") {
    Dataset ds = gen_spiral(10, 25, 7, 0.01);
    CHECK(ds.series.size() == 10);
    CHECK(ds.d_obs == 2);
    for (const auto& ts : ds.series) {
        CHECK(ts.n_points() == 25);
        for (std::size_t i = 1; i < ts.timestamps.size(); ++i) {
            CHECK(ts.timestamps[i] > ts.timestamps[i - 1]);
        }
        CHECK((ts.label == 0 || ts.label == 1));
    }

    double x, y;
    spiral_point(0.0, false, x, y);
    CHECK(x == 0.2);
    CHECK(y == 0.0);
    spiral_point(0.0, true, x, y);
    CHECK(x == 0.2);
    CHECK(y == 0.0);

    Dataset again = gen_spiral(10, 25, 7, 0.01);
    for (std::size_t s = 0; s < ds.series.size(); ++s) {
        CHECK(ds.series[s].values.data == again.series[s].values.data);
        CHECK(ds.series[s].timestamps == again.series[s].timestamps);
    }
}

TEST_CASE("eight curve values") {
    // exact values of the parametrization
    CHECK(std::sin(0.0) == 0.0);
    TimeSeries ts = gen_eight_curve(50, 3);
    for (std::int64_t i = 0; i < ts.n_points(); ++i) {
        const double t = ts.timestamps[static_cast<std::size_t>(i)];
        CHECK(ts.values.at(i, 0) == std::sin(t));
        CHECK(ts.values.at(i, 1) == std::sin(t) * std::cos(t));
    }
    // the dense curve passes through the origin twice per period: x = sin t
    // vanishes at t = 0 and t = pi within [0, 2*pi)
    int roots = 0;
    const int n = 10000;
    double prev = std::sin(0.0);
    for (int i = 1; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        const double cur = std::sin(t);
        if ((prev <= 0.0 && cur > 0.0) || (prev >= 0.0 && cur < 0.0)) ++roots;
        prev = cur;
    }
    CHECK(roots == 2);
}

TEST_CASE("triknot values and 3-fold symmetry") {
    TimeSeries ts = gen_triknot(20, 4);
    TimeSeries again = gen_triknot(20, 4);
    CHECK(ts.values.data == again.values.data);

    // t = 0 maps to (0, -1)
    CHECK(std::sin(0.0) + 2.0 * std::sin(0.0) == 0.0);
    CHECK(std::cos(0.0) - 2.0 * std::cos(0.0) == -1.0);

    // rotating the dense curve by -2*pi/3 maps it onto itself: the point at
    // parameter t + 2*pi/3 equals the rotation of the point at t
    const double ang = -2.0 * std::numbers::pi / 3.0;
    const double ca = std::cos(ang), sa = std::sin(ang);
    for (int i = 0; i < 200; ++i) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / 200.0;
        const double x = std::sin(t) + 2.0 * std::sin(2.0 * t);
        const double y = std::cos(t) - 2.0 * std::cos(2.0 * t);
        const double t2 = t + 2.0 * std::numbers::pi / 3.0;
        const double x2 = std::sin(t2) + 2.0 * std::sin(2.0 * t2);
        const double y2 = std::cos(t2) - 2.0 * std::cos(2.0 * t2);
        CHECK(std::abs(x2 - (ca * x - sa * y)) < 1e-9);
        CHECK(std::abs(y2 - (sa * x + ca * y)) < 1e-9);
    }
}

TEST_CASE("subsample_irregular") {
    TimeSeries ts = gen_eight_curve(100, 5);
    CHECK(subsample_irregular(ts, 1.0, 1).timestamps == ts.timestamps);

    TimeSeries sub = subsample_irregular(ts, 0.3, 1);
    CHECK(sub.n_points() == 30);
    CHECK(sub.timestamps.front() == ts.timestamps.front());
    for (std::size_t i = 1; i < sub.timestamps.size(); ++i) {
        CHECK(sub.timestamps[i] > sub.timestamps[i - 1]);
    }
    TimeSeries sub2 = subsample_irregular(ts, 0.3, 1);
    CHECK(sub.timestamps == sub2.timestamps);
}

TEST_CASE("csv round trip and loader errors") {
    TempFile f("roundtrip.csv");
    Dataset ds = gen_spiral(3, 10, 2, 0.0);
    save_csv(ds, f.path);
    Dataset loaded = load_csv_auto(f.path);
    CHECK(loaded.series.size() == 3);
    CHECK(loaded.d_obs == 2);
    CHECK(loaded.n_classes == 2);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(loaded.series[s].timestamps == ds.series[s].timestamps);
        CHECK(loaded.series[s].values.data == ds.series[s].values.data);
        CHECK(loaded.series[s].label == ds.series[s].label);
    }

    TempFile tiny("tiny.csv");
    {
        std::ofstream out(tiny.path);
        out << "series_id,time,v1\na,0,0.5\na,1,0.6\n";
    }
    Dataset t = load_csv(tiny.path, "time", {"v1"});
    CHECK(t.series.size() == 1);
    CHECK(t.series[0].n_points() == 2);

    CHECK_THROWS_AS(load_csv(tiny.path, "time", {"missing"}), FormatError);

    TempFile bad("bad.csv");
    {
        std::ofstream out(bad.path);
        out << "series_id,time,v1\na,0,0.5\na,1,oops\n";
    }
    CHECK_THROWS_AS(load_csv(bad.path, "time", {"v1"}), FormatError);

    TempFile shuffled("shuffled.csv");
    {
        std::ofstream out(shuffled.path);
        out << "series_id,time,v1\na,1,0.5\na,0,0.6\n";
    }
    CHECK_THROWS_AS(load_csv(shuffled.path, "time", {"v1"}), DataError);
}

TEST_CASE("normalize and denormalize") {
    Dataset ds;
    ds.d_obs = 1;
    TimeSeries ts;
    ts.name = "a";
    ts.timestamps = {0.0, 1.0};
    ts.values = Tensor({2, 1}, {0.0, 10.0});
    ds.series.push_back(ts);

    NormStats stats;
    Dataset out = normalize(ds, stats);
    CHECK(stats.mean[0] == 5.0);
    CHECK(stats.sd[0] == 5.0);
    CHECK(out.series[0].values.at(0, 0) == -1.0);
    CHECK(out.series[0].values.at(1, 0) == 1.0);

    Dataset back = denormalize(out, stats);
    for (std::int64_t i = 0; i < 2; ++i) {
        CHECK(std::abs(back.series[0].values.at(i, 0) - ds.series[0].values.at(i, 0)) < 1e-10);
    }

    // already standardized data is a fixed point
    NormStats stats2;
    Dataset twice = normalize(out, stats2);
    for (std::int64_t i = 0; i < 2; ++i) {
        CHECK(std::abs(twice.series[0].values.at(i, 0) - out.series[0].values.at(i, 0)) < 1e-12);
    }

    // constant dimension is a data error
    Dataset constant = ds;
    constant.series[0].values = Tensor({2, 1}, {3.0, 3.0});
    NormStats stats3;
    CHECK_THROWS_AS(normalize(constant, stats3), DataError);
}
