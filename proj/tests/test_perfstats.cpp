#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "qsim/error.hpp"
#include "qsim/perfstats.hpp"
#include "qsim/quantile_sketch.hpp"

using namespace qsim;

namespace {

double sorted_median_oracle(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

// rank interval of value v in the sorted oracle (1-based, inclusive)
std::pair<int64_t, int64_t> rank_interval(const std::vector<double>& sorted, double v) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), v);
    auto hi = std::upper_bound(sorted.begin(), sorted.end(), v);
    return {lo - sorted.begin() + 1, hi - sorted.begin()};
}

void check_sketch_against_oracle(const QuantileSketch& sketch, std::vector<double> data,
                                 double eps) {
    std::sort(data.begin(), data.end());
    int64_t n = static_cast<int64_t>(data.size());
    int64_t budget = static_cast<int64_t>(eps * static_cast<double>(n));
    for (int pct = 1; pct <= 99; ++pct) {
        double q = pct / 100.0;
        double v = sketch.quantile(q);
        auto [lo, hi] = rank_interval(data, v);
        REQUIRE(lo <= hi); // v must exist in the stream
        int64_t target = static_cast<int64_t>(std::ceil(q * static_cast<double>(n)));
        bool within = lo - budget <= target && target <= hi + budget;
        if (!within) {
            CAPTURE(q);
            CAPTURE(v);
            CAPTURE(target);
            CAPTURE(lo);
            CAPTURE(hi);
        }
        REQUIRE(within);
    }
}

} // namespace

TEST_CASE("median basics") {
    CHECK(median(std::vector<double>{5}) == 5);
    CHECK(median(std::vector<double>{1, 2, 3, 4}) == 2.5);
    CHECK(median(std::vector<double>{3, 1, 2}) == 2);
    CHECK_THROWS_AS(median(std::vector<double>{}), Error);
}

TEST_CASE("median equals sort oracle on random data") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> xs;
        size_t n = 1 + rng() % 400;
        for (size_t i = 0; i < n; ++i) xs.push_back(static_cast<double>(rng() % 100000));
        CHECK(median(xs) == sorted_median_oracle(xs));
    }
    std::vector<double> big;
    std::mt19937_64 rng2(4);
    for (int i = 0; i < 10000; ++i) big.push_back(static_cast<double>(rng2() % 1000000));
    CHECK(median(big) == sorted_median_oracle(big));
}

TEST_CASE("mad basics") {
    CHECK(mad(std::vector<double>{7, 7, 7}) == 0);
    CHECK(mad(std::vector<double>{1, 2, 3}) == 1); // deviations {1,0,1}
    // translation invariance
    std::vector<double> xs{4, 9, 3, 15, 8};
    std::vector<double> shifted;
    for (double x : xs) shifted.push_back(x + 100);
    CHECK(mad(xs) == mad(shifted));
    // consistency-constant option
    CHECK(mad(std::vector<double>{1, 2, 3}, true) == doctest::Approx(1.4826));
}

TEST_CASE("slo_range hand-computed example") {
    SloRange r = slo_range(std::vector<double>{80, 90, 100, 110, 120});
    CHECK(r.median_ms == 100);
    CHECK(r.mad_ms == 10);
    CHECK(r.lower_ms == 70);
    CHECK(r.upper_ms == 130);
    CHECK(r.cov == doctest::Approx(0.1));
    CHECK(r.trusted);
}

TEST_CASE("slo_range constant data") {
    std::vector<double> xs(9, 100.0);
    SloRange r = slo_range(xs);
    CHECK(r.median_ms == 100);
    CHECK(r.mad_ms == 0);
    CHECK(r.lower_ms == 100);
    CHECK(r.upper_ms == 100);
    CHECK(r.cov == 0);
    CHECK(r.trusted);
}

TEST_CASE("slo_range trust rules") {
    // fewer than 5 samples: untrusted
    CHECK_FALSE(slo_range(std::vector<double>{100, 100, 100}).trusted);
    // the CoV clause itself
    CHECK_FALSE(slo_trusted(100, 1.0001));
    CHECK(slo_trusted(5, 1.0));
    CHECK_FALSE(slo_trusted(4, 0.0));
    // cov == 1 is reachable and sits exactly on the trusted boundary
    SloRange edge = slo_range(std::vector<double>{0, 0, 0, 1000, 1000, 1000});
    CHECK(edge.cov == doctest::Approx(1.0));
    CHECK(edge.trusted);
    // lower bound clamps at zero
    std::vector<double> wide{1, 2, 3, 4, 1000, 2000, 4000};
    CHECK(slo_range(wide).lower_ms == 0);
}

TEST_CASE("unscaled CoV never exceeds 1 on non-negative data") {
    // at least ceil(n/2)+1 deviations sit at or below the median, so
    // MAD <= median for any non-negative sample
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> xs;
        size_t n = 1 + rng() % 30;
        for (size_t i = 0; i < n; ++i) {
            xs.push_back(double(rng() % 10) < 3 ? 0.0 : double(rng() % 100000));
        }
        SloRange r = slo_range(xs);
        CHECK(r.cov <= 1.0);
    }
}

TEST_CASE("is_violation boundaries") {
    SloRange r = slo_range(std::vector<double>{80, 90, 100, 110, 120});
    CHECK(is_violation(r, 131));
    CHECK_FALSE(is_violation(r, 130)); // inclusive upper bound
    CHECK(is_violation(r, 50));        // two-sided range
    CHECK_FALSE(is_violation(r, 70)); // inclusive lower bound

    SloRange untrusted = slo_range(std::vector<double>{100, 100});
    CHECK_THROWS_AS(is_violation(untrusted, 100), Error);
}

TEST_CASE("slo scale equivariance") {
    std::vector<double> xs{80, 90, 100, 110, 120, 95, 105};
    SloRange base = slo_range(xs);
    double k = 3.5;
    std::vector<double> scaled;
    for (double x : xs) scaled.push_back(x * k);
    SloRange s = slo_range(scaled);
    CHECK(s.median_ms == doctest::Approx(base.median_ms * k));
    CHECK(s.mad_ms == doctest::Approx(base.mad_ms * k));
    CHECK(s.lower_ms == doctest::Approx(base.lower_ms * k));
    CHECK(s.upper_ms == doctest::Approx(base.upper_ms * k));
    CHECK(s.cov == doctest::Approx(base.cov));
    for (double probe : {60.0, 70.0, 100.0, 130.0, 131.0, 200.0}) {
        CHECK(is_violation(base, probe) == is_violation(s, probe * k));
    }
}

TEST_CASE("violation rate on constant-plus-noise data is zero") {
    std::mt19937_64 rng(5);
    std::vector<double> xs;
    for (int i = 0; i < 200; ++i) xs.push_back(1000.0 + static_cast<double>(rng() % 11) - 5.0);
    SloRange r = slo_range(xs);
    REQUIRE(r.trusted);
    int violations = 0;
    for (double x : xs) {
        if (is_violation(r, x)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("quantile sketch single value") {
    QuantileSketch s;
    s.insert(42.0);
    CHECK(s.quantile(0.0) == 42.0);
    CHECK(s.quantile(0.5) == 42.0);
    CHECK(s.quantile(1.0) == 42.0);
}

TEST_CASE("quantile sketch empty input") {
    QuantileSketch s;
    CHECK_THROWS_AS(s.quantile(0.5), Error);
}

TEST_CASE("quantile sketch exact while under capacity") {
    QuantileSketch s(0.01);
    for (int i = 1; i <= 100; ++i) s.insert(static_cast<double>(i));
    CHECK(s.quantile(0.5) == 50.0);
    CHECK(s.quantile(0.01) == 1.0);
    CHECK(s.quantile(1.0) == 100.0);
}

TEST_CASE("quantile sketch rank error on adversarial streams") {
    const double eps = 0.01;
    const size_t n = 100000;

    std::vector<double> sorted_stream, reversed, duplicates, uniform;
    std::mt19937_64 rng(13);
    for (size_t i = 0; i < n; ++i) {
        sorted_stream.push_back(static_cast<double>(i));
        reversed.push_back(static_cast<double>(n - i));
        duplicates.push_back(static_cast<double>(i % 17));
        uniform.push_back(static_cast<double>(rng() % 1000000));
    }

    for (const auto* stream : {&sorted_stream, &reversed, &duplicates, &uniform}) {
        QuantileSketch s(eps);
        for (double v : *stream) s.insert(v);
        CHECK(s.count() == n);
        CHECK(s.retained() < n / 4); // it must actually compress
        check_sketch_against_oracle(s, *stream, eps);
    }
}

TEST_CASE("quantile sketch merge stays within twice the rank error") {
    const double eps = 0.01;
    std::mt19937_64 rng(17);
    std::vector<double> a, b;
    for (int i = 0; i < 60000; ++i) a.push_back(static_cast<double>(rng() % 500000));
    for (int i = 0; i < 40000; ++i) b.push_back(static_cast<double>(rng() % 500000) + 250000.0);

    QuantileSketch sa(eps), sb(eps);
    for (double v : a) sa.insert(v);
    for (double v : b) sb.insert(v);
    sa.merge(sb);

    std::vector<double> all = a;
    all.insert(all.end(), b.begin(), b.end());
    check_sketch_against_oracle(sa, all, 2 * eps);
}
