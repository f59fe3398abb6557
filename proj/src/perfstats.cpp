#include "qsim/perfstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsim/error.hpp"

namespace qsim {

double median(std::span<const double> xs) {
    if (xs.empty()) throw Error(ErrorCode::EmptyInput, "median of empty input");
    std::vector<double> copy(xs.begin(), xs.end());
    size_t n = copy.size();
    size_t mid = n / 2;
    std::nth_element(copy.begin(), copy.begin() + mid, copy.end());
    double hi = copy[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(copy.begin(), copy.begin() + mid);
    return (lo + hi) / 2.0;
}

double mad(std::span<const double> xs, bool scaled) {
    if (xs.empty()) throw Error(ErrorCode::EmptyInput, "mad of empty input");
    double med = median(xs);
    std::vector<double> dev;
    dev.reserve(xs.size());
    for (double x : xs) dev.push_back(std::abs(x - med));
    double m = median(dev);
    return scaled ? m * 1.4826 : m;
}

bool slo_trusted(uint64_t sample_count, double cov) {
    return sample_count >= kSloMinSamples && cov <= 1.0;
}

SloRange slo_range(std::span<const double> durations_ms) {
    if (durations_ms.empty()) throw Error(ErrorCode::EmptyInput, "slo_range of empty input");
    SloRange r;
    r.sample_count = durations_ms.size();
    r.median_ms = median(durations_ms);
    r.mad_ms = mad(durations_ms);
    r.lower_ms = std::max(0.0, r.median_ms - 3.0 * r.mad_ms);
    r.upper_ms = r.median_ms + 3.0 * r.mad_ms;
    if (r.median_ms > 0) {
        r.cov = r.mad_ms / r.median_ms;
    } else {
        r.cov = r.mad_ms == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    r.trusted = slo_trusted(r.sample_count, r.cov);
    return r;
}

SloRange slo_range(std::span<const int64_t> durations_ms) {
    std::vector<double> xs(durations_ms.begin(), durations_ms.end());
    return slo_range(std::span<const double>(xs));
}

bool is_violation(const SloRange& r, double duration_ms) {
    if (!r.trusted) {
        throw Error(ErrorCode::UntrustedRange,
                    "SLO range is untrusted (n=" + std::to_string(r.sample_count) + ")");
    }
    return duration_ms > r.upper_ms || duration_ms < r.lower_ms;
}

} // namespace qsim
