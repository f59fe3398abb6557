#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qsim {

/// Exact median; even-length input averages the two middle order statistics.
/// Throws EMPTY_INPUT on an empty span.
double median(std::span<const double> xs);

/// Median absolute deviation, unscaled (no 1.4826 consistency constant).
/// Pass scaled=true to apply the constant; the default matches the SLO
/// definition used throughout.
double mad(std::span<const double> xs, bool scaled = false);

/// Implicit SLO for one query cluster: median ± 3·MAD over historical
/// running times. CoV = MAD/median; a cluster with CoV > 1 is too unstable
/// to trust, as is one with fewer than min_samples runs.
///
/// The MAD here is unscaled, so under normality 3·MAD ≈ 2.02σ and the range
/// covers about 95.7% of runs, not the 99.7% that 3σ would give; applying
/// the 1.4826 consistency constant (mad(xs, true)) recovers the 3σ reading.
struct SloRange {
    double median_ms = 0;
    double mad_ms = 0;
    double lower_ms = 0; // max(0, median - 3*mad)
    double upper_ms = 0; // median + 3*mad
    double cov = 0;
    uint64_t sample_count = 0;
    bool trusted = false;
};

inline constexpr uint64_t kSloMinSamples = 5;

/// The trust rule: enough samples and CoV at most 1. Note that with the
/// unscaled MAD over non-negative durations CoV never exceeds 1 (at least
/// half the deviations sit at or below the median), so in practice the
/// sample floor is the binding condition; the CoV clause guards any direct
/// construction of ranges.
bool slo_trusted(uint64_t sample_count, double cov);

SloRange slo_range(std::span<const double> durations_ms);
SloRange slo_range(std::span<const int64_t> durations_ms);

/// True iff the duration falls strictly outside [lower, upper]; bounds are
/// inclusive. Throws UNTRUSTED_RANGE when the range is not trusted.
bool is_violation(const SloRange& r, double duration_ms);

} // namespace qsim
