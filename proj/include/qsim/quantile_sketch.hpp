#pragma once

#include <cstdint>
#include <vector>

namespace qsim {

/// Mergeable streaming quantile summary with a deterministic worst-case
/// rank error of at most eps*n.
///
/// Multi-level compacting buffers: level i holds items of weight 2^i; a
/// full buffer is sorted and every other element promoted one level, with
/// the starting parity alternating per level between compactions. Each
/// collapse perturbs any rank by at most the item weight, which bounds the
/// total error by (#levels)*n/k; the buffer capacity k = 32/eps keeps that
/// under eps*n for any stream shorter than k*2^32 items.
class QuantileSketch {
public:
    explicit QuantileSketch(double eps = 0.01);

    void insert(double v);
    void merge(const QuantileSketch& other);

    /// Value whose rank is within eps*n of ceil(q*n). Throws EMPTY_INPUT
    /// when nothing has been inserted.
    double quantile(double q) const;

    uint64_t count() const { return count_; }
    double epsilon() const { return eps_; }
    size_t retained() const;

private:
    void add_weighted(double v, size_t level);
    void compact(size_t level);

    double eps_;
    size_t capacity_;
    uint64_t count_ = 0;
    std::vector<std::vector<double>> levels_;
    std::vector<bool> parity_;
};

} // namespace qsim
