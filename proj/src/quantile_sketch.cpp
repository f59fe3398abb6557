#include "qsim/quantile_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsim/error.hpp"

namespace qsim {

QuantileSketch::QuantileSketch(double eps) : eps_(eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw Error(ErrorCode::TypeError, "quantile sketch epsilon must be in (0,1)");
    }
    capacity_ = static_cast<size_t>(std::ceil(32.0 / eps_));
    if (capacity_ % 2 != 0) ++capacity_;
    capacity_ = std::max<size_t>(capacity_, 8);
}

size_t QuantileSketch::retained() const {
    size_t n = 0;
    for (const auto& l : levels_) n += l.size();
    return n;
}

void QuantileSketch::insert(double v) {
    add_weighted(v, 0);
    ++count_;
}

void QuantileSketch::add_weighted(double v, size_t level) {
    if (levels_.size() <= level) {
        levels_.resize(level + 1);
        parity_.resize(level + 1, false);
    }
    levels_[level].push_back(v);
    if (levels_[level].size() >= capacity_) compact(level);
}

void QuantileSketch::compact(size_t level) {
    auto& buf = levels_[level];
    std::sort(buf.begin(), buf.end());
    size_t even = buf.size() & ~size_t(1);
    size_t offset = parity_[level] ? 1 : 0;
    parity_[level] = !parity_[level];
    std::vector<double> promoted;
    promoted.reserve(even / 2);
    for (size_t i = offset; i < even; i += 2) promoted.push_back(buf[i]);
    // An odd trailing element keeps its level and weight.
    if (even < buf.size()) {
        double leftover = buf.back();
        buf.clear();
        buf.push_back(leftover);
    } else {
        buf.clear();
    }
    for (double v : promoted) add_weighted(v, level + 1);
}

void QuantileSketch::merge(const QuantileSketch& other) {
    for (size_t level = 0; level < other.levels_.size(); ++level) {
        for (double v : other.levels_[level]) add_weighted(v, level);
    }
    count_ += other.count_;
}

double QuantileSketch::quantile(double q) const {
    if (count_ == 0) throw Error(ErrorCode::EmptyInput, "quantile of empty sketch");
    q = std::clamp(q, 0.0, 1.0);

    std::vector<std::pair<double, uint64_t>> items; // (value, weight)
    items.reserve(retained());
    for (size_t level = 0; level < levels_.size(); ++level) {
        uint64_t w = uint64_t(1) << level;
        for (double v : levels_[level]) items.emplace_back(v, w);
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    uint64_t total = 0;
    for (const auto& [v, w] : items) total += w;
    uint64_t target = static_cast<uint64_t>(std::ceil(q * static_cast<double>(total)));
    target = std::clamp<uint64_t>(target, 1, total);

    uint64_t cum = 0;
    for (const auto& [v, w] : items) {
        cum += w;
        if (cum >= target) return v;
    }
    return items.back().first;
}

} // namespace qsim
