#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "stance/error.hpp"

namespace stance {

/// Sorted (index, value) pairs with strictly increasing indices.
class SparseVector {
public:
    using Entry = std::pair<std::size_t, double>;

    SparseVector() = default;

    /// Takes arbitrary-order entries; duplicate indices are rejected, zeros dropped.
    explicit SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end());
        for (std::size_t i = 1; i < entries_.size(); ++i)
            if (entries_[i].first == entries_[i - 1].first)
                throw PreconditionError("SparseVector: duplicate index " + std::to_string(entries_[i].first));
        std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
    }

    SparseVector(std::initializer_list<Entry> entries) : SparseVector(std::vector<Entry>(entries)) {}

    /// Dense values to sparse; zeros skipped.
    static SparseVector from_dense(std::span<const double> dense) {
        std::vector<Entry> e;
        for (std::size_t i = 0; i < dense.size(); ++i)
            if (dense[i] != 0.0) e.emplace_back(i, dense[i]);
        return SparseVector(std::move(e));
    }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// One past the largest index, 0 for the empty vector.
    std::size_t extent() const { return entries_.empty() ? 0 : entries_.back().first + 1; }

    double get(std::size_t index) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{index, -1e308});
        return it != entries_.end() && it->first == index ? it->second : 0.0;
    }

    double dot(const SparseVector& o) const {
        double s = 0.0;
        auto a = entries_.begin(), b = o.entries_.begin();
        while (a != entries_.end() && b != o.entries_.end()) {
            if (a->first < b->first) ++a;
            else if (b->first < a->first) ++b;
            else s += (a++)->second * (b++)->second;
        }
        return s;
    }

    /// Dot product with a dense vector; indices past its end contribute zero.
    double dot(std::span<const double> dense) const {
        double s = 0.0;
        for (const auto& [i, v] : entries_)
            if (i < dense.size()) s += v * dense[i];
        return s;
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    std::vector<Entry> entries_;
};

}  // namespace stance
