#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "rrm/index.hpp"

namespace rrm {

/// Sparse real vector over term ids, entries ascending by term id.
struct SparseVector {
    std::vector<std::pair<TermId, double>> entries;

    double norm() const {
        double s = 0.0;
        for (const auto& [t, x] : entries) s += x * x;
        return std::sqrt(s);
    }

    bool is_zero() const {
        return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.second == 0.0; });
    }

    double operator[](TermId term) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), term,
                                   [](const auto& e, TermId t) { return e.first < t; });
        return (it != entries.end() && it->first == term) ? it->second : 0.0;
    }
};

inline SparseVector normalized(SparseVector v) {
    const double n = v.norm();
    if (n > 0.0)
        for (auto& e : v.entries) e.second /= n;
    return v;
}

inline double dot(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    auto i = a.entries.begin();
    auto j = b.entries.begin();
    while (i != a.entries.end() && j != b.entries.end()) {
        if (i->first < j->first)
            ++i;
        else if (j->first < i->first)
            ++j;
        else
            s += (i++)->second * (j++)->second;
    }
    return s;
}

inline double cosine(const SparseVector& a, const SparseVector& b) { return dot(a, b) / (a.norm() * b.norm()); }

}  // namespace rrm
