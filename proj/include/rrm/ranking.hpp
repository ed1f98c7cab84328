#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "rrm/index.hpp"

namespace rrm {

struct ScoredDoc {
    DocId doc;
    double score;
};

/// Descending score; ties broken by ascending docno.
struct RankedList {
    std::vector<ScoredDoc> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

/// Keeps the best `depth` of `scored` under (score desc, docno asc).
inline RankedList select_top(std::vector<ScoredDoc> scored, const InvertedIndex& index, std::size_t depth) {
    auto better = [&](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return index.document(a.doc).docno < index.document(b.doc).docno;
    };
    if (scored.size() > depth) {
        std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(depth), scored.end(),
                         better);
        scored.resize(depth);
    }
    std::sort(scored.begin(), scored.end(), better);
    return RankedList{std::move(scored)};
}

}  // namespace rrm
