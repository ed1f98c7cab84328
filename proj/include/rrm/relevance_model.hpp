#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include "rrm/error.hpp"
#include "rrm/index.hpp"
#include "rrm/language_model.hpp"
#include "rrm/ranking.hpp"
#include "rrm/sparse_vector.hpp"

namespace rrm {

struct TermWeight {
    TermId term;
    double weight;

    bool operator==(const TermWeight&) const = default;
};

/// P(w|Q) over the expansion terms, stored by descending weight with ties
/// in ascending term id.
struct RelevanceModel {
    std::vector<TermWeight> weights;
    std::vector<TermId> source_query;
    std::size_t fb_docs = 0;

    std::size_t terms() const { return weights.size(); }

    double weight(TermId term) const {
        for (const auto& tw : weights)
            if (tw.term == term) return tw.weight;
        return 0.0;
    }
};

namespace detail {

inline void sort_weights(std::vector<TermWeight>& w) {
    std::sort(w.begin(), w.end(), [](const TermWeight& a, const TermWeight& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.term < b.term;
    });
}

inline void normalize_weights(std::vector<TermWeight>& w) {
    double total = 0.0;
    for (const auto& tw : w) total += tw.weight;
    for (auto& tw : w) tw.weight /= total;
}

}  // namespace detail

/// Ranks every document by query likelihood, exactly, via postings of the query terms.
/// `postings_ops` (if given) is incremented once per postings entry visited.
inline RankedList rank_query_likelihood(std::span<const TermId> query, const InvertedIndex& index,
                                        const CollectionModel& collection, const SmoothingConfig& smoothing,
                                        std::size_t depth, std::uint64_t* postings_ops = nullptr) {
    WeightedLogScorer scorer(query_term_weights(query, collection), smoothing, collection);
    const auto docs = index.documents();
    std::vector<double> acc(docs.size(), 0.0);
    std::uint64_t ops = 0;
    for (const auto& [term, weight] : scorer.terms()) {
        for (const auto& p : index.postings(term))
            acc[p.doc] += scorer.delta(term, weight, p.count, docs[p.doc].length);
        ops += index.postings(term).size();
    }
    if (postings_ops) *postings_ops += ops;
    std::vector<ScoredDoc> scored(docs.size());
    for (DocId d = 0; d < docs.size(); ++d) scored[d] = {d, scorer.background(docs[d].length) + acc[d]};
    return select_top(std::move(scored), index, depth);
}

/// RM1 estimate from the top `fb_docs` documents: P(D|Q) is the softmax of
/// their log query likelihoods (uniform prior), and
///   P(w|Q) = sum_D P(D|Q) P(w|D)
/// over every term occurring in the feedback set, renormalized.
inline RelevanceModel estimate_rm(std::span<const TermId> query, const InvertedIndex& index,
                                  const CollectionModel& collection, const SmoothingConfig& smoothing,
                                  std::size_t fb_docs) {
    smoothing.validate();
    const auto feedback = rank_query_likelihood(query, index, collection, smoothing, fb_docs);
    if (feedback.empty()) throw InputError("empty feedback set");

    double max_score = feedback.entries.front().score;
    double z = 0.0;
    for (const auto& e : feedback.entries) z += std::exp(e.score - max_score);

    // P(w|D) = unseen(w|D) + seen-increment, and unseen(w|D) = P(w|C) * a_D
    // for both smoothing kinds; a_D's posterior mean is accumulated once.
    std::unordered_map<TermId, double> seen;
    double background_scale = 0.0;
    for (const auto& e : feedback.entries) {
        const double posterior = std::exp(e.score - max_score) / z;
        const auto& doc = index.document(e.doc);
        const double len = static_cast<double>(doc.length);
        background_scale += posterior * smoothed_prob(0.0, len, 1.0, smoothing);
        for (const auto& tc : doc.term_counts) {
            const double pc = collection(tc.term);
            seen[tc.term] += posterior * (smoothed_prob(tc.count, len, pc, smoothing) -
                                          smoothed_prob(0.0, len, pc, smoothing));
        }
    }

    RelevanceModel rm;
    rm.source_query.assign(query.begin(), query.end());
    rm.fb_docs = feedback.size();
    rm.weights.reserve(seen.size());
    for (const auto& [term, inc] : seen) rm.weights.push_back({term, inc + background_scale * collection(term)});
    std::sort(rm.weights.begin(), rm.weights.end(),
              [](const TermWeight& a, const TermWeight& b) { return a.term < b.term; });
    detail::normalize_weights(rm.weights);
    detail::sort_weights(rm.weights);
    return rm;
}

inline RelevanceModel estimate_rm(std::span<const TermId> query, const InvertedIndex& index,
                                  const SmoothingConfig& smoothing, std::size_t fb_docs) {
    return estimate_rm(query, index, CollectionModel(index), smoothing, fb_docs);
}

/// Keeps the `t` heaviest terms and renormalizes.
inline RelevanceModel prune(const RelevanceModel& rm, std::size_t t) {
    if (t < 1) throw InputError("expansion term count must be >= 1");
    RelevanceModel out = rm;
    if (out.weights.size() > t) out.weights.resize(t);
    detail::normalize_weights(out.weights);
    return out;
}

/// L2-normalized query vector for hashing.
inline SparseVector rm_vector(const RelevanceModel& rm) {
    SparseVector v;
    v.entries.reserve(rm.weights.size());
    for (const auto& tw : rm.weights) v.entries.emplace_back(tw.term, tw.weight);
    std::sort(v.entries.begin(), v.entries.end());
    return normalized(std::move(v));
}

/// `term<TAB>weight`, descending weight.
inline void write_rm_tsv(std::ostream& out, const RelevanceModel& rm, const Vocabulary& vocab) {
    char buffer[64];
    for (const auto& tw : rm.weights) {
        std::snprintf(buffer, sizeof buffer, "%.10g", tw.weight);
        out << vocab.term(tw.term) << '\t' << buffer << '\n';
    }
}

}  // namespace rrm
