#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rrm/error.hpp"
#include "rrm/index.hpp"

namespace rrm {

struct SmoothingConfig {
    enum class Kind { jelinek_mercer, dirichlet };

    Kind kind = Kind::jelinek_mercer;
    double lambda = 0.5;  // weight on the document estimate
    double mu = 1000.0;

    static SmoothingConfig jm(double lambda) { return {Kind::jelinek_mercer, lambda, 1000.0}; }
    static SmoothingConfig dirichlet(double mu) { return {Kind::dirichlet, 0.5, mu}; }

    /// lambda = 1 is accepted only so tests can switch smoothing off.
    void validate() const {
        if (kind == Kind::jelinek_mercer && !(lambda > 0.0 && lambda <= 1.0))
            throw InputError("jelinek-mercer lambda must be in (0,1)");
        if (kind == Kind::dirichlet && !(mu > 0.0)) throw InputError("dirichlet mu must be > 0");
    }

    std::string describe() const {
        return kind == Kind::jelinek_mercer ? "jm(lambda=" + std::to_string(lambda) + ")"
                                            : "dirichlet(mu=" + std::to_string(mu) + ")";
    }
};

inline SmoothingConfig::Kind parse_smoothing_kind(std::string_view name) {
    if (name == "jm" || name == "jelinek-mercer") return SmoothingConfig::Kind::jelinek_mercer;
    if (name == "dirichlet") return SmoothingConfig::Kind::dirichlet;
    throw InputError("unknown smoothing '" + std::string(name) + "'");
}

/// Background distribution P(w|C) = cf(w) / total_tokens.
class CollectionModel {
  public:
    explicit CollectionModel(const InvertedIndex& index) {
        const auto& v = index.vocabulary();
        const double total = static_cast<double>(index.stats().total_tokens);
        probs_.resize(v.size());
        for (TermId t = 0; t < v.size(); ++t) probs_[t] = static_cast<double>(v.cf(t)) / total;
    }

    /// Zero for out-of-vocabulary ids.
    double operator()(TermId term) const { return term < probs_.size() ? probs_[term] : 0.0; }
    std::size_t size() const { return probs_.size(); }

  private:
    std::vector<double> probs_;
};

inline double smoothed_prob(double count, double length, double background, const SmoothingConfig& s) {
    if (s.kind == SmoothingConfig::Kind::jelinek_mercer)
        return s.lambda * count / length + (1.0 - s.lambda) * background;
    return (count + s.mu * background) / (length + s.mu);
}

inline bool is_oov(TermId term, const CollectionModel& collection) { return collection(term) <= 0.0; }

/// Smoothed P(w|D). Returns 0 for out-of-vocabulary terms; callers skip those.
inline double doc_prob(TermId term, const Document& doc, const SmoothingConfig& smoothing,
                       const CollectionModel& collection) {
    if (is_oov(term, collection)) return 0.0;
    return smoothed_prob(doc.count(term), static_cast<double>(doc.length), collection(term), smoothing);
}

/// Collapses a query sequence into (term, multiplicity), ascending term id, OOV dropped.
inline std::vector<std::pair<TermId, double>> query_term_weights(std::span<const TermId> query,
                                                                 const CollectionModel& collection) {
    std::map<TermId, double> counts;
    for (TermId t : query)
        if (!is_oov(t, collection)) counts[t] += 1.0;
    if (counts.empty()) throw InputError("empty effective query");
    return {counts.begin(), counts.end()};
}

/// Log query likelihood: sum of log P(w|D) over the query sequence.
inline double query_likelihood(std::span<const TermId> query, const Document& doc,
                               const SmoothingConfig& smoothing, const CollectionModel& collection) {
    double total = 0.0;
    for (const auto& [term, mult] : query_term_weights(query, collection))
        total += mult * std::log(doc_prob(term, doc, smoothing, collection));
    return total;
}

/// Scores every document against a weighted term list, sum of weight * log P(w|D),
/// by walking postings. The part of the score owed to terms a document lacks
/// is computed in closed form, so the result is exact without touching
/// non-matching (term, document) pairs.
///
/// The per-document sum runs in ascending term id in every code path so the
/// postings walk and the forward-index walk are bit-identical.
class WeightedLogScorer {
  public:
    WeightedLogScorer(std::vector<std::pair<TermId, double>> terms, const SmoothingConfig& smoothing,
                      const CollectionModel& collection)
        : terms_(std::move(terms)), smoothing_(smoothing), collection_(&collection) {
        std::sort(terms_.begin(), terms_.end());
        for (const auto& [term, weight] : terms_) {
            weight_sum_ += weight;
            const double pc = collection(term);
            if (smoothing.kind == SmoothingConfig::Kind::jelinek_mercer)
                constant_ += weight * std::log((1.0 - smoothing.lambda) * pc);
            else
                constant_ += weight * std::log(smoothing.mu * pc);
        }
    }

    const std::vector<std::pair<TermId, double>>& terms() const { return terms_; }

    /// Score of a document containing none of the terms.
    double background(std::uint64_t length) const {
        if (smoothing_.kind == SmoothingConfig::Kind::jelinek_mercer) return constant_;
        return constant_ - weight_sum_ * std::log(static_cast<double>(length) + smoothing_.mu);
    }

    /// Score increment for a document containing `term` `count` times.
    double delta(TermId term, double weight, std::uint32_t count, std::uint64_t length) const {
        const double pc = (*collection_)(term);
        const double len = static_cast<double>(length);
        return weight * (std::log(smoothed_prob(count, len, pc, smoothing_)) -
                         std::log(smoothed_prob(0.0, len, pc, smoothing_)));
    }

  private:
    std::vector<std::pair<TermId, double>> terms_;
    SmoothingConfig smoothing_;
    const CollectionModel* collection_;
    double constant_ = 0.0;
    double weight_sum_ = 0.0;
};

}  // namespace rrm
