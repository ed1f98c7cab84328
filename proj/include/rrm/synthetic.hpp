#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rrm/corpus.hpp"
#include "rrm/evaluation.hpp"
#include "rrm/random.hpp"
#include "rrm/sparse_vector.hpp"

namespace rrm {

/// Truncated Zipf sampler over ranks [0, n).
class ZipfSampler {
  public:
    ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) cdf_[r] = (total += 1.0 / std::pow(static_cast<double>(r + 1), exponent));
        for (auto& c : cdf_) c /= total;
    }

    std::size_t operator()(Rng& rng) const {
        const double u = rng.uniform();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

  private:
    std::vector<double> cdf_;
};

/// Collection with planted topics. Each document belongs to one topic; its
/// tokens mix Zipfian background words with the topic's own words and a
/// smaller share of its sibling topic's words (topics 2k and 2k+1 are
/// siblings), so sibling documents are near misses for each other.
struct TopicalCorpusSpec {
    std::size_t documents = 2000;
    std::size_t topics = 40;
    std::size_t queries = 25;
    std::size_t background_vocabulary = 4000;
    std::size_t topic_vocabulary = 60;
    double topic_share = 0.15;
    double sibling_share = 0.08;
    std::size_t min_length = 60;
    std::size_t max_length = 240;
    std::size_t query_terms = 2;
    double zipf_exponent = 1.0;             // within-topic word skew
    double background_exponent = 0.8;
    std::uint64_t seed = 7;
};

struct SyntheticCollection {
    std::vector<RawDocument> documents;
    std::vector<Topic> topics;
    Qrels qrels;
    std::vector<std::size_t> document_topic;
};

inline std::string synthetic_docno(std::size_t i) {
    std::string n = std::to_string(i);
    return "SYN-" + std::string(n.size() < 6 ? 6 - n.size() : 0, '0') + n;
}

inline SyntheticCollection generate_topical_corpus(const TopicalCorpusSpec& spec) {
    Rng rng(spec.seed);
    const ZipfSampler background(spec.background_vocabulary, spec.background_exponent);
    const ZipfSampler topical(spec.topic_vocabulary, spec.zipf_exponent);
    auto topic_word = [](std::size_t topic, std::size_t rank) {
        return "t" + std::to_string(topic) + "x" + std::to_string(rank);
    };
    auto sibling = [&](std::size_t topic) {
        const std::size_t s = topic ^ 1u;
        return s < spec.topics ? s : topic;
    };

    SyntheticCollection out;
    for (std::size_t d = 0; d < spec.documents; ++d) {
        const std::size_t topic = d % spec.topics;
        const std::size_t length = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
        std::string text;
        for (std::size_t i = 0; i < length; ++i) {
            const double u = rng.uniform();
            if (!text.empty()) text += ' ';
            if (u < spec.topic_share)
                text += topic_word(topic, topical(rng));
            else if (u < spec.topic_share + spec.sibling_share)
                text += topic_word(sibling(topic), topical(rng));
            else
                text += "w" + std::to_string(background(rng));
        }
        out.documents.push_back({synthetic_docno(d), std::move(text)});
        out.document_topic.push_back(topic);
    }

    // Query topics: a seeded permutation prefix, so queries cover distinct topics.
    std::vector<std::size_t> order(spec.topics);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const std::size_t head = std::min<std::size_t>(spec.topic_vocabulary, 12);
    for (std::size_t q = 0; q < std::min(spec.queries, spec.topics); ++q) {
        const std::size_t topic = order[q];
        std::vector<std::size_t> picked;
        while (picked.size() < std::min(spec.query_terms, head)) {
            const std::size_t r = rng.below(head);
            if (std::find(picked.begin(), picked.end(), r) == picked.end()) picked.push_back(r);
        }
        std::string text;
        for (auto r : picked) text += (text.empty() ? "" : " ") + topic_word(topic, r);
        const std::string qid = "Q" + std::to_string(q + 1);
        out.topics.push_back({qid, text});
        for (std::size_t d = 0; d < spec.documents; ++d)
            out.qrels.add(qid, synthetic_docno(d), out.document_topic[d] == topic ? 1 : 0);
    }
    return out;
}

/// Every token drawn independently and uniformly from `vocabulary` words.
inline std::vector<RawDocument> generate_uniform_corpus(std::size_t documents, std::size_t vocabulary,
                                                        std::size_t length, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<RawDocument> out;
    for (std::size_t d = 0; d < documents; ++d) {
        std::string text;
        for (std::size_t i = 0; i < length; ++i) text += (i ? " u" : "u") + std::to_string(rng.below(vocabulary));
        out.push_back({synthetic_docno(d), std::move(text)});
    }
    return out;
}

/// Gaussian (hence direction-isotropic) dense vectors encoded sparsely.
inline std::vector<SparseVector> isotropic_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SparseVector> out(n);
    for (auto& v : out) {
        for (std::size_t i = 0; i < dim; ++i) v.entries.emplace_back(static_cast<TermId>(i), rng.normal());
        v = normalized(std::move(v));
    }
    return out;
}

/// TREC SGML rendering of raw documents.
inline std::string to_trec(const std::vector<RawDocument>& docs) {
    std::string out;
    for (const auto& d : docs) out += "<DOC>\n<DOCNO> " + d.docno + " </DOCNO>\n<TEXT>\n" + d.text + "\n</TEXT>\n</DOC>\n";
    return out;
}

}  // namespace rrm
