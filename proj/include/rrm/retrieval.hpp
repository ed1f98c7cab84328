#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rrm/error.hpp"
#include "rrm/index.hpp"
#include "rrm/language_model.hpp"
#include "rrm/lsh.hpp"
#include "rrm/ranking.hpp"
#include "rrm/relevance_model.hpp"

namespace rrm {

enum class System { lm, rm, rrm, mp_rrm };

inline System parse_system(std::string_view name) {
    if (name == "lm") return System::lm;
    if (name == "rm") return System::rm;
    if (name == "rrm") return System::rrm;
    if (name == "mp-rrm" || name == "mprrm" || name == "mp_rrm") return System::mp_rrm;
    throw InputError("unknown system '" + std::string(name) + "' (expected lm, rm, rrm or mp-rrm)");
}

inline std::string_view system_name(System s) {
    switch (s) {
        case System::lm: return "LM";
        case System::rm: return "RM";
        case System::rrm: return "RRM";
        case System::mp_rrm: return "MP-RRM";
    }
    return "?";
}

struct PipelineConfig {
    System system = System::rm;
    std::size_t terms = 200;
    LshConfig lsh{};
    std::size_t fb_docs = 50;
    SmoothingConfig rm_smoothing = SmoothingConfig::jm(0.5);
    SmoothingConfig rank_smoothing = SmoothingConfig::dirichlet(1000.0);
    VectorWeighting weighting = VectorWeighting::tf;
    std::size_t depth = 1000;

    bool uses_lsh() const { return system == System::rrm || system == System::mp_rrm; }

    void validate() const {
        if (terms < 1) throw InputError("--terms must be >= 1");
        if (fb_docs < 1) throw InputError("--fb-docs must be >= 1");
        if (depth < 1) throw InputError("--depth must be >= 1");
        rm_smoothing.validate();
        rank_smoothing.validate();
        if (uses_lsh()) lsh.validate();
        if (system == System::rrm && lsh.probes != 0) throw InputError("RRM does not probe; use mp-rrm");
    }

    /// Table-style label: `RM-baseline (200)`, `RRM (200,6,18)`, `MP-RRM (200,9,18,4)`.
    std::string label() const {
        switch (system) {
            case System::lm: return "LM";
            case System::rm: return "RM-baseline (" + std::to_string(terms) + ")";
            case System::rrm:
                return "RRM (" + std::to_string(terms) + "," + std::to_string(lsh.bits) + "," +
                       std::to_string(lsh.tables) + ")";
            case System::mp_rrm:
                return "MP-RRM (" + std::to_string(terms) + "," + std::to_string(lsh.bits) + "," +
                       std::to_string(lsh.tables) + "," + std::to_string(lsh.probes) + ")";
        }
        return {};
    }

    /// The label without spaces, usable as a TREC run tag.
    std::string tag() const {
        auto s = label();
        s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
        return s;
    }
};

/// Inverse of PipelineConfig::label(); fields the label does not carry come from `base`.
inline PipelineConfig parse_label(std::string_view text, const PipelineConfig& base = {}) {
    static const std::regex pattern(R"(^\s*(?:pruned\s+)?(LM|RM-baseline|RM|RRM|MP-RRM)\s*(?:\(([0-9,\s]*)\))?\s*$)",
                                    std::regex::icase);
    std::cmatch m;
    if (!std::regex_match(text.begin(), text.end(), m, pattern))
        throw InputError("cannot parse configuration label '" + std::string(text) + "'");
    std::string name = m[1].str();
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    std::vector<std::uint64_t> fields;
    {
        std::string body = m[2].str();
        std::replace(body.begin(), body.end(), ',', ' ');
        std::istringstream in(body);
        std::uint64_t x;
        while (in >> x) fields.push_back(x);
    }
    PipelineConfig c = base;
    auto expect = [&](std::size_t n) {
        if (fields.size() != n)
            throw InputError("label '" + std::string(text) + "' needs " + std::to_string(n) + " fields");
    };
    if (name == "LM") {
        expect(0);
        c.system = System::lm;
    } else if (name == "RM" || name == "RM-BASELINE") {
        expect(1);
        c.system = System::rm;
        c.terms = fields[0];
    } else if (name == "RRM") {
        expect(3);
        c.system = System::rrm;
        c.terms = fields[0];
        c.lsh.bits = static_cast<unsigned>(fields[1]);
        c.lsh.tables = static_cast<unsigned>(fields[2]);
        c.lsh.probes = 0;
    } else {
        expect(4);
        c.system = System::mp_rrm;
        c.terms = fields[0];
        c.lsh.bits = static_cast<unsigned>(fields[1]);
        c.lsh.tables = static_cast<unsigned>(fields[2]);
        c.lsh.probes = static_cast<unsigned>(fields[3]);
    }
    c.validate();
    return c;
}

/// One operation = one postings entry scored in the final ranking step.
struct OpCounter {
    std::uint64_t postings_ops = 0;
    std::uint64_t candidate_size = 0;

    OpCounter& operator+=(const OpCounter& o) {
        postings_ops += o.postings_ops;
        candidate_size += o.candidate_size;
        return *this;
    }
};

/// Ranks by sum_w P(w|Q) log P(w|D), the negative cross-entropy. This is
/// rank-equivalent to -KL(RM || D) because the RM entropy is fixed per query.
/// `scope` restricts ranking to candidate documents (ascending doc ids);
/// std::nullopt means the whole collection. Documents in scope without any
/// RM term still receive their background score.
inline RankedList kl_rank(const RelevanceModel& rm, std::optional<std::span<const DocId>> scope,
                          const InvertedIndex& index, const CollectionModel& collection,
                          const SmoothingConfig& smoothing, std::size_t depth, OpCounter& counter) {
    if (scope && scope->empty()) throw InputError("no candidates");
    std::vector<std::pair<TermId, double>> terms;
    terms.reserve(rm.weights.size());
    for (const auto& tw : rm.weights) terms.emplace_back(tw.term, tw.weight);
    const WeightedLogScorer scorer(std::move(terms), smoothing, collection);
    const auto docs = index.documents();

    std::uint64_t postings_cost = 0;
    for (const auto& [term, w] : scorer.terms()) postings_cost += index.postings(term).size();

    std::vector<ScoredDoc> scored;
    std::uint64_t ops = 0;
    if (!scope) {
        std::vector<double> acc(docs.size(), 0.0);
        for (const auto& [term, w] : scorer.terms())
            for (const auto& p : index.postings(term)) acc[p.doc] += scorer.delta(term, w, p.count, docs[p.doc].length);
        ops = postings_cost;
        scored.resize(docs.size());
        for (DocId d = 0; d < docs.size(); ++d) scored[d] = {d, scorer.background(docs[d].length) + acc[d]};
        counter.candidate_size += docs.size();
    } else {
        std::uint64_t forward_cost = 0;
        for (DocId d : *scope) forward_cost += docs[d].term_counts.size();
        scored.reserve(scope->size());
        if (forward_cost < postings_cost) {
            // Walk each candidate's own terms; same summation order as below.
            std::vector<double> weight(index.vocabulary().size(), 0.0);
            for (const auto& [term, w] : scorer.terms()) weight[term] = w;
            for (DocId d : *scope) {
                double acc = 0.0;
                for (const auto& tc : docs[d].term_counts) {
                    if (weight[tc.term] == 0.0) continue;
                    acc += scorer.delta(tc.term, weight[tc.term], tc.count, docs[d].length);
                    ++ops;
                }
                scored.push_back({d, scorer.background(docs[d].length) + acc});
            }
        } else {
            std::vector<double> acc(docs.size(), 0.0);
            std::vector<char> in_scope(docs.size(), 0);
            for (DocId d : *scope) in_scope[d] = 1;
            for (const auto& [term, w] : scorer.terms())
                for (const auto& p : index.postings(term)) {
                    if (!in_scope[p.doc]) continue;
                    acc[p.doc] += scorer.delta(term, w, p.count, docs[p.doc].length);
                    ++ops;
                }
            for (DocId d : *scope) scored.push_back({d, scorer.background(docs[d].length) + acc[d]});
        }
        counter.candidate_size += scope->size();
    }
    counter.postings_ops += ops;
    return select_top(std::move(scored), index, depth);
}

struct Query {
    std::string qid;
    std::vector<TermId> terms;
};

struct QueryResult {
    RankedList ranking;
    OpCounter ops;
    double wall_clock_ms = 0.0;
    std::size_t expansion_terms = 0;
    std::string warning;  // empty candidate set, unusable query, ...
};

/// Runs one configured system. Immutable after construction; `run` may be
/// called concurrently.
class Retriever {
  public:
    Retriever(const InvertedIndex& index, PipelineConfig config, const LshIndex* lsh = nullptr)
        : index_(&index), config_(std::move(config)), lsh_(lsh), collection_(index) {
        config_.validate();
        if (config_.uses_lsh() && lsh_ == nullptr) throw InputError(config_.label() + " needs an LSH index");
        if (!config_.uses_lsh() && lsh_ != nullptr) throw InputError(config_.label() + " does not use an LSH index");
        if (lsh_ && lsh_->weighting() != config_.weighting)
            throw InputError("LSH index weighting does not match the pipeline weighting");
    }

    const PipelineConfig& config() const { return config_; }
    const CollectionModel& collection() const { return collection_; }

    RelevanceModel relevance_model(std::span<const TermId> query) const {
        auto rm = estimate_rm(query, *index_, collection_, config_.rm_smoothing, config_.fb_docs);
        return prune(rm, config_.terms);
    }

    QueryResult run(std::span<const TermId> query) const {
        QueryResult result;
        const auto start = std::chrono::steady_clock::now();
        if (config_.system == System::lm) {
            result.ranking = rank_query_likelihood(query, *index_, collection_, config_.rank_smoothing, config_.depth,
                                                   &result.ops.postings_ops);
            result.ops.candidate_size = index_->stats().nd;
            result.expansion_terms = query_term_weights(query, collection_).size();
        } else {
            const auto rm = relevance_model(query);
            result.expansion_terms = rm.terms();
            if (!config_.uses_lsh()) {
                result.ranking =
                    kl_rank(rm, std::nullopt, *index_, collection_, config_.rank_smoothing, config_.depth, result.ops);
            } else {
                const auto q = apply_weighting(rm_vector(rm), config_.weighting, *index_);
                if (q.is_zero()) {
                    result.warning = "expanded query has a zero vector under the chosen weighting";
                } else {
                    const auto cands = candidates(q, *lsh_, config_.lsh);
                    if (cands.empty())
                        result.warning = "empty candidate set";
                    else
                        result.ranking = kl_rank(rm, std::span<const DocId>(cands), *index_, collection_,
                                                 config_.rank_smoothing, config_.depth, result.ops);
                }
            }
        }
        result.wall_clock_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return result;
    }

    /// Runs every query; results are in input order whatever `jobs` is.
    /// An unusable query yields an empty ranking with a warning.
    std::vector<QueryResult> run_batch(std::span<const Query> queries, unsigned jobs = 1) const {
        std::vector<QueryResult> results(queries.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < queries.size(); i = next++) {
                try {
                    results[i] = run(queries[i].terms);
                } catch (const InputError& e) {
                    results[i] = QueryResult{};
                    results[i].warning = e.what();
                }
            }
        };
        jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, queries.size()))));
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        return results;
    }

  private:
    const InvertedIndex* index_;
    PipelineConfig config_;
    const LshIndex* lsh_;
    CollectionModel collection_;
};

inline QueryResult run_query(std::span<const TermId> query, const PipelineConfig& config, const InvertedIndex& index,
                             const LshIndex* lsh = nullptr) {
    return Retriever(index, config, lsh).run(query);
}

/// Average-case cost qs * nd * ds / vs of ranking with an inverted index.
inline double complexity_estimate(double qs, double nd, double ds, double vs) {
    if (!(qs > 0 && nd > 0 && ds > 0 && vs > 0)) throw InputError("complexity inputs must be positive");
    return qs * nd * ds / vs;
}

/// `qid Q0 docno rank score tag`, rank from 1, score to 6 decimals.
inline void write_run(std::ostream& out, std::string_view qid, const RankedList& ranking, const InvertedIndex& index,
                      std::string_view tag) {
    char score[64];
    std::size_t rank = 1;
    for (const auto& e : ranking.entries) {
        std::snprintf(score, sizeof score, "%.6f", e.score);
        out << qid << " Q0 " << index.document(e.doc).docno << ' ' << rank++ << ' ' << score << ' ' << tag << '\n';
    }
}

inline constexpr std::string_view kEfficiencyHeader =
    "qid,system,terms,bits,tables,probes,candidates,postings_ops,wall_clock_ms";

/// One efficiency row. With `timing` off the clock column is written as 0 so
/// that repeated runs are byte-identical.
inline void write_efficiency_row(std::ostream& out, std::string_view qid, const PipelineConfig& c,
                                 const QueryResult& r, bool timing = true) {
    char ms[64];
    std::snprintf(ms, sizeof ms, "%.3f", timing ? r.wall_clock_ms : 0.0);
    const bool lsh = c.uses_lsh();
    out << qid << ',' << system_name(c.system) << ',' << r.expansion_terms << ',' << (lsh ? c.lsh.bits : 0) << ','
        << (lsh ? c.lsh.tables : 0) << ',' << (lsh ? c.lsh.probes : 0) << ',' << r.ops.candidate_size << ','
        << r.ops.postings_ops << ',' << ms << '\n';
}

}  // namespace rrm
