#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "rrm/evaluation.hpp"
#include "rrm/index.hpp"
#include "rrm/lsh.hpp"
#include "rrm/retrieval.hpp"

namespace rrm {

inline std::vector<std::string> docnos(const RankedList& ranking, const InvertedIndex& index) {
    std::vector<std::string> out;
    out.reserve(ranking.size());
    for (const auto& e : ranking.entries) out.push_back(index.document(e.doc).docno);
    return out;
}

/// Effectiveness and efficiency of one system over a fixed query set.
struct SystemEvaluation {
    std::string label;
    std::vector<std::string> qids;
    std::vector<double> p5;  // aligned with qids
    double mean_p5 = 0.0;
    InterpolatedPrecision mean_interpolated{};
    bool has_efficiency = false;
    std::uint64_t total_ops = 0;
    double mean_ops = 0.0;
    double seconds = 0.0;
};

/// `ranking_of(qid)` must return the ranked docnos of that query (possibly empty).
template <typename RankingOf>
SystemEvaluation evaluate_system(std::string label, std::span<const std::string> qids, const Qrels& qrels,
                                 RankingOf&& ranking_of) {
    SystemEvaluation ev;
    ev.label = std::move(label);
    ev.qids.assign(qids.begin(), qids.end());
    std::size_t judged = 0;
    for (const auto& qid : qids) {
        const auto ranked = ranking_of(qid);
        ev.p5.push_back(precision_at_5(ranked, qrels, qid));
        if (qrels.relevant_count(qid) > 0) {
            const auto ip = interpolated_rp(ranked, qrels, qid);
            for (std::size_t i = 0; i < ip.size(); ++i) ev.mean_interpolated[i] += ip[i];
            ++judged;
        }
    }
    if (!ev.p5.empty()) ev.mean_p5 = std::accumulate(ev.p5.begin(), ev.p5.end(), 0.0) / ev.p5.size();
    if (judged > 0)
        for (auto& x : ev.mean_interpolated) x /= static_cast<double>(judged);
    return ev;
}

inline void set_efficiency(SystemEvaluation& ev, std::uint64_t total_ops, std::size_t queries, double seconds) {
    ev.has_efficiency = true;
    ev.total_ops = total_ops;
    ev.mean_ops = queries == 0 ? 0.0 : static_cast<double>(total_ops) / static_cast<double>(queries);
    ev.seconds = seconds;
}

struct EvalReport {
    std::vector<SystemEvaluation> systems;
    std::optional<std::size_t> baseline;
};

namespace detail {
inline std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

inline std::string diff_or_dash(const EvalReport& r, std::size_t i, double SystemEvaluation::*field) {
    if (!r.baseline || *r.baseline == i) return "-";
    const auto& base = r.systems[*r.baseline];
    if (base.*field == 0.0) return "n/a";
    return format_percent_diff(r.systems[i].*field, base.*field);
}

inline std::string ttest_or_dash(const EvalReport& r, std::size_t i) {
    if (!r.baseline || *r.baseline == i) return "-";
    try {
        return format_fixed(paired_ttest(r.systems[i].p5, r.systems[*r.baseline].p5).p, 4);
    } catch (const InputError&) {
        return "n/a";
    }
}
}  // namespace detail

/// Human-readable table: P@5, complexity (mean postings ops per query) and
/// seconds, each with its percent difference from the baseline.
inline void write_report_table(std::ostream& out, const EvalReport& r) {
    using detail::pad;
    out << pad("Algorithm", 28) << pad("P@5", 8) << pad("dP@5%", 9) << pad("Complexity", 14) << pad("dCompl%", 10)
        << pad("Seconds", 11) << pad("dSec%", 9) << "p(t-test)\n";
    for (std::size_t i = 0; i < r.systems.size(); ++i) {
        const auto& s = r.systems[i];
        out << pad(s.label, 28) << pad(format_fixed(s.mean_p5, 3), 8)
            << pad(detail::diff_or_dash(r, i, &SystemEvaluation::mean_p5), 9);
        if (s.has_efficiency)
            out << pad(format_fixed(s.mean_ops, 0), 14)
                << pad(detail::diff_or_dash(r, i, &SystemEvaluation::mean_ops), 10)
                << pad(format_fixed(s.seconds, 3), 11) << pad(detail::diff_or_dash(r, i, &SystemEvaluation::seconds), 9);
        else
            out << pad("-", 14) << pad("-", 10) << pad("-", 11) << pad("-", 9);
        out << detail::ttest_or_dash(r, i) << '\n';
    }
    out << "\nInterpolated precision at recall 0.0..1.0\n";
    for (const auto& s : r.systems) {
        out << pad(s.label, 28);
        for (double x : s.mean_interpolated) out << ' ' << format_fixed(x, 3);
        out << '\n';
    }
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

inline void write_report_csv(std::ostream& out, const EvalReport& r) {
    out << "label,mean_p5,diff_p5_pct,mean_postings_ops,diff_ops_pct,seconds,diff_seconds_pct,ttest_p";
    for (int i = 0; i <= 10; ++i) out << ",ip_" << format_fixed(i / 10.0, 1);
    out << '\n';
    for (std::size_t i = 0; i < r.systems.size(); ++i) {
        const auto& s = r.systems[i];
        out << csv_quote(s.label) << ',' << format_fixed(s.mean_p5, 6) << ','
            << detail::diff_or_dash(r, i, &SystemEvaluation::mean_p5) << ',';
        if (s.has_efficiency)
            out << format_fixed(s.mean_ops, 3) << ',' << detail::diff_or_dash(r, i, &SystemEvaluation::mean_ops) << ','
                << format_fixed(s.seconds, 6) << ',' << detail::diff_or_dash(r, i, &SystemEvaluation::seconds);
        else
            out << "-,-,-,-";
        out << ',' << detail::ttest_or_dash(r, i);
        for (double x : s.mean_interpolated) out << ',' << format_fixed(x, 6);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
    PipelineConfig config;
    std::string label;
    double mean_p5 = 0.0;
    std::uint64_t total_ops = 0;
    double mean_wall_clock_s = 0.0;
    std::vector<double> raw_wall_clock_s;
    std::string error;

    bool ok() const { return error.empty(); }
};

struct SweepOptions {
    unsigned repetitions = 5;
    unsigned jobs = 1;
    bool timing = true;
};

struct GridSpec {
    std::vector<System> systems{System::rm, System::rrm, System::mp_rrm};
    std::vector<std::size_t> terms{200};
    std::vector<unsigned> bits{6};
    std::vector<unsigned> tables{18};
    std::vector<unsigned> probes{1, 2, 3, 4};
};

/// Cartesian expansion per system. RRM ignores `probes`; MP-RRM skips probe
/// counts beyond the hamming-1 shell, which would duplicate a smaller count.
inline std::vector<PipelineConfig> expand_grid(const GridSpec& g, const PipelineConfig& base) {
    std::vector<PipelineConfig> out;
    for (System s : g.systems) {
        PipelineConfig c = base;
        c.system = s;
        if (s == System::lm) {
            out.push_back(c);
            continue;
        }
        for (auto t : g.terms) {
            c.terms = t;
            if (s == System::rm) {
                out.push_back(c);
                continue;
            }
            for (auto b : g.bits)
                for (auto l : g.tables) {
                    c.lsh.bits = b;
                    c.lsh.tables = l;
                    if (s == System::rrm) {
                        c.lsh.probes = 0;
                        out.push_back(c);
                        continue;
                    }
                    for (auto p : g.probes) {
                        if (p > b) continue;
                        c.lsh.probes = p;
                        out.push_back(c);
                    }
                }
        }
    }
    return out;
}

/// Runs every configuration over `queries`. Rows are independent of one
/// another and come back sorted by total postings ops (failed rows last).
inline std::vector<SweepRow> run_sweep(std::span<const PipelineConfig> grid, std::span<const Query> queries,
                                       const Qrels& qrels, const InvertedIndex& index, const SweepOptions& opt = {}) {
    // Signatures are computed once per (seed, weighting) at the widest
    // bits/tables in the grid; narrower indexes are masked prefixes.
    using SigKey = std::tuple<std::uint64_t, VectorWeighting>;
    std::map<SigKey, std::pair<unsigned, unsigned>> widest;
    for (const auto& c : grid)
        if (c.uses_lsh()) {
            auto& w = widest[{c.lsh.seed, c.weighting}];
            w.first = std::max(w.first, std::min(c.lsh.bits, 63u));
            w.second = std::max(w.second, c.lsh.tables);
        }
    std::map<SigKey, SignatureMatrix> signatures;
    for (const auto& [key, w] : widest)
        signatures.emplace(key, compute_signatures(index, w.first, w.second, std::get<0>(key), std::get<1>(key), opt.jobs));
    std::map<std::tuple<std::uint64_t, VectorWeighting, unsigned, unsigned>, LshIndex> lsh_cache;

    std::vector<std::string> qids;
    for (const auto& q : queries) qids.push_back(q.qid);

    std::vector<SweepRow> rows;
    for (const auto& config : grid) {
        SweepRow row;
        row.config = config;
        row.label = config.label();
        try {
            const LshIndex* lsh = nullptr;
            if (config.uses_lsh()) {
                config.validate();
                const auto key = std::make_tuple(config.lsh.seed, config.weighting, config.lsh.bits, config.lsh.tables);
                auto it = lsh_cache.find(key);
                if (it == lsh_cache.end()) {
                    LshConfig lc = config.lsh;
                    lc.probes = 0;
                    it = lsh_cache.emplace(key, build_lsh(signatures.at({config.lsh.seed, config.weighting}), lc)).first;
                }
                lsh = &it->second;
            }
            const Retriever retriever(index, config, lsh);
            std::vector<QueryResult> results;
            const auto timing =
                wall_clock([&] { results = retriever.run_batch(queries, opt.jobs); }, std::max(1u, opt.repetitions));
            std::map<std::string, std::vector<std::string>> ranked;
            for (std::size_t i = 0; i < queries.size(); ++i) {
                ranked[queries[i].qid] = docnos(results[i].ranking, index);
                row.total_ops += results[i].ops.postings_ops;
            }
            const auto ev =
                evaluate_system(row.label, qids, qrels, [&](const std::string& qid) -> std::span<const std::string> {
                    return ranked[qid];
                });
            row.mean_p5 = ev.mean_p5;
            if (opt.timing) {
                row.mean_wall_clock_s = timing.mean_seconds;
                row.raw_wall_clock_s = timing.raw_seconds;
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.ok() != b.ok()) return a.ok();
        if (a.total_ops != b.total_ops) return a.total_ops < b.total_ops;
        return a.label < b.label;
    });
    return rows;
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "label,system,terms,bits,tables,probes,mean_p5,total_postings_ops,mean_wall_clock_s,error\n";
    for (const auto& r : rows) {
        const auto& c = r.config;
        const bool lsh = c.uses_lsh();
        out << csv_quote(r.label) << ',' << system_name(c.system) << ',' << (c.system == System::lm ? 0 : c.terms)
            << ',' << (lsh ? c.lsh.bits : 0) << ',' << (lsh ? c.lsh.tables : 0) << ',' << (lsh ? c.lsh.probes : 0)
            << ',';
        if (r.ok())
            out << format_fixed(r.mean_p5, 6) << ',' << r.total_ops << ',' << format_fixed(r.mean_wall_clock_s, 6)
                << ',';
        else
            out << ",,," << csv_quote(r.error);
        out << '\n';
    }
}

/// True if `a` is at least as good as `b` on both axes and better on one.
inline bool dominates(const SweepRow& a, const SweepRow& b) {
    return a.mean_p5 >= b.mean_p5 && a.total_ops <= b.total_ops &&
           (a.mean_p5 > b.mean_p5 || a.total_ops < b.total_ops);
}

/// Rows not dominated by any other row (failed rows excluded), by ascending ops.
inline std::vector<SweepRow> pareto_frontier(std::span<const SweepRow> rows) {
    std::vector<SweepRow> out;
    for (const auto& r : rows) {
        if (!r.ok()) continue;
        const bool dominated =
            std::any_of(rows.begin(), rows.end(), [&](const SweepRow& o) { return o.ok() && dominates(o, r); });
        if (!dominated) out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const SweepRow& a, const SweepRow& b) {
        return a.total_ops != b.total_ops ? a.total_ops < b.total_ops : a.label < b.label;
    });
    return out;
}

/// Frontier dominance at equal effectiveness: every Pareto point of
/// `challengers` whose P@5 some contender reaches is matched by a contender
/// with at least that P@5 and at most its ops. Levels only the challenger
/// reaches are not comparable and are skipped; `skipped` (if given) counts them.
inline bool frontier_dominates(std::span<const SweepRow> contenders, std::span<const SweepRow> challengers,
                               std::size_t* skipped = nullptr) {
    double best = -1.0;
    for (const auto& m : contenders)
        if (m.ok()) best = std::max(best, m.mean_p5);
    std::size_t n_skipped = 0;
    bool all = true;
    for (const auto& r : pareto_frontier(challengers)) {
        if (r.mean_p5 > best) {
            ++n_skipped;
            continue;
        }
        const bool covered = std::any_of(contenders.begin(), contenders.end(), [&](const SweepRow& m) {
            return m.ok() && m.mean_p5 >= r.mean_p5 && m.total_ops <= r.total_ops;
        });
        all = all && covered;
    }
    if (skipped) *skipped = n_skipped;
    return all;
}

}  // namespace rrm
