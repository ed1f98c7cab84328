#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rrm/error.hpp"

namespace rrm {

/// (qid, docno) -> grade; relevant iff grade > 0.
class Qrels {
  public:
    void add(const std::string& qid, const std::string& docno, int grade) {
        if (!judgments_[qid].emplace(docno, grade).second)
            throw InputError("duplicate qrels entry for (" + qid + ", " + docno + ")");
    }

    bool has_query(std::string_view qid) const { return judgments_.contains(std::string(qid)); }

    bool relevant(std::string_view qid, std::string_view docno) const {
        auto q = judgments_.find(std::string(qid));
        if (q == judgments_.end()) return false;
        auto d = q->second.find(std::string(docno));
        return d != q->second.end() && d->second > 0;
    }

    std::size_t relevant_count(std::string_view qid) const {
        auto q = judgments_.find(std::string(qid));
        if (q == judgments_.end()) return 0;
        std::size_t n = 0;
        for (const auto& [docno, grade] : q->second) n += grade > 0;
        return n;
    }

    std::vector<std::string> queries() const {
        std::vector<std::string> out;
        for (const auto& [qid, j] : judgments_) out.push_back(qid);
        return out;
    }

    const std::map<std::string, std::map<std::string, int>>& judgments() const { return judgments_; }

  private:
    std::map<std::string, std::map<std::string, int>> judgments_;
};

/// `qid 0 docno grade`, whitespace separated.
inline Qrels parse_qrels(std::istream& in) {
    Qrels q;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string qid, iter, docno;
        int grade;
        if (!(fields >> qid)) continue;
        if (!(fields >> iter >> docno >> grade))
            throw InputError("malformed qrels line " + std::to_string(lineno));
        q.add(qid, docno, grade);
    }
    return q;
}

inline void write_qrels(std::ostream& out, const Qrels& q) {
    for (const auto& [qid, j] : q.judgments())
        for (const auto& [docno, grade] : j) out << qid << " 0 " << docno << ' ' << grade << '\n';
}

struct Topic {
    std::string qid;
    std::string text;
};

/// `qid<TAB>query text`.
inline std::vector<Topic> parse_topics(std::istream& in) {
    std::vector<Topic> topics;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw InputError("topics line " + std::to_string(lineno) + " has no tab");
        topics.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return topics;
}

/// Parsed TREC run: per qid, docnos in rank order.
struct Run {
    std::string tag;
    std::map<std::string, std::vector<std::string>> rankings;

    std::span<const std::string> ranking(const std::string& qid) const {
        auto it = rankings.find(qid);
        if (it == rankings.end()) return {};
        return it->second;
    }
};

inline Run parse_run(std::istream& in) {
    struct Row {
        long rank;
        double score;
        std::string docno;
    };
    std::map<std::string, std::vector<Row>> rows;
    Run run;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string qid, q0, docno, tag;
        long rank;
        double score;
        if (!(fields >> qid)) continue;
        if (!(fields >> q0 >> docno >> rank >> score >> tag))
            throw InputError("malformed run line " + std::to_string(lineno));
        run.tag = tag;
        rows[qid].push_back({rank, score, docno});
    }
    for (auto& [qid, r] : rows) {
        std::stable_sort(r.begin(), r.end(), [](const Row& a, const Row& b) { return a.rank < b.rank; });
        auto& out = run.rankings[qid];
        for (auto& row : r) out.push_back(std::move(row.docno));
    }
    return run;
}

/// Lists shorter than k count the missing ranks as non-relevant.
inline double precision_at_k(std::span<const std::string> ranked, const Qrels& qrels, std::string_view qid,
                             std::size_t k) {
    if (!qrels.has_query(qid)) throw InputError("unjudged query '" + std::string(qid) + "'");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hits += qrels.relevant(qid, ranked[i]);
    return static_cast<double>(hits) / static_cast<double>(k);
}

inline double precision_at_5(std::span<const std::string> ranked, const Qrels& qrels, std::string_view qid) {
    return precision_at_k(ranked, qrels, qid, 5);
}

using InterpolatedPrecision = std::array<double, 11>;

/// Precision interpolated at recall 0.0, 0.1, ..., 1.0: the best precision
/// achieved at any recall >= r.
inline InterpolatedPrecision interpolated_rp(std::span<const std::string> ranked, const Qrels& qrels,
                                             std::string_view qid) {
    const std::size_t relevant = qrels.relevant_count(qid);
    if (relevant == 0) throw InputError("query '" + std::string(qid) + "' has no relevant documents");
    std::vector<std::pair<double, double>> points;  // (recall, precision) at each relevant hit
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (!qrels.relevant(qid, ranked[i])) continue;
        ++hits;
        points.emplace_back(static_cast<double>(hits) / relevant, static_cast<double>(hits) / (i + 1));
    }
    InterpolatedPrecision out{};
    for (int level = 0; level <= 10; ++level) {
        const double r = level / 10.0;
        double best = 0.0;
        for (const auto& [recall, precision] : points)
            if (recall >= r - 1e-12) best = std::max(best, precision);
        out[level] = best;
    }
    return out;
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t df = 0;
};

/// Paired two-tailed Student t-test on per-query differences a - b.
inline TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("paired t-test needs equal-length samples");
    const std::size_t n = a.size();
    if (n < 2) throw InputError("paired t-test needs at least two pairs");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    const double var = ss / (n - 1);
    TTestResult r;
    r.df = n - 1;
    if (!(var > 0.0)) {
        if (mean == 0.0) throw InputError("zero variance");
        // Constant non-zero shift: the limit of ever smaller spread.
        r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
        r.p = 0.0;
        return r;
    }
    r.t = mean / std::sqrt(var / n);
    const boost::math::students_t dist(static_cast<double>(r.df));
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

struct Timing {
    double mean_seconds = 0.0;
    std::vector<double> raw_seconds;
};

/// Mean end-to-end time of `repetitions` calls of `fn`.
template <typename Fn>
Timing wall_clock(Fn&& fn, unsigned repetitions = 5) {
    if (repetitions < 1) throw InputError("repetitions must be >= 1");
    Timing t;
    for (unsigned i = 0; i < repetitions; ++i) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        t.raw_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    t.mean_seconds = std::accumulate(t.raw_seconds.begin(), t.raw_seconds.end(), 0.0) / repetitions;
    return t;
}

inline double percent_diff(double x, double base) {
    if (base == 0.0) throw InputError("percent difference against a zero baseline");
    return (x - base) / base * 100.0;
}

inline std::string format_fixed(double x, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, x);
    std::string s = buffer;
    // "-0.00" -> "0.00"
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

/// Percent difference rendered to 2 decimals.
inline std::string format_percent_diff(double x, double base) { return format_fixed(percent_diff(x, base), 2); }

}  // namespace rrm
