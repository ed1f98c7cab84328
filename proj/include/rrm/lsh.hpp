#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rrm/error.hpp"
#include "rrm/index.hpp"
#include "rrm/random.hpp"
#include "rrm/sparse_vector.hpp"

namespace rrm {

using HashCode = std::uint64_t;

struct LshConfig {
    unsigned bits = 0;
    unsigned tables = 18;
    unsigned probes = 0;  // buckets visited per table beyond the home bucket
    std::uint64_t seed = 42;

    void validate() const {
        if (bits > 63) throw InputError("bits per hash-code must be in [0, 63]");
        if (tables < 1) throw InputError("at least one hash table is required");
        const std::uint64_t max_probes = (std::uint64_t{1} << bits) - 1;
        if (probes > max_probes)
            throw InputError("probes must be <= 2^bits - 1 (" + std::to_string(max_probes) + ")");
    }

    /// Only the hamming-1 shell is probed, so at most `bits` probes are real.
    unsigned effective_probes() const { return std::min(probes, bits); }
};

enum class VectorWeighting { tf, tfidf };

inline VectorWeighting parse_weighting(std::string_view name) {
    if (name == "tf") return VectorWeighting::tf;
    if (name == "tfidf" || name == "tf-idf") return VectorWeighting::tfidf;
    throw InputError("unknown vector weighting '" + std::string(name) + "'");
}

inline std::string_view weighting_name(VectorWeighting w) { return w == VectorWeighting::tf ? "tf" : "tfidf"; }

/// Random hyperplanes r_{table,bit}, never materialized. Components are
/// counter-based standard normals: a key derived from (seed, table, term)
/// feeds one Box-Muller pair per two consecutive bits, so component i is a
/// pure function of (seed, table, i, term).
class HyperplaneFamily {
  public:
    explicit HyperplaneFamily(std::uint64_t seed) : seed_(seed) {}

    double component(unsigned table, unsigned bit, TermId term) const {
        double pair[2];
        pair_at(key(table, term), bit / 2, pair);
        return pair[bit % 2];
    }

    /// Components for bits [0, bits) of one (table, term), written to `out`.
    void components(unsigned table, TermId term, unsigned bits, std::span<double> out) const {
        const std::uint64_t k = key(table, term);
        double pair[2];
        for (unsigned i = 0; i < bits; i += 2) {
            pair_at(k, i / 2, pair);
            out[i] = pair[0];
            if (i + 1 < bits) out[i + 1] = pair[1];
        }
    }

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t key(unsigned table, TermId term) const { return combine_key(seed_, table, term, 0x6c736800u); }

    static void pair_at(std::uint64_t key, unsigned index, double out[2]) {
        const std::uint64_t base = splitmix64(key ^ (0xd1b54a32d192ed03ULL * (index + 1)));
        const double radius = std::sqrt(-2.0 * std::log(unit_interval(splitmix64(base))));
        const double angle = 2.0 * std::numbers::pi * unit_interval(splitmix64(base ^ 0x8cb92ba72f3d8dd7ULL));
        out[0] = radius * std::cos(angle);
        out[1] = radius * std::sin(angle);
    }

    std::uint64_t seed_;
};

/// z_i = r_{table,i} . v for i < bits.
inline std::vector<double> project(const SparseVector& v, unsigned table, unsigned bits,
                                   const HyperplaneFamily& family) {
    std::vector<double> z(bits, 0.0);
    std::vector<double> r(bits);
    for (const auto& [term, x] : v.entries) {
        if (x == 0.0) continue;
        family.components(table, term, bits, r);
        for (unsigned i = 0; i < bits; ++i) z[i] += x * r[i];
    }
    return z;
}

inline HashCode code_from_projections(std::span<const double> z) {
    HashCode code = 0;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] >= 0.0) code |= HashCode{1} << i;
    return code;
}

inline HashCode low_bits(HashCode code, unsigned bits) {
    return bits >= 64 ? code : code & ((HashCode{1} << bits) - 1);
}

inline unsigned hamming(HashCode a, HashCode b) { return static_cast<unsigned>(std::popcount(a ^ b)); }

namespace detail {
inline void require_hashable(const SparseVector& v) {
    if (v.is_zero()) throw InputError("unhashable zero vector");
}
}  // namespace detail

inline HashCode signature(const SparseVector& v, unsigned table, const LshConfig& config) {
    detail::require_hashable(v);
    return code_from_projections(project(v, table, config.bits, HyperplaneFamily(config.seed)));
}

/// Buckets to visit in one table: the home code, then single-bit flips
/// ordered by ascending |z_i| (the bit closest to its hyperplane first),
/// ties by ascending bit index.
struct ProbePlan {
    std::vector<HashCode> codes;

    HashCode home() const { return codes.front(); }
};

inline ProbePlan plan_from_projections(std::span<const double> z, unsigned probes) {
    ProbePlan plan;
    const HashCode home = code_from_projections(z);
    plan.codes.push_back(home);
    std::vector<unsigned> order(z.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](unsigned a, unsigned b) { return std::abs(z[a]) < std::abs(z[b]); });
    const auto n = std::min<std::size_t>(probes, order.size());
    for (std::size_t k = 0; k < n; ++k) plan.codes.push_back(home ^ (HashCode{1} << order[k]));
    return plan;
}

inline ProbePlan probe_plan(const SparseVector& q, unsigned table, const LshConfig& config) {
    config.validate();
    detail::require_hashable(q);
    const auto z = project(q, table, config.bits, HyperplaneFamily(config.seed));
    return plan_from_projections(z, config.effective_probes());
}

/// Length-normalized term frequencies, then L2-normalized.
inline SparseVector doc_vector(const Document& doc) {
    SparseVector v;
    v.entries.reserve(doc.term_counts.size());
    const double len = static_cast<double>(doc.length);
    for (const auto& tc : doc.term_counts) v.entries.emplace_back(tc.term, tc.count / len);
    return normalized(std::move(v));
}

inline double idf(const InvertedIndex& index, TermId term) {
    return std::log(static_cast<double>(index.stats().nd) / index.vocabulary().df(term));
}

/// Applies the document-side weighting to any vector (query or document).
inline SparseVector apply_weighting(SparseVector v, VectorWeighting weighting, const InvertedIndex& index) {
    if (weighting == VectorWeighting::tfidf)
        for (auto& [term, x] : v.entries) x *= idf(index, term);
    return normalized(std::move(v));
}

inline SparseVector doc_vector(const Document& doc, VectorWeighting weighting, const InvertedIndex& index) {
    return apply_weighting(doc_vector(doc), weighting, index);
}

/// Hash codes of every document at `bits` bits for `tables` tables. Bit i of
/// table t does not depend on how many bits or tables exist, so an index
/// with fewer bits or tables is a masked prefix of this matrix.
struct SignatureMatrix {
    unsigned bits = 0;
    unsigned tables = 0;
    std::uint64_t seed = 0;
    VectorWeighting weighting = VectorWeighting::tf;
    std::vector<std::vector<HashCode>> codes;  // [table][doc]
    std::vector<bool> hashable;                // false for zero vectors
};

inline SignatureMatrix compute_signatures(const InvertedIndex& index, unsigned bits, unsigned tables,
                                          std::uint64_t seed, VectorWeighting weighting = VectorWeighting::tf,
                                          unsigned jobs = 1) {
    SignatureMatrix m{bits, tables, seed, weighting, {}, {}};
    const auto docs = index.documents();
    m.codes.assign(tables, std::vector<HashCode>(docs.size(), 0));
    m.hashable.assign(docs.size(), true);
    std::vector<char> hashable(docs.size(), 1);
    const HyperplaneFamily family(seed);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t d = begin; d < end; ++d) {
            const auto v = doc_vector(docs[d], weighting, index);
            if (v.is_zero()) {
                hashable[d] = 0;
                continue;
            }
            for (unsigned t = 0; t < tables; ++t) m.codes[t][d] = code_from_projections(project(v, t, bits, family));
        }
    };
    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        work(0, docs.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (docs.size() + jobs - 1) / jobs;
        for (unsigned j = 0; j < jobs; ++j) {
            const std::size_t begin = std::min(docs.size(), j * chunk);
            const std::size_t end = std::min(docs.size(), begin + chunk);
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    for (std::size_t d = 0; d < docs.size(); ++d) m.hashable[d] = hashable[d] != 0;
    return m;
}

using Bucket = std::vector<DocId>;

class LshIndex {
  public:
    LshIndex() = default;

    LshIndex(LshConfig config, VectorWeighting weighting, std::size_t documents)
        : config_(config), weighting_(weighting), documents_(documents), tables_(config.tables) {
        config_.probes = 0;
    }

    const LshConfig& config() const { return config_; }
    VectorWeighting weighting() const { return weighting_; }
    std::size_t documents() const { return documents_; }
    const std::vector<DocId>& skipped() const { return skipped_; }
    const std::map<HashCode, Bucket>& table(unsigned t) const { return tables_.at(t); }

    std::span<const DocId> bucket(unsigned t, HashCode code) const {
        const auto& tab = tables_.at(t);
        auto it = tab.find(code);
        if (it == tab.end()) return {};
        return it->second;
    }

    void insert(unsigned t, HashCode code, DocId doc) { tables_.at(t)[code].push_back(doc); }
    void mark_skipped(DocId doc) { skipped_.push_back(doc); }

    bool operator==(const LshIndex& o) const {
        return config_.bits == o.config_.bits && config_.tables == o.config_.tables &&
               config_.seed == o.config_.seed && weighting_ == o.weighting_ && documents_ == o.documents_ &&
               skipped_ == o.skipped_ && tables_ == o.tables_;
    }

  private:
    LshConfig config_;
    VectorWeighting weighting_ = VectorWeighting::tf;
    std::size_t documents_ = 0;
    std::vector<DocId> skipped_;
    std::vector<std::map<HashCode, Bucket>> tables_;
};

/// Buckets documents by the low `config.bits` bits of precomputed signatures.
inline LshIndex build_lsh(const SignatureMatrix& m, const LshConfig& config) {
    config.validate();
    if (config.bits > m.bits || config.tables > m.tables || config.seed != m.seed)
        throw InputError("signature matrix does not cover the requested LSH configuration");
    const std::size_t nd = m.hashable.size();
    if (nd == 0) throw InputError("cannot hash an empty collection");
    LshIndex lsh(config, m.weighting, nd);
    for (DocId d = 0; d < nd; ++d) {
        if (!m.hashable[d]) {
            lsh.mark_skipped(d);
            continue;
        }
        for (unsigned t = 0; t < config.tables; ++t) lsh.insert(t, low_bits(m.codes[t][d], config.bits), d);
    }
    return lsh;
}

inline LshIndex build_lsh(const InvertedIndex& index, const LshConfig& config,
                          VectorWeighting weighting = VectorWeighting::tf, unsigned jobs = 1) {
    config.validate();
    return build_lsh(compute_signatures(index, config.bits, config.tables, config.seed, weighting, jobs), config);
}

/// Union of every bucket named by each table's probe plan, ascending doc id.
/// `q` must already carry the index's weighting.
inline std::vector<DocId> candidates(const SparseVector& q, const LshIndex& lsh, const LshConfig& config) {
    config.validate();
    const auto& built = lsh.config();
    if (config.bits != built.bits || config.tables != built.tables || config.seed != built.seed)
        throw InputError("query LSH configuration does not match the LSH index");
    detail::require_hashable(q);
    const HyperplaneFamily family(config.seed);
    std::vector<char> seen(lsh.documents(), 0);
    for (unsigned t = 0; t < config.tables; ++t) {
        const auto plan = plan_from_projections(project(q, t, config.bits, family), config.effective_probes());
        for (HashCode code : plan.codes)
            for (DocId d : lsh.bucket(t, code)) seen[d] = 1;
    }
    std::vector<DocId> out;
    for (DocId d = 0; d < seen.size(); ++d)
        if (seen[d]) out.push_back(d);
    return out;
}

/// occupancy -> number of buckets with that occupancy, over all tables.
inline std::map<std::size_t, std::size_t> bucket_histogram(const LshIndex& lsh) {
    std::map<std::size_t, std::size_t> hist;
    for (unsigned t = 0; t < lsh.config().tables; ++t)
        for (const auto& [code, bucket] : lsh.table(t)) hist[bucket.size()] += 1;
    return hist;
}

inline double mean_bucket_occupancy(const LshIndex& lsh) {
    std::size_t buckets = 0, docs = 0;
    for (unsigned t = 0; t < lsh.config().tables; ++t)
        for (const auto& [code, bucket] : lsh.table(t)) {
            ++buckets;
            docs += bucket.size();
        }
    return buckets == 0 ? 0.0 : static_cast<double>(docs) / static_cast<double>(buckets);
}

// Text layout, version 1:
//   rrm-lsh 1 / bits B / tables L / seed S / weighting W / documents N / skipped K id...
//   per table: "table T buckets K", then K lines "code<TAB>doc doc ..." ascending code.
inline constexpr std::string_view kLshMagic = "rrm-lsh 1";

inline void save_lsh(std::ostream& out, const LshIndex& lsh) {
    const auto& c = lsh.config();
    out << kLshMagic << "\nbits " << c.bits << "\ntables " << c.tables << "\nseed " << c.seed << "\nweighting "
        << weighting_name(lsh.weighting()) << "\ndocuments " << lsh.documents() << "\nskipped "
        << lsh.skipped().size();
    for (DocId d : lsh.skipped()) out << ' ' << d;
    out << '\n';
    for (unsigned t = 0; t < c.tables; ++t) {
        out << "table " << t << " buckets " << lsh.table(t).size() << '\n';
        for (const auto& [code, bucket] : lsh.table(t)) {
            out << code << '\t';
            for (std::size_t i = 0; i < bucket.size(); ++i) out << (i ? " " : "") << bucket[i];
            out << '\n';
        }
    }
}

inline LshIndex load_lsh(std::istream& in) {
    std::string line;
    std::getline(in, line);
    if (line != kLshMagic) throw InputError("not an LSH artifact");
    auto field = [&](std::string_view key) {
        std::string k;
        if (!(in >> k) || k != key) throw InputError("LSH artifact: expected '" + std::string(key) + "'");
        std::string value;
        in >> value;
        return value;
    };
    LshConfig c;
    c.bits = static_cast<unsigned>(std::stoul(field("bits")));
    c.tables = static_cast<unsigned>(std::stoul(field("tables")));
    c.seed = std::stoull(field("seed"));
    const auto weighting = parse_weighting(field("weighting"));
    const auto documents = std::stoull(field("documents"));
    const auto skipped = std::stoull(field("skipped"));
    c.validate();
    LshIndex lsh(c, weighting, documents);
    for (std::uint64_t i = 0; i < skipped; ++i) {
        DocId d;
        in >> d;
        lsh.mark_skipped(d);
    }
    std::getline(in, line);
    for (unsigned t = 0; t < c.tables; ++t) {
        std::string word;
        unsigned index = 0;
        std::size_t buckets = 0;
        if (!(in >> word >> index >> word >> buckets) || index != t) throw InputError("LSH artifact: bad table header");
        std::getline(in, line);
        for (std::size_t b = 0; b < buckets; ++b) {
            if (!std::getline(in, line)) throw InputError("LSH artifact: truncated");
            std::istringstream row(line);
            HashCode code;
            row >> code;
            DocId d;
            while (row >> d) {
                if (d >= documents) throw InputError("LSH artifact: document id out of range");
                lsh.insert(t, code, d);
            }
        }
    }
    return lsh;
}

}  // namespace rrm
