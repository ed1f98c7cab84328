#pragma once
#include <cmath>
#include <cstdio>
#include <span>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rrm/rrm.hpp"

namespace rrm::test {

// D1 "apple banana apple", D2 "banana cherry", D3 "cherry cherry".
inline std::vector<RawDocument> fruit_docs() {
    return {{"D1", "apple banana apple"}, {"D2", "banana cherry"}, {"D3", "cherry cherry"}};
}

inline InvertedIndex fruit_index() { return build_index(fruit_docs()).index; }

inline TermId term(const InvertedIndex& index, std::string_view w) { return *index.vocabulary().find(w); }

inline std::vector<TermId> query(const InvertedIndex& index, std::string_view text) {
    return index.lookup(tokenize(text));
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("rrm-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Qrels qrels_from(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_qrels(in);
}

// LSH tables over raw vectors (no inverted index), the same bucketing build_lsh does.
inline LshIndex index_vectors(std::span<const SparseVector> vectors, const LshConfig& config) {
    LshIndex lsh(config, VectorWeighting::tf, vectors.size());
    for (DocId d = 0; d < vectors.size(); ++d)
        for (unsigned t = 0; t < config.tables; ++t) lsh.insert(t, signature(vectors[d], t, config), d);
    return lsh;
}

// Fraction of `hyperplanes` random hyperplanes on which two unit vectors at
// angle theta fall on the same side. Hyperplane k is bit 0 of table k.
inline double agreement_rate(double theta, unsigned hyperplanes, std::uint64_t seed) {
    SparseVector u{{{0, 1.0}}};
    SparseVector v{{{0, std::cos(theta)}, {1, std::sin(theta)}}};
    const HyperplaneFamily family(seed);
    unsigned agree = 0;
    for (unsigned k = 0; k < hyperplanes; ++k) {
        const auto a = code_from_projections(project(u, k, 1, family));
        const auto b = code_from_projections(project(v, k, 1, family));
        agree += a == b;
    }
    return static_cast<double>(agree) / hyperplanes;
}

}  // namespace rrm::test
