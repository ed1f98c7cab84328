#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"

using namespace rrm;

namespace {

// Exhaustive RM1 computed from raw token counts, sharing no code with the engine.
struct Oracle {
    std::vector<std::string> docnos;
    std::vector<std::map<std::string, double>> counts;
    std::vector<double> lengths;
    std::map<std::string, double> background;

    explicit Oracle(const std::vector<RawDocument>& docs) {
        double total = 0.0;
        std::map<std::string, double> cf;
        for (const auto& d : docs) {
            std::map<std::string, double> c;
            double len = 0.0;
            for (const auto& w : tokenize(d.text)) {
                c[w] += 1.0;
                cf[w] += 1.0;
                len += 1.0;
            }
            if (len == 0.0) continue;
            docnos.push_back(d.docno);
            counts.push_back(c);
            lengths.push_back(len);
            total += len;
        }
        for (const auto& [w, n] : cf) background[w] = n / total;
    }

    double p(const std::string& w, std::size_t d, bool dirichlet, double param) const {
        auto it = counts[d].find(w);
        const double c = it == counts[d].end() ? 0.0 : it->second;
        const double bg = background.at(w);
        return dirichlet ? (c + param * bg) / (lengths[d] + param)
                         : param * c / lengths[d] + (1.0 - param) * bg;
    }

    std::map<std::string, double> rm(const std::vector<std::string>& q, std::size_t m, bool dirichlet,
                                     double param) const {
        std::vector<std::pair<double, std::string>> ql;
        for (std::size_t d = 0; d < docnos.size(); ++d) {
            double s = 0.0;
            for (const auto& w : q)
                if (background.count(w)) s += std::log(p(w, d, dirichlet, param));
            ql.emplace_back(s, docnos[d]);
        }
        // Scores equal up to summation order count as ties, broken by docno.
        std::sort(ql.begin(), ql.end(), [](const auto& a, const auto& b) {
            const auto ka = std::llround(a.first * 1e12), kb = std::llround(b.first * 1e12);
            return ka != kb ? ka > kb : a.second < b.second;
        });
        ql.resize(std::min(m, ql.size()));
        std::vector<std::size_t> top;
        std::vector<double> posterior;
        double z = 0.0;
        for (const auto& [s, docno] : ql) {
            top.push_back(std::find(docnos.begin(), docnos.end(), docno) - docnos.begin());
            posterior.push_back(std::exp(s));
            z += std::exp(s);
        }
        for (auto& x : posterior) x /= z;
        std::map<std::string, double> out;
        for (std::size_t i : top)
            for (const auto& [w, c] : counts[i]) out[w] = 0.0;
        double total = 0.0;
        for (auto& [w, x] : out) {
            for (std::size_t k = 0; k < top.size(); ++k) x += posterior[k] * p(w, top[k], dirichlet, param);
            total += x;
        }
        for (auto& [w, x] : out) x /= total;
        return out;
    }
};

void expect_matches_oracle(const std::vector<RawDocument>& docs, std::string_view qtext, std::size_t m,
                           const SmoothingConfig& s, double tol) {
    const auto index = build_index(docs).index;
    if (test::query(index, qtext).empty()) return;
    const Oracle oracle(docs);
    const bool dir = s.kind == SmoothingConfig::Kind::dirichlet;
    const auto expected = oracle.rm(tokenize(qtext), m, dir, dir ? s.mu : s.lambda);
    const auto rm = estimate_rm(test::query(index, qtext), index, s, m);
    ASSERT_EQ(rm.terms(), expected.size());
    for (const auto& [w, x] : expected) EXPECT_NEAR(rm.weight(test::term(index, w)), x, tol) << w;
}

RelevanceModel model(std::vector<TermWeight> w) {
    RelevanceModel rm;
    rm.weights = std::move(w);
    return rm;
}

}  // namespace

TEST(EstimateRm, FruitPosteriorsByHand) {
    // P(D|Q) = 10/16, 3/16, 3/16 for Q = apple under JM 0.5.
    const double pd[3] = {10.0 / 16, 3.0 / 16, 3.0 / 16};
    const double banana = pd[0] * (1.0 / 6 + 1.0 / 7) + pd[1] * (1.0 / 4 + 1.0 / 7) + pd[2] * (1.0 / 7);
    EXPECT_NEAR(banana, 0.294, 5e-4);
    const auto index = test::fruit_index();
    const auto rm = estimate_rm(test::query(index, "apple"), index, SmoothingConfig::jm(0.5), 3);
    EXPECT_NEAR(rm.weight(test::term(index, "banana")), banana, 1e-12);
    EXPECT_EQ(rm.fb_docs, 3u);
    EXPECT_EQ(rm.weights.front().term, test::term(index, "cherry"));  // 0.355 vs apple 0.351
}

TEST(EstimateRm, FruitMatchesOracle) {
    expect_matches_oracle(test::fruit_docs(), "apple", 3, SmoothingConfig::jm(0.5), 1e-9);
    expect_matches_oracle(test::fruit_docs(), "cherry banana", 2, SmoothingConfig::jm(0.3), 1e-9);
    expect_matches_oracle(test::fruit_docs(), "banana", 3, SmoothingConfig::dirichlet(5), 1e-9);
}

class RandomOracle : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomOracle, SmallCorporaMatchBruteForce) {
    Rng rng(GetParam());
    const auto docs = generate_uniform_corpus(2 + rng.below(9), 20, 3 + rng.below(10), GetParam());
    std::string q = "u" + std::to_string(rng.below(20)) + " u" + std::to_string(rng.below(20));
    for (std::size_t m : {1u, 3u, 10u}) {
        expect_matches_oracle(docs, q, m, SmoothingConfig::jm(0.5), 1e-9);
        expect_matches_oracle(docs, q, m, SmoothingConfig::dirichlet(100), 1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomOracle, ::testing::Range<std::uint64_t>(1, 13));

TEST(EstimateRm, SingleFeedbackDocIsItsModel) {
    // The top document holds every vocabulary term, so no mass is cut away.
    const std::vector<RawDocument> docs{{"A", "x y z x q"}, {"B", "y z"}, {"C", "z q q"}};
    const auto index = build_index(docs).index;
    const CollectionModel c(index);
    const auto s = SmoothingConfig::jm(0.5);
    const auto rm = estimate_rm(test::query(index, "x"), index, c, s, 1);
    ASSERT_EQ(rm.terms(), index.vocabulary().size());
    for (TermId t = 0; t < index.vocabulary().size(); ++t)
        EXPECT_NEAR(rm.weight(t), doc_prob(t, index.document(0), s, c), 1e-15);
}

TEST(EstimateRm, WeightsNormalizedAndOrdered) {
    const auto docs = generate_uniform_corpus(60, 80, 30, 17);
    const auto index = build_index(docs).index;
    const auto rm = estimate_rm(test::query(index, "u3 u9"), index, SmoothingConfig::jm(0.5), 20);
    double total = 0.0;
    for (std::size_t i = 0; i < rm.weights.size(); ++i) {
        EXPECT_GT(rm.weights[i].weight, 0.0);
        total += rm.weights[i].weight;
        if (i > 0) {
            const auto& a = rm.weights[i - 1];
            const auto& b = rm.weights[i];
            EXPECT_TRUE(a.weight > b.weight || (a.weight == b.weight && a.term < b.term));
        }
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_EQ(rm.fb_docs, 20u);
}

TEST(EstimateRm, EmptyQueryFails) {
    const auto index = test::fruit_index();
    const std::vector<TermId> oov{42};
    EXPECT_THROW(estimate_rm(oov, index, SmoothingConfig::jm(0.5), 3), InputError);
}

TEST(Prune, KeepsHeaviestAndRenormalizes) {
    const auto rm = model({{0, 0.5}, {1, 0.3}, {2, 0.2}});
    const auto p = prune(rm, 2);
    ASSERT_EQ(p.terms(), 2u);
    EXPECT_NEAR(p.weight(0), 0.625, 1e-15);
    EXPECT_NEAR(p.weight(1), 0.375, 1e-15);
    EXPECT_EQ(prune(rm, 3).weights, rm.weights);
    EXPECT_EQ(prune(rm, 10).terms(), 3u);
    EXPECT_THROW(prune(rm, 0), InputError);
}

TEST(Prune, IdempotentAndOrderPreserving) {
    const auto index = build_index(generate_uniform_corpus(40, 60, 25, 2)).index;
    const auto rm = estimate_rm(test::query(index, "u1 u2"), index, SmoothingConfig::jm(0.5), 10);
    for (std::size_t t : {1u, 5u, 16u, 100u}) {
        const auto once = prune(rm, t);
        const auto twice = prune(once, t);
        ASSERT_EQ(once.terms(), std::min(t, rm.terms()));
        for (std::size_t i = 0; i < once.terms(); ++i) {
            EXPECT_EQ(once.weights[i].term, rm.weights[i].term);
            EXPECT_EQ(twice.weights[i].term, once.weights[i].term);
            EXPECT_NEAR(twice.weights[i].weight, once.weights[i].weight, 1e-15);
        }
    }
}

TEST(RmVector, UnitNorm) {
    const auto v = rm_vector(model({{4, 0.6}, {1, 0.4}}));
    ASSERT_EQ(v.entries.size(), 2u);
    EXPECT_EQ(v.entries[0].first, 1u);
    EXPECT_NEAR(v[4], 0.6 / std::sqrt(0.52), 1e-12);
    EXPECT_NEAR(v[4], 0.832, 5e-4);
    EXPECT_NEAR(v[1], 0.555, 5e-4);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    const auto one = rm_vector(model({{9, 1.0}}));
    EXPECT_DOUBLE_EQ(one[9], 1.0);

    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        std::vector<TermWeight> w;
        for (TermId t = 0; t < 1 + rng.below(50); ++t) w.push_back({t, rng.uniform() + 1e-3});
        EXPECT_NEAR(rm_vector(model(w)).norm(), 1.0, 1e-9);
    }
}

TEST(RmTsv, DescendingWeights) {
    const auto index = test::fruit_index();
    const auto rm = estimate_rm(test::query(index, "apple"), index, SmoothingConfig::jm(0.5), 3);
    std::ostringstream out;
    write_rm_tsv(out, rm, index.vocabulary());
    EXPECT_EQ(out.str().substr(0, 7), "cherry\t");
    const auto text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
