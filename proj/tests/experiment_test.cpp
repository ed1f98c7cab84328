#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace rrm;

namespace {

struct Bench {
    SyntheticCollection collection;
    InvertedIndex index;
    std::vector<Query> queries;
};

const Bench& bench() {
    static const Bench b = [] {
        TopicalCorpusSpec spec;
        spec.documents = 300;
        spec.topics = 10;
        spec.queries = 6;
        Bench out{generate_topical_corpus(spec), {}, {}};
        out.index = build_index(out.collection.documents).index;
        for (const auto& t : out.collection.topics) out.queries.push_back({t.qid, out.index.lookup(tokenize(t.text))});
        return out;
    }();
    return b;
}

PipelineConfig base() {
    PipelineConfig c;
    c.terms = 40;
    c.fb_docs = 10;
    return c;
}

SweepRow row(const char* label, double p5, std::uint64_t ops) {
    SweepRow r;
    r.label = label;
    r.mean_p5 = p5;
    r.total_ops = ops;
    return r;
}

const SweepOptions quick{1, 1, false};

}  // namespace

TEST(Synthetic, TopicalCorpusShape) {
    TopicalCorpusSpec spec;
    spec.documents = 100;
    spec.topics = 10;
    spec.queries = 4;
    const auto a = generate_topical_corpus(spec);
    const auto b = generate_topical_corpus(spec);
    ASSERT_EQ(a.documents.size(), 100u);
    EXPECT_EQ(a.documents[7].docno, "SYN-000007");
    for (std::size_t i = 0; i < a.documents.size(); ++i) EXPECT_EQ(a.documents[i].text, b.documents[i].text);
    ASSERT_EQ(a.topics.size(), 4u);
    for (const auto& t : a.topics) {
        EXPECT_EQ(tokenize(t.text).size(), spec.query_terms);
        EXPECT_EQ(a.qrels.relevant_count(t.qid), 10u);
        EXPECT_EQ(a.qrels.judgments().at(t.qid).size(), 100u);
    }
    spec.seed = 8;
    EXPECT_NE(generate_topical_corpus(spec).documents[0].text, a.documents[0].text);
}

TEST(Synthetic, TrecRenderingParsesBack) {
    const auto docs = generate_uniform_corpus(5, 10, 4, 1);
    const auto parsed = parse_trec(to_trec(docs));
    ASSERT_EQ(parsed.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(parsed[i].docno, docs[i].docno);
        EXPECT_EQ(tokenize(parsed[i].text), tokenize(docs[i].text));
    }
}

TEST(EvaluateSystem, MeanIsMeanOfPerQuery) {
    const Qrels q = test::qrels_from("a 0 x 1\na 0 y 1\nb 0 x 1\nc 0 z 1\n");
    std::map<std::string, std::vector<std::string>> runs{{"a", {"x", "n", "y"}}, {"b", {"n"}}, {"c", {"z"}}};
    const std::vector<std::string> qids{"a", "b", "c"};
    const auto ev = evaluate_system("S", qids, q, [&](const std::string& id) -> std::span<const std::string> {
        return runs[id];
    });
    ASSERT_EQ(ev.p5.size(), 3u);
    EXPECT_DOUBLE_EQ(ev.p5[0], 0.4);
    EXPECT_DOUBLE_EQ(ev.p5[1], 0.0);
    EXPECT_DOUBLE_EQ(ev.mean_p5, (ev.p5[0] + ev.p5[1] + ev.p5[2]) / 3.0);
    EXPECT_NEAR(ev.mean_interpolated[0], (1.0 + 0.0 + 1.0) / 3.0, 1e-15);
}

TEST(Report, TableAndCsv) {
    EvalReport r;
    SystemEvaluation base_eval, other;
    base_eval.label = "RM-baseline (200)";
    base_eval.p5 = {1.0, 0.6, 0.8};
    base_eval.mean_p5 = 0.8;
    set_efficiency(base_eval, 3000, 3, 0.5);
    other.label = "MP-RRM (200,9,18,4)";
    other.p5 = {0.8, 0.6, 0.4};
    other.mean_p5 = 0.6;
    set_efficiency(other, 1500, 3, 0.25);
    r.systems = {base_eval, other};
    r.baseline = 0;
    std::ostringstream table, csv;
    write_report_table(table, r);
    write_report_csv(csv, r);
    EXPECT_NE(table.str().find("-25.00"), std::string::npos);
    EXPECT_NE(table.str().find("-50.00"), std::string::npos);
    EXPECT_NE(table.str().find("1000"), std::string::npos);
    const auto text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "label,mean_p5,diff_p5_pct,mean_postings_ops,diff_ops_pct,seconds,diff_seconds_pct,ttest_p,"
              "ip_0.0,ip_0.1,ip_0.2,ip_0.3,ip_0.4,ip_0.5,ip_0.6,ip_0.7,ip_0.8,ip_0.9,ip_1.0");
    EXPECT_NE(text.find("\"MP-RRM (200,9,18,4)\",0.600000,-25.00,500.000,-50.00,0.250000,-50.00,"),
              std::string::npos);
    EXPECT_EQ(csv_quote("a\"b,c"), "\"a\"\"b,c\"");
}

TEST(ExpandGrid, SkipsRedundantProbes) {
    GridSpec g;
    g.systems = {System::lm, System::rm, System::rrm, System::mp_rrm};
    g.terms = {50, 100};
    g.bits = {2, 6};
    g.tables = {4};
    g.probes = {1, 2, 3};
    const auto grid = expand_grid(g, base());
    // lm 1, rm 2, rrm 2*2, mp-rrm 2*(2 + 3)
    EXPECT_EQ(grid.size(), 1u + 2u + 4u + 10u);
    for (const auto& c : grid) {
        if (c.system == System::rrm) {
            EXPECT_EQ(c.lsh.probes, 0u);
        }
        if (c.system == System::mp_rrm) {
            EXPECT_LE(c.lsh.probes, c.lsh.bits);
        }
    }
}

TEST(Sweep, SingleRowMatchesRunQuery) {
    const auto& b = bench();
    auto c = base();
    c.system = System::mp_rrm;
    c.lsh.bits = 6;
    c.lsh.tables = 5;
    c.lsh.probes = 2;
    const std::vector<PipelineConfig> grid{c};
    const auto rows = run_sweep(grid, b.queries, b.collection.qrels, b.index, quick);
    ASSERT_EQ(rows.size(), 1u);
    ASSERT_TRUE(rows[0].ok()) << rows[0].error;
    EXPECT_EQ(rows[0].label, "MP-RRM (40,6,5,2)");

    const auto lsh = build_lsh(b.index, c.lsh);
    std::uint64_t ops = 0;
    double p5 = 0.0;
    for (const auto& q : b.queries) {
        const auto r = run_query(q.terms, c, b.index, &lsh);
        ops += r.ops.postings_ops;
        p5 += precision_at_5(docnos(r.ranking, b.index), b.collection.qrels, q.qid);
    }
    EXPECT_EQ(rows[0].total_ops, ops);
    EXPECT_DOUBLE_EQ(rows[0].mean_p5, p5 / b.queries.size());
    EXPECT_EQ(rows[0].mean_wall_clock_s, 0.0);
}

TEST(Sweep, RowsAreIndependentAndSorted) {
    const auto& b = bench();
    GridSpec g;
    g.bits = {4};
    g.tables = {6};
    g.probes = {1};
    const auto small = expand_grid(g, base());
    g.bits = {4, 8, 12};
    g.probes = {1, 3};
    g.systems.push_back(System::lm);
    auto large = expand_grid(g, base());
    auto bad = base();
    bad.system = System::rrm;
    bad.lsh.bits = 4;
    bad.lsh.probes = 2;  // RRM never probes
    large.push_back(bad);

    const auto a = run_sweep(small, b.queries, b.collection.qrels, b.index, quick);
    const auto z = run_sweep(large, b.queries, b.collection.qrels, b.index, quick);
    for (const auto& r : a) {
        const auto it = std::find_if(z.begin(), z.end(), [&](const SweepRow& o) { return o.ok() && o.label == r.label; });
        ASSERT_NE(it, z.end()) << r.label;
        EXPECT_EQ(it->total_ops, r.total_ops);
        EXPECT_EQ(it->mean_p5, r.mean_p5);
    }
    for (std::size_t i = 1; i < z.size(); ++i) {
        if (z[i].ok()) {
            EXPECT_LE(z[i - 1].total_ops, z[i].total_ops);
        }
    }
    EXPECT_FALSE(z.back().ok());
    EXPECT_NE(z.back().error.find("RRM does not probe"), std::string::npos);

    std::ostringstream csv;
    write_sweep_csv(csv, z);
    const auto text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "label,system,terms,bits,tables,probes,mean_p5,total_postings_ops,mean_wall_clock_s,error");
    EXPECT_NE(text.find("\"RRM (40,4,18)\",RRM,40,4,18,2,,,,"), std::string::npos);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(z.size() + 1));
}

TEST(Sweep, RepetitionsAreTimed) {
    const auto& b = bench();
    const std::vector<PipelineConfig> grid{base()};
    const auto rows = run_sweep(grid, b.queries, b.collection.qrels, b.index, {3, 1, true});
    ASSERT_EQ(rows[0].raw_wall_clock_s.size(), 3u);
    double sum = 0.0;
    for (double x : rows[0].raw_wall_clock_s) sum += x;
    EXPECT_DOUBLE_EQ(rows[0].mean_wall_clock_s, sum / 3);
    EXPECT_GT(rows[0].mean_wall_clock_s, 0.0);
}

TEST(Pareto, Frontier) {
    const std::vector<SweepRow> rows{row("a", 0.5, 10), row("b", 0.6, 20), row("c", 0.55, 25), row("d", 0.8, 40),
                                     row("e", 0.8, 50), row("f", 0.4, 10)};
    const auto f = pareto_frontier(rows);
    std::vector<std::string> labels;
    for (const auto& r : f) labels.push_back(r.label);
    EXPECT_EQ(labels, (std::vector<std::string>{"a", "b", "d"}));
    for (const auto& x : f)
        for (const auto& y : f) EXPECT_FALSE(dominates(x, y));
    EXPECT_TRUE(dominates(row("x", 0.5, 10), row("y", 0.5, 11)));
    EXPECT_FALSE(dominates(row("x", 0.5, 10), row("y", 0.5, 10)));
}

TEST(Pareto, FrontierDominanceAtSharedLevels) {
    const std::vector<SweepRow> mp{row("m1", 0.5, 5), row("m2", 0.7, 15), row("m3", 0.8, 30)};
    const std::vector<SweepRow> rr{row("r1", 0.5, 8), row("r2", 0.7, 20), row("r3", 0.9, 60)};
    std::size_t skipped = 0;
    EXPECT_TRUE(frontier_dominates(mp, rr, &skipped));
    EXPECT_EQ(skipped, 1u);  // 0.9 is beyond every contender
    const std::vector<SweepRow> tight{row("r1", 0.5, 4)};
    EXPECT_FALSE(frontier_dominates(mp, tight));
    EXPECT_TRUE(frontier_dominates(rr, std::vector<SweepRow>{row("r", 0.5, 8)}));
}
