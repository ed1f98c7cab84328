// rrm: index, hash, search, evaluate and sweep relevance-model retrieval with
// LSH candidate generation.
//
// Exit codes: 0 success, 2 usage/input error, 3 state conflict, 1 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rrm/rrm.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw rrm::StateError("cannot write " + path.string());
    return out;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rrm::InputError("cannot open " + path.string());
    return in;
}

rrm::Tokenizer make_tokenizer(const std::string& stopwords) {
    return stopwords.empty() ? rrm::Tokenizer{} : rrm::Tokenizer::with_stopword_file(stopwords);
}

std::vector<rrm::Query> load_queries(const fs::path& topics_path, const rrm::InvertedIndex& index,
                                     const rrm::Tokenizer& tokenizer) {
    auto in = open_input(topics_path);
    std::vector<rrm::Query> queries;
    for (const auto& topic : rrm::parse_topics(in)) queries.push_back({topic.qid, index.lookup(tokenizer(topic.text))});
    return queries;
}

// Options shared by search and sweep.
struct PipelineOptions {
    std::string system = "rm";
    std::size_t terms = 200;
    unsigned bits = 6;
    unsigned tables = 18;
    unsigned probes = 0;
    std::uint64_t seed = 42;
    std::size_t fb_docs = 50;
    std::size_t depth = 1000;
    std::string weighting = "tf";
    std::string rm_smoothing = "jm";
    double rm_lambda = 0.5;
    double rm_mu = 1000.0;
    std::string smoothing = "dirichlet";
    double lambda = 0.5;
    double mu = 1000.0;

    void add_common(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Hyperplane seed")->capture_default_str();
        cmd->add_option("--fb-docs", fb_docs, "Feedback documents for the relevance model")->capture_default_str();
        cmd->add_option("--depth", depth, "Ranking depth per query")->capture_default_str();
        cmd->add_option("--weighting", weighting, "Document vector weighting: tf | tfidf")->capture_default_str();
        cmd->add_option("--rm-smoothing", rm_smoothing, "Smoothing for RM estimation: jm | dirichlet")
            ->capture_default_str();
        cmd->add_option("--rm-lambda", rm_lambda, "JM lambda for RM estimation")->capture_default_str();
        cmd->add_option("--rm-mu", rm_mu, "Dirichlet mu for RM estimation")->capture_default_str();
        cmd->add_option("--smoothing", smoothing, "Smoothing for final ranking: jm | dirichlet")->capture_default_str();
        cmd->add_option("--lambda", lambda, "JM lambda for final ranking")->capture_default_str();
        cmd->add_option("--mu", mu, "Dirichlet mu for final ranking")->capture_default_str();
    }

    void add_single(CLI::App* cmd) {
        cmd->add_option("--system", system, "lm | rm | rrm | mp-rrm")->capture_default_str();
        cmd->add_option("--terms", terms, "Expansion terms kept after pruning")->capture_default_str();
        cmd->add_option("--bits", bits, "Bits per hash-code")->capture_default_str();
        cmd->add_option("--tables", tables, "Hash tables")->capture_default_str();
        cmd->add_option("--probes", probes, "Extra buckets probed per table")->capture_default_str();
        add_common(cmd);
    }

    rrm::PipelineConfig base() const {
        rrm::PipelineConfig c;
        c.fb_docs = fb_docs;
        c.depth = depth;
        c.weighting = rrm::parse_weighting(weighting);
        c.lsh.seed = seed;
        c.rm_smoothing = {rrm::parse_smoothing_kind(rm_smoothing), rm_lambda, rm_mu};
        c.rank_smoothing = {rrm::parse_smoothing_kind(smoothing), lambda, mu};
        return c;
    }

    rrm::PipelineConfig single() const {
        auto c = base();
        c.system = rrm::parse_system(system);
        c.terms = terms;
        c.lsh.bits = bits;
        c.lsh.tables = tables;
        c.lsh.probes = probes;
        c.validate();
        return c;
    }
};

fs::path default_lsh_path(const fs::path& index_dir, const rrm::LshConfig& c, rrm::VectorWeighting w) {
    return index_dir / ("lsh-b" + std::to_string(c.bits) + "-L" + std::to_string(c.tables) + "-s" +
                        std::to_string(c.seed) + "-" + std::string(rrm::weighting_name(w)) + ".lsh");
}

void print_histogram(std::ostream& out, const rrm::LshIndex& lsh) {
    out << "occupancy\tbuckets\n";
    for (const auto& [occupancy, count] : rrm::bucket_histogram(lsh)) out << occupancy << '\t' << count << '\n';
    char mean[64];
    std::snprintf(mean, sizeof mean, "%.4f", rrm::mean_bucket_occupancy(lsh));
    out << "# mean occupancy " << mean << " over " << lsh.config().tables << " table(s)\n";
}

std::string display_label(const std::string& tag) {
    try {
        return rrm::parse_label(tag).label();
    } catch (const rrm::Error&) {
        return tag;
    }
}

// Efficiency sidecar: total postings ops, query count and summed clock.
struct EfficiencyTotals {
    std::uint64_t ops = 0;
    std::size_t queries = 0;
    double ms = 0.0;
};

std::optional<EfficiencyTotals> read_efficiency(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    std::getline(in, line);
    if (line != rrm::kEfficiencyHeader) throw rrm::InputError("unexpected efficiency header in " + path.string());
    EfficiencyTotals t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream row(line);
        std::string col;
        while (std::getline(row, col, ',')) cols.push_back(col);
        if (cols.size() != 9) throw rrm::InputError("malformed efficiency row in " + path.string());
        t.ops += std::stoull(cols[7]);
        t.ms += std::stod(cols[8]);
        ++t.queries;
    }
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relevance-model retrieval with LSH and multi-probe LSH candidate generation"};
    app.set_config("--config", "", "INI file: [subcommand] sections of key = value, one per flag");
    app.fallthrough();
    app.require_subcommand(1);

    // generate ---------------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Write a synthetic topical corpus, topics and qrels");
    std::string gen_out;
    rrm::TopicalCorpusSpec gen_spec;
    std::string gen_format = "trec";
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--documents", gen_spec.documents)->capture_default_str();
    gen->add_option("--topics", gen_spec.topics)->capture_default_str();
    gen->add_option("--queries", gen_spec.queries)->capture_default_str();
    gen->add_option("--seed", gen_spec.seed)->capture_default_str();
    gen->add_option("--format", gen_format, "trec | tsv")->capture_default_str();

    // index ------------------------------------------------------------------
    auto* idx = app.add_subcommand("index", "Build an inverted index from TREC SGML or TSV files");
    std::vector<std::string> corpus_paths;
    std::string index_out, corpus_format = "auto", index_stopwords;
    bool index_force = false;
    idx->add_option("--corpus", corpus_paths, "Corpus files (gzip detected)")->required()->check(CLI::ExistingFile);
    idx->add_option("--out", index_out, "Index directory")->required();
    idx->add_option("--format", corpus_format, "auto | trec | tsv")->capture_default_str();
    idx->add_option("--stopwords", index_stopwords, "Stopword list, one per line")->check(CLI::ExistingFile);
    idx->add_flag("--force", index_force, "Overwrite an existing index");

    // hash -------------------------------------------------------------------
    auto* hash = app.add_subcommand("hash", "Hash every document into L tables of b-bit buckets");
    std::string hash_index, hash_out, hash_weighting = "tf";
    rrm::LshConfig hash_cfg;
    unsigned hash_jobs = 1;
    bool hash_force = false;
    hash->add_option("--index", hash_index)->required()->check(CLI::ExistingDirectory);
    hash->add_option("--bits", hash_cfg.bits)->required();
    hash->add_option("--tables", hash_cfg.tables)->capture_default_str();
    hash->add_option("--seed", hash_cfg.seed)->capture_default_str();
    hash->add_option("--weighting", hash_weighting, "tf | tfidf")->capture_default_str();
    hash->add_option("--out", hash_out, "Artifact path (default: inside the index directory)");
    hash->add_option("--jobs", hash_jobs)->capture_default_str();
    hash->add_flag("--force", hash_force, "Overwrite an existing artifact");

    // search -----------------------------------------------------------------
    auto* search = app.add_subcommand("search", "Run topics through one system; write a TREC run and efficiency CSV");
    PipelineOptions search_opt;
    std::string search_index, search_topics, search_run, search_eff, search_tag, search_lsh, search_stopwords;
    unsigned search_jobs = 1;
    bool search_no_timing = false;
    search->add_option("--index", search_index)->required()->check(CLI::ExistingDirectory);
    search->add_option("--topics", search_topics, "TSV: qid<TAB>query")->required()->check(CLI::ExistingFile);
    search->add_option("--run", search_run, "Output TREC run file")->required();
    search->add_option("--efficiency", search_eff, "Output efficiency CSV (default: <run>.eff.csv)");
    search->add_option("--run-tag", search_tag, "Run tag (default: configuration label)");
    search->add_option("--lsh", search_lsh, "Prebuilt LSH artifact (default: hash in memory)")
        ->check(CLI::ExistingFile);
    search->add_option("--stopwords", search_stopwords)->check(CLI::ExistingFile);
    search->add_option("--jobs", search_jobs)->capture_default_str();
    search->add_flag("--no-timing", search_no_timing, "Write 0 for wall clock (byte-reproducible CSV)");
    search_opt.add_single(search);

    // evaluate ---------------------------------------------------------------
    auto* eval = app.add_subcommand("evaluate", "P@5, interpolated precision and efficiency against a baseline");
    std::vector<std::string> eval_runs;
    std::string eval_qrels, eval_baseline, eval_csv, eval_topics;
    eval->add_option("--qrels", eval_qrels)->required()->check(CLI::ExistingFile);
    eval->add_option("--run", eval_runs, "Run files (their <run>.eff.csv sidecars are read if present)")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--baseline", eval_baseline, "Baseline run for percent differences and t-tests")
        ->check(CLI::ExistingFile);
    eval->add_option("--topics", eval_topics, "Restrict to these qids (default: all judged queries)")
        ->check(CLI::ExistingFile);
    eval->add_option("--csv", eval_csv, "Also write the report as CSV");

    // sweep ------------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "Trade-off sweep over a configuration grid");
    PipelineOptions sweep_opt;
    std::string sweep_index, sweep_topics, sweep_qrels, sweep_out, sweep_stopwords, sweep_frontier;
    std::vector<std::string> sweep_systems{"rm", "rrm", "mp-rrm"}, sweep_configs;
    std::vector<std::size_t> sweep_terms{200};
    std::vector<unsigned> sweep_bits{4, 6, 8, 10}, sweep_tables{18}, sweep_probes{1, 2, 3, 4};
    unsigned sweep_reps = 5, sweep_jobs = 1;
    bool sweep_no_timing = false;
    sweep->add_option("--index", sweep_index)->required()->check(CLI::ExistingDirectory);
    sweep->add_option("--topics", sweep_topics)->required()->check(CLI::ExistingFile);
    sweep->add_option("--qrels", sweep_qrels)->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_out, "Output CSV")->required();
    sweep->add_option("--frontier", sweep_frontier, "Also write the Pareto frontier CSV");
    sweep->add_option("--systems", sweep_systems)->capture_default_str();
    sweep->add_option("--terms", sweep_terms)->capture_default_str();
    sweep->add_option("--bits", sweep_bits)->capture_default_str();
    sweep->add_option("--tables", sweep_tables)->capture_default_str();
    sweep->add_option("--probes", sweep_probes)->capture_default_str();
    sweep->add_option("--configs", sweep_configs, "Explicit labels, e.g. \"MP-RRM (200,9,18,4)\"; replaces the grid");
    sweep->add_option("--repetitions", sweep_reps, "Timed repetitions per configuration")->capture_default_str();
    sweep->add_option("--jobs", sweep_jobs)->capture_default_str();
    sweep->add_option("--stopwords", sweep_stopwords)->check(CLI::ExistingFile);
    sweep->add_flag("--no-timing", sweep_no_timing, "Write 0 for wall clock (byte-reproducible CSV)");
    sweep_opt.add_common(sweep);

    // inspect ----------------------------------------------------------------
    auto* inspect = app.add_subcommand("inspect", "Dump index and model internals as TSV");
    inspect->require_subcommand(1);
    std::string insp_index, insp_lsh, insp_query;
    std::size_t insp_offset = 0, insp_limit = 50;
    PipelineOptions insp_opt;
    auto* insp_stats = inspect->add_subcommand("stats", "Collection statistics");
    insp_stats->add_option("--index", insp_index)->required()->check(CLI::ExistingDirectory);
    auto* insp_vocab = inspect->add_subcommand("vocab", "term_id, term, df, cf");
    insp_vocab->add_option("--index", insp_index)->required()->check(CLI::ExistingDirectory);
    insp_vocab->add_option("--offset", insp_offset)->capture_default_str();
    insp_vocab->add_option("--limit", insp_limit)->capture_default_str();
    auto* insp_rm = inspect->add_subcommand("rm", "Relevance model of a query as term<TAB>weight");
    insp_rm->add_option("--index", insp_index)->required()->check(CLI::ExistingDirectory);
    insp_rm->add_option("--query", insp_query)->required();
    insp_rm->add_option("--terms", insp_opt.terms)->capture_default_str();
    insp_opt.add_common(insp_rm);
    auto* insp_buckets = inspect->add_subcommand("buckets", "Bucket occupancy histogram of an LSH artifact");
    insp_buckets->add_option("--lsh", insp_lsh)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            const fs::path dir = gen_out;
            const auto syn = rrm::generate_topical_corpus(gen_spec);
            if (gen_format == "trec") {
                auto out = open_output(dir / "corpus.trec");
                out << rrm::to_trec(syn.documents);
            } else if (gen_format == "tsv") {
                auto out = open_output(dir / "corpus.tsv");
                for (const auto& d : syn.documents) out << d.docno << '\t' << d.text << '\n';
            } else {
                throw rrm::InputError("unknown format '" + gen_format + "'");
            }
            {
                auto out = open_output(dir / "topics.tsv");
                for (const auto& t : syn.topics) out << t.qid << '\t' << t.text << '\n';
            }
            auto out = open_output(dir / "qrels.txt");
            rrm::write_qrels(out, syn.qrels);
            std::cout << "wrote " << syn.documents.size() << " documents and " << syn.topics.size() << " topics to "
                      << dir.string() << '\n';
            return 0;
        }

        if (*idx) {
            const fs::path dir = index_out;
            if (rrm::is_index_dir(dir) && !index_force)
                throw rrm::StateError("index already exists at " + dir.string() + " (use --force to overwrite)");
            std::vector<fs::path> paths(corpus_paths.begin(), corpus_paths.end());
            const auto docs = rrm::load_corpus(paths, rrm::parse_corpus_format(corpus_format));
            const auto result = rrm::build_index(docs, make_tokenizer(index_stopwords));
            for (const auto& docno : result.dropped) std::cerr << "warning: dropped empty document " << docno << '\n';
            rrm::save_index(result.index, dir);
            rrm::write_stats(std::cout, result.index.stats());
            return 0;
        }

        if (*hash) {
            hash_cfg.probes = 0;
            hash_cfg.validate();
            const auto index = rrm::load_index(hash_index);
            const auto weighting = rrm::parse_weighting(hash_weighting);
            const fs::path out_path = hash_out.empty() ? default_lsh_path(hash_index, hash_cfg, weighting) : fs::path(hash_out);
            if (fs::exists(out_path) && !hash_force)
                throw rrm::StateError("LSH artifact exists at " + out_path.string() + " (use --force to overwrite)");
            const auto lsh = rrm::build_lsh(index, hash_cfg, weighting, hash_jobs);
            for (auto d : lsh.skipped())
                std::cerr << "warning: skipped zero-vector document " << index.document(d).docno << '\n';
            auto out = open_output(out_path);
            rrm::save_lsh(out, lsh);
            std::cout << "# wrote " << out_path.string() << '\n';
            print_histogram(std::cout, lsh);
            return 0;
        }

        if (*search) {
            const auto config = search_opt.single();
            if (search_tag.find_first_of(" \t") != std::string::npos)
                throw rrm::InputError("run tag must not contain whitespace");
            const auto index = rrm::load_index(search_index);
            const auto queries = load_queries(search_topics, index, make_tokenizer(search_stopwords));
            std::optional<rrm::LshIndex> lsh;
            if (config.uses_lsh()) {
                if (!search_lsh.empty()) {
                    auto in = open_input(search_lsh);
                    lsh = rrm::load_lsh(in);
                    const auto& c = lsh->config();
                    if (c.bits != config.lsh.bits || c.tables != config.lsh.tables || c.seed != config.lsh.seed ||
                        lsh->weighting() != config.weighting || lsh->documents() != index.stats().nd)
                        throw rrm::InputError("LSH artifact " + search_lsh + " does not match the requested configuration");
                } else {
                    rrm::LshConfig lc = config.lsh;
                    lc.probes = 0;
                    lsh = rrm::build_lsh(index, lc, config.weighting, search_jobs);
                }
            }
            const rrm::Retriever retriever(index, config, lsh ? &*lsh : nullptr);
            const auto results = retriever.run_batch(queries, search_jobs);
            const std::string tag = search_tag.empty() ? config.tag() : search_tag;
            auto run = open_output(search_run);
            auto eff = open_output(search_eff.empty() ? search_run + ".eff.csv" : search_eff);
            eff << rrm::kEfficiencyHeader << '\n';
            for (std::size_t i = 0; i < queries.size(); ++i) {
                if (!results[i].warning.empty())
                    std::cerr << "warning: query " << queries[i].qid << ": " << results[i].warning << '\n';
                rrm::write_run(run, queries[i].qid, results[i].ranking, index, tag);
                rrm::write_efficiency_row(eff, queries[i].qid, config, results[i], !search_no_timing);
            }
            std::cerr << config.label() << ": " << queries.size() << " queries\n";
            return 0;
        }

        if (*eval) {
            rrm::Qrels qrels;
            {
                auto in = open_input(eval_qrels);
                qrels = rrm::parse_qrels(in);
            }
            std::vector<std::string> qids;
            if (!eval_topics.empty()) {
                auto in = open_input(eval_topics);
                for (const auto& t : rrm::parse_topics(in))
                    if (qrels.has_query(t.qid)) qids.push_back(t.qid);
            } else {
                qids = qrels.queries();
            }
            std::vector<std::string> paths;
            rrm::EvalReport report;
            if (!eval_baseline.empty()) {
                paths.push_back(eval_baseline);
                report.baseline = 0;
            }
            for (const auto& p : eval_runs)
                if (p != eval_baseline) paths.push_back(p);
            for (const auto& path : paths) {
                auto in = open_input(path);
                const auto run = rrm::parse_run(in);
                auto ev = rrm::evaluate_system(display_label(run.tag.empty() ? fs::path(path).filename().string() : run.tag),
                                               qids, qrels, [&](const std::string& qid) { return run.ranking(qid); });
                if (auto totals = read_efficiency(path + ".eff.csv"))
                    rrm::set_efficiency(ev, totals->ops, totals->queries, totals->ms / 1000.0);
                report.systems.push_back(std::move(ev));
            }
            rrm::write_report_table(std::cout, report);
            if (!eval_csv.empty()) {
                auto out = open_output(eval_csv);
                rrm::write_report_csv(out, report);
            }
            return 0;
        }

        if (*sweep) {
            const auto base = sweep_opt.base();
            std::vector<rrm::PipelineConfig> grid;
            if (!sweep_configs.empty()) {
                for (const auto& label : sweep_configs) grid.push_back(rrm::parse_label(label, base));
            } else {
                rrm::GridSpec spec;
                spec.systems.clear();
                for (const auto& s : sweep_systems) spec.systems.push_back(rrm::parse_system(s));
                spec.terms = sweep_terms;
                spec.bits = sweep_bits;
                spec.tables = sweep_tables;
                spec.probes = sweep_probes;
                grid = rrm::expand_grid(spec, base);
            }
            if (grid.empty()) throw rrm::InputError("empty sweep grid");
            const auto index = rrm::load_index(sweep_index);
            const auto queries = load_queries(sweep_topics, index, make_tokenizer(sweep_stopwords));
            rrm::Qrels qrels;
            {
                auto in = open_input(sweep_qrels);
                qrels = rrm::parse_qrels(in);
            }
            rrm::SweepOptions opt;
            opt.repetitions = sweep_reps;
            opt.jobs = sweep_jobs;
            opt.timing = !sweep_no_timing;
            const auto rows = rrm::run_sweep(grid, queries, qrels, index, opt);
            {
                auto out = open_output(sweep_out);
                rrm::write_sweep_csv(out, rows);
            }
            if (!sweep_frontier.empty()) {
                auto out = open_output(sweep_frontier);
                rrm::write_sweep_csv(out, rrm::pareto_frontier(rows));
            }
            for (const auto& r : rows)
                if (!r.ok()) std::cerr << "warning: " << r.label << ": " << r.error << '\n';
            std::cerr << rows.size() << " configurations written to " << sweep_out << '\n';
            return 0;
        }

        if (*insp_stats) {
            rrm::write_stats(std::cout, rrm::load_index(insp_index).stats());
        } else if (*insp_vocab) {
            const auto index = rrm::load_index(insp_index);
            const auto& v = index.vocabulary();
            std::cout << "term_id\tterm\tdf\tcf\n";
            for (std::size_t t = insp_offset; t < std::min(v.size(), insp_offset + insp_limit); ++t) {
                const auto id = static_cast<rrm::TermId>(t);
                std::cout << id << '\t' << v.term(id) << '\t' << v.df(id) << '\t' << v.cf(id) << '\n';
            }
        } else if (*insp_rm) {
            const auto index = rrm::load_index(insp_index);
            auto config = insp_opt.base();
            config.system = rrm::System::rm;
            config.terms = insp_opt.terms;
            const rrm::Retriever retriever(index, config);
            const auto rm = retriever.relevance_model(index.lookup(rrm::tokenize(insp_query)));
            rrm::write_rm_tsv(std::cout, rm, index.vocabulary());
        } else if (*insp_buckets) {
            auto in = open_input(insp_lsh);
            print_histogram(std::cout, rrm::load_lsh(in));
        }
        return 0;
    } catch (const rrm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case rrm::ErrorKind::input: return 2;
            case rrm::ErrorKind::state: return 3;
            case rrm::ErrorKind::internal: return 1;
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
