#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rrm/corpus.hpp"
#include "rrm/error.hpp"

namespace rrm {

using TermId = std::uint32_t;
using DocId = std::uint32_t;

struct Posting {
    DocId doc;
    std::uint32_t count;

    bool operator==(const Posting&) const = default;
};

struct TermCount {
    TermId term;
    std::uint32_t count;

    bool operator==(const TermCount&) const = default;
};

struct Document {
    DocId id = 0;
    std::string docno;
    std::vector<TermCount> term_counts;  // ascending term id
    std::uint64_t length = 0;

    std::uint32_t count(TermId term) const {
        auto it = std::lower_bound(term_counts.begin(), term_counts.end(), term,
                                   [](const TermCount& tc, TermId t) { return tc.term < t; });
        return (it != term_counts.end() && it->term == term) ? it->count : 0;
    }
};

class Vocabulary {
  public:
    std::optional<TermId> find(std::string_view term) const {
        auto it = ids_.find(std::string(term));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& term(TermId id) const { return terms_.at(id); }
    std::uint32_t df(TermId id) const { return df_.at(id); }
    std::uint64_t cf(TermId id) const { return cf_.at(id); }
    std::size_t size() const { return terms_.size(); }

    TermId add(std::string term) {
        auto [it, inserted] = ids_.try_emplace(term, static_cast<TermId>(terms_.size()));
        if (inserted) {
            terms_.push_back(std::move(term));
            df_.push_back(0);
            cf_.push_back(0);
        }
        return it->second;
    }

  private:
    friend class InvertedIndex;
    friend struct IndexBuilder;

    std::unordered_map<std::string, TermId> ids_;
    std::vector<std::string> terms_;
    std::vector<std::uint32_t> df_;
    std::vector<std::uint64_t> cf_;
};

struct CollectionStats {
    std::uint64_t nd = 0;
    double ds = 0.0;
    std::uint64_t vs = 0;
    std::uint64_t total_tokens = 0;
};

/// Immutable once built; safe to share between threads.
class InvertedIndex {
  public:
    const CollectionStats& stats() const { return stats_; }
    const Vocabulary& vocabulary() const { return vocab_; }
    std::span<const Document> documents() const { return docs_; }
    const Document& document(DocId id) const { return docs_.at(id); }
    std::span<const Posting> postings(TermId term) const { return postings_.at(term); }

    std::optional<DocId> find_docno(std::string_view docno) const {
        auto it = docno_ids_.find(std::string(docno));
        if (it == docno_ids_.end()) return std::nullopt;
        return it->second;
    }

    /// Maps tokens to term ids in order, dropping out-of-vocabulary tokens.
    std::vector<TermId> lookup(const std::vector<std::string>& tokens) const {
        std::vector<TermId> ids;
        for (const auto& t : tokens)
            if (auto id = vocab_.find(t)) ids.push_back(*id);
        return ids;
    }

  private:
    friend struct IndexBuilder;

    Vocabulary vocab_;
    std::vector<Document> docs_;
    std::vector<std::vector<Posting>> postings_;
    std::unordered_map<std::string, DocId> docno_ids_;
    CollectionStats stats_;
};

struct IndexBuildResult {
    InvertedIndex index;
    std::vector<std::string> dropped;  // docnos with no tokens
};

struct IndexBuilder {
    InvertedIndex index;

    TermId intern(std::string term) { return index.vocab_.add(std::move(term)); }
    std::size_t document_count() const { return index.docs_.size(); }

    void add(std::string docno, std::vector<TermCount> counts) {
        std::sort(counts.begin(), counts.end(),
                  [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
        Document doc;
        doc.id = static_cast<DocId>(index.docs_.size());
        doc.docno = std::move(docno);
        for (const auto& tc : counts) doc.length += tc.count;
        doc.term_counts = std::move(counts);
        index.docno_ids_.emplace(doc.docno, doc.id);
        index.docs_.push_back(std::move(doc));
    }

    /// Derives postings, df, cf and collection statistics from the documents.
    InvertedIndex finish() && {
        auto& vocab = index.vocab_;
        index.postings_.assign(vocab.size(), {});
        std::fill(vocab.df_.begin(), vocab.df_.end(), 0);
        std::fill(vocab.cf_.begin(), vocab.cf_.end(), 0);
        std::uint64_t total = 0;
        for (const auto& doc : index.docs_) {
            for (const auto& tc : doc.term_counts) {
                index.postings_[tc.term].push_back({doc.id, tc.count});
                vocab.df_[tc.term] += 1;
                vocab.cf_[tc.term] += tc.count;
            }
            total += doc.length;
        }
        auto& s = index.stats_;
        s.nd = index.docs_.size();
        s.vs = vocab.size();
        s.total_tokens = total;
        s.ds = s.nd == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(s.nd);
        return std::move(index);
    }
};

/// Document ids follow input order; term ids follow first occurrence.
inline IndexBuildResult build_index(std::span<const RawDocument> docs, const Tokenizer& tokenizer = {}) {
    IndexBuilder builder;
    IndexBuildResult result;
    std::unordered_map<std::string, bool> seen;
    std::unordered_map<TermId, std::uint32_t> counts;
    for (const auto& raw : docs) {
        if (!seen.emplace(raw.docno, true).second) throw InputError("duplicate docno '" + raw.docno + "'");
        counts.clear();
        std::vector<TermId> order;
        for (auto& token : tokenizer(raw.text)) {
            const TermId id = builder.intern(std::move(token));
            if (counts[id]++ == 0) order.push_back(id);
        }
        if (order.empty()) {
            result.dropped.push_back(raw.docno);
            continue;
        }
        std::vector<TermCount> tcs;
        tcs.reserve(order.size());
        for (TermId id : order) tcs.push_back({id, counts[id]});
        builder.add(raw.docno, std::move(tcs));
    }
    if (builder.document_count() == 0) throw InputError("collection has no document with at least one token");
    result.index = std::move(builder).finish();
    return result;
}

// On-disk layout (text, version 1):
//   manifest        "rrm-index 1"
//   stats           "nd N", "ds X", "vs V", "total_tokens T", one per line
//   vocabulary.tsv  term_id, term, df, cf
//   documents.tsv   doc_id, docno, length
//   postings.tsv    term_id, then doc:count pairs ascending by doc
inline constexpr std::string_view kIndexMagic = "rrm-index 1";

inline void write_stats(std::ostream& out, const CollectionStats& s) {
    std::ostringstream ds;
    ds.precision(17);
    ds << s.ds;
    out << "nd " << s.nd << "\nds " << ds.str() << "\nvs " << s.vs << "\ntotal_tokens " << s.total_tokens
        << '\n';
}

inline void save_index(const InvertedIndex& index, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw StateError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("stats");
        write_stats(out, index.stats());
    }
    {
        auto out = open("vocabulary.tsv");
        const auto& v = index.vocabulary();
        for (TermId t = 0; t < v.size(); ++t)
            out << t << '\t' << v.term(t) << '\t' << v.df(t) << '\t' << v.cf(t) << '\n';
    }
    {
        auto out = open("documents.tsv");
        for (const auto& d : index.documents()) out << d.id << '\t' << d.docno << '\t' << d.length << '\n';
    }
    {
        auto out = open("postings.tsv");
        for (TermId t = 0; t < index.vocabulary().size(); ++t) {
            out << t;
            for (const auto& p : index.postings(t)) out << '\t' << p.doc << ':' << p.count;
            out << '\n';
        }
    }
    // Manifest last: its presence marks a complete index.
    auto out = open("manifest");
    out << kIndexMagic << '\n';
}

inline bool is_index_dir(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / "manifest");
}

inline InvertedIndex load_index(const std::filesystem::path& dir) {
    auto open = [&](const char* name) {
        std::ifstream in(dir / name, std::ios::binary);
        if (!in) throw InputError("index file missing: " + (dir / name).string());
        return in;
    };
    {
        auto in = open("manifest");
        std::string line;
        std::getline(in, line);
        if (line != kIndexMagic) throw InputError("unsupported index format in " + dir.string());
    }
    IndexBuilder builder;
    std::string line;
    {
        auto in = open("vocabulary.tsv");
        while (std::getline(in, line)) {
            std::istringstream fields(line);
            std::string id, term;
            std::getline(fields, id, '\t');
            std::getline(fields, term, '\t');
            builder.intern(term);
        }
    }
    std::vector<std::pair<std::string, std::vector<TermCount>>> docs;
    {
        auto in = open("documents.tsv");
        while (std::getline(in, line)) {
            std::istringstream fields(line);
            std::string id, docno;
            std::getline(fields, id, '\t');
            std::getline(fields, docno, '\t');
            docs.emplace_back(docno, std::vector<TermCount>{});
        }
    }
    {
        auto in = open("postings.tsv");
        while (std::getline(in, line)) {
            std::istringstream fields(line);
            std::string field;
            std::getline(fields, field, '\t');
            const auto term = static_cast<TermId>(std::stoul(field));
            while (std::getline(fields, field, '\t')) {
                const auto colon = field.find(':');
                const auto doc = std::stoul(field.substr(0, colon));
                const auto count = static_cast<std::uint32_t>(std::stoul(field.substr(colon + 1)));
                if (doc >= docs.size()) throw InputError("posting references unknown document");
                docs[doc].second.push_back({term, count});
            }
        }
    }
    for (auto& [docno, counts] : docs) builder.add(std::move(docno), std::move(counts));
    return std::move(builder).finish();
}

}  // namespace rrm
