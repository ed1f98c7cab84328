#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rrm/error.hpp"

namespace rrm {

struct RawDocument {
    std::string docno;
    std::string text;

    bool operator==(const RawDocument&) const = default;
};

namespace detail {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

struct Tag {
    std::string_view name;
    bool closing = false;
    std::size_t begin = 0;  // offset of '<'
    std::size_t end = 0;    // one past '>'
};

/// Finds the next markup tag at or after `pos`. Returns false at end of input.
inline bool next_tag(std::string_view bytes, std::size_t pos, Tag& tag) {
    while (true) {
        const auto lt = bytes.find('<', pos);
        if (lt == std::string_view::npos) return false;
        std::size_t i = lt + 1;
        bool closing = false;
        if (i < bytes.size() && bytes[i] == '/') {
            closing = true;
            ++i;
        }
        const std::size_t name_begin = i;
        while (i < bytes.size() && (std::isalnum(static_cast<unsigned char>(bytes[i])) || bytes[i] == '_'))
            ++i;
        if (i == name_begin) {
            pos = lt + 1;  // a bare '<' in running text
            continue;
        }
        const auto gt = bytes.find('>', i);
        if (gt == std::string_view::npos) throw ParseError("unterminated tag", lt);
        tag = Tag{bytes.substr(name_begin, i - name_begin), closing, lt, gt + 1};
        return true;
    }
}

inline std::size_t find_close(std::string_view bytes, std::size_t pos, std::string_view name,
                              std::size_t open_offset) {
    Tag tag;
    while (next_tag(bytes, pos, tag)) {
        if (tag.closing && tag.name == name) return tag.begin;
        if (!tag.closing && (tag.name == "DOC" || tag.name == name))
            throw ParseError("malformed nesting: <" + std::string(tag.name) + "> inside <" +
                                 std::string(name) + ">",
                             tag.begin);
        pos = tag.end;
    }
    throw ParseError("missing </" + std::string(name) + ">", open_offset);
}

}  // namespace detail

/// Parses TREC SGML. Only DOC, DOCNO and TEXT are structural; any other tag
/// inside a document is skipped. Multiple TEXT bodies are joined with a
/// newline so tokens never fuse across bodies.
inline std::vector<RawDocument> parse_trec(std::string_view bytes) {
    std::vector<RawDocument> out;
    std::size_t pos = 0;
    detail::Tag tag;
    bool in_doc = false;
    bool have_docno = false;
    bool have_text = false;
    std::size_t doc_offset = 0;
    RawDocument current;

    while (detail::next_tag(bytes, pos, tag)) {
        pos = tag.end;
        if (!in_doc) {
            if (tag.name == "DOC" && !tag.closing) {
                in_doc = true;
                have_docno = have_text = false;
                doc_offset = tag.begin;
                current = RawDocument{};
                continue;
            }
            if (tag.name == "DOC" || tag.name == "DOCNO" || tag.name == "TEXT")
                throw ParseError("unexpected <" + std::string(tag.closing ? "/" : "") +
                                     std::string(tag.name) + "> outside <DOC>",
                                 tag.begin);
            continue;
        }
        if (tag.name == "DOC") {
            if (!tag.closing) throw ParseError("malformed nesting: <DOC> inside <DOC>", tag.begin);
            if (!have_docno) throw ParseError("missing <DOCNO>", doc_offset);
            out.push_back(std::move(current));
            in_doc = false;
        } else if (tag.name == "DOCNO" || tag.name == "TEXT") {
            if (tag.closing)
                throw ParseError("unmatched </" + std::string(tag.name) + ">", tag.begin);
            const auto close = detail::find_close(bytes, tag.end, tag.name, tag.begin);
            const auto body = bytes.substr(tag.end, close - tag.end);
            if (tag.name == "DOCNO") {
                if (have_docno) throw ParseError("duplicate <DOCNO>", tag.begin);
                current.docno = std::string(detail::trim(body));
                have_docno = true;
            } else {
                if (have_text) current.text += '\n';
                current.text.append(body);
                have_text = true;
            }
            pos = bytes.find('>', close) + 1;
        }
    }
    if (in_doc) throw ParseError("unterminated <DOC>", doc_offset);
    return out;
}

/// Fallback corpus format: `docno<TAB>text`, one document per line.
inline std::vector<RawDocument> parse_tsv(std::string_view bytes) {
    std::vector<RawDocument> out;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        auto eol = bytes.find('\n', pos);
        if (eol == std::string_view::npos) eol = bytes.size();
        auto line = bytes.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!detail::trim(line).empty()) {
            const auto tab = line.find('\t');
            if (tab == std::string_view::npos) throw ParseError("TSV line without a tab", pos);
            out.push_back({std::string(detail::trim(line.substr(0, tab))), std::string(line.substr(tab + 1))});
        }
        pos = eol + 1;
    }
    return out;
}

/// Reads a whole file, inflating it when it starts with the gzip magic bytes.
inline std::string read_corpus_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::array<char, 2> magic{};
    in.read(magic.data(), 2);
    const bool gz = in.gcount() == 2 && static_cast<unsigned char>(magic[0]) == 0x1f &&
                    static_cast<unsigned char>(magic[1]) == 0x8b;
    if (!gz) {
        in.clear();
        in.seekg(0);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    in.close();
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw InputError("cannot open " + path.string());
    std::string out;
    std::array<char, 1 << 16> buffer{};
    int n = 0;
    while ((n = gzread(file, buffer.data(), static_cast<unsigned>(buffer.size()))) > 0)
        out.append(buffer.data(), static_cast<std::size_t>(n));
    const bool failed = n < 0;
    gzclose(file);
    if (failed) throw InputError("corrupt gzip stream in " + path.string());
    return out;
}

enum class CorpusFormat { automatic, trec, tsv };

inline CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "auto") return CorpusFormat::automatic;
    if (name == "trec") return CorpusFormat::trec;
    if (name == "tsv") return CorpusFormat::tsv;
    throw InputError("unknown corpus format '" + std::string(name) + "'");
}

inline std::vector<RawDocument> parse_corpus(std::string_view bytes, CorpusFormat format) {
    if (format == CorpusFormat::automatic) {
        const auto body = detail::trim(bytes);
        format = (body.empty() || body.starts_with("<DOC")) ? CorpusFormat::trec : CorpusFormat::tsv;
    }
    return format == CorpusFormat::trec ? parse_trec(bytes) : parse_tsv(bytes);
}

/// Concatenates documents from several files, in argument order.
inline std::vector<RawDocument> load_corpus(const std::vector<std::filesystem::path>& paths,
                                            CorpusFormat format = CorpusFormat::automatic) {
    std::vector<RawDocument> docs;
    for (const auto& path : paths) {
        auto part = parse_corpus(read_corpus_bytes(path), format);
        std::move(part.begin(), part.end(), std::back_inserter(docs));
    }
    return docs;
}

/// Lowercases and splits on non-alphanumeric runs. No stemming.
class Tokenizer {
  public:
    Tokenizer() = default;
    explicit Tokenizer(std::unordered_set<std::string> stopwords) : stopwords_(std::move(stopwords)) {}

    static Tokenizer with_stopword_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open stopword list " + path.string());
        std::unordered_set<std::string> words;
        Tokenizer plain;
        std::string line;
        while (std::getline(in, line))
            for (auto& w : plain(line)) words.insert(std::move(w));
        return Tokenizer(std::move(words));
    }

    std::vector<std::string> operator()(std::string_view text) const {
        std::vector<std::string> tokens;
        std::string current;
        auto flush = [&] {
            if (!current.empty() && !stopwords_.contains(current)) tokens.push_back(current);
            current.clear();
        };
        for (char c : text) {
            const auto u = static_cast<unsigned char>(c);
            if (u < 0x80 && std::isalnum(u))
                current.push_back(static_cast<char>(std::tolower(u)));
            else
                flush();
        }
        flush();
        return tokens;
    }

    const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

  private:
    std::unordered_set<std::string> stopwords_;
};

inline std::vector<std::string> tokenize(std::string_view text) { return Tokenizer{}(text); }

}  // namespace rrm
