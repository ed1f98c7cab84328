#include <gtest/gtest.h>
#include <zlib.h>

#include "fixtures.hpp"

using namespace rrm;

TEST(ParseTrec, MinimalDocument) {
    auto docs = parse_trec("<DOC><DOCNO> d1 </DOCNO><TEXT>a b</TEXT></DOC>");
    ASSERT_EQ(docs.size(), 1u);
    EXPECT_EQ(docs[0].docno, "d1");
    EXPECT_EQ(docs[0].text, "a b");
}

TEST(ParseTrec, EmptyStream) {
    EXPECT_TRUE(parse_trec("").empty());
    EXPECT_TRUE(parse_trec("  \n\n").empty());
}

TEST(ParseTrec, FiveDocumentFileMatchesHandParse) {
    const std::string file =
        "<DOC>\n<DOCNO>AP-001</DOCNO>\n<HEAD>ignored headline</HEAD>\n<TEXT>\nWall Street rallied.\n</TEXT>\n</DOC>\n"
        "<DOC>\n<DOCNO>  AP-002\t</DOCNO>\n<TEXT>first part</TEXT>\n<TEXT>second part</TEXT>\n</DOC>\n"
        "<DOC><DOCNO>AP-003</DOCNO></DOC>\n"
        "<DOC>\n<DOCNO>AP-004</DOCNO>\n<TEXT>x < y and y > z</TEXT>\n</DOC>\n"
        "<DOC>\n<DOCNO>AP-005</DOCNO>\n<TEXT>last</TEXT>\n</DOC>\n";
    const std::vector<RawDocument> expected = {
        {"AP-001", "\nWall Street rallied.\n"},
        {"AP-002", "first part\nsecond part"},
        {"AP-003", ""},
        {"AP-004", "x < y and y > z"},
        {"AP-005", "last"},
    };
    const auto docs = parse_trec(file);
    ASSERT_EQ(docs.size(), expected.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        EXPECT_EQ(docs[i].docno, expected[i].docno) << i;
        EXPECT_EQ(docs[i].text, expected[i].text) << i;
    }
}

TEST(ParseTrec, ErrorsNameByteOffset) {
    auto offset_of = [](std::string_view bytes) -> std::size_t {
        try {
            parse_trec(bytes);
        } catch (const ParseError& e) {
            EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
            return e.offset();
        }
        ADD_FAILURE() << "no error for: " << bytes;
        return 0;
    };
    EXPECT_EQ(offset_of("<DOC><TEXT>no id</TEXT></DOC>"), 0u);
    EXPECT_EQ(offset_of("<DOC><DOCNO>a</DOCNO><DOC>"), 21u);
    EXPECT_EQ(offset_of("xx<DOC><DOCNO>a</DOCNO>"), 2u);
    EXPECT_EQ(offset_of("<DOC><DOCNO>a</DOCNO><TEXT>open"), 21u);
    EXPECT_EQ(offset_of("</DOC>"), 0u);
    EXPECT_EQ(offset_of("<DOC><DOCNO>a</DOCNO></TEXT></DOC>"), 21u);
    EXPECT_EQ(offset_of("<DOC><DOCNO>a</DOCNO><DOCNO>b</DOCNO></DOC>"), 21u);
}

TEST(ParseTsv, LinesAndErrors) {
    auto docs = parse_tsv("d1\thello world\r\n\nd2\tbye\n");
    ASSERT_EQ(docs.size(), 2u);
    EXPECT_EQ(docs[0].docno, "d1");
    EXPECT_EQ(docs[0].text, "hello world");
    EXPECT_EQ(docs[1].text, "bye");
    EXPECT_THROW(parse_tsv("d1 no tab\n"), ParseError);
}

TEST(ParseCorpus, AutoDetect) {
    EXPECT_EQ(parse_corpus("  <DOC><DOCNO>a</DOCNO></DOC>", CorpusFormat::automatic).size(), 1u);
    EXPECT_EQ(parse_corpus("a\tb\n", CorpusFormat::automatic).size(), 1u);
    EXPECT_THROW(parse_corpus_format("xml"), InputError);
}

TEST(ReadCorpus, GzipIsDetectedByMagic) {
    const auto dir = test::scratch_dir("gzip");
    const std::string body = "<DOC><DOCNO>z1</DOCNO><TEXT>compressed words</TEXT></DOC>\n";
    gzFile f = gzopen((dir / "c.trec.gz").c_str(), "wb");
    ASSERT_NE(f, nullptr);
    gzwrite(f, body.data(), static_cast<unsigned>(body.size()));
    gzclose(f);
    {
        std::ofstream plain(dir / "plain.trec", std::ios::binary);
        plain << body;
    }
    EXPECT_EQ(read_corpus_bytes(dir / "c.trec.gz"), body);
    EXPECT_EQ(read_corpus_bytes(dir / "plain.trec"), body);
    const auto docs = load_corpus({dir / "c.trec.gz", dir / "plain.trec"}, CorpusFormat::automatic);
    ASSERT_EQ(docs.size(), 2u);
    EXPECT_EQ(docs[0].docno, "z1");
    EXPECT_THROW(read_corpus_bytes(dir / "missing"), InputError);
}

TEST(Tokenize, Examples) {
    using V = std::vector<std::string>;
    EXPECT_EQ(tokenize("Apple, banana!"), (V{"apple", "banana"}));
    EXPECT_EQ(tokenize(""), V{});
    EXPECT_EQ(tokenize("A1-b2 A1"), (V{"a1", "b2", "a1"}));
    EXPECT_EQ(tokenize("caf\xc3\xa9 ok"), (V{"caf", "ok"}));
}

TEST(Tokenize, Stopwords) {
    Tokenizer t({"the", "of"});
    EXPECT_EQ(t("The end of THE story"), (std::vector<std::string>{"end", "story"}));
    const auto dir = test::scratch_dir("stop");
    {
        std::ofstream f(dir / "stop.txt");
        f << "The\nand\n";
    }
    const auto s = Tokenizer::with_stopword_file(dir / "stop.txt");
    EXPECT_EQ(s("the cat and dog"), (std::vector<std::string>{"cat", "dog"}));
    EXPECT_THROW(Tokenizer::with_stopword_file(dir / "none.txt"), InputError);
}
