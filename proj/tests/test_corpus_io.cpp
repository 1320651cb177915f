#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "varietyir/corpus_io.hpp"
#include "varietyir/error.hpp"

using namespace varietyir;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("varietyir_test_" + name);
}

}  // namespace

TEST(CorpusIo, TsvDocument) {
    const auto c = parse_collection("d1\thello world\n");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].doc_id, "d1");
    EXPECT_EQ(c[0].text, "hello world");
}

TEST(CorpusIo, EmptyFileGivesEmptyCollection) {
    const auto p = temp_path("empty.tsv");
    write_file(p, "");
    EXPECT_EQ(load_collection(p).size(), 0u);
}

TEST(CorpusIo, MissingTabIsMalformedAtLine1) {
    try {
        (void)parse_collection("d1\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
        EXPECT_EQ(e.record(), 1u);
    }
}

TEST(CorpusIo, LineNumberPointsAtOffendingLine) {
    try {
        (void)parse_collection("d1\ta\nd2\tb\nd3\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.record(), 3u);
    }
}

TEST(CorpusIo, QueriesTsvAndJsonl) {
    const auto q = parse_queries("q7\twhat is occitan\n");
    EXPECT_EQ(q[0].query_id, "q7");
    EXPECT_EQ(q[0].text, "what is occitan");
    const auto j = parse_queries(R"({"query_id":"q1","text":"a"})" "\n", {RecordFormat::Jsonl});
    EXPECT_EQ(j[0].query_id, "q1");
    EXPECT_EQ(j[0].text, "a");
}

TEST(CorpusIo, DuplicateQueryId) {
    EXPECT_EQ(code_of([] { (void)parse_queries("q7\ta\nq7\tb\n"); }), ErrorCode::DuplicateId);
}

TEST(CorpusIo, InvalidUtf8IsMalformed) {
    EXPECT_EQ(code_of([] { (void)parse_collection("d1\tbad \xC3\x28 byte\n"); }), ErrorCode::MalformedRecord);
}

TEST(CorpusIo, CollectionRoundTrip) {
    const DocumentCollection c({{"d1", "héllo wörld", "orig"}, {"d2", "你好", "zh"}});
    const auto p = temp_path("roundtrip.tsv");
    write_collection(c, p);
    EXPECT_EQ(load_collection(p), c);
}

TEST(CorpusIo, Qrels) {
    EXPECT_EQ(parse_qrels("q1 0 d3 1\n"), (Qrels{{"q1", {{"d3", 1}}}}));
    EXPECT_EQ(parse_qrels("q1 0 d3 2\nq1 0 d4 0\n"), (Qrels{{"q1", {{"d3", 2}, {"d4", 0}}}}));
    EXPECT_EQ(code_of([] { (void)parse_qrels("q1 0 d3 -1\n"); }), ErrorCode::NegativeGrade);
}

TEST(CorpusIo, RunLineFormat) {
    EXPECT_EQ(format_run_line("q1", "d5", 1, 12.5, "tag"), "q1 Q0 d5 1 12.500000 tag\n");
}

TEST(CorpusIo, RunRoundTrip100Entries) {
    std::mt19937_64 rng(7);
    varietyir::Run run;
    for (int q = 0; q < 5; ++q) {
        Ranking r;
        for (int d = 0; d < 20; ++d) r.push_back({"d" + std::to_string(q * 20 + d), std::uniform_real_distribution<>(-5, 5)(rng)});
        sort_ranking(r);
        for (auto& e : r) e.score = std::stod(std::to_string(e.score));  // six-decimal precision survives
        run["q" + std::to_string(q)] = r;
    }
    const auto p = temp_path("run.trec");
    write_run(run, "t", p);
    const auto back = read_run(p);
    ASSERT_EQ(back.size(), run.size());
    std::size_t entries = 0;
    for (const auto& [q, r] : run) {
        ASSERT_EQ(back.at(q).size(), r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            EXPECT_EQ(back.at(q)[i].doc_id, r[i].doc_id);
            EXPECT_NEAR(back.at(q)[i].score, r[i].score, 1e-6);
            ++entries;
        }
    }
    EXPECT_EQ(entries, 100u);
}

TEST(CorpusIo, NonContiguousRanks) {
    EXPECT_EQ(code_of([] { (void)parse_run("q1 Q0 d1 1 2.0 t\nq1 Q0 d2 3 1.0 t\n"); }), ErrorCode::NonContiguousRanks);
}

TEST(CorpusIo, UnsortedRankingRejectedOnWrite) {
    varietyir::Run run{{"q1", {{"d1", 1.0}, {"d2", 2.0}}}};
    EXPECT_EQ(code_of([&] { (void)format_run(run, "t"); }), ErrorCode::UnsortedRanking);
}

TEST(CorpusIo, MissingFileIsIoFailure) {
    EXPECT_EQ(code_of([] { (void)load_collection("/nonexistent/varietyir/docs.tsv"); }), ErrorCode::IoFailure);
}
