#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "intelguard/error.hpp"
#include "intelguard/hashing.hpp"
#include "intelguard/ingestion.hpp"
#include "intelguard/provider.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"
#include "stub_provider.hpp"

namespace intelguard {
namespace {

using testing::fixture_path;

ReportDocument appendix_doc() {
    return load_report_document({"appendix-stego", "", fixture_path("ingestion/appendix_stego.json")});
}

TEST(Ingestion, ReconstructsSmallExample) {
    const std::vector<DocumentBlock> blocks{
        {BlockKind::Prose, 1, "The payload:"}, {BlockKind::Code, 2, "eval(x)"}, {BlockKind::Prose, 3, "runs on import"}};
    EXPECT_EQ(reconstruct_document(blocks), "The payload:\n```\neval(x)\n```\nruns on import");
}

TEST(Ingestion, SingleProseBlockIsUnchanged) {
    EXPECT_EQ(reconstruct_document({{BlockKind::Prose, 7, "only text\nwith two lines"}}), "only text\nwith two lines");
}

TEST(Ingestion, RejectsNonIncreasingPositions) {
    EXPECT_THROW(reconstruct_document({{BlockKind::Prose, 2, "a"}, {BlockKind::Code, 2, "b"}}), InputError);
    EXPECT_THROW(reconstruct_document({{BlockKind::Prose, 3, "a"}, {BlockKind::Code, 1, "b"}}), InputError);
}

TEST(Ingestion, AppendixSnippetSitsBetweenItsParagraphs) {
    auto doc = appendix_doc();
    reconstruct(doc);
    const std::string& t = doc.reconstructed_text;
    const auto before = t.find("runs the following routine:");
    const auto code = t.find("// Execute extracted code from image");
    const auto after = t.find("During postinstall");
    ASSERT_NE(before, std::string::npos);
    ASSERT_NE(code, std::string::npos);
    ASSERT_NE(after, std::string::npos);
    EXPECT_LT(before, code);
    EXPECT_LT(code, after);
    EXPECT_TRUE(text::has_fence_line(t));
}

TEST(Ingestion, ReconstructionIsLossless) {
    std::mt19937 rng(99);
    for (int round = 0; round < 200; ++round) {
        std::vector<DocumentBlock> blocks;
        int pos = 0;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            pos += 1 + static_cast<int>(rng() % 5);
            blocks.push_back({rng() % 2 ? BlockKind::Code : BlockKind::Prose, pos,
                              "<frag " + std::to_string(round) + "." + std::to_string(i) + ">"});
        }
        const std::string out = reconstruct_document(blocks);
        std::size_t cursor = 0;
        for (const auto& b : blocks) {
            const auto at = out.find(b.content);
            ASSERT_NE(at, std::string::npos);
            EXPECT_EQ(out.find(b.content, at + 1), std::string::npos) << "fragment repeated";
            EXPECT_GE(at, cursor) << "fragment out of order";
            cursor = at + b.content.size();
        }
    }
}

TEST(Ingestion, MockRelevanceRule) {
    MockProvider mock;
    ReportDocument with_code{"a", "", {{BlockKind::Prose, 1, "It will exfiltrate keys."}, {BlockKind::Code, 2, "send(k)"}}, {}};
    reconstruct(with_code);
    EXPECT_EQ(apply_relevance(with_code, mock).label, Relevance::Relevant);
    EXPECT_EQ(with_code.relevance, Relevance::Relevant);

    ReportDocument advisory{"b", "", {{BlockKind::Prose, 1, "Package foo 1.0 was removed from the registry."}}, {}};
    reconstruct(advisory);
    EXPECT_EQ(apply_relevance(advisory, mock).label, Relevance::Irrelevant);

    ReportDocument code_no_keyword{"c", "", {{BlockKind::Prose, 1, "Example:"}, {BlockKind::Code, 2, "print(1)"}}, {}};
    reconstruct(code_no_keyword);
    EXPECT_EQ(apply_relevance(code_no_keyword, mock).label, Relevance::Irrelevant);
}

TEST(Ingestion, RelevanceCorpusYieldsSixRelevant) {
    const std::string manifest = fixture_path("relevance/manifest.json");
    const auto items = load_report_manifest(manifest);
    ASSERT_EQ(items.size(), 10u);
    const Json expected = Json::parse(text::read_file(manifest));
    MockProvider mock;
    int relevant = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto doc = load_report_document(items[i]);
        reconstruct(doc);
        const auto first = apply_relevance(doc, mock);
        EXPECT_EQ(filter_relevance(doc, mock).raw_response, first.raw_response) << "not deterministic";
        EXPECT_EQ(std::string(to_string(doc.relevance)), expected[i]["expected"].get<std::string>()) << items[i].doc_id;
        relevant += doc.relevance == Relevance::Relevant;
    }
    EXPECT_EQ(relevant, 6);
}

TEST(Ingestion, ProviderFailureLeavesDocumentUnfiltered) {
    auto doc = appendix_doc();
    reconstruct(doc);
    const auto failing = testing::failing_provider();
    EXPECT_THROW(apply_relevance(doc, failing), RetriableError);
    EXPECT_EQ(doc.relevance, Relevance::Unfiltered);

    const testing::StubProvider garbage([](TaskKind, std::string_view) { return std::string("maybe?"); });
    EXPECT_THROW(apply_relevance(doc, garbage), RetriableError);
    EXPECT_EQ(doc.relevance, Relevance::Unfiltered);
}

TEST(Ingestion, RelevanceNeedsReconstruction) {
    auto doc = appendix_doc();
    MockProvider mock;
    EXPECT_THROW(filter_relevance(doc, mock), InputError);
}

TEST(Ingestion, ManifestPathsResolveAgainstManifestDir) {
    const auto items = load_report_manifest(fixture_path("reports/manifest.json"));
    ASSERT_FALSE(items.empty());
    for (const auto& item : items) {
        EXPECT_TRUE(std::ifstream(item.path).good()) << item.path;
        EXPECT_FALSE(item.source_url.empty());
    }
}

TEST(Ingestion, FixtureOcrLooksUpByDigest) {
    const std::vector<std::uint8_t> image{0xff, 0xd8, 0xff, 0xe0, 'J', 'F', 'I', 'F'};
    const std::string digest = fnv1a64_hex(std::string_view(reinterpret_cast<const char*>(image.data()), image.size()));
    FixtureOcr ocr(std::map<std::string, OcrResult>{{digest, OcrResult{"eval(x)", 0.87}}});
    const auto r = ocr.recognize(image);
    EXPECT_EQ(r.text, "eval(x)");
    EXPECT_DOUBLE_EQ(r.confidence, 0.87);
    const std::vector<std::uint8_t> other{1, 2, 3};
    EXPECT_THROW(ocr.recognize(other), InputError);
}

}  // namespace
}  // namespace intelguard
