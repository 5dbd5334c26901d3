#include <gtest/gtest.h>

#include "golden.hpp"
#include "immut/report.hpp"
#include "oracles.hpp"

namespace immut {
namespace {

class Golden : public ::testing::Test {
 protected:
  TemplateGraph graph = test::golden_graph();
  Assumptions assumptions = test::golden_assumptions();
  AnalysisResult result = classify_corpus(graph, assumptions);
};

TEST_F(Golden, MatchesExpectedResultFile) {
  auto expected = test::golden_expected();
  auto actual = test::as_expected(result);
  ASSERT_EQ(actual.size(), expected.size());
  for (const auto& [name, e] : expected) {
    auto it = actual.find(name);
    ASSERT_NE(it, actual.end()) << name;
    EXPECT_EQ(it->second.verdict, e.verdict) << name;
    EXPECT_EQ(it->second.attributes.combo_key(), e.attributes.combo_key()) << name;
    EXPECT_EQ(it->second.evidence, e.evidence) << name;
  }
}

TEST_F(Golden, ExpectedVerdictsAreTheGreatestFixpoint) {
  auto expected = test::golden_expected();
  auto oracle = test::component_oracle(graph, assumptions);
  for (const auto& [name, e] : expected) EXPECT_EQ(oracle.at(name), e.verdict) << name;
}

TEST_F(Golden, CoversEveryAttributeAndKind) {
  AttributeSet seen;
  for (const auto& [name, a] : result.attributes) seen.merge(a);
  EXPECT_EQ(seen.size(), kAttributeCount);
  std::set<TemplateKind> kinds;
  for (const auto& t : graph.templates()) kinds.insert(t.kind);
  EXPECT_EQ(kinds.size(), kAllKinds.size());
  EXPECT_TRUE(check_result_invariants(result, graph).empty());
}

TEST_F(Golden, SourcesMatchCommittedIr) {
  auto committed = load_ir(test::read_text(test::data_path("golden/corpus.ir.json")));
  EXPECT_EQ(graph, committed);
  EXPECT_EQ(serialize_ir(graph), test::read_text(test::data_path("golden/corpus.ir.json")));
}

TEST_F(Golden, IrRoundTripIsByteStable) {
  auto once = serialize_ir(graph);
  auto back = load_ir(once);
  EXPECT_EQ(back, graph);
  EXPECT_EQ(serialize_ir(back), once);
}

TEST_F(Golden, ShallowCombosMatchRecountOfExpectedFile) {
  std::map<std::string, std::size_t> recount;
  for (const auto& [name, e] : test::golden_expected()) {
    if (e.verdict == Verdict::ShallowImmutable) ++recount[e.attributes.combo_key()];
  }
  auto table = attribute_combinations(result, Verdict::ShallowImmutable);
  std::map<std::string, std::size_t> actual;
  for (const auto& r : table.rows) actual.emplace(r.combo_key, r.occurrences);
  EXPECT_EQ(actual, recount);
}

TEST_F(Golden, TextReportMatchesCommittedFile) {
  auto text = render_report(build_report(result, graph), ReportFormat::Text);
  EXPECT_EQ(text, test::read_text(test::data_path("golden/report.txt")));
}

TEST_F(Golden, ExplainShallowWithSeveralCauses) {
  auto e = explain(result, "CounterSeq");
  EXPECT_EQ(render_explanation(e),
            "CounterSeq: shallow immutable\n"
            "H: parent 'Seq[Counter]' has a type argument of mutable type\n"
            "H: val field 'head' has mutable type 'Counter'\n");
  EXPECT_EQ(render_explanation(explain(result, "Hybrid")),
            "Hybrid: mutable\n"
            "B: parent 'Counter' is mutable\n"
            "C: field 'label' is reassignable (public)\n"
            "D: field 'hits' is reassignable (private)\n");
}

}  // namespace
}  // namespace immut
