#include <gtest/gtest.h>

#include "builders.hpp"
#include "immut/classifier.hpp"
#include "immut/lattice.hpp"
#include "oracles.hpp"
#include "random_graphs.hpp"

namespace immut {
namespace {

using test::graph_of;

EvidenceRecord field_evidence(AttributeKey k, const char* field) {
  return {k, FieldCause{field, type_ref("M")}};
}

TEST(DowngradeCell, LowersValueAndAddsAttributes) {
  Cell c{"X"};
  EvidenceRecord e = field_evidence(AttributeKey::H, "m");
  EXPECT_TRUE(downgrade_cell(c, Verdict::ShallowImmutable, {AttributeKey::H}, {&e, 1}));
  EXPECT_EQ(c.value, Verdict::ShallowImmutable);
  EXPECT_EQ(c.attributes, (AttributeSet{AttributeKey::H}));
  EXPECT_EQ(c.evidence.size(), 1u);
}

TEST(DowngradeCell, NeverRaises) {
  Cell c{"X", Verdict::ShallowImmutable};
  EXPECT_FALSE(downgrade_cell(c, Verdict::DeepImmutable, {}, {}));
  EXPECT_EQ(c.value, Verdict::ShallowImmutable);
  EXPECT_TRUE(c.attributes.empty());
}

TEST(DowngradeCell, AttributesAccumulateAtSameValue) {
  Cell c{"X", Verdict::ShallowImmutable, {AttributeKey::H}};
  EXPECT_TRUE(downgrade_cell(c, Verdict::ShallowImmutable, {AttributeKey::F}, {}));
  EXPECT_EQ(c.value, Verdict::ShallowImmutable);
  EXPECT_EQ(c.attributes, (AttributeSet{AttributeKey::F, AttributeKey::H}));
  EXPECT_FALSE(downgrade_cell(c, Verdict::ShallowImmutable, {AttributeKey::F}, {}));
}

TEST(DowngradeCell, DuplicateEvidenceIsKeptOnce) {
  Cell c{"X"};
  EvidenceRecord e = field_evidence(AttributeKey::G, "f");
  downgrade_cell(c, Verdict::ShallowImmutable, {AttributeKey::G}, {&e, 1});
  downgrade_cell(c, Verdict::ShallowImmutable, {AttributeKey::G}, {&e, 1});
  EXPECT_EQ(c.evidence.size(), 1u);
}

struct Engine {
  TemplateGraph graph;
  Assumptions assumptions;
  Classifier clf{graph, assumptions};

  explicit Engine(const std::string& src, Assumptions a = {})
      : graph(graph_of(src)), assumptions(std::move(a)) {}
  Engine(TemplateGraph g, Assumptions a) : graph(std::move(g)), assumptions(std::move(a)) {}

  FixpointOutcome run(FixpointOptions opts = {}) const {
    return run_fixpoint(graph, test::BoundTransfer{&clf}, opts);
  }
  std::map<std::string, Verdict> oracle() const {
    return exhaustive_fixpoint_oracle(graph, test::VerdictOnlyTransfer{&clf});
  }
  const Cell& cell(const FixpointOutcome& o, const char* name) const {
    return o.cells.at(*graph.index_of(name));
  }
};

TEST(RunFixpoint, MutableParentPropagates) {
  Engine e("class C { var x: Int = 0 }\nclass D extends C");
  auto out = e.run();
  EXPECT_EQ(e.cell(out, "C").value, Verdict::Mutable);
  EXPECT_EQ(e.cell(out, "C").attributes, (AttributeSet{AttributeKey::C}));
  EXPECT_EQ(e.cell(out, "D").value, Verdict::Mutable);
  EXPECT_EQ(e.cell(out, "D").attributes, (AttributeSet{AttributeKey::B}));
}

TEST(RunFixpoint, MutualRecursionStaysDeep) {
  Engine e("class A(val b: B)\nclass B(val a: A)");
  auto out = e.run();
  EXPECT_EQ(e.cell(out, "A").value, Verdict::DeepImmutable);
  EXPECT_EQ(e.cell(out, "B").value, Verdict::DeepImmutable);
  EXPECT_TRUE(e.cell(out, "A").attributes.empty());
  EXPECT_TRUE(e.cell(out, "B").attributes.empty());
  EXPECT_EQ(test::verdicts_by_name(e.graph, out.assignment()), e.oracle());
}

TEST(RunFixpoint, EmptyGraph) {
  Engine e(TemplateGraph{}, {});
  EXPECT_TRUE(e.run().cells.empty());
  EXPECT_TRUE(e.oracle().empty());
}

TEST(Oracle, MutualRecursionPair) {
  Engine e("class A(val b: B)\nclass B(val a: A)");
  auto o = e.oracle();
  EXPECT_EQ(o.at("A"), Verdict::DeepImmutable);
  EXPECT_EQ(o.at("B"), Verdict::DeepImmutable);
}

TEST(Oracle, SingleVar) {
  Engine e("class C { var x: Int = 0 }");
  EXPECT_EQ(e.oracle().at("C"), Verdict::Mutable);
}

TEST(Oracle, ThreeChain) {
  Engine e("class A extends B\nclass B extends C\nclass C { var x: Int = 0 }");
  for (const auto& [name, v] : e.oracle()) EXPECT_EQ(v, Verdict::Mutable) << name;
  EXPECT_EQ(test::verdicts_by_name(e.graph, e.run().assignment()), e.oracle());
}

TEST(Oracle, RejectsLargeGraphs) {
  std::string src;
  for (int i = 0; i <= static_cast<int>(kOracleMaxTemplates); ++i) {
    src += "class C" + std::to_string(i) + "\n";
  }
  Engine e(src);
  EXPECT_THROW(e.oracle(), OracleLimitError);
}

TEST(Oracle, DetectsNonMonotoneTransfer) {
  // Flips the verdict of its own input: no fixpoint exists.
  auto g = TemplateGraph::build({test::tmpl("X", TemplateKind::Class, {test::ty("X")})});
  auto flip = [](const TemplateDef&, std::span<const Verdict> s) {
    return TransferResult{s[0] == Verdict::DeepImmutable ? Verdict::Mutable : Verdict::DeepImmutable};
  };
  EXPECT_THROW(exhaustive_fixpoint_oracle(g, flip), std::logic_error);
}

TEST(Dependencies, IgnoreAbstractHeadsAndIncludeArguments) {
  auto g = graph_of("class T\ncase class P[T](v: T)\nclass Q(val p: P[R])\nclass R");
  auto deps = template_dependencies(g);
  EXPECT_TRUE(deps[*g.index_of("P")].empty());
  auto q = deps[*g.index_of("Q")];
  std::sort(q.begin(), q.end());
  std::vector<std::size_t> expected{*g.index_of("P"), *g.index_of("R")};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(q, expected);
}

TEST(FixpointProperty, AgreesWithOracleOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto c = test::random_graph(seed, 6);
    Engine e(c.graph, c.assumptions);
    ASSERT_EQ(test::verdicts_by_name(e.graph, e.run().assignment()), e.oracle())
        << "seed " << seed << "\n" << serialize_ir(c.graph);
  }
}

TEST(FixpointProperty, ComponentOracleAgreesWithWholeGraphOracle) {
  for (std::uint64_t seed = 1000; seed < 1200; ++seed) {
    auto c = test::random_graph(seed, 6);
    Engine e(c.graph, c.assumptions);
    ASSERT_EQ(test::component_oracle(c.graph, c.assumptions), e.oracle()) << "seed " << seed;
  }
}

TEST(FixpointProperty, ShuffledOrdersAgree) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = test::random_graph(seed, 10);
    Engine e(c.graph, c.assumptions);
    auto base = e.run().assignment();
    for (std::uint64_t order = 1; order <= 10; ++order) {
      ASSERT_EQ(e.run({seed * 100 + order}).assignment(), base) << "seed " << seed;
    }
  }
}

TEST(FixpointProperty, DowngradeOnlyAndBounded) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto c = test::random_graph(seed, 10);
    Engine e(c.graph, c.assumptions);
    auto out = e.run({seed});
    EXPECT_EQ(out.stats.value_increases, 0u);
    EXPECT_LE(out.stats.strict_downgrades, 3 * c.graph.size());
  }
}

TEST(FixpointProperty, CyclesWithoutEvidenceStayDeep) {
  // A ring of templates referring to the next one through val fields.
  for (int n = 1; n <= 12; ++n) {
    std::string src;
    for (int i = 0; i < n; ++i) {
      src += "class R" + std::to_string(i) + "(val next: R" + std::to_string((i + 1) % n) +
             ")\n";
    }
    Engine e(src);
    for (const auto& c : e.run().cells) EXPECT_EQ(c.value, Verdict::DeepImmutable) << c.owner;
  }
}

}  // namespace
}  // namespace immut
