#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "paths.hpp"
#include "random_model.hpp"
#include "sdkit/errors.hpp"
#include "sdkit/lending.hpp"
#include "sdkit/loops.hpp"
#include "sdkit/parser.hpp"

using namespace sdkit;

namespace {

CausalGraph cld(const std::string& text) {
  auto r = parse_cld(text);
  EXPECT_TRUE(r.ok()) << text;
  return std::move(*r.value);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

using Signature = std::pair<std::vector<std::string>, std::vector<CausalEdge>>;

// Exhaustive DFS: each cycle is rooted at its smallest node name.
std::set<Signature> brute_force_cycles(const CausalGraph& g) {
  std::map<std::string, std::vector<CausalEdge>> out;
  for (const auto& e : g.edges()) out[e.from].push_back(e);
  std::set<Signature> found;
  std::vector<std::string> nodes;
  std::vector<CausalEdge> edges;
  std::set<std::string> on_path;
  std::function<void(const std::string&, const std::string&)> dfs = [&](const std::string& root,
                                                                        const std::string& at) {
    for (const auto& e : out[at]) {
      if (e.to == root) {
        edges.push_back(e);
        found.insert({nodes, edges});
        edges.pop_back();
      } else if (e.to > root && !on_path.count(e.to)) {
        nodes.push_back(e.to);
        edges.push_back(e);
        on_path.insert(e.to);
        dfs(root, e.to);
        on_path.erase(e.to);
        edges.pop_back();
        nodes.pop_back();
      }
    }
  };
  for (const auto& n : g.nodes()) {
    nodes = {n};
    on_path = {n};
    dfs(n, n);
  }
  return found;
}


}  // namespace

TEST(Classify, PolarityProduct) {
  auto edges = [](std::initializer_list<Polarity> ps) {
    std::vector<CausalEdge> out;
    for (auto p : ps) out.push_back({"a", "b", p, false});
    return out;
  };
  EXPECT_EQ(classify(edges({Polarity::Positive, Polarity::Positive, Polarity::Positive, Polarity::Positive})),
            LoopType::Reinforcing);
  EXPECT_EQ(classify(edges({Polarity::Positive, Polarity::Positive, Polarity::Negative})), LoopType::Balancing);
  EXPECT_EQ(classify(edges({Polarity::Negative, Polarity::Negative})), LoopType::Reinforcing);
  EXPECT_EQ(classify(edges({Polarity::Negative, Polarity::Unknown})), LoopType::Undetermined);
  auto delayed = edges({Polarity::Negative});
  delayed[0].delayed = true;
  EXPECT_EQ(classify(delayed), LoopType::Balancing);
}

TEST(Enumerate, LendingCld) {
  auto g = cld(slurp(sdkit::testing::data_path("lending.cld")));
  auto loops = enumerate_loops(g);
  ASSERT_EQ(loops.size(), 2u);
  const FeedbackLoop* r = nullptr;
  const FeedbackLoop* b = nullptr;
  for (const auto& l : loops) (l.type == LoopType::Reinforcing ? r : b) = &l;
  ASSERT_TRUE(r && b);
  EXPECT_EQ(r->length(), 4u);
  EXPECT_EQ(b->length(), 4u);
  EXPECT_TRUE(std::count(r->nodes.begin(), r->nodes.end(), "PaymentsMade"));
  EXPECT_TRUE(std::count(b->nodes.begin(), b->nodes.end(), "LoanDefaults"));
  EXPECT_TRUE(r->contains_delay);
  EXPECT_FALSE(b->contains_delay);
  EXPECT_EQ(r->nodes.front(), "AverageCreditScore");  // smallest name first

  std::string report = format_loop_report(loops);
  EXPECT_EQ(report.rfind("1 reinforcing, 1 balancing", 0), 0u) << report;
  EXPECT_NE(report.find("R loop contains delayed edge PaymentsMade -> AverageCreditScore"), std::string::npos);
}

TEST(Enumerate, SmallCases) {
  EXPECT_TRUE(enumerate_loops(cld("A -> B +\nB -> C +\n")).empty());
  EXPECT_EQ(format_loop_report({}), "no feedback loops\n");

  auto self = enumerate_loops(cld("A -> A -\n"));
  ASSERT_EQ(self.size(), 1u);
  EXPECT_EQ(self[0].type, LoopType::Balancing);
  EXPECT_EQ(self[0].length(), 1u);
  EXPECT_NE(format_loop_report(self).find("warning"), std::string::npos);
}

TEST(Enumerate, ParallelEdgesAreSeparateLoops) {
  auto loops = enumerate_loops(cld("A -> B +\nA -> B -\nB -> A +\n"));
  ASSERT_EQ(loops.size(), 2u);
  auto c = count_loops(loops);
  EXPECT_EQ(c.reinforcing, 1u);
  EXPECT_EQ(c.balancing, 1u);
}

TEST(Enumerate, ResourceLimit) {
  // Complete digraph on 8 nodes has far more than 100 simple cycles.
  auto g = sdkit::testing::RandomModels(1).graph(8, 1.0);
  LoopOptions opts;
  opts.max_loops = 100;
  EXPECT_THROW(enumerate_loops(g, opts), ResourceLimit);
}

TEST(Enumerate, MatchesBruteForce) {
  sdkit::testing::RandomModels gen(31337);
  for (int i = 0; i < 150; ++i) {
    auto g = gen.graph(gen.uniform(1, 7), 0.1 + 0.05 * gen.uniform(0, 6));
    auto loops = enumerate_loops(g);
    std::set<Signature> got;
    for (const auto& l : loops) {
      EXPECT_TRUE(got.insert({l.nodes, l.edges}).second) << "duplicate loop";
      EXPECT_EQ(l.type, classify(l.edges));
      EXPECT_EQ(l.contains_delay, std::any_of(l.edges.begin(), l.edges.end(), [](auto& e) { return e.delayed; }));
    }
    EXPECT_EQ(got, brute_force_cycles(g));
    for (std::size_t k = 1; k < loops.size(); ++k) {
      const auto& a = loops[k - 1];
      const auto& b = loops[k];
      EXPECT_TRUE(a.length() < b.length() || (a.length() == b.length() && a.nodes <= b.nodes));
    }
  }
}

TEST(Enumerate, InsertionOrderInvariance) {
  sdkit::testing::RandomModels gen(5);
  for (int i = 0; i < 40; ++i) {
    auto g = gen.graph(6, 0.3);
    std::vector<CausalEdge> edges = g.edges();
    std::reverse(edges.begin(), edges.end());
    CausalGraph h;
    for (auto it = g.nodes().rbegin(); it != g.nodes().rend(); ++it) h.add_node(*it);
    for (const auto& e : edges) h.add_edge(e);
    auto a = enumerate_loops(g);
    auto b = enumerate_loops(h);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].nodes, b[k].nodes);
      EXPECT_EQ(a[k].edges, b[k].edges);
    }
  }
}

TEST(Enumerate, RenamingInvariance) {
  sdkit::testing::RandomModels gen(6);
  for (int i = 0; i < 40; ++i) {
    auto g = gen.graph(6, 0.3);
    CausalGraph consistent;
    auto rn = [](const std::string& n) { return "v" + std::string(n.rbegin(), n.rend()); };
    for (const auto& n : g.nodes()) consistent.add_node(rn(n));
    for (const auto& e : g.edges()) consistent.add_edge({rn(e.from), rn(e.to), e.polarity, e.delayed});
    auto a = count_loops(enumerate_loops(g));
    auto b = count_loops(enumerate_loops(consistent));
    EXPECT_EQ(a.reinforcing, b.reinforcing);
    EXPECT_EQ(a.balancing, b.balancing);
  }
}

TEST(Enumerate, FlippingOneEdgeFlipsTheLoop) {
  auto base = enumerate_loops(cld("A -> B +\nB -> C -\nC -> A +\n"));
  auto flipped = enumerate_loops(cld("A -> B -\nB -> C -\nC -> A +\n"));
  ASSERT_EQ(base.size(), 1u);
  ASSERT_EQ(flipped.size(), 1u);
  EXPECT_EQ(base[0].type, LoopType::Balancing);
  EXPECT_EQ(flipped[0].type, LoopType::Reinforcing);
}

TEST(Polarity, Syntactic) {
  std::map<std::string, Interval> b{{"S", {0.0, 850.0}}, {"O", {0.0, 1e9}}, {"sigma", {850.0, 850.0}},
                                    {"tau", {1e4, 1e4}}, {"iota", {0.04, 0.04}}};
  auto pol = [&](const std::string& text, const std::string& var) {
    return expression_polarity(*parse_expression(text).value, var, b);
  };
  EXPECT_EQ(pol("O * iota * (sigma - S) / tau", "O"), Polarity::Positive);
  EXPECT_EQ(pol("O * iota * (sigma - S) / tau", "S"), Polarity::Negative);
  EXPECT_EQ(pol("1 / (1 + exp(-(3.57 + 3.43 * S / 400)))", "S"), Polarity::Positive);
  EXPECT_EQ(pol("(1 / (1 + exp(-(47.89 - 0.083 * S))) - 1) * 4 + 5", "S"), Polarity::Negative);
  EXPECT_EQ(pol("O / tau", "tau"), Polarity::Negative);
  EXPECT_EQ(pol("S - S * S", "S"), Polarity::Unknown);
  PolarityOptions strict;
  strict.assume_positive_when_undetermined = false;
  EXPECT_EQ(expression_polarity(*parse_expression("k * S").value, "S", {}, strict), Polarity::Unknown);
  EXPECT_EQ(expression_polarity(*parse_expression("k * S").value, "S", {}), Polarity::Positive);
}

TEST(GraphFromModel, Lending) {
  ModelDefinition m = lending::build_model();
  auto g = graph_from_model(m, std::span<const Override>{}, 0.0);
  for (const char* j : {"_A", "_B"}) {
    std::string s(j);
    for (auto [from, to] : std::vector<std::pair<std::string, std::string>>{
             {"S", "g"}, {"g", "r"}, {"r", "O"}, {"O", "n"}, {"n", "S"}})
      EXPECT_TRUE(g.has_edge(from + s, to + s)) << from << "->" << to;
  }
  auto loops = enumerate_loops(g);
  bool chain = false;
  for (const auto& l : loops)
    if (l.type == LoopType::Reinforcing && l.nodes == std::vector<std::string>{"O_A", "n_A", "S_A", "g_A", "r_A"})
      chain = true;
  EXPECT_TRUE(chain);
  auto c = count_loops(loops);
  EXPECT_EQ(c.reinforcing, 2u);
  EXPECT_EQ(c.balancing, 10u);
}

TEST(GraphFromModel, LoanTermAddsBalancingLoopThroughUpsilon) {
  ModelDefinition m = lending::build_model();
  auto sc = lending::scenario_for(lending::Intervention::LoanTerm);
  auto before = enumerate_loops(graph_from_model(m, sc, 5.0));
  auto after_graph = graph_from_model(m, sc, 15.0);
  auto after = enumerate_loops(after_graph);
  EXPECT_TRUE(after_graph.has_edge("x_A", "upsilon_A"));
  EXPECT_TRUE(after_graph.has_edge("upsilon_A", "f_A"));
  auto through_upsilon = [](const std::vector<FeedbackLoop>& ls, LoopType type) {
    return std::count_if(ls.begin(), ls.end(), [&](const FeedbackLoop& l) {
      return l.type == type && std::count(l.nodes.begin(), l.nodes.end(), "upsilon_A");
    });
  };
  EXPECT_EQ(through_upsilon(before, LoopType::Balancing), 0);
  EXPECT_GE(through_upsilon(after, LoopType::Balancing), 1);
  // S_A -> x_A -> upsilon_A -> f_A -> d_A -> S_A is balancing: a higher
  // score shortens the term, which raises defaults and lowers the score.
  bool found = false;
  for (const auto& l : after)
    if (l.nodes == std::vector<std::string>{"S_A", "x_A", "upsilon_A", "f_A", "d_A"}) {
      found = true;
      EXPECT_EQ(l.type, LoopType::Balancing);
    }
  EXPECT_TRUE(found);
  // Recorded counts for this model: per group 3 balancing + 1 reinforcing.
  auto cb = count_loops(before), ca = count_loops(after);
  EXPECT_EQ(ca.balancing - cb.balancing, 6u);
  EXPECT_EQ(ca.reinforcing - cb.reinforcing, 2u);
}

TEST(GraphFromModel, ThresholdAddsNothing) {
  ModelDefinition m = lending::build_model();
  auto sc = lending::scenario_for(lending::Intervention::Threshold);
  auto a = count_loops(enumerate_loops(graph_from_model(m, sc, 5.0)));
  auto b = count_loops(enumerate_loops(graph_from_model(m, sc, 15.0)));
  EXPECT_EQ(a.balancing, b.balancing);
  EXPECT_EQ(a.reinforcing, b.reinforcing);
}

TEST(GraphFromModel, ParameterOnlyModelHasNoEdges) {
  auto m = *parse_model("param a = 1\nparam b = 2\n").value;
  auto g = graph_from_model(m, std::span<const Override>{}, 0.0);
  EXPECT_EQ(g.nodes().size(), 2u);
  EXPECT_TRUE(g.edges().empty());
}

TEST(Output, JsonAndDot) {
  auto loops = enumerate_loops(cld("A -> B + delay\nB -> A -\n"));
  EXPECT_EQ(loops_to_json(loops),
            "{\n  \"loops\": [\n    {\n      \"delay\": true,\n      \"nodes\": [\n        \"A\",\n        \"B\"\n"
            "      ],\n      \"type\": \"B\"\n    }\n  ]\n}\n");
  std::string dot = graph_to_dot(cld("A -> B + delay\n"));
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("\"A\" -> \"B\""), std::string::npos);
}
