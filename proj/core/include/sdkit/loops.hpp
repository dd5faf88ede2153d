#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdkit/causal_graph.hpp"
#include "sdkit/model.hpp"
#include "sdkit/scenario.hpp"

namespace sdkit {

enum class LoopType { Reinforcing, Balancing, Undetermined };

/// "R", "B" or "U".
const char* loop_code(LoopType type);

struct FeedbackLoop {
  /// Simple cycle starting at its lexicographically smallest node; the
  /// closing node is not repeated.
  std::vector<std::string> nodes;
  /// edges[i] goes from nodes[i] to nodes[(i + 1) % size].
  std::vector<CausalEdge> edges;
  LoopType type = LoopType::Reinforcing;
  bool contains_delay = false;

  std::size_t length() const { return nodes.size(); }
};

/// Sign of the polarity product. Any unknown polarity makes the loop
/// Undetermined; delay marks never matter.
LoopType classify(std::span<const CausalEdge> edges);

struct LoopOptions {
  std::size_t max_loops = 100000;
};

/// All simple cycles, ordered by length then node sequence. Parallel edges
/// yield one loop per edge combination. Throws ResourceLimit past
/// `max_loops`.
std::vector<FeedbackLoop> enumerate_loops(const CausalGraph& graph, const LoopOptions& options = {});

struct PolarityOptions {
  /// A cofactor whose sign interval straddles zero is treated as positive,
  /// the usual all-else-equal reading of a causal diagram. When false such
  /// edges get Polarity::Unknown.
  bool assume_positive_when_undetermined = true;
};

/// Causal structure of the effective equations at `t`: u→v when u appears in
/// v's equation, and flow→stock edges (+ inflow, − outflow). Polarities come
/// from a monotonicity analysis of each equation, using interval bounds on
/// cofactors (parameters are exact, nonneg stocks are >= 0).
CausalGraph graph_from_model(const ModelDefinition& model, std::span<const Override> overrides, double t,
                             const PolarityOptions& options = {});
CausalGraph graph_from_model(const ModelDefinition& model, const Scenario& scenario, double t,
                             const PolarityOptions& options = {});

/// Polarity of `variable`'s influence on `expr` under the same analysis.
/// `bounds` gives value intervals for names; absent names are unbounded.
struct Interval {
  double lo;
  double hi;
};
Polarity expression_polarity(const Expr& expr, const std::string& variable,
                             const std::map<std::string, Interval>& bounds,
                             const PolarityOptions& options = {});

struct LoopCounts {
  std::size_t reinforcing = 0;
  std::size_t balancing = 0;
  std::size_t undetermined = 0;
};

LoopCounts count_loops(std::span<const FeedbackLoop> loops);

std::string format_loop_report(std::span<const FeedbackLoop> loops);
/// {"loops": [{"nodes": [...], "type": "R"|"B"|"U", "delay": bool}]}
std::string loops_to_json(std::span<const FeedbackLoop> loops);
std::string graph_to_dot(const CausalGraph& graph);

}  // namespace sdkit
