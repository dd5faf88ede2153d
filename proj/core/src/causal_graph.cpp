#include "sdkit/causal_graph.hpp"

#include <algorithm>

namespace sdkit {

const char* to_string(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "+";
    case Polarity::Negative: return "-";
    case Polarity::Unknown: return "?";
  }
  return "?";
}

void CausalGraph::add_node(std::string_view name) {
  if (node_set_.emplace(name).second) nodes_.emplace_back(name);
}

bool CausalGraph::add_edge(CausalEdge edge) {
  if (std::find(edges_.begin(), edges_.end(), edge) != edges_.end()) return false;
  add_node(edge.from);
  add_node(edge.to);
  edges_.push_back(std::move(edge));
  return true;
}

bool CausalGraph::has_edge(std::string_view from, std::string_view to) const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const CausalEdge& e) { return e.from == from && e.to == to; });
}

}  // namespace sdkit
