#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sdkit {

enum class Polarity { Positive, Negative, Unknown };

const char* to_string(Polarity p);

struct CausalEdge {
  std::string from;
  std::string to;
  Polarity polarity = Polarity::Positive;
  bool delayed = false;

  friend bool operator==(const CausalEdge&, const CausalEdge&) = default;
  friend auto operator<=>(const CausalEdge&, const CausalEdge&) = default;
};

/// Signed directed multigraph. Parallel edges must differ in polarity or delay.
class CausalGraph {
 public:
  /// Adds a node if absent. Nodes keep first-insertion order.
  void add_node(std::string_view name);
  /// Adds both endpoints as nodes. Returns false, leaving the graph
  /// unchanged, if an identical edge already exists.
  bool add_edge(CausalEdge edge);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<CausalEdge>& edges() const { return edges_; }
  bool has_node(std::string_view name) const { return node_set_.count(std::string(name)) != 0; }
  bool has_edge(std::string_view from, std::string_view to) const;

 private:
  std::vector<std::string> nodes_;
  std::set<std::string> node_set_;
  std::vector<CausalEdge> edges_;
};

}  // namespace sdkit
