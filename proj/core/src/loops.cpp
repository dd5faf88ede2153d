#include "sdkit/loops.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "sdkit/errors.hpp"

namespace sdkit {

const char* loop_code(LoopType type) {
  switch (type) {
    case LoopType::Reinforcing: return "R";
    case LoopType::Balancing: return "B";
    case LoopType::Undetermined: return "U";
  }
  return "U";
}

LoopType classify(std::span<const CausalEdge> edges) {
  bool negative = false;
  for (const auto& e : edges) {
    if (e.polarity == Polarity::Unknown) return LoopType::Undetermined;
    if (e.polarity == Polarity::Negative) negative = !negative;
  }
  return negative ? LoopType::Balancing : LoopType::Reinforcing;
}

namespace {

// Johnson's circuit enumeration over a simple digraph whose vertices are
// numbered in name order, so each circuit is found from its smallest vertex.
class CircuitFinder {
 public:
  CircuitFinder(const std::vector<std::vector<std::size_t>>& adj,
                std::function<void(const std::vector<std::size_t>&)> emit)
      : adj_(adj), emit_(std::move(emit)), blocked_(adj.size()), blocked_by_(adj.size()) {}

  void run() {
    const std::size_t n = adj_.size();
    for (std::size_t s = 0; s < n; ++s) {
      component_ = component_of(s);
      if (component_.empty()) continue;
      for (std::size_t v : component_) {
        blocked_[v] = false;
        blocked_by_[v].clear();
      }
      start_ = s;
      circuit(s);
    }
  }

 private:
  // Strongly connected component containing s within vertices >= s, or empty
  // if s lies on no cycle there.
  std::set<std::size_t> component_of(std::size_t s) const {
    auto reach = [&](bool forward) {
      std::set<std::size_t> seen{s};
      std::vector<std::size_t> todo{s};
      while (!todo.empty()) {
        std::size_t u = todo.back();
        todo.pop_back();
        if (forward) {
          for (std::size_t v : adj_[u])
            if (v >= s && seen.insert(v).second) todo.push_back(v);
        } else {
          for (std::size_t v = s; v < adj_.size(); ++v)
            if (std::binary_search(adj_[v].begin(), adj_[v].end(), u) && seen.insert(v).second)
              todo.push_back(v);
        }
      }
      return seen;
    };
    auto fwd = reach(true);
    auto bwd = reach(false);
    std::set<std::size_t> comp;
    std::set_intersection(fwd.begin(), fwd.end(), bwd.begin(), bwd.end(), std::inserter(comp, comp.end()));
    bool self_loop = std::binary_search(adj_[s].begin(), adj_[s].end(), s);
    if (comp.size() == 1 && !self_loop) comp.clear();
    return comp;
  }

  void unblock(std::size_t u) {
    blocked_[u] = false;
    auto pending = std::move(blocked_by_[u]);
    blocked_by_[u].clear();
    for (std::size_t w : pending)
      if (blocked_[w]) unblock(w);
  }

  bool circuit(std::size_t v) {
    bool found = false;
    path_.push_back(v);
    blocked_[v] = true;
    for (std::size_t w : adj_[v]) {
      if (!component_.count(w)) continue;
      if (w == start_) {
        emit_(path_);
        found = true;
      } else if (!blocked_[w] && circuit(w)) {
        found = true;
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (std::size_t w : adj_[v])
        if (component_.count(w)) blocked_by_[w].insert(v);
    }
    path_.pop_back();
    return found;
  }

  const std::vector<std::vector<std::size_t>>& adj_;
  std::function<void(const std::vector<std::size_t>&)> emit_;
  std::vector<bool> blocked_;
  std::vector<std::set<std::size_t>> blocked_by_;
  std::set<std::size_t> component_;
  std::vector<std::size_t> path_;
  std::size_t start_ = 0;
};

bool loop_less(const FeedbackLoop& a, const FeedbackLoop& b) {
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  if (a.nodes != b.nodes) return a.nodes < b.nodes;
  return a.edges < b.edges;
}

}  // namespace

std::vector<FeedbackLoop> enumerate_loops(const CausalGraph& graph, const LoopOptions& options) {
  std::vector<std::string> names = graph.nodes();
  std::sort(names.begin(), names.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;

  std::vector<std::vector<std::size_t>> adj(names.size());
  std::map<std::pair<std::size_t, std::size_t>, std::vector<CausalEdge>> parallel;
  for (const auto& e : graph.edges()) {
    std::size_t u = index.at(e.from), v = index.at(e.to);
    adj[u].push_back(v);
    parallel[{u, v}].push_back(e);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  for (auto& [_, edges] : parallel) std::sort(edges.begin(), edges.end());

  std::vector<FeedbackLoop> loops;
  auto emit = [&](const std::vector<std::size_t>& cycle) {
    // One loop per choice of parallel edge on each hop.
    std::vector<const std::vector<CausalEdge>*> choices;
    for (std::size_t i = 0; i < cycle.size(); ++i)
      choices.push_back(&parallel.at({cycle[i], cycle[(i + 1) % cycle.size()]}));
    std::vector<std::size_t> pick(cycle.size(), 0);
    while (true) {
      if (loops.size() >= options.max_loops)
        throw ResourceLimit("more than " + std::to_string(options.max_loops) + " feedback loops");
      FeedbackLoop loop;
      for (std::size_t i = 0; i < cycle.size(); ++i) {
        loop.nodes.push_back(names[cycle[i]]);
        loop.edges.push_back((*choices[i])[pick[i]]);
      }
      loop.type = classify(loop.edges);
      loop.contains_delay =
          std::any_of(loop.edges.begin(), loop.edges.end(), [](const CausalEdge& e) { return e.delayed; });
      loops.push_back(std::move(loop));
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == choices[i]->size()) pick[i++] = 0;
      if (i == pick.size()) break;
    }
  };
  CircuitFinder(adj, emit).run();
  std::sort(loops.begin(), loops.end(), loop_less);
  return loops;
}

LoopCounts count_loops(std::span<const FeedbackLoop> loops) {
  LoopCounts c;
  for (const auto& l : loops) {
    switch (l.type) {
      case LoopType::Reinforcing: ++c.reinforcing; break;
      case LoopType::Balancing: ++c.balancing; break;
      case LoopType::Undetermined: ++c.undetermined; break;
    }
  }
  return c;
}

}  // namespace sdkit
