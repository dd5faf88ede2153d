#include "json.hpp"
#include "sdkit/loops.hpp"

namespace sdkit {

std::string format_loop_report(std::span<const FeedbackLoop> loops) {
  if (loops.empty()) return "no feedback loops\n";
  LoopCounts c = count_loops(loops);
  std::string out = std::to_string(c.reinforcing) + " reinforcing, " + std::to_string(c.balancing) + " balancing";
  if (c.undetermined) out += ", " + std::to_string(c.undetermined) + " undetermined";
  out += " (" + std::to_string(loops.size()) + " loops)\n";

  std::size_t numbers[3] = {0, 0, 0};
  for (const auto& loop : loops) {
    std::string label = std::string(loop_code(loop.type)) + std::to_string(++numbers[static_cast<int>(loop.type)]);
    out += label + " length " + std::to_string(loop.length()) + (loop.contains_delay ? " delayed" : "") + ": ";
    for (std::size_t i = 0; i < loop.nodes.size(); ++i) {
      out += loop.nodes[i] + " -(" + to_string(loop.edges[i].polarity) + (loop.edges[i].delayed ? "||" : "") + ")-> ";
    }
    out += loop.nodes.front() + "\n";
    if (loop.length() == 1) out += "  warning: length-1 loop on " + loop.nodes.front() + "\n";
  }
  for (const auto& loop : loops) {
    if (!loop.contains_delay || loop.type == LoopType::Undetermined) continue;
    for (const auto& e : loop.edges)
      if (e.delayed)
        out += std::string(loop.type == LoopType::Reinforcing ? "R" : "B") + " loop contains delayed edge " + e.from +
               " -> " + e.to + "\n";
  }
  return out;
}

std::string loops_to_json(std::span<const FeedbackLoop> loops) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& loop : loops)
    arr.push_back({{"nodes", loop.nodes}, {"type", loop_code(loop.type)}, {"delay", loop.contains_delay}});
  nlohmann::json doc;
  doc["loops"] = arr;
  return doc.dump(2) + "\n";
}

std::string graph_to_dot(const CausalGraph& graph) {
  auto quote = [](const std::string& s) { return "\"" + s + "\""; };
  std::string out = "digraph causal {\n";
  for (const auto& n : graph.nodes()) out += "  " + quote(n) + ";\n";
  for (const auto& e : graph.edges()) {
    std::string label = to_string(e.polarity);
    if (e.delayed) label += " ||";
    out += "  " + quote(e.from) + " -> " + quote(e.to) + " [label=" + quote(label) + "];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace sdkit
