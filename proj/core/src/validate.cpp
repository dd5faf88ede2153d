#include "sdkit/validate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <set>

namespace sdkit {

std::string format_cycle(const std::vector<std::string>& cycle) {
  std::string out;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (i) out += "→";
    out += cycle[i];
  }
  return out;
}

namespace {

// Shortest closed path through `start` using only nodes in `component`.
std::vector<std::size_t> shortest_cycle(std::size_t start,
                                        const std::vector<std::vector<std::size_t>>& adj,
                                        const std::set<std::size_t>& component) {
  std::map<std::size_t, std::size_t> parent;
  std::deque<std::size_t> frontier{start};
  std::set<std::size_t> seen;
  while (!frontier.empty()) {
    std::size_t u = frontier.front();
    frontier.pop_front();
    for (std::size_t v : adj[u]) {
      if (!component.count(v)) continue;
      if (v == start) {
        std::vector<std::size_t> path{start};
        for (std::size_t w = u; w != start; w = parent[w]) path.push_back(w);
        std::reverse(path.begin() + 1, path.end());
        path.push_back(start);
        return path;
      }
      if (seen.insert(v).second) {
        parent[v] = u;
        frontier.push_back(v);
      }
    }
  }
  return {};
}

}  // namespace

EquationOrder order_equations(std::span<const Equation> equations) {
  const std::size_t n = equations.size();
  std::map<std::string, std::size_t, std::less<>> by_name;
  for (std::size_t i = 0; i < n; ++i) by_name.emplace(equations[i].name, i);

  // adj[j] lists equations that read j.
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& dep : referenced_names(equations[i].expr)) {
      auto it = by_name.find(dep);
      if (it == by_name.end()) continue;
      adj[it->second].push_back(i);
      ++indegree[i];
    }
  }

  EquationOrder result;
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  while (!ready.empty()) {
    std::size_t u = ready.top();
    ready.pop();
    result.order.push_back(u);
    for (std::size_t v : adj[u])
      if (--indegree[v] == 0) ready.push(v);
  }
  if (result.order.size() == n) return result;

  // Tarjan over the unordered remainder.
  std::vector<bool> placed(n, false);
  for (std::size_t i : result.order) placed[i] = true;
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::vector<std::set<std::size_t>> components;
  std::function<void(std::size_t)> connect = [&](std::size_t u) {
    index[u] = low[u] = counter++;
    stack.push_back(u);
    on_stack[u] = true;
    for (std::size_t v : adj[u]) {
      if (placed[v]) continue;
      if (index[v] < 0) {
        connect(v);
        low[u] = std::min(low[u], low[v]);
      } else if (on_stack[v]) {
        low[u] = std::min(low[u], index[v]);
      }
    }
    if (low[u] == index[u]) {
      std::set<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.insert(w);
      } while (w != u);
      components.push_back(std::move(comp));
    }
  };
  for (std::size_t i = 0; i < n; ++i)
    if (!placed[i] && index[i] < 0) connect(i);

  for (const auto& comp : components) {
    std::size_t first = *comp.begin();
    bool self_loop = std::find(adj[first].begin(), adj[first].end(), first) != adj[first].end();
    if (comp.size() == 1 && !self_loop) continue;
    std::size_t start = *std::min_element(comp.begin(), comp.end(), [&](auto a, auto b) {
      return equations[a].name < equations[b].name;
    });
    std::vector<std::string> names;
    for (std::size_t i : shortest_cycle(start, adj, comp)) names.push_back(equations[i].name);
    result.cycles.push_back(std::move(names));
  }
  std::sort(result.cycles.begin(), result.cycles.end());
  return result;
}

namespace {

void check_arity(const Expr& e, const std::string& owner, ValidationReport& report) {
  if (e.kind() == Expr::Kind::Call) {
    std::size_t n = e.operands().size();
    bool unary = e.builtin() == Builtin::Exp || e.builtin() == Builtin::Abs;
    if ((unary && n != 1) || (!unary && n < 2))
      report.violations.push_back({ViolationKind::BadArity, owner,
                                   std::string("wrong number of arguments to ") +
                                       to_string(e.builtin()) + " in " + owner});
  }
  for (const auto& child : e.operands()) check_arity(child, owner, report);
}

}  // namespace

ValidationReport validate_model(const ModelDefinition& model) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, const std::string& subject, std::string message) {
    report.violations.push_back({kind, subject, std::move(message)});
  };

  std::map<std::string, int> seen;
  for (const auto& ref : model.declarations()) {
    const auto& name = model.name_of(ref);
    if (++seen[name] == 2) add(ViolationKind::DuplicateName, name, "duplicate name " + name);
    if (name == "t" || name == "cloud") add(ViolationKind::ReservedName, name, "reserved name " + name);
  }

  for (const auto& p : model.parameters())
    if (!std::isfinite(p.value))
      add(ViolationKind::NonFiniteParameter, p.name, "parameter " + p.name + " is not finite");

  for (const auto& f : model.flows()) {
    for (const auto* end : {&f.source, &f.target}) {
      if (*end && !model.stock(**end)) add(ViolationKind::UnknownStock, **end, "unknown stock " + **end);
    }
    if (f.source == f.target)
      add(ViolationKind::InvalidEndpoints, f.name, "flow " + f.name + " has identical source and target");
  }

  for (const auto& eq : model.equations()) {
    for (const auto& dep : referenced_names(eq.expr))
      if (!model.find(dep))
        add(ViolationKind::UnknownReference, dep, "unknown variable " + dep + " in " + eq.name);
    check_arity(eq.expr, eq.name, report);
  }

  for (const auto& s : model.stocks()) {
    for (const auto& dep : referenced_names(s.initial)) {
      auto kind = model.kind_of(dep);
      if (!kind)
        add(ViolationKind::UnknownReference, dep, "unknown variable " + dep + " in " + s.name);
      else if (*kind != VariableKind::Parameter)
        add(ViolationKind::InitialDependency, s.name,
            "initial value of " + s.name + " references " + to_string(*kind) + " " + dep);
    }
    if (references_time(s.initial))
      add(ViolationKind::InitialDependency, s.name, "initial value of " + s.name + " references t");
    check_arity(s.initial, s.name, report);
  }

  auto eqs = model.equations();
  for (const auto& cycle : order_equations(eqs).cycles)
    add(ViolationKind::AuxiliaryCycle, cycle.front(), "auxiliary cycle " + format_cycle(cycle));

  return report;
}

}  // namespace sdkit
