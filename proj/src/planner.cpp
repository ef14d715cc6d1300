#include "dialoplan/planner.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>

#include "dialoplan/error.hpp"

namespace dialoplan {

std::vector<const SolutionEdge*> FondSolution::out_edges(NodeId node) const {
  std::vector<const SolutionEdge*> out;
  for (const auto& e : edges) {
    if (e.from == node) out.push_back(&e);
  }
  std::sort(out.begin(), out.end(),
            [](const SolutionEdge* a, const SolutionEdge* b) { return a->outcome < b->outcome; });
  return out;
}

std::size_t FondSolution::action_node_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const SolutionNode& n) { return !n.done(); }));
}

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

using StateIndex = std::uint32_t;

struct Transition {
  std::size_t action;
  std::vector<StateIndex> successors;  // one per outcome
};

struct Explored {
  std::vector<State> states;
  std::vector<bool> goal;
  std::vector<std::vector<Transition>> transitions;
};

Explored explore(const FondProblem& problem, const SolveOptions& options, SolveStats& stats) {
  const auto deadline = std::chrono::steady_clock::now() + options.time_limit;
  Explored ex;
  std::unordered_map<State, StateIndex, StateHash> index;
  auto intern = [&](const State& s) {
    auto [it, inserted] = index.emplace(s, static_cast<StateIndex>(ex.states.size()));
    if (inserted) {
      ex.states.push_back(s);
      ex.goal.push_back(eval_formula(problem.goal, s));
      ex.transitions.emplace_back();
    }
    return it->second;
  };
  intern(problem.init);
  for (StateIndex cur = 0; cur < ex.states.size(); ++cur) {
    if (ex.goal[cur]) continue;
    if (++stats.expanded_states > options.max_expansions) {
      throw ResourceError("planner exceeded " + std::to_string(options.max_expansions) + " expansions");
    }
    if ((stats.expanded_states & 1023U) == 0 && std::chrono::steady_clock::now() > deadline) {
      throw ResourceError("planner exceeded its time limit");
    }
    const State state = ex.states[cur];  // copy: intern() may reallocate
    for (std::size_t a = 0; a < problem.actions.size(); ++a) {
      const NDAction& action = problem.actions[a];
      if (!applicable(action, state)) continue;
      Transition t{a, {}};
      t.successors.reserve(action.outcomes.size());
      for (const auto& o : action.outcomes) t.successors.push_back(intern(apply_outcome(state, o)));
      ex.transitions[cur].push_back(std::move(t));
    }
  }
  return ex;
}

}  // namespace

std::optional<FondSolution> solve(const FondProblem& problem, const SolveOptions& options,
                                  SolveStats* stats_out) {
  problem.check();
  SolveStats stats;
  const Explored ex = explore(problem, options, stats);
  const std::size_t n = ex.states.size();

  // Reverse edges: for each successor, the (state, transition) pairs reaching it.
  std::vector<std::vector<std::pair<StateIndex, std::uint32_t>>> preds(n);
  for (StateIndex s = 0; s < n; ++s) {
    for (std::uint32_t t = 0; t < ex.transitions[s].size(); ++t) {
      for (StateIndex succ : ex.transitions[s][t].successors) preds[succ].emplace_back(s, t);
    }
  }

  std::vector<bool> alive(n, true);
  std::vector<std::size_t> dist(n, kUnreached);
  auto safe = [&](const Transition& t) {
    return std::all_of(t.successors.begin(), t.successors.end(),
                       [&](StateIndex succ) { return alive[succ]; });
  };

  // Greatest fixpoint: keep only states that reach a goal through actions
  // whose every outcome stays inside the kept set.
  while (true) {
    ++stats.fixpoint_rounds;
    std::fill(dist.begin(), dist.end(), kUnreached);
    std::deque<StateIndex> queue;
    for (StateIndex s = 0; s < n; ++s) {
      if (alive[s] && ex.goal[s]) {
        dist[s] = 0;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      const StateIndex cur = queue.front();
      queue.pop_front();
      for (const auto& [p, t] : preds[cur]) {
        if (!alive[p] || dist[p] != kUnreached) continue;
        if (!safe(ex.transitions[p][t])) continue;
        dist[p] = dist[cur] + 1;
        queue.push_back(p);
      }
    }
    bool changed = false;
    for (StateIndex s = 0; s < n; ++s) {
      if (alive[s] && dist[s] == kUnreached) {
        alive[s] = false;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (stats_out != nullptr) *stats_out = stats;
  if (!alive[0]) return std::nullopt;

  // Policy: the first declared safe action achieving the state's distance.
  auto choose = [&](StateIndex s) -> const Transition& {
    for (const auto& t : ex.transitions[s]) {
      if (!safe(t)) continue;
      std::size_t best = kUnreached;
      for (StateIndex succ : t.successors) best = std::min(best, dist[succ]);
      if (best != kUnreached && best + 1 == dist[s]) return t;
    }
    throw std::logic_error("no policy action for a live state");
  };

  FondSolution sol;
  std::vector<std::size_t> node_of(n, kUnreached);
  std::deque<StateIndex> queue;
  auto node_for = [&](StateIndex s) {
    if (node_of[s] == kUnreached) {
      node_of[s] = sol.nodes.size();
      sol.nodes.push_back({sol.nodes.size(), kDoneIndex, ex.states[s]});
      queue.push_back(s);
    }
    return node_of[s];
  };
  sol.root = node_for(0);
  while (!queue.empty()) {
    const StateIndex s = queue.front();
    queue.pop_front();
    if (ex.goal[s]) continue;
    const Transition& t = choose(s);
    const NodeId from = node_of[s];
    sol.nodes[from].action = t.action;
    for (std::size_t o = 0; o < t.successors.size(); ++o) {
      const NodeId to = node_for(t.successors[o]);
      sol.edges.push_back({from, o, to});
    }
  }
  return sol;
}

std::string_view to_string(SolutionProperty p) {
  switch (p) {
    case SolutionProperty::kRootApplicable:
      return "root-applicable";
    case SolutionProperty::kAllApplicable:
      return "all-applicable";
    case SolutionProperty::kLeafReachable:
      return "leaf-reachable";
    case SolutionProperty::kStructural:
      return "structural";
  }
  return "structural";
}

bool ValidationReport::has(SolutionProperty p) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.property == p; });
}

namespace {

std::string describe_state(const FondProblem& problem, const State& s) {
  std::string out = "{";
  bool first = true;
  for (FluentId id : s.ids()) {
    if (!first) out += ", ";
    first = false;
    out += id < problem.fluents.size() ? problem.fluents.name(id) : "#" + std::to_string(id);
  }
  return out + "}";
}

std::string node_label(const FondProblem& problem, const SolutionNode& node) {
  const std::string action = node.done() ? std::string(kDoneAction)
                             : node.action < problem.actions.size() ? problem.actions[node.action].name
                                                                    : "?";
  return "node " + std::to_string(node.id) + " (" + action + ")";
}

/// Edge table indexed [node][outcome] -> target; filled only for sound input.
using EdgeTable = std::vector<std::vector<NodeId>>;

EdgeTable build_edge_table(const FondProblem& problem, const FondSolution& sol) {
  EdgeTable table(sol.nodes.size());
  for (const auto& node : sol.nodes) {
    const std::size_t outs = node.done() ? 0 : problem.actions[node.action].outcomes.size();
    table[node.id].assign(outs, kUnreached);
  }
  for (const auto& e : sol.edges) {
    if (e.from < table.size() && e.outcome < table[e.from].size()) table[e.from][e.outcome] = e.to;
  }
  return table;
}

}  // namespace

ValidationReport validate(const FondProblem& problem, const FondSolution& sol) {
  ValidationReport report;
  auto structural = [&](std::string witness) {
    report.violations.push_back({SolutionProperty::kStructural, std::move(witness)});
  };

  // Structure first; anything broken here makes the fixpoint meaningless.
  const std::size_t n = sol.nodes.size();
  if (n == 0) {
    structural("solution has no nodes");
    return report;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.nodes[i].id != i) structural("node at position " + std::to_string(i) + " has id " +
                                         std::to_string(sol.nodes[i].id));
    const auto a = sol.nodes[i].action;
    if (a != kDoneIndex && a >= problem.actions.size()) {
      structural("node " + std::to_string(i) + " refers to unknown action index " + std::to_string(a));
    }
  }
  if (sol.root >= n) structural("root " + std::to_string(sol.root) + " is not a node");
  if (!report.valid()) return report;

  std::vector<std::vector<std::size_t>> seen(n);
  for (const auto& node : sol.nodes) {
    seen[node.id].assign(node.done() ? 0 : problem.actions[node.action].outcomes.size(), 0);
  }
  for (const auto& e : sol.edges) {
    if (e.from >= n || e.to >= n) {
      structural("dangling edge " + std::to_string(e.from) + " -> " + std::to_string(e.to));
      continue;
    }
    if (sol.nodes[e.from].done()) {
      structural(node_label(problem, sol.nodes[e.from]) + " is a Done leaf with an outgoing edge");
      continue;
    }
    if (e.outcome >= seen[e.from].size()) {
      structural(node_label(problem, sol.nodes[e.from]) + " has an edge for nonexistent outcome " +
                 std::to_string(e.outcome));
      continue;
    }
    ++seen[e.from][e.outcome];
  }
  for (const auto& node : sol.nodes) {
    for (std::size_t o = 0; o < seen[node.id].size(); ++o) {
      if (seen[node.id][o] != 1) {
        structural(node_label(problem, node) + " has " + std::to_string(seen[node.id][o]) +
                   " edges for outcome " + std::to_string(o));
      }
    }
  }
  const bool has_leaf =
      std::any_of(sol.nodes.begin(), sol.nodes.end(), [](const SolutionNode& nd) { return nd.done(); });
  if (!has_leaf) structural("solution has no Done leaf");
  if (!report.valid()) return report;

  // (1) root applicability.
  const SolutionNode& root = sol.nodes[sol.root];
  const bool root_ok = root.done() ? eval_formula(problem.goal, problem.init)
                                   : applicable(problem.actions[root.action], problem.init);
  if (!root_ok) {
    report.violations.push_back({SolutionProperty::kRootApplicable,
                                 node_label(problem, root) + " not applicable in initial state " +
                                     describe_state(problem, problem.init)});
  }

  // (2) applicability over every reachable pair.
  const auto pairs = enumerate_reachable(problem, sol);
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [state, node_id] = pairs[i];
    const SolutionNode& node = sol.nodes[node_id];
    const bool ok = node.done() ? eval_formula(problem.goal, state)
                                : applicable(problem.actions[node.action], state);
    if (!ok && !(node_id == sol.root && state == problem.init)) {
      report.violations.push_back({SolutionProperty::kAllApplicable,
                                   node_label(problem, node) + " not applicable in reachable state " +
                                       describe_state(problem, state)});
    }
    by_hash[state.hash() ^ (node_id * 0x9e3779b97f4a7c15ULL)].push_back(i);
  }

  // (3) from each reachable pair some Done pair is reachable: backward
  // closure over the pair graph.
  const EdgeTable table = build_edge_table(problem, sol);
  auto pair_index = [&](const State& s, NodeId node) {
    for (std::size_t i : by_hash[s.hash() ^ (node * 0x9e3779b97f4a7c15ULL)]) {
      if (pairs[i].second == node && pairs[i].first == s) return i;
    }
    return kUnreached;
  };
  std::vector<std::vector<std::size_t>> preds(pairs.size());
  std::vector<bool> reaches_leaf(pairs.size(), false);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [state, node_id] = pairs[i];
    const SolutionNode& node = sol.nodes[node_id];
    if (node.done()) {
      reaches_leaf[i] = true;
      queue.push_back(i);
      continue;
    }
    const auto& action = problem.actions[node.action];
    for (std::size_t o = 0; o < action.outcomes.size(); ++o) {
      const std::size_t j = pair_index(apply_outcome(state, action.outcomes[o]), table[node_id][o]);
      if (j != kUnreached) preds[j].push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t j = queue.front();
    queue.pop_front();
    for (std::size_t i : preds[j]) {
      if (!reaches_leaf[i]) {
        reaches_leaf[i] = true;
        queue.push_back(i);
      }
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!reaches_leaf[i]) {
      report.violations.push_back({SolutionProperty::kLeafReachable,
                                   node_label(problem, sol.nodes[pairs[i].second]) + " in state " +
                                       describe_state(problem, pairs[i].first) +
                                       " cannot reach a Done leaf"});
    }
  }
  return report;
}

std::vector<ReachablePair> enumerate_reachable(const FondProblem& problem, const FondSolution& sol) {
  const EdgeTable table = build_edge_table(problem, sol);
  std::vector<ReachablePair> out;
  std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
  auto insert = [&](State s, NodeId node) {
    const std::size_t key = s.hash() ^ (node * 0x9e3779b97f4a7c15ULL);
    for (std::size_t i : seen[key]) {
      if (out[i].second == node && out[i].first == s) return;
    }
    seen[key].push_back(out.size());
    out.emplace_back(std::move(s), node);
  };
  insert(problem.init, sol.root);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const NodeId node_id = out[i].second;
    const SolutionNode& node = sol.nodes[node_id];
    if (node.done()) continue;
    const auto& action = problem.actions[node.action];
    // Outcomes are applied even when the action is inapplicable here; the
    // validator reports that separately.
    for (std::size_t o = 0; o < action.outcomes.size(); ++o) {
      const NodeId to = table[node_id][o];
      if (to == kUnreached) continue;
      insert(apply_outcome(out[i].first, action.outcomes[o]), to);
    }
  }
  return out;
}

}  // namespace dialoplan
