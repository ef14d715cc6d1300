#include "dialoplan/plan.hpp"

#include <algorithm>
#include <set>

#include "dialoplan/error.hpp"
#include "dialoplan/sexpr.hpp"

namespace dialoplan {

bool DialoguePlan::is_goal(NodeId node) const {
  return std::find(goals.begin(), goals.end(), node) != goals.end();
}

std::vector<std::size_t> DialoguePlan::out_edges(NodeId node) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].from == node) out.push_back(i);
  }
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return edges[a].outcome_index < edges[b].outcome_index;
  });
  return out;
}

void DialoguePlan::check() const {
  const std::size_t n = nodes.size();
  if (n == 0) throw StructuralError("plan has no nodes");
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].id != i) throw StructuralError("node ids must be 0.." + std::to_string(n - 1) + " in order");
  }
  if (initial >= n) throw StructuralError("initial node " + std::to_string(initial) + " does not exist");
  if (goals.empty()) throw StructuralError("plan has no goal nodes");
  std::vector<std::size_t> out_degree(n, 0);
  std::vector<std::set<std::size_t>> outcome_seen(n);
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n) {
      throw StructuralError("edge " + std::to_string(e.from) + " -> " + std::to_string(e.to) +
                            " references a missing node");
    }
    ++out_degree[e.from];
    if (!outcome_seen[e.from].insert(e.outcome_index).second) {
      throw StructuralError("node " + std::to_string(e.from) + " has two edges for outcome " +
                            std::to_string(e.outcome_index));
    }
    if (!(e.formula == outcome_formula(e.outcome))) {
      throw StructuralError("edge " + std::to_string(e.from) + " -> " + std::to_string(e.to) +
                            " carries a formula that does not match its outcome");
    }
  }
  std::set<NodeId> goal_set;
  for (NodeId g : goals) {
    if (g >= n) throw StructuralError("goal node " + std::to_string(g) + " does not exist");
    if (!goal_set.insert(g).second) throw StructuralError("goal node " + std::to_string(g) + " listed twice");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool leaf = out_degree[i] == 0;
    if (goal_set.count(i) > 0 && !leaf) {
      throw StructuralError("goal node " + std::to_string(i) + " has outgoing edges");
    }
    if (leaf && goal_set.count(i) == 0) {
      throw StructuralError("node " + std::to_string(i) + " has no outgoing edges but is not a goal");
    }
    if (nodes[i].done() != leaf) {
      throw StructuralError("node " + std::to_string(i) + " (" + nodes[i].action +
                            "): Done nodes and only Done nodes are leaves");
    }
    if (!leaf && *outcome_seen[i].rbegin() + 1 != outcome_seen[i].size()) {
      throw StructuralError("node " + std::to_string(i) + " has gaps in its outcome indices");
    }
  }
}

Formula outcome_formula(const Outcome& outcome) { return Formula::of_literals(outcome.literals()); }

std::string edge_label(const DialoguePlan& plan, const PlanEdge& edge) {
  const auto literals = edge.outcome.literals();
  if (literals.empty()) return "[ ]";
  std::string out = "[";
  for (std::size_t i = 0; i < literals.size(); ++i) {
    if (i > 0) out += ", ";
    if (!literals[i].positive) out += "not ";
    out += plan.fluents.name(literals[i].fluent);
  }
  return out + "]";
}

namespace {

Formula formula_from(const sexpr::Node& node, FluentTable& fluents) {
  if (node.is_symbol()) {
    if (node.symbol == "true") return Formula::truth();
    return Formula::atom(fluents.intern(node.symbol));
  }
  if (node.items.empty() || !node.items.front().is_symbol()) {
    throw ParseError("malformed formula", node.line, node.column);
  }
  const std::string& op = node.items.front().symbol;
  std::vector<Formula> children;
  for (std::size_t i = 1; i < node.items.size(); ++i) children.push_back(formula_from(node.items[i], fluents));
  if (op == "and") return Formula::conjunction(std::move(children));
  if (op == "or") return Formula::disjunction(std::move(children));
  if (op == "not" && children.size() == 1) return Formula::negation(std::move(children.front()));
  throw ParseError("unknown formula operator '" + op + "'", node.line, node.column);
}

}  // namespace

Formula parse_formula(std::string_view text, FluentTable& fluents) {
  return formula_from(sexpr::read_one(text), fluents);
}

DialoguePlan compile_plan(const FondProblem& problem, const FondSolution& solution) {
  const ValidationReport report = validate(problem, solution);
  if (!report.valid()) {
    const auto& v = report.violations.front();
    throw StructuralError("cannot compile an invalid solution (" + std::string(to_string(v.property)) +
                          ": " + v.witness + ")");
  }
  DialoguePlan plan;
  plan.fluents = problem.fluents;
  plan.initial = solution.root;
  for (const auto& node : solution.nodes) {
    PlanNode pn;
    pn.id = node.id;
    if (node.done()) {
      pn.action = std::string(kDoneAction);
      plan.goals.push_back(node.id);
    } else {
      const NDAction& action = problem.actions[node.action];
      pn.action = action.name;
      pn.kind = action.kind;
    }
    plan.nodes.push_back(std::move(pn));
  }
  for (const auto& e : solution.edges) {
    const Outcome& o = problem.actions[solution.nodes[e.from].action].outcomes[e.outcome];
    plan.edges.push_back({e.from, e.to, e.outcome, o, outcome_formula(o)});
  }
  plan.check();
  return plan;
}

FondSolution solution_from_plan(const FondProblem& problem, const DialoguePlan& plan) {
  plan.check();
  std::vector<FluentId> remap(plan.fluents.size());
  for (FluentId id = 0; id < plan.fluents.size(); ++id) {
    auto found = problem.fluents.find(plan.fluents.name(id));
    if (!found) throw StructuralError("plan fluent '" + plan.fluents.name(id) + "' is not in the problem");
    remap[id] = *found;
  }
  auto translate = [&](const State& s) {
    State out;
    for (FluentId id : s.ids()) out.insert(remap[id]);
    return out;
  };

  FondSolution sol;
  sol.root = plan.initial;
  for (const auto& n : plan.nodes) {
    SolutionNode sn;
    sn.id = n.id;
    if (!n.done()) {
      auto idx = problem.find_action(n.action);
      if (!idx) throw StructuralError("plan node " + std::to_string(n.id) + " names unknown action '" + n.action + "'");
      sn.action = *idx;
    }
    sol.nodes.push_back(std::move(sn));
  }
  std::vector<const PlanEdge*> edges;
  for (const auto& e : plan.edges) edges.push_back(&e);
  // the solution stores each node's edges contiguously in outcome order
  std::stable_sort(edges.begin(), edges.end(), [](const PlanEdge* a, const PlanEdge* b) {
    return a->from != b->from ? a->from < b->from : a->outcome_index < b->outcome_index;
  });
  for (const PlanEdge* e : edges) {
    const SolutionNode& from = sol.nodes[e->from];
    if (from.done()) throw StructuralError("edge leaves Done node " + std::to_string(e->from));
    const NDAction& a = problem.actions[from.action];
    if (e->outcome_index >= a.outcomes.size())
      throw StructuralError("edge from node " + std::to_string(e->from) + " has outcome index " +
                            std::to_string(e->outcome_index) + " but " + a.name + " has " +
                            std::to_string(a.outcomes.size()) + " outcomes");
    const Outcome mapped(translate(e->outcome.adds()), translate(e->outcome.deletes()));
    if (!(mapped == a.outcomes[e->outcome_index]))
      throw StructuralError("edge from node " + std::to_string(e->from) + " carries a different outcome " +
                            std::to_string(e->outcome_index) + " than " + a.name);
    sol.edges.push_back({e->from, e->outcome_index, e->to});
  }
  return sol;
}

std::string_view to_string(BranchResolution::Failure f) {
  switch (f) {
    case BranchResolution::Failure::kNone:
      return "none";
    case BranchResolution::Failure::kNoConsistentBranch:
      return "no-consistent-branch";
    case BranchResolution::Failure::kAmbiguousBranches:
      return "ambiguous-branches";
  }
  return "none";
}

BranchResolution resolve_branch(const DialoguePlan& plan, NodeId at, const State& prev, const State& cur) {
  BranchResolution r;
  for (std::size_t e : plan.out_edges(at)) {
    if (apply_outcome(prev, plan.edges[e].outcome) == cur) r.consistent.push_back(e);
  }
  if (r.consistent.empty()) {
    r.failure = BranchResolution::Failure::kNoConsistentBranch;
    return r;
  }
  const Outcome& first = plan.edges[r.consistent.front()].outcome;
  const bool all_same = std::all_of(r.consistent.begin(), r.consistent.end(),
                                    [&](std::size_t e) { return plan.edges[e].outcome == first; });
  if (r.consistent.size() > 1 && !all_same) {
    r.failure = BranchResolution::Failure::kAmbiguousBranches;
    return r;
  }
  r.duplicate_outcomes = r.consistent.size() > 1;
  r.edge = r.consistent.front();
  return r;
}

// JSON

namespace {

nlohmann::json names_of(const FluentTable& fluents, const State& s) {
  nlohmann::json out = nlohmann::json::array();
  for (FluentId id : s.ids()) out.push_back(fluents.name(id));
  return out;
}

template <typename T>
T require(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw StructuralError(std::string("plan document missing '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw StructuralError(std::string("plan document field '") + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json to_json(const DialoguePlan& plan) {
  nlohmann::json doc;
  doc["version"] = kPlanSchemaVersion;
  doc["fluents"] = plan.fluents.names();
  auto& nodes = doc["nodes"] = nlohmann::json::array();
  for (const auto& n : plan.nodes) {
    nodes.push_back({{"id", n.id},
                     {"action", n.action},
                     {"kind", n.kind ? std::string(to_string(*n.kind)) : std::string("done")}});
  }
  auto& edges = doc["edges"] = nlohmann::json::array();
  for (const auto& e : plan.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"outcome_index", e.outcome_index},
                     {"outcome",
                      {{"adds", names_of(plan.fluents, e.outcome.adds())},
                       {"dels", names_of(plan.fluents, e.outcome.deletes())}}},
                     {"formula", render_formula(e.formula, plan.fluents)}});
  }
  doc["initial"] = plan.initial;
  doc["goals"] = plan.goals;
  return doc;
}

DialoguePlan from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw StructuralError("plan document must be a JSON object");
  const auto version = require<std::string>(doc, "version");
  if (version != kPlanSchemaVersion) throw StructuralError("unsupported plan schema '" + version + "'");
  DialoguePlan plan;
  if (doc.contains("fluents")) {
    for (const auto& name : require<std::vector<std::string>>(doc, "fluents")) {
      try {
        plan.fluents.declare(name);
      } catch (const StructuralError& e) {
        throw StructuralError(std::string("plan fluents: ") + e.what());
      }
    }
  }
  for (const auto& jn : require<nlohmann::json>(doc, "nodes")) {
    PlanNode n;
    n.id = require<NodeId>(jn, "id");
    n.action = require<std::string>(jn, "action");
    const auto kind = require<std::string>(jn, "kind");
    if (kind != "done") n.kind = action_kind_from_string(kind);
    plan.nodes.push_back(std::move(n));
  }
  for (const auto& je : require<nlohmann::json>(doc, "edges")) {
    PlanEdge e;
    e.from = require<NodeId>(je, "from");
    e.to = require<NodeId>(je, "to");
    e.outcome_index = require<std::size_t>(je, "outcome_index");
    const auto outcome = require<nlohmann::json>(je, "outcome");
    State adds;
    State dels;
    for (const auto& name : require<std::vector<std::string>>(outcome, "adds")) adds.insert(plan.fluents.intern(name));
    for (const auto& name : require<std::vector<std::string>>(outcome, "dels")) dels.insert(plan.fluents.intern(name));
    e.outcome = Outcome(std::move(adds), std::move(dels));
    try {
      e.formula = parse_formula(require<std::string>(je, "formula"), plan.fluents);
    } catch (const ParseError& err) {
      throw StructuralError(std::string("edge formula: ") + err.what());
    }
    plan.edges.push_back(std::move(e));
  }
  plan.initial = require<NodeId>(doc, "initial");
  plan.goals = require<std::vector<NodeId>>(doc, "goals");
  plan.check();
  return plan;
}

// DOT

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string_view shape_of(const PlanNode& n) {
  if (!n.kind) return "box";
  switch (*n.kind) {
    case ActionKind::kDialogue:
      return "box";
    case ActionKind::kService:
      return "ellipse";
    case ActionKind::kSystem:
      return "diamond";
  }
  return "box";
}

}  // namespace

std::string to_dot(const DialoguePlan& plan) {
  std::string out = "digraph dialogue_plan {\n";
  out += "  node [fontname=\"Helvetica\"];\n";
  out += "  start [shape=point];\n";
  for (const auto& n : plan.nodes) {
    out += "  n" + std::to_string(n.id) + " [label=" + quote(n.action) + ", shape=" + std::string(shape_of(n));
    if (plan.is_goal(n.id)) out += ", peripheries=2";
    out += "];\n";
  }
  out += "  start -> n" + std::to_string(plan.initial) + ";\n";
  for (const auto& n : plan.nodes) {
    const auto outs = plan.out_edges(n.id);
    for (std::size_t e : outs) {
      const PlanEdge& edge = plan.edges[e];
      out += "  n" + std::to_string(edge.from) + " -> n" + std::to_string(edge.to);
      if (outs.size() > 1) out += " [label=" + quote(edge_label(plan, edge)) + "]";
      out += ";\n";
    }
  }
  return out + "}\n";
}

}  // namespace dialoplan
