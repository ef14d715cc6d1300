#pragma once

// Dialogue plans: the executable graph compiled from a FOND solution. Nodes
// carry action labels; edges carry the outcome they stand for and the
// formula derived from it.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dialoplan/model.hpp"
#include "dialoplan/planner.hpp"

namespace dialoplan {

inline constexpr std::string_view kPlanSchemaVersion = "dialoplan-plan/1";

struct PlanNode {
  NodeId id = 0;
  std::string action;
  std::optional<ActionKind> kind;  // nullopt for Done

  bool done() const { return !kind.has_value(); }
};

struct PlanEdge {
  NodeId from = 0;
  NodeId to = 0;
  std::size_t outcome_index = 0;
  Outcome outcome;
  Formula formula;
};

struct DialoguePlan {
  FluentTable fluents;
  std::vector<PlanNode> nodes;
  std::vector<PlanEdge> edges;
  NodeId initial = 0;
  std::vector<NodeId> goals;

  bool is_goal(NodeId node) const;
  /// Indices into `edges` leaving `node`, in outcome order.
  std::vector<std::size_t> out_edges(NodeId node) const;
  /// Throws StructuralError naming the first broken invariant.
  void check() const;
};

/// Validates the solution and compiles it. Throws StructuralError if the
/// solution does not validate.
DialoguePlan compile_plan(const FondProblem& problem, const FondSolution& solution);

/// Inverse of compile_plan up to node states, which are left empty: maps node
/// labels back to action indices so the plan can be validated against a
/// problem. Throws StructuralError for unknown actions or edges whose outcome
/// differs from the action's.
FondSolution solution_from_plan(const FondProblem& problem, const DialoguePlan& plan);

/// Conjunction of the outcome's literals; `true` for the empty outcome.
Formula outcome_formula(const Outcome& outcome);

/// Bracketed edge label: `[have-number]`, `[ok-checkin, not no-checkin]`, `[ ]`.
std::string edge_label(const DialoguePlan& plan, const PlanEdge& edge);

/// Reads the canonical rendering produced by render_formula. Unknown fluent
/// names are interned into `fluents`.
Formula parse_formula(std::string_view text, FluentTable& fluents);

struct BranchResolution {
  enum class Failure { kNone, kNoConsistentBranch, kAmbiguousBranches };

  std::optional<std::size_t> edge;  // index into DialoguePlan::edges
  Failure failure = Failure::kNone;
  /// Several consistent edges with extensionally identical outcomes; the
  /// lowest outcome index was chosen.
  bool duplicate_outcomes = false;
  std::vector<std::size_t> consistent;

  bool ok() const { return edge.has_value(); }
};

std::string_view to_string(BranchResolution::Failure f);

/// An edge is consistent when applying its outcome to `prev` yields exactly `cur`.
BranchResolution resolve_branch(const DialoguePlan& plan, NodeId at, const State& prev, const State& cur);

nlohmann::json to_json(const DialoguePlan& plan);
/// Throws StructuralError on schema mismatch, dangling ids or broken invariants.
DialoguePlan from_json(const nlohmann::json& doc);

std::string to_dot(const DialoguePlan& plan);

}  // namespace dialoplan
