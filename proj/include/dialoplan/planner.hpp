#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dialoplan/model.hpp"

namespace dialoplan {

using NodeId = std::size_t;

/// Sentinel action index for synthesized `Done` nodes.
inline constexpr std::size_t kDoneIndex = static_cast<std::size_t>(-1);

struct SolutionNode {
  NodeId id = 0;
  std::size_t action = kDoneIndex;  // index into FondProblem::actions
  State state;                      // state in which the action is applied

  bool done() const { return action == kDoneIndex; }
};

struct SolutionEdge {
  NodeId from = 0;
  std::size_t outcome = 0;
  NodeId to = 0;

  friend bool operator==(const SolutionEdge&, const SolutionEdge&) = default;
};

/// Policy graph. Nodes are numbered 0..n-1 in creation order; edges of a node
/// are stored contiguously in outcome order.
struct FondSolution {
  std::vector<SolutionNode> nodes;
  std::vector<SolutionEdge> edges;
  NodeId root = 0;

  /// Edges leaving `node`, in outcome order.
  std::vector<const SolutionEdge*> out_edges(NodeId node) const;
  std::size_t action_node_count() const;
  std::size_t done_node_count() const { return nodes.size() - action_node_count(); }
};

struct SolveOptions {
  std::size_t max_expansions = 1'000'000;
  std::chrono::milliseconds time_limit{60'000};
};

struct SolveStats {
  std::size_t expanded_states = 0;
  std::size_t fixpoint_rounds = 0;
};

/// Strong-cyclic FOND planning by explicit forward exploration of the
/// reachable state space followed by a greatest-fixpoint pruning of states
/// from which the goal is not reachable under outcome closure.
///
/// Returns nullopt when no strong-cyclic solution exists. Throws
/// ResourceError when the expansion or time budget is exhausted. The policy is
/// a function of the state: each reachable non-goal state gets one node; each
/// goal state gets one `Done` node. Ties between actions are broken by
/// declaration order, states are expanded FIFO.
std::optional<FondSolution> solve(const FondProblem& problem, const SolveOptions& options = {},
                                  SolveStats* stats = nullptr);

enum class SolutionProperty { kRootApplicable, kAllApplicable, kLeafReachable, kStructural };

std::string_view to_string(SolutionProperty p);

struct Violation {
  SolutionProperty property;
  std::string witness;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  bool has(SolutionProperty p) const;
};

/// Checks the solution against the problem by its own fixpoint over reachable
/// (state, node) pairs; it does not trust the states stored on nodes.
ValidationReport validate(const FondProblem& problem, const FondSolution& solution);

using ReachablePair = std::pair<State, NodeId>;

/// Least fixpoint from (init, root) under edge following and outcome
/// application, in discovery (BFS) order. Requires a structurally sound
/// solution.
std::vector<ReachablePair> enumerate_reachable(const FondProblem& problem, const FondSolution& solution);

}  // namespace dialoplan
