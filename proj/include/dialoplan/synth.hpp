#pragma once

// Random FOND instance generator and the solution-size / model-size
// experiment harness.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dialoplan/model.hpp"
#include "dialoplan/planner.hpp"

namespace dialoplan::synth {

/// Inclusive integer range.
struct Range {
  int lo = 0;
  int hi = 0;
};

struct GeneratorConfig {
  int num_actions = 10;
  int num_fluents = 12;
  std::uint64_t seed = 0;

  Range precondition_size{1, 5};
  Range select_size{2, 5};
  Range assign_size{1, 4};
  Range init_size{1, 5};
  Range goal_size{1, 2};
  /// Probability that a sampled precondition literal is positive.
  double positive_precondition = 0.5;
};

enum class EffectType { kSelect, kAssign };

/// Fluents are `f0..f{n-1}`, actions `a0..a{m-1}`. Each action's effect is a
/// `select` (oneof over k single-add outcomes) or an `assign` (all 2^k polarity
/// combinations over k fluents, outcome i setting fluent j true iff bit j of i
/// is set). Pure function of the config. Throws ConfigError when
/// num_fluents < 6, num_actions < 1, or a range is empty or wider than the
/// fluent set.
FondProblem generate_instance(const GeneratorConfig& cfg);

/// Effect type the generator picked for each action, in action order.
std::vector<EffectType> effect_types(const FondProblem& generated);

/// Deterministic 64-bit mixer used to derive per-instance and retry seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// mt19937_64 with its own range reduction (rejection sampling), since the
/// standard distributions differ between library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  int uniform(int lo, int hi);
  double unit();
  /// `k` distinct values from [0, n), in sampling order.
  std::vector<int> sample(int n, int k);

 private:
  std::mt19937_64 engine_;
};

struct SamplerConfig {
  Range actions{8, 20};
  Range fluents{10, 25};
  GeneratorConfig base;  // ranges and polarity; counts and seed are overwritten
};

struct ExperimentOptions {
  std::size_t instances = 100;
  std::uint64_t master_seed = 1;
  SamplerConfig sampler;
  SolveOptions budget{200'000, std::chrono::milliseconds(20'000)};
  int retry_cap = 20;
  unsigned threads = 0;  // 0: hardware concurrency
  bool record_timing = true;
};

struct InstanceRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;  // seed of the last attempt
  int actions = 0;
  int fluents = 0;
  bool solved = false;
  bool budget_exhausted = false;
  std::size_t solution_size = 0;  // action nodes, Done excluded
  std::size_t model_size = 0;     // distinct actions used, Done excluded
  int attempts = 0;
  double wall_ms = 0;

  /// Solved with a plan made of `Done` alone.
  bool degenerate() const { return solved && solution_size == 0; }
  /// Defined only for solved, non-degenerate records.
  std::optional<double> ratio() const;
};

/// Instance `i` samples its sizes from derive_seed(master, i) and retries
/// unsolvable draws with derive_seed(seed, attempt). Budget exhaustion is an
/// unsolved record, not an error. Results are ordered by index regardless of
/// thread count.
std::vector<InstanceRecord> run_experiment(const ExperimentOptions& options);

/// Single instance of run_experiment, exposed for tests.
InstanceRecord run_instance(const ExperimentOptions& options, std::size_t index);

void write_csv(std::ostream& out, const std::vector<InstanceRecord>& records);

struct Bin {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};

/// Histogram of ratios of solved, non-degenerate records. Bins are aligned to
/// multiples of the width and run from the bin holding the minimum to the one
/// holding the maximum. Throws ConfigError on a
/// non-positive width or when no record qualifies.
std::vector<Bin> ratio_histogram(const std::vector<InstanceRecord>& records, double bin_width);

void write_histogram_csv(std::ostream& out, const std::vector<Bin>& bins);
/// Two columns, bin centre and count, for gnuplot `with boxes`.
void write_histogram_dat(std::ostream& out, const std::vector<Bin>& bins);

}  // namespace dialoplan::synth
