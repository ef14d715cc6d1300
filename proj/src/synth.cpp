#include "dialoplan/synth.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "dialoplan/error.hpp"
#include "dialoplan/plan.hpp"

namespace dialoplan::synth {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

int Rng::uniform(int lo, int hi) {
  if (hi < lo) throw ConfigError("empty range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do x = next();
  while (x >= limit);
  return lo + static_cast<int>(x % span);
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<int> Rng::sample(int n, int k) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[i] = i;
  // partial Fisher-Yates
  for (int i = 0; i < k; ++i) std::swap(pool[i], pool[uniform(i, n - 1)]);
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

void check_range(const char* what, Range r, int lo_min, int hi_max) {
  if (r.lo < lo_min || r.lo > r.hi || r.hi > hi_max)
    throw ConfigError(std::string(what) + " range [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                      "] must lie within [" + std::to_string(lo_min) + ", " + std::to_string(hi_max) + "]");
}

State state_of(const std::vector<int>& ids) {
  State s;
  for (int id : ids) s.insert(static_cast<FluentId>(id));
  return s;
}

}  // namespace

FondProblem generate_instance(const GeneratorConfig& cfg) {
  if (cfg.num_fluents < 6) throw ConfigError("num-fluents must be at least 6, got " + std::to_string(cfg.num_fluents));
  if (cfg.num_actions < 1) throw ConfigError("num-actions must be positive, got " + std::to_string(cfg.num_actions));
  const int n = cfg.num_fluents;
  check_range("precondition", cfg.precondition_size, 0, n);
  check_range("select", cfg.select_size, 1, n);
  check_range("assign", cfg.assign_size, 1, std::min(n, 16));
  check_range("init", cfg.init_size, 0, n);
  check_range("goal", cfg.goal_size, 1, n);
  if (!(cfg.positive_precondition >= 0 && cfg.positive_precondition <= 1))
    throw ConfigError("positive_precondition must be a probability");

  Rng rng(cfg.seed);
  FondProblem p;
  for (int i = 0; i < n; ++i) p.fluents.declare("f" + std::to_string(i));

  for (int a = 0; a < cfg.num_actions; ++a) {
    NDAction act;
    act.name = "a" + std::to_string(a);
    act.kind = ActionKind::kDialogue;

    std::vector<Literal> pre;
    for (int f : rng.sample(n, rng.uniform(cfg.precondition_size.lo, cfg.precondition_size.hi)))
      pre.push_back({static_cast<FluentId>(f), rng.unit() < cfg.positive_precondition});
    act.precondition = Formula::of_literals(pre);

    if (rng.uniform(0, 1) == 0) {
      for (int f : rng.sample(n, rng.uniform(cfg.select_size.lo, cfg.select_size.hi)))
        act.outcomes.emplace_back(State{static_cast<FluentId>(f)}, State{});
    } else {
      const auto flipped = rng.sample(n, rng.uniform(cfg.assign_size.lo, cfg.assign_size.hi));
      const std::size_t k = flipped.size();
      for (std::size_t bits = 0; bits < (std::size_t{1} << k); ++bits) {
        State adds, dels;
        for (std::size_t j = 0; j < k; ++j)
          ((bits >> j) & 1 ? adds : dels).insert(static_cast<FluentId>(flipped[j]));
        act.outcomes.emplace_back(adds, dels);
      }
    }
    p.actions.push_back(std::move(act));
  }

  p.init = state_of(rng.sample(n, rng.uniform(cfg.init_size.lo, cfg.init_size.hi)));
  std::vector<Formula> goal;
  for (int f : rng.sample(n, rng.uniform(cfg.goal_size.lo, cfg.goal_size.hi)))
    goal.push_back(Formula::atom(static_cast<FluentId>(f)));
  p.goal = goal.size() == 1 ? goal.front() : Formula::conjunction(std::move(goal));
  return p;
}

std::vector<EffectType> effect_types(const FondProblem& generated) {
  std::vector<EffectType> out;
  for (const auto& a : generated.actions) {
    const bool deletes = std::any_of(a.outcomes.begin(), a.outcomes.end(),
                                     [](const Outcome& o) { return !o.deletes().empty(); });
    out.push_back(deletes ? EffectType::kAssign : EffectType::kSelect);
  }
  return out;
}

std::optional<double> InstanceRecord::ratio() const {
  if (!solved || model_size == 0) return std::nullopt;
  return static_cast<double>(solution_size) / static_cast<double>(model_size);
}

InstanceRecord run_instance(const ExperimentOptions& options, std::size_t index) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t base = derive_seed(options.master_seed, index);
  Rng sizes(base);

  InstanceRecord rec;
  rec.index = index;
  rec.actions = sizes.uniform(options.sampler.actions.lo, options.sampler.actions.hi);
  rec.fluents = sizes.uniform(options.sampler.fluents.lo, options.sampler.fluents.hi);

  GeneratorConfig cfg = options.sampler.base;
  cfg.num_actions = rec.actions;
  cfg.num_fluents = rec.fluents;

  for (int attempt = 0; attempt < std::max(1, options.retry_cap); ++attempt) {
    cfg.seed = derive_seed(base, static_cast<std::uint64_t>(attempt) + 1);
    rec.seed = cfg.seed;
    rec.attempts = attempt + 1;
    const FondProblem problem = generate_instance(cfg);
    std::optional<FondSolution> sol;
    try {
      sol = solve(problem, options.budget);
    } catch (const ResourceError&) {
      rec.budget_exhausted = true;
      break;
    }
    if (!sol) continue;
    const DialoguePlan plan = compile_plan(problem, *sol);
    std::set<std::string> used;
    for (const auto& node : plan.nodes) {
      if (!node.kind) continue;
      ++rec.solution_size;
      used.insert(node.action);
    }
    rec.model_size = used.size();
    rec.solved = true;
    break;
  }
  if (options.record_timing)
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<InstanceRecord> run_experiment(const ExperimentOptions& options) {
  std::vector<InstanceRecord> out(options.instances);
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, options.instances)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < options.instances;) {
      try {
        out[i] = run_instance(options, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

void write_csv(std::ostream& out, const std::vector<InstanceRecord>& records) {
  out << "seed,actions,fluents,solved,solution_size,model_size,ratio,attempts,wall_ms\n";
  char buf[64];
  for (const auto& r : records) {
    out << r.seed << ',' << r.actions << ',' << r.fluents << ',' << (r.solved ? 1 : 0) << ',' << r.solution_size
        << ',' << r.model_size << ',';
    if (auto q = r.ratio()) {
      std::snprintf(buf, sizeof buf, "%.4f", *q);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.0f", std::round(r.wall_ms));
    out << ',' << r.attempts << ',' << buf << '\n';
  }
}

std::vector<Bin> ratio_histogram(const std::vector<InstanceRecord>& records, double bin_width) {
  if (!(bin_width > 0)) throw ConfigError("bin width must be positive");
  std::vector<double> ratios;
  for (const auto& r : records)
    if (auto q = r.ratio()) ratios.push_back(*q);
  if (ratios.empty()) throw ConfigError("no solved, non-degenerate records to histogram");

  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  const auto first = static_cast<std::size_t>(std::floor(*lo / bin_width));
  const auto last = static_cast<std::size_t>(std::floor(*hi / bin_width));
  std::vector<Bin> bins(last - first + 1);
  for (std::size_t i = 0; i < bins.size(); ++i)
    bins[i] = {static_cast<double>(first + i) * bin_width, static_cast<double>(first + i + 1) * bin_width, 0};
  for (double q : ratios) ++bins[static_cast<std::size_t>(std::floor(q / bin_width)) - first].count;
  return bins;
}

void write_histogram_csv(std::ostream& out, const std::vector<Bin>& bins) {
  out << "lo,hi,count\n";
  for (const auto& b : bins) out << b.lo << ',' << b.hi << ',' << b.count << '\n';
}

void write_histogram_dat(std::ostream& out, const std::vector<Bin>& bins) {
  out << "# centre count\n";
  for (const auto& b : bins) out << (b.lo + b.hi) / 2 << ' ' << b.count << '\n';
}

}  // namespace dialoplan::synth
