#include "csk/kernel_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "csk/error.hpp"
#include "csk/parallel.hpp"

namespace csk {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::csc_s2: return "csc_s2";
    case Variant::cstl_s2: return "cstl_s2";
    case Variant::cstlok_s2: return "cstlok_s2";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "csc_s2") return Variant::csc_s2;
  if (name == "cstl_s2") return Variant::cstl_s2;
  if (name == "cstlok_s2") return Variant::cstlok_s2;
  throw ConfigError("unknown variant '" + name + "' (expected csc_s2, cstl_s2 or cstlok_s2)");
}

void SearchSpace::validate() const {
  if (kernel_counts.empty()) throw ConfigError("search: empty kernel count range");
  if (seeds.empty()) throw ConfigError("search: empty seed list");
  for (auto k : kernel_counts)
    if (k < 1) throw ConfigError("search: kernel counts must be >= 1");
  for (auto q : q_grid)
    if (q < 1) throw ConfigError("search: Q values must be >= 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("search: split ratio must be in (0, 1)");
}

std::vector<std::size_t> default_q_grid(std::size_t n0) {
  std::set<std::size_t> qs;
  for (std::size_t div : {16, 8, 4, 2}) qs.insert(std::max<std::size_t>(1, (n0 + div - 1) / div));
  qs.insert(n0);
  return {qs.begin(), qs.end()};
}

bool trial_better(const TrialResult& a, const TrialResult& b) {
  // Exact comparison of (tp + tn) / total as cross-multiplied integers.
  const auto correct = [](const Metrics& m) { return static_cast<long long>(m.tp + m.tn); };
  const long long lhs = correct(a.a1_metrics) * b.a1_metrics.total();
  const long long rhs = correct(b.a1_metrics) * a.a1_metrics.total();
  const bool a_defined = a.a1_metrics.total() > 0;
  const bool b_defined = b.a1_metrics.total() > 0;
  if (a_defined != b_defined) return a_defined;
  if (a_defined && lhs != rhs) return lhs > rhs;
  if (a.kernel_count != b.kernel_count) return a.kernel_count < b.kernel_count;
  if (a.featuremap_index != b.featuremap_index) return a.featuremap_index < b.featuremap_index;
  if (a.seed != b.seed) return a.seed < b.seed;
  return a.q < b.q;
}

KernelSplit split_kernel_sets(const TargetDataset& target, double ratio, std::uint64_t seed) {
  target.validate();
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("split: ratio must be in (0, 1)");
  std::mt19937_64 rng(seed);
  KernelSplit split;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < target.size(); ++i)
      if (target.labels[i] == cls) members.push_back(i);
    if (members.size() < 2)
      throw InvalidInput("split: class " + std::to_string(cls) + " has " +
                         std::to_string(members.size()) + " subjects, need at least 2");
    std::shuffle(members.begin(), members.end(), rng);
    auto count = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(members.size())));
    count = std::clamp<std::size_t>(count, 1, members.size() - 1);
    split.a1_indices.insert(split.a1_indices.end(), members.begin(),
                            members.begin() + static_cast<std::ptrdiff_t>(count));
    split.a2_indices.insert(split.a2_indices.end(),
                            members.begin() + static_cast<std::ptrdiff_t>(count), members.end());
  }
  std::sort(split.a1_indices.begin(), split.a1_indices.end());
  std::sort(split.a2_indices.begin(), split.a2_indices.end());
  split.a1 = target.subset(split.a1_indices);
  split.a2 = target.subset(split.a2_indices);
  return split;
}

const KernelBank& SearchResult::best_bank() const {
  const auto& t = best_trial();
  for (const auto& b : banks)
    if (b.kernel_count == t.kernel_count && b.seed == t.seed) return b.bank;
  throw InvalidInput("search: selected bank missing");
}

namespace {

std::string kernel_ref(std::size_t count, std::uint64_t seed) {
  return "k" + std::to_string(count) + "-s" + std::to_string(seed);
}

std::vector<std::size_t> q_values(const SearchSpace& space, std::size_t n0) {
  if (space.q_grid.empty()) return default_q_grid(n0);
  std::vector<std::size_t> out;
  for (auto q : space.q_grid)
    if (q <= n0) out.push_back(q);
  if (out.empty()) throw ConfigError("search: every Q in the grid exceeds N0 = " + std::to_string(n0));
  return out;
}

}  // namespace

SearchResult search_optimal_kernel(const SourceDomain& kernel_blocks, const TargetDataset& a1,
                                   const SearchSpace& space, const SolverConfig& cfg,
                                   const SearchOptions& options) {
  space.validate();
  cfg.validate();
  a1.validate();
  struct Task {
    std::size_t kernel_count;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (auto k : space.kernel_counts)
    for (auto s : space.seeds) tasks.push_back({k, s});

  std::vector<std::vector<TrialResult>> per_task(tasks.size());
  std::vector<std::optional<KernelBank>> banks(tasks.size());
  SsckOptions ssck = options.ssck;
  ssck.threads = 1;

  parallel_for(tasks.size(), options.threads, [&](std::size_t t) {
    const auto [count, seed] = tasks[t];
    SolverConfig seeded = cfg;
    seeded.seed = seed;
    KernelBank bank = learn_kernels(kernel_blocks, count, options.kernel_size, seeded, 1);
    const auto encoded = encode_target(a1, bank, seeded, 1);
    for (std::size_t j = 1; j <= count; ++j) {
      const FeatureTable table = build_feature_table(encoded, a1, j, ssck.map_select);
      const auto n0 = static_cast<std::size_t>(table.rows.cols());
      const auto qs = ssck.skip_selection ? std::vector<std::size_t>{n0} : q_values(space, n0);
      for (auto q : qs) {
        const SsckResult r = ss_ck_table(table, {options.r_neighbors, q}, ssck);
        per_task[t].push_back({count, j, seed, r.q, r.loso.metrics, r.loso.invalid_folds(),
                               kernel_ref(count, seed)});
      }
    }
    banks[t] = std::move(bank);
  });

  SearchResult result;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    result.trials.insert(result.trials.end(), per_task[t].begin(), per_task[t].end());
    result.banks.push_back({tasks[t].kernel_count, tasks[t].seed, std::move(*banks[t])});
  }
  for (std::size_t i = 1; i < result.trials.size(); ++i)
    if (trial_better(result.trials[i], result.trials[result.best])) result.best = i;
  return result;
}

SourceDomain normalized(const SourceDomain& source) {
  SourceDomain out = source;
  for (auto& b : out.blocks) b = local_normalize_block(b);
  return out;
}

SourceDomain blocks_as_domain(const TargetDataset& target) {
  SourceDomain out;
  out.h0 = target.block_shape().rows;
  out.n = target.block_shape().cols;
  for (const auto& b : target.blocks) out.blocks.push_back(local_normalize_block(b));
  return out;
}

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

Report evaluate_bank(Variant variant, const KernelBank& bank, std::uint64_t kernel_seed,
                     const PipelineConfig& config, const TargetDataset& target) {
  Stopwatch watch;
  Report report;
  report.variant = variant;
  report.kernel_count = bank.size();
  report.map_index = config.map_index;
  report.kernel_seed = kernel_seed;
  report.kernel_checksum = bank.checksum();

  const auto encoded = encode_target(target, bank, config.solver, config.search.threads);
  report.timings.push_back({"encode", watch.lap()});
  const FeatureTable table =
      build_feature_table(encoded, target, config.map_index, config.search.ssck.map_select);
  report.n0 = static_cast<std::size_t>(table.rows.cols());
  std::size_t q = config.q == 0 ? (report.n0 + 3) / 4 : config.q;
  SsckOptions ssck = config.search.ssck;
  ssck.threads = config.search.threads;
  const SsckResult r = ss_ck_table(table, {config.search.r_neighbors, q}, ssck);
  report.q = r.q;
  report.final_loso = r.loso;
  report.timings.push_back({"evaluate", watch.lap()});
  return report;
}

Report run_pipeline(const PipelineConfig& config, const SourceDomain* source,
                    const TargetDataset& target) {
  config.solver.validate();
  target.validate();
  const bool needs_source =
      config.variant == Variant::cstl_s2 || (config.variant == Variant::cstlok_s2 && !config.literal_a1);
  if (needs_source && (source == nullptr || source->blocks.empty()))
    throw ConfigError("variant " + to_string(config.variant) + " requires a source domain");
  if (needs_source && shape_of(source->blocks.front()) != target.block_shape())
    throw ConfigError("source blocks and target blocks differ in shape");

  Stopwatch watch;
  if (config.variant != Variant::cstlok_s2) {
    const SourceDomain domain =
        config.variant == Variant::csc_s2 ? blocks_as_domain(target) : normalized(*source);
    const KernelBank bank = learn_kernels(domain, config.kernel_count, config.search.kernel_size,
                                          config.solver, config.search.threads);
    const double learn_seconds = watch.lap();
    Report report = evaluate_bank(config.variant, bank, config.solver.seed, config, target);
    report.timings.insert(report.timings.begin(), {"learn_kernels", learn_seconds});
    return report;
  }

  config.space.validate();
  const KernelSplit split = split_kernel_sets(target, config.space.split_ratio, config.space.split_seed);
  const double split_seconds = watch.lap();
  const SourceDomain domain = config.literal_a1 ? blocks_as_domain(split.a1) : normalized(*source);
  const SearchResult search =
      search_optimal_kernel(domain, split.a1, config.space, config.solver, config.search);
  const double search_seconds = watch.lap();

  const TrialResult& best = search.best_trial();
  PipelineConfig final_cfg = config;
  final_cfg.map_index = best.featuremap_index;
  final_cfg.q = best.q;
  SolverConfig solver = config.solver;
  solver.seed = best.seed;
  final_cfg.solver = solver;
  Report report = evaluate_bank(Variant::cstlok_s2, search.best_bank(), best.seed, final_cfg, split.a2);
  report.trials = search.trials;
  report.selected_trial = search.best;
  report.a1_ids = split.a1.subject_ids;
  report.a2_ids = split.a2.subject_ids;
  report.timings.insert(report.timings.begin(), {{"split", split_seconds}, {"search", search_seconds}});
  return report;
}

}  // namespace csk
