#include "csk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "csk/error.hpp"
#include "csk/io.hpp"
#include "csk/parallel.hpp"

namespace csk {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const std::string t = trim(text);
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end)
    throw ConfigError("config: " + key + ": cannot parse '" + text + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError("config: " + key + ": non-finite value");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("config: " + key + ": expected true/false, got '" + text + "'");
}

/// "2-8", "2,3,5" or a mix such as "1-3,7".
template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    if constexpr (std::is_integral_v<T>) {
      if (dash != std::string::npos) {
        const T lo = parse_number<T>(key, item.substr(0, dash));
        const T hi = parse_number<T>(key, item.substr(dash + 1));
        if (hi < lo) throw ConfigError("config: " + key + ": empty range '" + item + "'");
        for (T v = lo; v <= hi; ++v) out.push_back(v);
        continue;
      }
    }
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) s += format_double(values[i]);
    else s += std::to_string(values[i]);
  }
  return s;
}

}  // namespace

std::string to_string(NormalizeMode mode) {
  return mode == NormalizeMode::train_stats ? "train-stats" : "all-rows";
}

std::string to_string(MapSelect mode) { return mode == MapSelect::index ? "index" : "concat"; }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "variant",      "source",        "source-wav",   "noise-wav",     "snr-db",
      "target",       "out",           "seed",         "lambda",        "alpha",
      "gamma",        "outer-iters",   "coding-iters", "dict-iters",    "residual-tol",
      "kernel-rows",  "kernel-cols",   "kernel-count", "map-index",     "q",
      "kernel-counts", "n-seeds",      "seeds",        "q-grid",        "split-ratio",
      "split-seed",   "r-neighbors",   "normalize",    "map-select",    "relief",
      "ablate-selection", "c",         "literal-a1",   "threads"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "variant") variant = parse_variant(v);
  else if (key == "source") source = v;
  else if (key == "source-wav") source_wav = v;
  else if (key == "noise-wav") noise_wav = v;
  else if (key == "snr-db") snr_db = parse_list<double>(key, v);
  else if (key == "target") target = v;
  else if (key == "out") out = v;
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "lambda") solver.lambda = parse_number<double>(key, v);
  else if (key == "alpha") solver.alpha = parse_number<double>(key, v);
  else if (key == "gamma") solver.gamma = parse_number<double>(key, v);
  else if (key == "outer-iters") solver.outer_iters = parse_number<int>(key, v);
  else if (key == "coding-iters") solver.coding_iters = parse_number<int>(key, v);
  else if (key == "dict-iters") solver.dict_iters = parse_number<int>(key, v);
  else if (key == "residual-tol") solver.residual_tol = parse_number<double>(key, v);
  else if (key == "kernel-rows") kernel_rows = parse_number<Eigen::Index>(key, v);
  else if (key == "kernel-cols") kernel_cols = parse_number<Eigen::Index>(key, v);
  else if (key == "kernel-count") kernel_count = parse_number<std::size_t>(key, v);
  else if (key == "map-index") map_index = parse_number<std::size_t>(key, v);
  else if (key == "q") q = v == "auto" ? 0 : parse_number<std::size_t>(key, v);
  else if (key == "kernel-counts") kernel_counts = parse_list<std::size_t>(key, v);
  else if (key == "n-seeds") n_seeds = parse_number<std::size_t>(key, v);
  else if (key == "seeds") {
    if (v == "auto") seeds.reset();
    else seeds = parse_list<std::uint64_t>(key, v);
  } else if (key == "q-grid") q_grid = v == "auto" ? std::vector<std::size_t>{} : parse_list<std::size_t>(key, v);
  else if (key == "split-ratio") split_ratio = parse_number<double>(key, v);
  else if (key == "split-seed") {
    if (v == "auto") split_seed.reset();
    else split_seed = parse_number<std::uint64_t>(key, v);
  } else if (key == "r-neighbors") r_neighbors = parse_number<std::size_t>(key, v);
  else if (key == "normalize") {
    if (v == "train-stats") normalize = NormalizeMode::train_stats;
    else if (v == "all-rows") normalize = NormalizeMode::all_rows;
    else throw ConfigError("config: normalize must be train-stats or all-rows");
  } else if (key == "map-select") {
    if (v == "index") map_select = MapSelect::index;
    else if (v == "concat") map_select = MapSelect::concat;
    else throw ConfigError("config: map-select must be index or concat");
  } else if (key == "relief") {
    if (v == "per-fold") global_relief = false;
    else if (v == "global") global_relief = true;
    else throw ConfigError("config: relief must be per-fold or global");
  } else if (key == "ablate-selection") ablate_selection = parse_bool(key, v);
  else if (key == "c") c = parse_number<double>(key, v);
  else if (key == "literal-a1") literal_a1 = parse_bool(key, v);
  else if (key == "threads") threads = parse_number<unsigned>(key, v);
  else throw ConfigError("config: unknown key '" + key + "'");
}

KeyValues RunConfig::to_kv() const {
  const auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  return {
      {"variant", to_string(variant)},
      {"source", source},
      {"source-wav", source_wav},
      {"noise-wav", noise_wav},
      {"snr-db", join(snr_db)},
      {"target", target},
      {"seed", std::to_string(seed)},
      {"lambda", format_double(solver.lambda)},
      {"alpha", format_double(solver.alpha)},
      {"gamma", format_double(solver.gamma)},
      {"outer-iters", std::to_string(solver.outer_iters)},
      {"coding-iters", std::to_string(solver.coding_iters)},
      {"dict-iters", std::to_string(solver.dict_iters)},
      {"residual-tol", format_double(solver.residual_tol)},
      {"kernel-rows", std::to_string(kernel_rows)},
      {"kernel-cols", std::to_string(kernel_cols)},
      {"kernel-count", std::to_string(kernel_count)},
      {"map-index", std::to_string(map_index)},
      {"q", q == 0 ? "auto" : std::to_string(q)},
      {"kernel-counts", join(kernel_counts)},
      {"n-seeds", std::to_string(n_seeds)},
      {"seeds", seeds ? join(*seeds) : "auto"},
      {"q-grid", q_grid.empty() ? "auto" : join(q_grid)},
      {"split-ratio", format_double(split_ratio)},
      {"split-seed", split_seed ? std::to_string(*split_seed) : "auto"},
      {"r-neighbors", std::to_string(r_neighbors)},
      {"normalize", to_string(normalize)},
      {"map-select", to_string(map_select)},
      {"relief", global_relief ? "global" : "per-fold"},
      {"ablate-selection", b(ablate_selection)},
      {"c", format_double(c)},
      {"literal-a1", b(literal_a1)},
  };
}

void RunConfig::validate() const {
  try {
    solver.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (kernel_rows < 1 || kernel_cols < 1) throw ConfigError("config: kernel size must be >= 1");
  if (kernel_count < 1) throw ConfigError("config: kernel-count must be >= 1");
  if (map_index < 1) throw ConfigError("config: map-index is 1-based");
  if (n_seeds < 1) throw ConfigError("config: n-seeds must be >= 1");
  if (r_neighbors < 1) throw ConfigError("config: r-neighbors must be >= 1");
  if (!(c > 0.0)) throw ConfigError("config: c must be > 0");
  pipeline().space.validate();
  for (const auto* p : {&source, &source_wav, &noise_wav, &target})
    if (!p->empty() && !std::filesystem::exists(*p))
      throw ConfigError("config: path does not exist: " + *p);
}

std::vector<std::uint64_t> RunConfig::effective_seeds() const {
  if (seeds) return *seeds;
  std::vector<std::uint64_t> s(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) s[i] = seed + i;
  return s;
}

unsigned RunConfig::effective_threads() const { return threads ? threads : default_threads(); }

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.variant = variant;
  p.solver = solver;
  p.solver.seed = seed;
  p.space.kernel_counts = kernel_counts;
  p.space.seeds = effective_seeds();
  p.space.q_grid = q_grid;
  p.space.split_ratio = split_ratio;
  p.space.split_seed = split_seed.value_or(seed);
  p.search.kernel_size = {kernel_rows, kernel_cols};
  p.search.r_neighbors = r_neighbors;
  p.search.ssck.normalize = normalize;
  p.search.ssck.map_select = map_select;
  p.search.ssck.global_relief = global_relief;
  p.search.ssck.skip_selection = ablate_selection;
  p.search.ssck.c = c;
  p.search.threads = effective_threads();
  p.search.ssck.threads = p.search.threads;
  p.kernel_count = kernel_count;
  p.map_index = map_index;
  p.q = q;
  p.literal_a1 = literal_a1;
  return p;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  KeyValues kv;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ": line " + std::to_string(n) + ": expected key = value");
    kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

void write_config_file(const std::filesystem::path& path, const KeyValues& kv) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

RunConfig make_run_config(const KeyValues& file, const KeyValues& flags) {
  RunConfig cfg;
  for (const auto& [k, v] : file) cfg.set(k, v);
  for (const auto& [k, v] : flags) cfg.set(k, v);
  return cfg;
}

}  // namespace csk
