// csk: command-line driver for sparse-kernel feature learning and evaluation.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 data error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csk/config.hpp"
#include "csk/error.hpp"
#include "csk/io.hpp"
#include "csk/kernel_bank.hpp"
#include "csk/kernel_search.hpp"
#include "csk/report.hpp"
#include "csk/signal.hpp"
#include "csk/wav.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

/// Raw string values of the shared run options, keyed by config name.
struct RunOptions {
  std::map<std::string, std::string> values;
  std::string config_file;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", config_file, "Flat key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : csk::RunConfig::keys())
      sub->add_option("--" + key, values[key], "see README");
  }

  csk::RunConfig resolve() const {
    csk::KeyValues file;
    if (!config_file.empty()) file = csk::read_config_file(config_file);
    csk::KeyValues flags;
    for (const auto& key : csk::RunConfig::keys())
      if (app->get_option("--" + key)->count() > 0) flags.emplace_back(key, values.at(key));
    csk::RunConfig cfg = csk::make_run_config(file, flags);
    cfg.validate();
    return cfg;
  }
};

std::vector<fs::path> wav_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw csk::ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw csk::DataError(dir.string() + ": no .wav files");
  return files;
}

std::vector<csk::NoiseSpec> noise_bank(const fs::path& dir, const std::vector<double>& snrs) {
  std::vector<csk::NoiseSpec> bank;
  for (const auto& f : wav_files(dir)) {
    const csk::RawSignal noise = csk::read_wav(f);
    for (double snr : snrs) bank.push_back({noise, snr});
  }
  return bank;
}

/// Feature rows of every (signal, noise, SNR) mix, or of the clean signals when
/// no noise directory is given.
std::vector<std::vector<double>> wav_feature_rows(const fs::path& signal_dir, const std::string& noise_dir,
                                                  const std::vector<double>& snrs, std::size_t n) {
  std::vector<csk::RawSignal> signals;
  for (const auto& f : wav_files(signal_dir)) signals.push_back(csk::read_wav(f));
  const auto mixed =
      noise_dir.empty() ? signals : csk::expand_dataset(signals, noise_bank(noise_dir, snrs));
  std::vector<std::vector<double>> rows;
  for (const auto& s : mixed) rows.push_back(csk::extract_toy_features(s, n));
  return rows;
}

csk::TargetDataset require_target(const csk::RunConfig& cfg) {
  if (cfg.target.empty()) throw csk::ConfigError("--target is required");
  return csk::load_target_csv(cfg.target);
}

/// Source domain from --source (CSV) or --source-wav; nullopt when neither is set.
std::optional<csk::SourceDomain> load_source(const csk::RunConfig& cfg, Eigen::Index h0, Eigen::Index n) {
  if (!cfg.source.empty()) return csk::load_source_features(cfg.source, h0);
  if (cfg.source_wav.empty()) return std::nullopt;
  const auto rows = wav_feature_rows(cfg.source_wav, cfg.noise_wav, cfg.snr_db, static_cast<std::size_t>(n));
  csk::SourceDomain domain = csk::build_source_domain(rows, h0);
  if (domain.blocks.empty())
    throw csk::DataError(cfg.source_wav + ": " + std::to_string(rows.size()) +
                         " feature rows do not fill one block");
  return domain;
}

csk::SourceDomain require_source(const csk::RunConfig& cfg, Eigen::Index h0, Eigen::Index n) {
  auto source = load_source(cfg, h0, n);
  if (!source) throw csk::ConfigError("--source or --source-wav is required");
  return std::move(*source);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw csk::DataError(path.string() + ": cannot open for writing");
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw csk::DataError(path.string() + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw csk::DataError(path.string() + ": " + e.what());
  }
}

fs::path out_dir(const csk::RunConfig& cfg) {
  fs::create_directories(cfg.out);
  return cfg.out;
}

nlohmann::json config_json(const csk::RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : cfg.to_kv()) j[k] = v;
  return j;
}

/// Writes report.json, metrics.csv and (when there are trials) trials.csv.
void emit_report(const fs::path& dir, const csk::Report& report, const csk::RunConfig& cfg) {
  const nlohmann::json j = csk::report_json(report, cfg.to_kv());
  write_json(dir / "report.json", j);
  const std::string line = csk::metrics_csv_line(csk::to_string(report.variant), report.final_loso.metrics);
  write_text(dir / "metrics.csv", csk::metrics_csv_header() + "\n" + line + "\n");
  if (!report.trials.empty()) write_text(dir / "trials.csv", csk::trials_csv(j.at("trials")));
  std::cout << csk::metrics_csv_header() << '\n' << line << '\n';
}

int cmd_augment(const fs::path& signals, const fs::path& noise, const std::vector<double>& snrs,
                const fs::path& out, std::size_t features) {
  if (snrs.empty()) throw csk::ConfigError("--snr-db needs at least one value");
  const auto signal_files = wav_files(signals);
  const auto noise_files = wav_files(noise);
  fs::create_directories(out);
  std::vector<std::vector<double>> rows;
  for (const auto& sf : signal_files) {
    const csk::RawSignal s = csk::read_wav(sf);
    for (const auto& nf : noise_files) {
      const csk::RawSignal nz = csk::read_wav(nf);
      for (double snr : snrs) {
        const csk::RawSignal mix = csk::mix_noise_at_snr(s, nz, snr);
        const std::string name = sf.stem().string() + "__" + nf.stem().string() + "__" +
                                 csk::format_double(snr) + "dB.wav";
        csk::write_wav(out / name, mix);
        if (features > 0) rows.push_back(csk::extract_toy_features(mix, features));
      }
    }
  }
  if (features > 0) csk::write_feature_rows(out / "features.csv", rows);
  std::cout << signal_files.size() * noise_files.size() * snrs.size() << " signals written to "
            << out.string() << '\n';
  return 0;
}

int cmd_learn(const csk::RunConfig& cfg, Eigen::Index h0_flag) {
  Eigen::Index h0 = h0_flag, n = 0;
  if (!cfg.target.empty()) {
    const auto target = csk::load_target_csv(cfg.target);
    h0 = target.block_shape().rows;
    n = target.block_shape().cols;
  }
  if (h0 < 1) throw csk::ConfigError("learn-kernels needs --target or --h0 to fix the block height");
  if (n == 0 && cfg.source.empty())
    throw csk::ConfigError("--source-wav needs --target to fix the feature count");
  const csk::SourceDomain source = csk::normalized(require_source(cfg, h0, n));
  const csk::PipelineConfig p = cfg.pipeline();
  const csk::KernelBank bank = csk::learn_kernels(source, cfg.kernel_count, p.search.kernel_size,
                                                  p.solver, p.search.threads);
  const fs::path path = out_dir(cfg) / "kernels.bin";
  csk::save_kernel_bank(path, bank, cfg.seed, config_json(cfg));
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_encode(const csk::RunConfig& cfg, const fs::path& bank_path) {
  const auto loaded = csk::load_kernel_bank(bank_path);
  const auto target = require_target(cfg);
  const csk::PipelineConfig p = cfg.pipeline();
  const auto encoded = csk::encode_target(target, loaded.bank, p.solver, p.search.threads);
  const csk::FeatureTable table = csk::build_feature_table(encoded, target, cfg.map_index, cfg.map_select);
  const fs::path path = out_dir(cfg) / "features.csv";
  csk::write_feature_table_csv(path, table);
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_evaluate(const csk::RunConfig& cfg, const fs::path& bank_path) {
  const auto loaded = csk::load_kernel_bank(bank_path);
  const auto target = require_target(cfg);
  csk::Report report =
      csk::evaluate_bank(cfg.variant, loaded.bank, loaded.seed, cfg.pipeline(), target);
  emit_report(out_dir(cfg), report, cfg);
  return 0;
}

int cmd_search(const csk::RunConfig& cfg) {
  const auto target = require_target(cfg);
  const auto shape = target.block_shape();
  const csk::PipelineConfig p = cfg.pipeline();
  p.space.validate();
  const csk::KernelSplit split = csk::split_kernel_sets(target, p.space.split_ratio, p.space.split_seed);
  const csk::SourceDomain domain = cfg.literal_a1
                                       ? csk::blocks_as_domain(split.a1)
                                       : csk::normalized(require_source(cfg, shape.rows, shape.cols));
  const csk::SearchResult search = csk::search_optimal_kernel(domain, split.a1, p.space, p.solver, p.search);

  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : search.trials) trials.push_back(csk::trial_json(t));
  nlohmann::json j;
  j["format"] = "csk-search";
  j["version"] = 1;
  j["a1_subjects"] = split.a1.subject_ids;
  j["a2_subjects"] = split.a2.subject_ids;
  j["selected_trial"] = search.best;
  j["best"] = csk::trial_json(search.best_trial());
  j["trials"] = trials;
  j["config"] = config_json(cfg);

  const fs::path dir = out_dir(cfg);
  write_json(dir / "search.json", j);
  write_text(dir / "trials.csv", csk::trials_csv(trials));
  csk::save_kernel_bank(dir / "kernels.bin", search.best_bank(), search.best_trial().seed, config_json(cfg));
  const auto& best = search.best_trial();
  std::cout << "best: " << best.kernel_ref << " map " << best.featuremap_index << " Q " << best.q
            << " A1 accuracy " << csk::format_percent(best.a1_metrics.accuracy()) << '\n';
  return 0;
}

int cmd_run(const csk::RunConfig& cfg) {
  const auto target = require_target(cfg);
  const auto shape = target.block_shape();
  std::optional<csk::SourceDomain> source;
  if (cfg.variant != csk::Variant::csc_s2) source = load_source(cfg, shape.rows, shape.cols);
  const csk::Report report = csk::run_pipeline(cfg.pipeline(), source ? &*source : nullptr, target);
  emit_report(out_dir(cfg), report, cfg);
  return 0;
}

int cmd_report(const fs::path& in, const std::string& csv_out, const std::string& trials_out,
               const std::string& emit_config) {
  const nlohmann::json j = read_json(in);
  std::string variant;
  csk::Metrics m;
  try {
    variant = j.at("variant").get<std::string>();
    m = csk::metrics_from_json(j.at("metrics"));
  } catch (const nlohmann::json::exception& e) {
    throw csk::DataError(in.string() + ": " + e.what());
  }
  std::cout << csk::render_table(j);
  const std::string line = csk::metrics_csv_header() + "\n" + csk::metrics_csv_line(variant, m) + "\n";
  if (csv_out.empty()) std::cout << line;
  else write_text(csv_out, line);
  if (!trials_out.empty()) write_text(trials_out, csk::trials_csv(j.value("trials", nlohmann::json::array())));
  if (!emit_config.empty()) csk::write_config_file(emit_config, csk::config_from_report(j));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-kernel feature learning, transfer and evaluation"};
  app.require_subcommand(1);

  std::string signals_dir, noise_dir, augment_out = "augmented", snr_text = "0";
  std::size_t augment_features = 0;
  auto* augment = app.add_subcommand("augment", "Mix every signal with every noise at each SNR");
  augment->add_option("--signals", signals_dir, "Directory of clean .wav signals")->required();
  augment->add_option("--noise", noise_dir, "Directory of noise .wav files")->required();
  augment->add_option("--snr-db", snr_text, "Comma-separated SNR levels in dB");
  augment->add_option("--out", augment_out, "Output directory");
  augment->add_option("--features", augment_features, "Also write features.csv with this many toy features");

  RunOptions learn_opts, encode_opts, evaluate_opts, search_opts, run_opts;
  Eigen::Index h0 = 0;
  std::string bank_path;
  auto* learn = app.add_subcommand("learn-kernels", "Learn a kernel bank from the source domain");
  learn_opts.attach(learn);
  learn->add_option("--h0", h0, "Block height when no --target is given");
  auto* encode = app.add_subcommand("encode", "Write the feature table of a target under a kernel bank");
  encode_opts.attach(encode);
  encode->add_option("--bank", bank_path, "Kernel bank (.bin)")->required()->check(CLI::ExistingFile);
  auto* evaluate = app.add_subcommand("evaluate", "LOSO evaluation of a kernel bank on the target");
  evaluate_opts.attach(evaluate);
  evaluate->add_option("--bank", bank_path, "Kernel bank (.bin)")->required()->check(CLI::ExistingFile);
  auto* search = app.add_subcommand("search", "Kernel search on the A1 subset");
  search_opts.attach(search);
  auto* run = app.add_subcommand("run", "Full pipeline for one variant");
  run_opts.attach(run);

  std::string report_in, report_csv, report_trials, emit_config;
  auto* report = app.add_subcommand("report", "Re-render a report JSON");
  report->add_option("--in", report_in, "report.json")->required()->check(CLI::ExistingFile);
  report->add_option("--csv", report_csv, "Write the metrics CSV here instead of stdout");
  report->add_option("--trials", report_trials, "Write the trial CSV here");
  report->add_option("--emit-config", emit_config, "Write the echoed config as a flat config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (augment->parsed()) {
      csk::RunConfig tmp;
      tmp.set("snr-db", snr_text);
      return cmd_augment(signals_dir, noise_dir, tmp.snr_db, augment_out, augment_features);
    }
    if (learn->parsed()) return cmd_learn(learn_opts.resolve(), h0);
    if (encode->parsed()) return cmd_encode(encode_opts.resolve(), bank_path);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_opts.resolve(), bank_path);
    if (search->parsed()) return cmd_search(search_opts.resolve());
    if (run->parsed()) return cmd_run(run_opts.resolve());
    if (report->parsed()) return cmd_report(report_in, report_csv, report_trials, emit_config);
  } catch (const csk::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const csk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}
