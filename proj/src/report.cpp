#include "csk/report.hpp"

#include <Eigen/Core>
#include <cstdio>
#include <fftw3.h>
#include <sstream>

#include "csk/error.hpp"
#include "csk/io.hpp"

namespace csk {
namespace {

nlohmann::json rate(std::optional<double> r) {
  return r ? nlohmann::json(*r) : nlohmann::json(nullptr);
}

nlohmann::json confusion_json(const Metrics& m) {
  return {{"tp", m.tp}, {"fn", m.fn}, {"tn", m.tn}, {"fp", m.fp}};
}

}  // namespace

std::string format_percent(std::optional<double> r) {
  if (!r) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *r);
  return buf;
}

nlohmann::json metrics_json(const LosoResult& loso) {
  const Metrics& m = loso.metrics;
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : loso.folds) {
    nlohmann::json j{{"subject_id", f.subject_id},
                     {"truth", f.truth},
                     {"valid", f.valid},
                     {"train_subjects", f.train_ids.size()}};
    if (f.valid) j["prediction"] = f.prediction;
    else j["reason"] = f.reason;
    folds.push_back(std::move(j));
  }
  return {{"accuracy", rate(m.accuracy())},
          {"sensitivity", rate(m.sensitivity())},
          {"specificity", rate(m.specificity())},
          {"confusion", confusion_json(m)},
          {"invalid_folds", loso.invalid_folds()},
          {"per_fold", std::move(folds)}};
}

Metrics metrics_from_json(const nlohmann::json& j) {
  try {
    const auto& c = j.at("confusion");
    Metrics m;
    m.tp = c.at("tp").get<int>();
    m.fn = c.at("fn").get<int>();
    m.tn = c.at("tn").get<int>();
    m.fp = c.at("fp").get<int>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: malformed metrics: ") + e.what());
  }
}

std::string metrics_csv_header() { return "variant,accuracy,sensitivity,specificity,tp,fn,tn,fp"; }

std::string metrics_csv_line(const std::string& variant, const Metrics& m) {
  std::ostringstream s;
  s << variant << ',' << format_percent(m.accuracy()) << ',' << format_percent(m.sensitivity())
    << ',' << format_percent(m.specificity()) << ',' << m.tp << ',' << m.fn << ',' << m.tn << ','
    << m.fp;
  return s.str();
}

nlohmann::json trial_json(const TrialResult& t) {
  return {{"kernel_count", t.kernel_count},
          {"featuremap_index", t.featuremap_index},
          {"seed", t.seed},
          {"q", t.q},
          {"a1_accuracy", rate(t.a1_metrics.accuracy())},
          {"a1_confusion", confusion_json(t.a1_metrics)},
          {"invalid_folds", t.invalid_folds},
          {"kernel_ref", t.kernel_ref}};
}

std::string trials_csv_header() { return "kernel_count,featuremap_index,seed,q,a1_accuracy"; }

std::string trials_csv(const nlohmann::json& trials) {
  std::ostringstream s;
  s << trials_csv_header() << '\n';
  try {
    for (const auto& t : trials) {
      s << t.at("kernel_count").get<std::size_t>() << ',' << t.at("featuremap_index").get<std::size_t>()
        << ',' << t.at("seed").get<std::uint64_t>() << ',' << t.at("q").get<std::size_t>() << ',';
      const auto& a = t.at("a1_accuracy");
      s << (a.is_null() ? std::string("NA") : format_double(a.get<double>())) << '\n';
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: malformed trial table: ") + e.what());
  }
  return s.str();
}

nlohmann::json report_json(const Report& r, const KeyValues& config_echo) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : config_echo) config[k] = v;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) trials.push_back(trial_json(t));
  nlohmann::json timing = nlohmann::json::object();
  for (const auto& t : r.timings) timing[t.stage] = t.seconds;

  char checksum[32];
  std::snprintf(checksum, sizeof checksum, "%016llx", static_cast<unsigned long long>(r.kernel_checksum));
  nlohmann::json j;
  j["format"] = "csk-report";
  j["version"] = 1;
  j["variant"] = to_string(r.variant);
  j["metrics"] = metrics_json(r.final_loso);
  j["kernel"] = {{"count", r.kernel_count},
                 {"featuremap_index", r.map_index},
                 {"seed", r.kernel_seed},
                 {"checksum", std::string(checksum)},
                 {"n0", r.n0},
                 {"q", r.q}};
  j["selection"]["a1_subjects"] = r.a1_ids;
  j["selection"]["a2_subjects"] = r.a2_ids;
  j["selection"]["selected_trial"] =
      r.selected_trial ? nlohmann::json(*r.selected_trial) : nlohmann::json(nullptr);
  j["trials"] = std::move(trials);
  j["config"] = std::move(config);
  j["versions"] = {{"csk", std::string(kVersion)},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"fftw", std::string(fftw_version)}};
  j["timing"] = std::move(timing);
  return j;
}

nlohmann::json without_timing(const nlohmann::json& report) {
  nlohmann::json copy = report;
  copy.erase("timing");
  return copy;
}

std::string render_table(const nlohmann::json& report) {
  std::ostringstream s;
  try {
    const Metrics m = metrics_from_json(report.at("metrics"));
    const auto& k = report.at("kernel");
    s << "variant        " << report.at("variant").get<std::string>() << '\n'
      << "accuracy       " << format_percent(m.accuracy()) << '\n'
      << "sensitivity    " << format_percent(m.sensitivity()) << '\n'
      << "specificity    " << format_percent(m.specificity()) << '\n'
      << "confusion      tp=" << m.tp << " fn=" << m.fn << " tn=" << m.tn << " fp=" << m.fp << '\n'
      << "invalid folds  " << report.at("metrics").at("invalid_folds").get<std::size_t>() << '\n'
      << "kernels        " << k.at("count").get<std::size_t>() << " (seed " << k.at("seed").get<std::uint64_t>()
      << ", map " << k.at("featuremap_index").get<std::size_t>() << ", Q " << k.at("q").get<std::size_t>()
      << " of " << k.at("n0").get<std::size_t>() << ")\n";
    const auto& trials = report.at("trials");
    if (!trials.empty()) s << "trials         " << trials.size() << '\n';
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: malformed document: ") + e.what());
  }
  return s.str();
}

KeyValues config_from_report(const nlohmann::json& report) {
  KeyValues kv;
  try {
    for (const auto& [k, v] : report.at("config").items()) kv.emplace_back(k, v.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: malformed config echo: ") + e.what());
  }
  return kv;
}

}  // namespace csk
