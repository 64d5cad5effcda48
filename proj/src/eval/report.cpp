#include "mtlse/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

namespace mtlse::eval {

namespace {

using Getter = std::optional<double> (*)(const MetricReport&);

std::optional<double> get_scene_micro(const MetricReport& m) { return m.scene_micro_f; }
std::optional<double> get_scene_macro(const MetricReport& m) { return m.scene_macro_f; }
std::optional<double> get_event_micro(const MetricReport& m) { return m.event_micro_f; }
std::optional<double> get_event_macro(const MetricReport& m) { return m.event_macro_f; }

template <class F>
std::optional<double> reduce(const std::vector<SeedReport>& seeds, F value, bool want_std) {
  std::vector<double> xs;
  for (const auto& s : seeds) {
    if (auto v = value(s.metrics)) xs.push_back(*v);
  }
  if (xs.empty()) return std::nullopt;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (!want_std) return mean;
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> reduce_vector(const std::vector<SeedReport>& seeds, bool scene, bool want_std) {
  std::size_t width = 0;
  for (const auto& s : seeds) width = std::max(width, (scene ? s.metrics.per_scene_f : s.metrics.per_event_f).size());
  std::vector<double> out(width, 0.0);
  for (std::size_t k = 0; k < width; ++k) {
    auto v = reduce(
        seeds,
        [&](const MetricReport& m) -> std::optional<double> {
          const auto& vec = scene ? m.per_scene_f : m.per_event_f;
          if (k < vec.size()) return vec[k];
          return std::nullopt;
        },
        want_std);
    out[k] = v.value_or(0.0);
  }
  return out;
}

Summary summarize(const std::vector<SeedReport>& seeds, bool want_std) {
  Summary s;
  s.scene_micro_f = reduce(seeds, get_scene_micro, want_std);
  s.scene_macro_f = reduce(seeds, get_scene_macro, want_std);
  s.event_micro_f = reduce(seeds, get_event_micro, want_std);
  s.event_macro_f = reduce(seeds, get_event_macro, want_std);
  s.per_event_f = reduce_vector(seeds, false, want_std);
  s.per_scene_f = reduce_vector(seeds, true, want_std);
  if (!want_std) {
    std::size_t count = 0;
    for (const auto& seed : seeds) {
      if (!seed.metrics.confusion) continue;
      const auto& m = seed.metrics.confusion->recall_percent;
      if (!s.confusion) s.confusion = Matrix<double>(m.rows, m.cols, 0.0);
      for (std::size_t i = 0; i < m.values.size(); ++i) s.confusion->values[i] += m.values[i];
      ++count;
    }
    if (s.confusion) {
      for (double& v : s.confusion->values) v /= static_cast<double>(count);
    }
  }
  return s;
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["scene_micro_f"] = optional_json(s.scene_micro_f);
  j["scene_macro_f"] = optional_json(s.scene_macro_f);
  j["event_micro_f"] = optional_json(s.event_micro_f);
  j["event_macro_f"] = optional_json(s.event_macro_f);
  j["per_scene_f"] = s.per_scene_f;
  j["per_event_f"] = s.per_event_f;
  if (s.confusion) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < s.confusion->rows; ++r) {
      std::vector<double> row(s.confusion->values.begin() + static_cast<std::ptrdiff_t>(r * s.confusion->cols),
                              s.confusion->values.begin() + static_cast<std::ptrdiff_t>((r + 1) * s.confusion->cols));
      rows.push_back(row);
    }
    j["confusion_recall_percent"] = rows;
  }
  return j;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Summary RunReport::mean() const { return summarize(seeds, false); }

Summary RunReport::stddev() const { return summarize(seeds, true); }

std::vector<std::string> report_csv_columns(const std::vector<std::string>& event_names) {
  std::vector<std::string> cols{"method", "seed", "scene_micro_f", "scene_macro_f", "event_micro_f", "event_macro_f"};
  for (const auto& e : event_names) cols.push_back("event_f." + e);
  return cols;
}

std::string report_csv(const RunReport& r) {
  std::ostringstream out;
  const auto cols = report_csv_columns(r.event_names);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  auto row = [&](const std::string& seed, const std::optional<double>& a, const std::optional<double>& b,
                 const std::optional<double>& c, const std::optional<double>& d, const std::vector<double>& per_event) {
    out << r.method << "," << seed << "," << cell(a) << "," << cell(b) << "," << cell(c) << "," << cell(d);
    for (std::size_t k = 0; k < r.event_names.size(); ++k) {
      out << ",";
      if (k < per_event.size()) out << format_number(per_event[k]);
    }
    out << "\n";
  };
  for (const auto& s : r.seeds) {
    const auto& m = s.metrics;
    row(std::to_string(s.seed), m.scene_micro_f, m.scene_macro_f, m.event_micro_f, m.event_macro_f, m.per_event_f);
  }
  if (!r.seeds.empty()) {
    const Summary mean = r.mean();
    const Summary sd = r.stddev();
    row("mean", mean.scene_micro_f, mean.scene_macro_f, mean.event_micro_f, mean.event_macro_f, mean.per_event_f);
    row("std", sd.scene_micro_f, sd.scene_macro_f, sd.event_micro_f, sd.event_macro_f, sd.per_event_f);
  }
  return out.str();
}

std::string report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["scene_names"] = r.scene_names;
  j["event_names"] = r.event_names;
  auto runs = nlohmann::ordered_json::array();
  for (const auto& s : r.seeds) {
    const auto& m = s.metrics;
    nlohmann::ordered_json run;
    run["seed"] = s.seed;
    run["scene_micro_f"] = optional_json(m.scene_micro_f);
    run["scene_macro_f"] = optional_json(m.scene_macro_f);
    run["event_micro_f"] = optional_json(m.event_micro_f);
    run["event_macro_f"] = optional_json(m.event_macro_f);
    run["per_scene_f"] = m.per_scene_f;
    run["per_event_f"] = m.per_event_f;
    if (m.confusion) {
      auto rows = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < m.confusion->n; ++i) {
        std::vector<double> row;
        for (std::size_t k = 0; k < m.confusion->n; ++k) row.push_back(m.confusion->recall_percent.at(i, k));
        rows.push_back(row);
      }
      run["confusion_recall_percent"] = rows;
    }
    runs.push_back(run);
  }
  j["runs"] = runs;
  auto failures = nlohmann::ordered_json::array();
  for (const auto& [seed, msg] : r.failures) failures.push_back({{"seed", seed}, {"error", msg}});
  j["failures"] = failures;
  if (!r.seeds.empty()) {
    j["mean"] = summary_json(r.mean());
    j["std"] = summary_json(r.stddev());
  }
  return j.dump(2) + "\n";
}

std::string confusion_csv(const Matrix<double>& m, const std::vector<std::string>& scene_names) {
  std::ostringstream out;
  out << "reference\\predicted";
  for (std::size_t c = 0; c < m.cols; ++c) out << "," << (c < scene_names.size() ? scene_names[c] : std::to_string(c));
  out << "\n";
  for (std::size_t r = 0; r < m.rows; ++r) {
    out << (r < scene_names.size() ? scene_names[r] : std::to_string(r));
    for (std::size_t c = 0; c < m.cols; ++c) out << "," << format_number(m.at(r, c));
    out << "\n";
  }
  return out.str();
}

}  // namespace mtlse::eval
