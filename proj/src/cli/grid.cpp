#include "mtlse/cli/grid.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "mtlse/cli/runner.hpp"
#include "mtlse/errors.hpp"

namespace mtlse::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Section {
  std::string title;
  std::string where;
};

std::string cell(const std::optional<double>& v) { return v ? eval::format_number(*v) : std::string(); }

}  // namespace

Grid parse_grid(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
  std::vector<std::string> lines;
  std::vector<int> owner;  // -1 for the shared block, else section index
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    const std::string where = origin + ":" + std::to_string(lines.size() + 1);
    if (!t.empty() && t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ConfigError(where + ": malformed section header");
      sections.push_back({trim(t.substr(1, t.size() - 2)), where});
      line.clear();
    }
    lines.push_back(line);
    owner.push_back(static_cast<int>(sections.size()) - 1);
  }
  // Each block keeps the file's line numbering; other blocks' lines are blank.
  auto block_text = [&](int block) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) out += (owner[i] == block ? lines[i] : std::string()) + "\n";
    return out;
  };
  const std::string shared = block_text(-1);
  if (sections.empty()) throw ConfigError(origin + ": grid has no [method] sections");

  const auto shared_entries = training::parse_entries(shared, origin);
  Grid g;
  for (const auto& e : shared_entries) {
    if (e.key == "name") g.name = e.value;
  }
  std::set<std::string> names;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const Section& s = sections[k];
    auto entries = shared_entries;
    std::erase_if(entries, [](const training::ConfigEntry& e) { return e.key == "name"; });
    entries.push_back({"name", s.title, s.where});
    for (const auto& e : training::parse_entries(block_text(static_cast<int>(k)), origin)) {
      if (e.key == "dataset" || e.key == "seeds") {
        throw ConfigError(e.where + ": " + e.key + ": must be set in the shared part of the grid");
      }
      entries.push_back(e);
    }
    auto cfg = training::build_experiment_config(entries, s.where, base_dir);
    if (!names.insert(cfg.name).second) throw ConfigError(s.where + ": duplicate method name '" + cfg.name + "'");
    g.members.push_back(std::move(cfg));
  }
  return g;
}

Grid load_grid(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": grid file not found");
  return parse_grid(read_text_file(path), path.string(), path.parent_path());
}

std::vector<std::string> grid_table_columns() {
  return {"method",
          "status",
          "n_seeds",
          "scene_micro_f_mean",
          "scene_micro_f_std",
          "scene_macro_f_mean",
          "scene_macro_f_std",
          "event_micro_f_mean",
          "event_micro_f_std",
          "event_macro_f_mean",
          "event_macro_f_std"};
}

std::string grid_table_csv(const std::vector<GridRow>& rows) {
  std::ostringstream out;
  const auto cols = grid_table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.status << ",";
    if (!r.report || r.report->seeds.empty()) {
      out << "0,,,,,,,,\n";
      continue;
    }
    const auto mean = r.report->mean();
    const auto sd = r.report->stddev();
    out << r.report->seeds.size() << "," << cell(mean.scene_micro_f) << "," << cell(sd.scene_micro_f) << ","
        << cell(mean.scene_macro_f) << "," << cell(sd.scene_macro_f) << "," << cell(mean.event_micro_f) << ","
        << cell(sd.event_micro_f) << "," << cell(mean.event_macro_f) << "," << cell(sd.event_macro_f) << "\n";
  }
  return out.str();
}

std::string per_event_csv(const std::vector<GridRow>& rows) {
  std::vector<const GridRow*> cols;
  std::vector<std::string> events;
  for (const auto& r : rows) {
    if (!r.report || r.report->seeds.empty() || !r.report->mean().event_micro_f) continue;
    cols.push_back(&r);
    if (events.empty()) events = r.report->event_names;
  }
  std::vector<std::vector<double>> means;
  for (const auto* r : cols) means.push_back(r->report->mean().per_event_f);

  std::ostringstream out;
  out << "event";
  for (const auto* r : cols) out << "," << r->method;
  out << "\n";
  for (std::size_t k = 0; k < events.size(); ++k) {
    out << events[k];
    for (const auto& m : means) out << "," << (k < m.size() ? eval::format_number(m[k]) : std::string());
    out << "\n";
  }
  out << "macro";
  for (const auto& m : means) {
    double sum = 0.0;
    for (double v : m) sum += v;
    out << "," << eval::format_number(m.empty() ? 0.0 : sum / static_cast<double>(m.size()));
  }
  out << "\n";
  return out.str();
}

std::vector<std::string> confusion_methods(const Grid& g) {
  using model::GrlPosition;
  using model::Variant;
  using training::FakeLabels;
  const std::vector<std::function<bool(const training::ExperimentConfig&)>> roles{
      [](const auto& c) { return c.network.variant == Variant::SceneOnly && c.fake_labels == FakeLabels::None; },
      [](const auto& c) {
        return c.network.variant == Variant::Mtl && c.network.grl.position == GrlPosition::None &&
               c.fake_labels == FakeLabels::None;
      },
      [](const auto& c) { return c.network.grl.position == GrlPosition::E1; },
      [](const auto& c) { return c.fake_labels == FakeLabels::Event && c.network.variant == Variant::Mtl; },
  };
  std::vector<std::string> out;
  for (const auto& role : roles) {
    for (const auto& m : g.members) {
      if (role(m)) {
        out.push_back(m.name);
        break;
      }
    }
  }
  return out;
}

GridResult run_grid(const Grid& g, const std::filesystem::path& out_dir, std::size_t workers, std::ostream* log) {
  std::filesystem::create_directories(out_dir);
  GridResult result{out_dir, std::vector<GridRow>(g.members.size())};
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < g.members.size(); i = next++) {
      const auto& cfg = g.members[i];
      GridRow& row = result.rows[i];
      row.method = cfg.name;
      try {
        auto r = run_experiment(cfg, out_dir / cfg.name, 1, nullptr);
        row.report = std::move(r.report);
        if (!row.report->failures.empty()) {
          row.status = "failed: " + std::to_string(row.report->failures.size()) + " seed(s) diverged";
        }
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
        std::replace(row.status.begin(), row.status.end(), ',', ';');
        std::replace(row.status.begin(), row.status.end(), '\n', ' ');
      }
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << cfg.name << ": " << row.status << "\n";
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(g.members.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_text_file(out_dir / "table.csv", grid_table_csv(result.rows));
  write_text_file(out_dir / "per_event.csv", per_event_csv(result.rows));
  std::vector<std::string> confusion_files;
  for (const auto& name : confusion_methods(g)) {
    for (const auto& row : result.rows) {
      if (row.method != name || !row.report) continue;
      const auto mean = row.report->mean();
      if (!mean.confusion) continue;
      const std::string file = "confusion_" + name + ".csv";
      write_text_file(out_dir / file, eval::confusion_csv(*mean.confusion, row.report->scene_names));
      confusion_files.push_back(file);
    }
  }

  nlohmann::ordered_json m;
  m["name"] = g.name;
  auto members = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) members.push_back({{"method", row.method}, {"dir", row.method}, {"status", row.status}});
  m["members"] = members;
  m["files"] = {"table.csv", "per_event.csv"};
  for (const auto& f : confusion_files) m["files"].push_back(f);
  write_text_file(out_dir / "manifest.json", m.dump(2) + "\n");
  return result;
}

}  // namespace mtlse::cli
