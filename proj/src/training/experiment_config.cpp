#include "mtlse/training/experiment_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mtlse/errors.hpp"
#include "mtlse/eval/report.hpp"

namespace mtlse::training {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail(const ConfigEntry& e, const std::string& msg) {
  throw ConfigError(e.where + ": " + e.key + ": " + msg);
}

double to_double(const ConfigEntry& e) {
  const std::string& v = e.value;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) fail(e, "expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const ConfigEntry& e, const std::string& text) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(e, "expected a non-negative integer, got '" + text + "'");
  }
  return out;
}

std::size_t to_positive(const ConfigEntry& e) {
  const auto v = to_uint(e, e.value);
  if (v == 0) fail(e, "must be positive");
  return static_cast<std::size_t>(v);
}

std::vector<std::uint64_t> to_uint_list(const ConfigEntry& e) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_uint(e, trim(item)));
  if (out.empty()) fail(e, "expected a comma-separated list");
  return out;
}

bool to_bool(const ConfigEntry& e) {
  const auto v = lower(e.value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(e, "expected true or false, got '" + e.value + "'");
}

template <class F>
auto wrap(const ConfigEntry& e, F&& f) {
  try {
    return f();
  } catch (const ConfigError& err) {
    fail(e, err.what());
  }
}

std::string join(const std::vector<std::uint64_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

}  // namespace

std::string to_string(FakeLabels f) {
  switch (f) {
    case FakeLabels::None: return "none";
    case FakeLabels::Scene: return "scene";
    case FakeLabels::Event: return "event";
  }
  return "?";
}

FakeLabels parse_fake_labels(const std::string& s) {
  const auto v = lower(s);
  if (v == "none" || v.empty()) return FakeLabels::None;
  if (v == "scene") return FakeLabels::Scene;
  if (v == "event") return FakeLabels::Event;
  throw ConfigError("unknown fake_labels mode '" + s + "' (expected none, scene or event)");
}

void validate(const ExperimentConfig& c) {
  if (c.fake_labels != FakeLabels::None && c.network.grl.position != model::GrlPosition::None) {
    throw ConfigError("fake_labels and grl_position cannot be combined in one run");
  }
  if (c.fake_labels == FakeLabels::Scene && c.network.variant == model::Variant::EventOnly) {
    throw ConfigError("fake scene labels need a scene branch");
  }
  if (c.fake_labels == FakeLabels::Event && c.network.variant == model::Variant::SceneOnly) {
    throw ConfigError("fake event labels need an event branch");
  }
  if (c.network.grl.lambda < 0.0) throw ConfigError("grl_lambda must be >= 0");
  nn::validate(c.network.loss_weights);
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (c.epochs == 0) throw ConfigError("epochs must be positive");
  if (c.batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (!(c.event_threshold > 0.0 && c.event_threshold < 1.0)) throw ConfigError("event_threshold must lie in (0, 1)");
  if (c.network.variant != model::Variant::Mtl && c.network.grl.position != model::GrlPosition::None) {
    throw ConfigError("single-task variants admit no GRL");
  }
}

std::vector<ConfigEntry> parse_entries(const std::string& text, const std::string& origin) {
  std::vector<ConfigEntry> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(n);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
    ConfigEntry e{lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)), where};
    if (e.key.empty()) throw ConfigError(where + ": missing key before '='");
    out.push_back(std::move(e));
  }
  return out;
}

ExperimentConfig build_experiment_config(const std::vector<ConfigEntry>& entries, const std::string& origin,
                                         const std::filesystem::path& base_dir) {
  std::map<std::string, ConfigEntry> last;
  for (const auto& e : entries) last[e.key] = e;

  ExperimentConfig c;
  auto& net = c.network;
  if (auto it = last.find("geometry"); it != last.end()) {
    const auto v = lower(it->second.value);
    if (v == "fast") net.geometry = model::fast_geometry();
    else if (v != "default") fail(it->second, "expected default or fast, got '" + it->second.value + "'");
  }

  bool have_dataset = false;
  for (const auto& [key, e] : last) {
    if (key == "geometry") continue;
    if (key == "name") c.name = e.value;
    else if (key == "variant") net.variant = wrap(e, [&] { return model::parse_variant(e.value); });
    else if (key == "grl_position") net.grl.position = wrap(e, [&] { return model::parse_grl_position(e.value); });
    else if (key == "grl_lambda") net.grl.lambda = to_double(e);
    else if (key == "fake_labels") c.fake_labels = wrap(e, [&] { return parse_fake_labels(e.value); });
    else if (key == "fake_resample") c.fake_resample = to_bool(e);
    else if (key == "alpha") net.loss_weights.alpha = to_double(e);
    else if (key == "beta") net.loss_weights.beta = to_double(e);
    else if (key == "seeds") c.seeds = to_uint_list(e);
    else if (key == "epochs") c.epochs = to_positive(e);
    else if (key == "batch_size") c.batch_size = to_positive(e);
    else if (key == "learning_rate") c.learning_rate = to_double(e);
    else if (key == "test_fraction") c.test_fraction = to_double(e);
    else if (key == "event_threshold") c.event_threshold = to_double(e);
    else if (key == "trunk_channels") net.geometry.trunk_channels = to_positive(e);
    else if (key == "scene_channels") net.geometry.scene_channels = to_positive(e);
    else if (key == "scene_time_pool") net.geometry.scene_time_pool = to_positive(e);
    else if (key == "gru_units") net.geometry.gru_units = to_positive(e);
    else if (key == "fc_units") net.geometry.fc_units = to_positive(e);
    else if (key == "leaky_slope") net.geometry.leaky_slope = to_double(e);
    else if (key == "trunk_freq_pools") {
      net.geometry.trunk_freq_pools.clear();
      for (auto p : to_uint_list(e)) {
        if (p == 0) fail(e, "pooling factors must be positive");
        net.geometry.trunk_freq_pools.push_back(static_cast<std::size_t>(p));
      }
    } else if (key == "dataset") {
      if (e.value.empty()) fail(e, "must name a dataset directory");
      std::filesystem::path p(e.value);
      c.dataset = std::filesystem::absolute(p.is_absolute() || base_dir.empty() ? p : base_dir / p).lexically_normal();
      have_dataset = true;
    } else {
      fail(e, "unknown key");
    }
  }
  if (!have_dataset) throw ConfigError(origin + ": missing required key 'dataset'");

  try {
    validate(c);
  } catch (const ConfigError& err) {
    const std::string msg = err.what();
    for (const char* key : {"fake_labels", "grl_position", "grl_lambda", "batch_size", "learning_rate", "test_fraction",
                            "event_threshold", "alpha", "beta", "variant"}) {
      auto it = last.find(key);
      if (it != last.end() && msg.find(key) != std::string::npos) fail(it->second, msg);
    }
    throw ConfigError(origin + ": " + msg);
  }
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin,
                                         const std::filesystem::path& base_dir) {
  return build_experiment_config(parse_entries(text, origin), origin, base_dir);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.string(), path.parent_path());
}

std::string to_text(const ExperimentConfig& c) {
  const auto& g = c.network.geometry;
  std::ostringstream out;
  out << "name = " << c.name << "\n"
      << "variant = " << model::to_string(c.network.variant) << "\n"
      << "grl_position = " << model::to_string(c.network.grl.position) << "\n"
      << "grl_lambda = " << eval::format_number(c.network.grl.lambda) << "\n"
      << "fake_labels = " << to_string(c.fake_labels) << "\n"
      << "fake_resample = " << (c.fake_resample ? "true" : "false") << "\n"
      << "alpha = " << eval::format_number(c.network.loss_weights.alpha) << "\n"
      << "beta = " << eval::format_number(c.network.loss_weights.beta) << "\n"
      << "seeds = " << join(c.seeds) << "\n"
      << "epochs = " << c.epochs << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "learning_rate = " << eval::format_number(c.learning_rate) << "\n"
      << "dataset = " << c.dataset.string() << "\n"
      << "test_fraction = " << eval::format_number(c.test_fraction) << "\n"
      << "event_threshold = " << eval::format_number(c.event_threshold) << "\n"
      << "trunk_channels = " << g.trunk_channels << "\n"
      << "scene_channels = " << g.scene_channels << "\n"
      << "trunk_freq_pools = "
      << join(std::vector<std::uint64_t>(g.trunk_freq_pools.begin(), g.trunk_freq_pools.end())) << "\n"
      << "scene_time_pool = " << g.scene_time_pool << "\n"
      << "gru_units = " << g.gru_units << "\n"
      << "fc_units = " << g.fc_units << "\n"
      << "leaky_slope = " << eval::format_number(g.leaky_slope) << "\n";
  return out.str();
}

}  // namespace mtlse::training
