#include "mtlse/synth/generator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "mtlse/errors.hpp"

namespace mtlse::synth {

namespace {

std::vector<double> bump(std::size_t bins, double center, double width, double gain) {
  std::vector<double> t(bins);
  for (std::size_t d = 0; d < bins; ++d) {
    const double z = (static_cast<double>(d) - center) / width;
    t[d] = gain * std::exp(-0.5 * z * z);
  }
  return t;
}

// Backgrounds for home, office, city center and residential area. The last
// two share their shape and differ only in the upper bands.
std::vector<std::vector<double>> backgrounds(std::size_t bins) {
  std::vector<std::vector<double>> bg(4, std::vector<double>(bins));
  for (std::size_t d = 0; d < bins; ++d) {
    const double x = bins > 1 ? static_cast<double>(d) / static_cast<double>(bins - 1) : 0.0;
    bg[0][d] = 0.8 - 1.6 * x;
    bg[1][d] = -0.6 + 1.2 * x;
    bg[2][d] = 0.3 + 0.4 * std::sin(2.0 * std::numbers::pi * x);
    bg[3][d] = bg[2][d] - (x > 0.5 ? 0.5 : 0.0);
  }
  return bg;
}

const std::vector<std::string> kSceneNames{"home", "office", "city_center", "residential_area"};

SynthSpec assemble(std::vector<std::string> events, std::vector<std::vector<double>> priors, std::size_t frames,
                   std::size_t bins, double width) {
  SynthSpec s;
  s.frames = frames;
  s.bins = bins;
  const std::size_t m = events.size();
  for (std::size_t e = 0; e < m; ++e) {
    const double center = (static_cast<double>(e) + 0.5) * static_cast<double>(bins) / static_cast<double>(m);
    s.event_templates.push_back(bump(bins, center, width, 3.0));
  }
  s.event_names = std::move(events);
  const auto bg = backgrounds(bins);
  for (std::size_t k = 0; k < kSceneNames.size(); ++k) s.scenes.push_back({kSceneNames[k], priors[k], bg[k]});
  return s;
}

}  // namespace

SynthSpec fast_profile() {
  std::vector<std::vector<double>> priors{
      {0.60, 0.30, 0.70, 0.40, 0.05, 0.05},
      {0.70, 0.50, 0.05, 0.60, 0.05, 0.05},
      {0.40, 0.60, 0.00, 0.10, 0.80, 0.15},
      {0.30, 0.50, 0.00, 0.20, 0.60, 0.50},
  };
  SynthSpec s = assemble({"speech", "footsteps", "dishes", "door", "car", "bird"}, priors, 100, 16, 1.2);
  s.clips_per_scene = 100;
  s.min_event_frames = 10;
  s.max_event_frames = 40;
  return s;
}

SynthSpec default_profile() {
  const std::vector<std::string> events{
      "speech", "footsteps", "dishes", "door", "cupboard", "keyboard", "phone", "drawer", "chair",
      "printer", "car", "brakes", "large_vehicle", "bus", "horn", "children", "people_walking",
      "bicycle", "siren", "construction", "bird", "dog", "wind", "lawn_mower", "church_bell"};
  // Indoor scenes draw mostly from the first ten classes; the two outdoor
  // scenes overlap heavily on the rest.
  auto row = [](std::size_t first, std::size_t last) {
    std::vector<double> p(25, 0.02);
    for (std::size_t e = first; e <= last; ++e) p[e] = 0.45;
    return p;
  };
  std::vector<std::vector<double>> priors{row(0, 5), row(3, 9), row(10, 19), row(14, 24)};
  SynthSpec s = assemble(events, priors, 500, 64, 2.0);
  s.clips_per_scene = 100;
  s.min_event_frames = 50;
  s.max_event_frames = 150;
  return s;
}

SynthSpec profile(const std::string& name) {
  if (name == "fast") return fast_profile();
  if (name == "default") return default_profile();
  throw SpecError("unknown profile '" + name + "' (expected default or fast)");
}

void validate(const SynthSpec& s) {
  const std::size_t m = s.event_names.size();
  if (s.scenes.size() < 2) throw SpecError("at least two scenes are required");
  if (m == 0) throw SpecError("at least one event class is required");
  if (s.event_templates.size() != m) throw SpecError("one event template per event class is required");
  if (s.frames == 0 || s.bins == 0) throw SpecError("frames and bins must be positive");
  if (s.clips_per_scene == 0) throw SpecError("clips_per_scene must be positive");
  if (s.min_event_frames == 0 || s.min_event_frames > s.max_event_frames || s.max_event_frames > s.frames) {
    throw SpecError("event durations must satisfy 1 <= min <= max <= frames");
  }
  if (!(s.noise_std >= 0.0) || !std::isfinite(s.noise_std)) throw SpecError("noise_std must be finite and >= 0");
  for (std::size_t e = 0; e < m; ++e) {
    const auto& t = s.event_templates[e];
    if (t.size() != s.bins) throw SpecError("template of '" + s.event_names[e] + "' must have one value per band");
    bool nonzero = false;
    for (double v : t) {
      if (!std::isfinite(v)) throw SpecError("template of '" + s.event_names[e] + "' is not finite");
      nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) throw SpecError("template of '" + s.event_names[e] + "' is zero in every band");
  }
  bool any_prior = false;
  bool backgrounds_differ = false;
  for (const auto& sc : s.scenes) {
    if (sc.event_priors.size() != m) throw SpecError("scene '" + sc.name + "' needs one prior per event class");
    if (sc.background.size() != s.bins) throw SpecError("scene '" + sc.name + "' needs one background level per band");
    for (double p : sc.event_priors) {
      if (!(p >= 0.0 && p <= 1.0)) throw SpecError("scene '" + sc.name + "' has a prior outside [0, 1]");
      any_prior = any_prior || p > 0.0;
    }
    for (double v : sc.background) {
      if (!std::isfinite(v)) throw SpecError("scene '" + sc.name + "' has a non-finite background");
    }
    backgrounds_differ = backgrounds_differ || sc.background != s.scenes.front().background;
  }
  if (!any_prior && !backgrounds_differ) {
    throw SpecError("degenerate spec: every prior is 0 and all backgrounds are identical");
  }
}

GeneratedClip generate_clip(const SynthSpec& s, std::size_t scene, std::size_t index, std::uint64_t seed) {
  const SceneSpec& sc = s.scenes.at(scene);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(scene), static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GeneratedClip g;
  auto& clip = g.clip;
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "_%04zu", index);
  clip.id = sc.name + suffix;
  clip.scene = training::one_hot(scene, s.scenes.size());
  clip.features.frames = s.frames;
  clip.features.bins = s.bins;
  clip.events = eval::BinaryMatrix(s.frames, s.event_names.size());

  std::vector<double> x(s.frames * s.bins);
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (std::size_t d = 0; d < s.bins; ++d) x[t * s.bins + d] = sc.background[d] + s.noise_std * noise(rng);
  }
  for (std::size_t e = 0; e < s.event_names.size(); ++e) {
    if (!(unit(rng) < sc.event_priors[e])) continue;
    std::uniform_int_distribution<std::size_t> length(s.min_event_frames, s.max_event_frames);
    const std::size_t len = length(rng);
    std::uniform_int_distribution<std::size_t> onset(0, s.frames - len);
    const std::size_t start = onset(rng);
    g.placements.push_back({e, start, start + len});
    for (std::size_t t = start; t < start + len; ++t) {
      clip.events.at(t, e) = 1;
      for (std::size_t d = 0; d < s.bins; ++d) x[t * s.bins + d] += s.event_templates[e][d];
    }
  }
  clip.features.values.assign(x.begin(), x.end());
  return g;
}

training::Dataset generate_dataset(const SynthSpec& s, std::uint64_t seed) {
  validate(s);
  training::Dataset d;
  d.event_names = s.event_names;
  for (const auto& sc : s.scenes) d.scene_names.push_back(sc.name);
  d.clips.reserve(s.scenes.size() * s.clips_per_scene);
  for (std::size_t k = 0; k < s.scenes.size(); ++k) {
    for (std::size_t i = 0; i < s.clips_per_scene; ++i) d.clips.push_back(generate_clip(s, k, i, seed).clip);
  }
  return d;
}

std::string spec_to_json(const SynthSpec& s) {
  nlohmann::ordered_json j;
  j["event_names"] = s.event_names;
  j["event_templates"] = s.event_templates;
  auto scenes = nlohmann::ordered_json::array();
  for (const auto& sc : s.scenes) {
    scenes.push_back({{"name", sc.name}, {"event_priors", sc.event_priors}, {"background", sc.background}});
  }
  j["scenes"] = scenes;
  j["clips_per_scene"] = s.clips_per_scene;
  j["frames"] = s.frames;
  j["bins"] = s.bins;
  j["noise_std"] = s.noise_std;
  j["min_event_frames"] = s.min_event_frames;
  j["max_event_frames"] = s.max_event_frames;
  return j.dump(2) + "\n";
}

SynthSpec spec_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& g = j.contains("generator") ? j.at("generator") : j;
    SynthSpec s;
    s.event_names = g.at("event_names").get<std::vector<std::string>>();
    s.event_templates = g.at("event_templates").get<std::vector<std::vector<double>>>();
    for (const auto& sc : g.at("scenes")) {
      s.scenes.push_back({sc.at("name").get<std::string>(), sc.at("event_priors").get<std::vector<double>>(),
                          sc.at("background").get<std::vector<double>>()});
    }
    s.clips_per_scene = g.value("clips_per_scene", s.clips_per_scene);
    s.frames = g.value("frames", s.frames);
    s.bins = g.value("bins", s.bins);
    s.noise_std = g.value("noise_std", s.noise_std);
    s.min_event_frames = g.value("min_event_frames", s.min_event_frames);
    s.max_event_frames = g.value("max_event_frames", s.max_event_frames);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed generator spec: ") + e.what());
  }
}

SynthSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

}  // namespace mtlse::synth
