#include "mtlse/synth/dataset_io.hpp"

#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "mtlse/errors.hpp"
#include "mtlse/features/io.hpp"
#include "mtlse/synth/generator.hpp"

namespace mtlse::synth {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out << text;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name, const std::string& what,
                     std::size_t line) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw FormatError("labels.csv:" + std::to_string(line) + ": unknown " + what + " '" + name + "'");
}

std::size_t parse_frame(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError("labels.csv:" + std::to_string(line) + ": bad frame index '" + s + "'");
  }
}

}  // namespace

std::vector<Interval> roll_to_intervals(const eval::BinaryMatrix& roll) {
  std::vector<Interval> out;
  for (std::size_t m = 0; m < roll.cols; ++m) {
    std::size_t t = 0;
    while (t < roll.rows) {
      if (!roll.at(t, m)) {
        ++t;
        continue;
      }
      const std::size_t onset = t;
      while (t < roll.rows && roll.at(t, m)) ++t;
      out.push_back({m, onset, t});
    }
  }
  return out;
}

void write_dataset(const fs::path& dir, const training::Dataset& d, const SynthSpec* spec,
                   std::optional<std::uint64_t> seed) {
  training::validate(d);
  fs::create_directories(dir / "features");
  std::ostringstream labels;
  labels << "clip_id,scene_id,event_class,onset_frame,offset_frame\n";
  for (const auto& c : d.clips) {
    features::save_feature_file((dir / "features" / (c.id + ".lmel")).string(), c.features);
    const std::string& scene = d.scene_names[c.scene_index()];
    const auto intervals = roll_to_intervals(c.events);
    if (intervals.empty()) labels << c.id << "," << scene << ",,,\n";
    for (const auto& iv : intervals) {
      labels << c.id << "," << scene << "," << d.event_names[iv.event] << "," << iv.onset << "," << iv.offset << "\n";
    }
  }
  write_text(dir / "labels.csv", labels.str());

  nlohmann::ordered_json j;
  j["scene_names"] = d.scene_names;
  j["event_names"] = d.event_names;
  j["frames"] = d.frames();
  j["bins"] = d.bins();
  if (seed) j["seed"] = *seed;
  if (spec) j["generator"] = nlohmann::ordered_json::parse(spec_to_json(*spec));
  write_text(dir / "spec.json", j.dump(2) + "\n");
}

training::Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("dataset directory '" + dir.string() + "' does not exist");
  training::Dataset d;
  try {
    const auto j = nlohmann::json::parse(read_text(dir / "spec.json"));
    d.scene_names = j.at("scene_names").get<std::vector<std::string>>();
    d.event_names = j.at("event_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("spec.json: " + std::string(e.what()));
  }

  std::istringstream labels(read_text(dir / "labels.csv"));
  std::string line;
  std::getline(labels, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "clip_id,scene_id,event_class,onset_frame,offset_frame") {
    throw FormatError("labels.csv:1: unexpected header '" + line + "'");
  }
  std::map<std::string, std::size_t> by_id;
  for (std::size_t n = 2; std::getline(labels, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw FormatError("labels.csv:" + std::to_string(n) + ": expected 5 fields");
    const std::size_t scene = index_of(d.scene_names, cells[1], "scene", n);
    auto it = by_id.find(cells[0]);
    if (it == by_id.end()) {
      training::LabeledClip c;
      c.id = cells[0];
      c.features = features::load_feature_file((dir / "features" / (c.id + ".lmel")).string());
      c.scene = training::one_hot(scene, d.n_scenes());
      c.events = eval::BinaryMatrix(c.features.frames, d.n_events());
      it = by_id.emplace(c.id, d.clips.size()).first;
      d.clips.push_back(std::move(c));
    }
    auto& clip = d.clips[it->second];
    if (clip.scene_index() != scene) throw FormatError("labels.csv:" + std::to_string(n) + ": conflicting scene");
    if (cells[2].empty() && cells[3].empty() && cells[4].empty()) continue;
    const std::size_t event = index_of(d.event_names, cells[2], "event class", n);
    const std::size_t onset = parse_frame(cells[3], n), offset = parse_frame(cells[4], n);
    if (onset >= offset || offset > clip.events.rows) {
      throw FormatError("labels.csv:" + std::to_string(n) + ": interval outside the clip");
    }
    for (std::size_t t = onset; t < offset; ++t) clip.events.at(t, event) = 1;
  }
  training::validate(d);
  return d;
}

}  // namespace mtlse::synth
