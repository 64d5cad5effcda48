#include "mtlse/training/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "mtlse/errors.hpp"
#include "mtlse/training/fake_labels.hpp"

namespace mtlse::training {

model::NetworkConfig network_config_for(const ExperimentConfig& cfg, const Dataset& d) {
  model::NetworkConfig net = cfg.network;
  net.n_scenes = d.n_scenes();
  net.n_events = d.n_events();
  net.geometry.frames = d.frames();
  net.geometry.bins = d.bins();
  return net;
}

namespace {

Dataset with_fake_labels(const ExperimentConfig& cfg, const Dataset& train, nn::Rng& rng) {
  switch (cfg.fake_labels) {
    case FakeLabels::Scene: return fake_scene_labels(train, rng);
    case FakeLabels::Event: return fake_event_labels(train, rng);
    case FakeLabels::None: break;
  }
  return train;
}

}  // namespace

SeedRun train_seed(const ExperimentConfig& cfg, const Dataset& train, std::uint64_t seed,
                   const EpochCallback& on_epoch) {
  validate(cfg);
  validate(train);
  if (train.clips.size() < 2) throw InputError("training needs at least two clips");

  nn::Rng rng(seed);
  model::Network net = model::Network::build(network_config_for(cfg, train), rng());
  nn::RAdamOptions opt;
  opt.learning_rate = cfg.learning_rate;
  nn::RAdam optimizer(opt);

  const bool faking = cfg.fake_labels != FakeLabels::None;
  Dataset targets = faking ? with_fake_labels(cfg, train, rng) : Dataset{};
  const Dataset& data = faking ? targets : train;

  std::vector<std::size_t> order(train.clips.size());
  std::iota(order.begin(), order.end(), 0);

  SeedRun run;
  run.seed = seed;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (faking && cfg.fake_resample && epoch > 1) targets = with_fake_labels(cfg, train, rng);
    std::shuffle(order.begin(), order.end(), rng);
    EpochLoss loss{epoch, 0.0, 0.0, 0.0};
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      if (end - start < 2) continue;
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      model::Targets t;
      if (net.has_scene_branch()) t.scene = batch_scene_targets(data, idx);
      if (net.has_event_branch()) t.event = batch_event_targets(data, idx);
      const auto step = model::train_step(net, batch_features(data, idx), t, optimizer);
      loss.total += step.total;
      loss.scene += step.scene;
      loss.event += step.event;
      ++batches;
    }
    const double n = static_cast<double>(std::max<std::size_t>(batches, 1));
    loss.total /= n;
    loss.scene /= n;
    loss.event /= n;
    run.curve.push_back(loss);
    if (on_epoch) on_epoch(seed, loss);
  }
  run.state = net.state();
  return run;
}

std::vector<SeedRun> run_training(const ExperimentConfig& cfg, const Dataset& train, const EpochCallback& on_epoch) {
  std::vector<SeedRun> runs;
  for (auto seed : cfg.seeds) {
    try {
      runs.push_back(train_seed(cfg, train, seed, on_epoch));
    } catch (const NumericalError& e) {
      SeedRun failed;
      failed.seed = seed;
      failed.error = e.what();
      runs.push_back(std::move(failed));
    }
  }
  return runs;
}

model::Network restore_network(const ExperimentConfig& cfg, const Dataset& d, const std::vector<nn::NamedTensor>& state) {
  model::Network net = model::Network::build(network_config_for(cfg, d), 0);
  net.load_state(state);
  return net;
}

eval::MetricReport evaluate(model::Network& net, const Dataset& test, double event_threshold, std::size_t batch_size) {
  if (test.clips.empty()) throw InputError("evaluation set is empty");
  validate(test);
  const std::size_t t = test.frames(), m = test.n_events();
  std::vector<std::size_t> pred_scene, ref_scene;
  eval::ProbMatrix event_probs(net.has_event_branch() ? test.clips.size() * t : 0, m);
  eval::BinaryMatrix event_ref(event_probs.rows, m);

  for (std::size_t start = 0; start < test.clips.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(test.clips.size(), start + batch_size); ++i) idx.push_back(i);
    const auto p = net.predict(batch_features(test, idx));
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const auto& clip = test.clips[idx[b]];
      if (net.has_scene_branch()) {
        const double* row = p.scene_probs.data() + b * test.n_scenes();
        pred_scene.push_back(static_cast<std::size_t>(std::max_element(row, row + test.n_scenes()) - row));
        ref_scene.push_back(clip.scene_index());
      }
      if (net.has_event_branch()) {
        const std::size_t base = idx[b] * t * m;
        std::copy_n(p.event_probs.data() + b * t * m, t * m, event_probs.values.begin() + static_cast<std::ptrdiff_t>(base));
        std::copy(clip.events.values.begin(), clip.events.values.end(),
                  event_ref.values.begin() + static_cast<std::ptrdiff_t>(base));
      }
    }
  }

  eval::MetricReport r;
  if (net.has_scene_branch()) {
    const auto s = eval::scene_fscores(pred_scene, ref_scene, test.n_scenes());
    r.scene_micro_f = s.micro_f;
    r.scene_macro_f = s.macro_f;
    r.per_scene_f = s.per_class_f;
    r.confusion = eval::confusion_recall(pred_scene, ref_scene, test.n_scenes());
  }
  if (net.has_event_branch()) {
    const auto e = eval::event_fscores(eval::binarize_events(event_probs, event_threshold), event_ref);
    r.event_micro_f = e.micro_f;
    r.event_macro_f = e.macro_f;
    r.per_event_f = e.per_class_f;
  }
  return r;
}

}  // namespace mtlse::training
