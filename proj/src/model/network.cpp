#include "mtlse/model/network.hpp"

#include <cmath>
#include <json.hpp>
#include <map>

#include "mtlse/errors.hpp"
#include "mtlse/nn/gru.hpp"
#include "mtlse/nn/layers.hpp"
#include "mtlse/nn/losses.hpp"

namespace mtlse::model {

using nn::Mode;

namespace {

void add_conv_block(nn::Sequential& seq, const std::string& suffix, std::size_t in, std::size_t out, double slope) {
  seq.push_back("conv" + suffix, std::make_unique<nn::Conv2d>(in, out));
  seq.push_back("bn" + suffix, std::make_unique<nn::BatchNorm2d>(out));
  seq.push_back("act" + suffix, std::make_unique<nn::LeakyRelu>(slope));
}

Tensor run_traced(nn::Sequential& seq, const std::string& prefix, const Tensor& x, Mode mode,
                  std::vector<TraceEntry>& trace) {
  Tensor h = x;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    h = seq.at(i).forward(h, mode);
    trace.push_back({prefix + "." + seq.name(i), h.shape()});
  }
  return h;
}

}  // namespace

Network Network::build(const NetworkConfig& config, std::uint64_t seed) {
  validate(config);
  Network net(config);
  const Geometry& g = config.geometry;

  const auto& pools = g.trunk_freq_pools;
  for (std::size_t b = 0; b < pools.size(); ++b) {
    const std::string suffix = std::to_string(b + 1);
    add_conv_block(net.trunk_, suffix, b == 0 ? 1 : g.trunk_channels, g.trunk_channels, g.leaky_slope);
    net.trunk_.push_back("pool" + suffix, std::make_unique<nn::MaxPool2d>(1, pools[b]));
  }

  if (net.has_scene_branch()) {
    add_conv_block(net.scene_, "1", g.trunk_channels, g.scene_channels, g.leaky_slope);
    net.scene_.push_back("pool1", std::make_unique<nn::MaxPool2d>(g.scene_time_pool, 1));
    add_conv_block(net.scene_, "2", g.scene_channels, g.scene_channels, g.leaky_slope);
    net.scene_.push_back("global_pool", std::make_unique<nn::GlobalMaxPool>());
    net.scene_.push_back("fc1", std::make_unique<nn::Linear>(g.scene_channels, g.fc_units));
    net.scene_.push_back("fc1_act", std::make_unique<nn::LeakyRelu>(g.leaky_slope));
    net.scene_.push_back("fc_out", std::make_unique<nn::Linear>(g.fc_units, config.n_scenes));
  }

  if (net.has_event_branch()) {
    net.event_.push_back("flatten", std::make_unique<nn::FrameFlatten>());
    net.event_.push_back("bigru", std::make_unique<nn::BiGru>(g.trunk_channels * g.trunk_out_bins(), g.gru_units));
    net.event_.push_back("fc1", std::make_unique<nn::Linear>(2 * g.gru_units, g.fc_units));
    net.event_.push_back("fc1_act", std::make_unique<nn::LeakyRelu>(g.leaky_slope));
    net.event_.push_back("fc_out", std::make_unique<nn::Linear>(g.fc_units, config.n_events));
  }

  nn::Rng rng(seed);
  net.trunk_.initialize(rng);
  net.scene_.initialize(rng);
  net.event_.initialize(rng);

  if (config.grl.position != GrlPosition::None) {
    const GrlConfig grl = config.grl;
    net.config_.grl = {};
    net.insert_grl(grl.position, grl.lambda);
  }
  return net;
}

void Network::insert_grl(GrlPosition position, double lambda) {
  if (config_.variant != Variant::Mtl) throw ConfigError("GRL insertion requires the mtl variant");
  if (has_grl_) throw ConfigError("network already has a GRL");
  auto layer = std::make_unique<nn::GradientReversal>(lambda);
  switch (position) {
    case GrlPosition::S1: scene_.insert(0, "grl", std::move(layer)); break;
    case GrlPosition::S2: {
      std::size_t i = 0;
      while (i < scene_.size() && scene_.name(i) != "fc1") ++i;
      scene_.insert(i, "grl", std::move(layer));
      break;
    }
    case GrlPosition::E1: event_.insert(1, "grl", std::move(layer)); break;
    case GrlPosition::E2: {
      std::size_t i = 0;
      while (i < event_.size() && event_.name(i) != "fc1") ++i;
      event_.insert(i, "grl", std::move(layer));
      break;
    }
    case GrlPosition::None: throw ConfigError("insert_grl needs a position");
  }
  has_grl_ = true;
  config_.grl = {position, lambda};
}

void Network::check_input(const Shape& s) const {
  const Geometry& g = config_.geometry;
  if (s.size() != 4 || s[0] == 0 || s[1] != 1) {
    throw ShapeError("network input must be N x 1 x T x F, got " + shape_string(s));
  }
  std::size_t f = s[3];
  for (std::size_t p : g.trunk_freq_pools) {
    if (f % p != 0 || f < p) {
      throw ShapeError("input width " + std::to_string(s[3]) + " incompatible with trunk pooling factors");
    }
    f /= p;
  }
  if (has_scene_branch() && (s[2] % g.scene_time_pool != 0 || s[2] < g.scene_time_pool)) {
    throw ShapeError("input length " + std::to_string(s[2]) + " not divisible by scene time pool " +
                     std::to_string(g.scene_time_pool));
  }
}

Logits Network::forward(const Tensor& x, Mode mode) {
  check_input(x.shape());
  trace_.clear();
  trace_.push_back({"input", x.shape()});
  const Tensor shared = run_traced(trunk_, "trunk", x, mode, trace_);
  Logits out;
  if (has_scene_branch()) out.scene = run_traced(scene_, "scene", shared, mode, trace_);
  if (has_event_branch()) out.event = run_traced(event_, "event", shared, mode, trace_);
  return out;
}

Predictions Network::predict(const Tensor& x) {
  const Logits l = forward(x, Mode::Eval);
  Predictions p;
  if (!l.scene.empty()) p.scene_probs = nn::softmax(l.scene);
  if (!l.event.empty()) p.event_probs = nn::sigmoid(l.event);
  return p;
}

void Network::backward(const Tensor& d_scene_logits, const Tensor& d_event_logits) {
  Tensor d_shared;
  auto accumulate = [&d_shared](Tensor g) {
    if (d_shared.empty()) {
      d_shared = std::move(g);
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) d_shared[i] += g[i];
    }
  };
  if (has_scene_branch() && !d_scene_logits.empty()) accumulate(scene_.backward(d_scene_logits));
  if (has_event_branch() && !d_event_logits.empty()) accumulate(event_.backward(d_event_logits));
  if (!d_shared.empty()) trunk_.backward(d_shared);
}

void Network::zero_grad() {
  for (auto& p : parameters()) p.param->grad.fill(0.0);
}

std::vector<ParamRef> Network::parameters() {
  auto out = trunk_.parameters("trunk");
  for (auto& p : scene_.parameters("scene")) out.push_back(p);
  for (auto& p : event_.parameters("event")) out.push_back(p);
  return out;
}

std::vector<BufferRef> Network::buffers() {
  auto out = trunk_.buffers("trunk");
  for (auto& b : scene_.buffers("scene")) out.push_back(b);
  for (auto& b : event_.buffers("event")) out.push_back(b);
  return out;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.param->value.size();
  return n;
}

std::vector<nn::NamedTensor> Network::state() {
  std::vector<nn::NamedTensor> out;
  for (const auto& p : parameters()) out.push_back({p.name, p.param->value});
  for (const auto& b : buffers()) out.push_back({b.name, *b.tensor});
  return out;
}

void Network::load_state(const std::vector<nn::NamedTensor>& entries) {
  std::map<std::string, Tensor*> slots;
  for (auto& p : parameters()) slots[p.name] = &p.param->value;
  for (auto& b : buffers()) slots[b.name] = b.tensor;
  if (entries.size() != slots.size()) {
    throw FormatError("checkpoint has " + std::to_string(entries.size()) + " entries, network expects " +
                      std::to_string(slots.size()));
  }
  for (const auto& e : entries) {
    auto it = slots.find(e.name);
    if (it == slots.end()) throw FormatError("checkpoint entry '" + e.name + "' not in this network");
    if (it->second->shape() != e.tensor.shape()) {
      throw FormatError("checkpoint entry '" + e.name + "' has shape " + shape_string(e.tensor.shape()) +
                        ", expected " + shape_string(it->second->shape()));
    }
    *it->second = e.tensor;
  }
}

std::string Network::manifest() const {
  nlohmann::ordered_json j;
  const Geometry& g = config_.geometry;
  j["variant"] = to_string(config_.variant);
  j["n_scenes"] = config_.n_scenes;
  j["n_events"] = config_.n_events;
  j["grl_position"] = to_string(config_.grl.position);
  j["grl_lambda"] = config_.grl.lambda;
  j["alpha"] = config_.loss_weights.alpha;
  j["beta"] = config_.loss_weights.beta;
  j["geometry"] = {{"frames", g.frames},
                   {"bins", g.bins},
                   {"trunk_channels", g.trunk_channels},
                   {"scene_channels", g.scene_channels},
                   {"trunk_freq_pools", g.trunk_freq_pools},
                   {"scene_time_pool", g.scene_time_pool},
                   {"gru_units", g.gru_units},
                   {"fc_units", g.fc_units},
                   {"leaky_slope", g.leaky_slope}};
  auto layers = nlohmann::ordered_json::array();
  auto dump = [&layers](const nn::Sequential& seq, const std::string& branch) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      layers.push_back({{"name", branch + "." + seq.name(i)}, {"layer", seq.at(i).describe()}});
    }
  };
  dump(trunk_, "trunk");
  dump(scene_, "scene");
  dump(event_, "event");
  j["layers"] = layers;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

struct HeadLosses {
  StepLosses losses;
  nn::LossGrad scene;
  nn::LossGrad event;
};

HeadLosses head_losses(Network& net, const Tensor& x, const Targets& targets, Mode mode) {
  const Logits logits = net.forward(x, mode);
  HeadLosses h;
  const auto& w = net.config().loss_weights;
  const bool mtl = net.config().variant == Variant::Mtl;
  if (net.has_scene_branch()) {
    h.scene = nn::softmax_cross_entropy(logits.scene, targets.scene);
    h.losses.scene = h.scene.loss;
  }
  if (net.has_event_branch()) {
    h.event = nn::sigmoid_binary_cross_entropy(logits.event, targets.event);
    h.losses.event = h.event.loss;
  }
  if (mtl) {
    h.losses.total = nn::mtl_loss(h.losses.scene, h.losses.event, w);
    for (double& v : h.scene.grad.values()) v *= w.alpha;
    for (double& v : h.event.grad.values()) v *= w.beta;
  } else {
    h.losses.total = net.has_scene_branch() ? h.losses.scene : h.losses.event;
  }
  return h;
}

}  // namespace

StepLosses compute_loss(Network& net, const Tensor& x, const Targets& targets, Mode mode) {
  return head_losses(net, x, targets, mode).losses;
}

StepLosses loss_and_gradient(Network& net, const Tensor& x, const Targets& targets) {
  HeadLosses h = head_losses(net, x, targets, Mode::Train);
  if (!std::isfinite(h.losses.total)) throw NumericalError("non-finite training loss");
  net.zero_grad();
  net.backward(h.scene.grad, h.event.grad);
  return h.losses;
}

StepLosses train_step(Network& net, const Tensor& x, const Targets& targets, nn::RAdam& optimizer) {
  const StepLosses losses = loss_and_gradient(net, x, targets);
  const auto params = net.parameters();
  optimizer.step(params);
  return losses;
}

}  // namespace mtlse::model
