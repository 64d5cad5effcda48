#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtlse/model/config.hpp"
#include "mtlse/nn/checkpoint.hpp"
#include "mtlse/nn/layer.hpp"
#include "mtlse/nn/radam.hpp"

namespace mtlse::model {

/// Raw head outputs. A tensor is empty when the variant lacks that branch.
struct Logits {
  Tensor scene;  // N x n_scenes
  Tensor event;  // N x T x n_events
};

struct Predictions {
  Tensor scene_probs;  // N x n_scenes, rows sum to 1
  Tensor event_probs;  // N x T x n_events, entries in (0, 1)
};

struct TraceEntry {
  std::string stage;
  Shape shape;
};

/// Shared conv trunk feeding a scene branch (conv blocks, global max pool,
/// FC stack, softmax) and an event branch (per-frame flatten, BiGRU, FC
/// stack, sigmoid). Single-task variants carry only one branch.
class Network {
 public:
  /// Builds and initializes the network (He-uniform weights from `seed`),
  /// inserting a GRL if the config names one.
  static Network build(const NetworkConfig& config, std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }
  bool has_scene_branch() const { return config_.variant != Variant::EventOnly; }
  bool has_event_branch() const { return config_.variant != Variant::SceneOnly; }

  /// Inserts one gradient reversal layer. Throws ConfigError for single-task
  /// variants or if a GRL is already present.
  void insert_grl(GrlPosition position, double lambda);

  /// x is N x 1 x T x F with T, F compatible with the pooling factors.
  Logits forward(const Tensor& x, nn::Mode mode);
  /// Eval-mode forward followed by softmax / sigmoid.
  Predictions predict(const Tensor& x);

  /// Accumulates parameter gradients. Pass an empty tensor for a branch that
  /// should contribute nothing.
  void backward(const Tensor& d_scene_logits, const Tensor& d_event_logits);
  void zero_grad();

  std::vector<ParamRef> parameters();
  std::vector<BufferRef> buffers();
  std::size_t parameter_count();

  /// Parameters plus batch-norm statistics, in a stable order.
  std::vector<nn::NamedTensor> state();
  /// Throws FormatError when names or shapes do not match this topology.
  void load_state(const std::vector<nn::NamedTensor>& entries);

  /// Shapes at every layer boundary of the most recent forward pass, one
  /// entry per layer (`<branch>.<layer>`), plus `input`.
  const std::vector<TraceEntry>& last_trace() const { return trace_; }

  /// Ordered layer descriptors and the config, as JSON text.
  std::string manifest() const;

  nn::Sequential& trunk() { return trunk_; }
  nn::Sequential& scene_branch() { return scene_; }
  nn::Sequential& event_branch() { return event_; }

 private:
  explicit Network(NetworkConfig config) : config_(std::move(config)) {}
  void check_input(const Shape& shape) const;

  NetworkConfig config_;
  nn::Sequential trunk_;
  nn::Sequential scene_;
  nn::Sequential event_;
  bool has_grl_ = false;
  std::vector<TraceEntry> trace_;
};

struct StepLosses {
  double total = 0.0;
  double scene = 0.0;
  double event = 0.0;
};

/// Batch targets: N x n_scenes one-hot and N x T x n_events binary. Targets
/// for an absent branch are ignored and may be empty.
struct Targets {
  Tensor scene;
  Tensor event;
};

/// Forward pass and losses without touching gradients. For the MTL variant
/// total = alpha * scene + beta * event; a single-task variant's total is
/// its own loss.
StepLosses compute_loss(Network& net, const Tensor& x, const Targets& targets, nn::Mode mode);

/// Train-mode forward, zeroed then freshly accumulated gradients of the
/// total loss. Throws NumericalError on a non-finite loss.
StepLosses loss_and_gradient(Network& net, const Tensor& x, const Targets& targets);

/// loss_and_gradient followed by one optimizer step.
StepLosses train_step(Network& net, const Tensor& x, const Targets& targets, nn::RAdam& optimizer);

}  // namespace mtlse::model
