#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mtlse/tensor.hpp"

namespace mtlse::nn {

enum class Mode { Train, Eval };

using Rng = std::mt19937_64;

/// One differentiable stage of a fixed-topology network.
///
/// forward() caches whatever backward() needs, so a layer instance serves one
/// forward/backward pair at a time. backward() accumulates parameter gradients
/// into Param::grad and returns the gradient with respect to the last input.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  /// Human-readable descriptor used in topology manifests.
  virtual std::string describe() const = 0;

  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;
  virtual Shape output_shape(const Shape& in) const = 0;

  virtual std::vector<ParamRef> parameters() { return {}; }
  virtual std::vector<BufferRef> buffers() { return {}; }
  virtual void initialize(Rng& /*rng*/) {}

  virtual std::unique_ptr<Layer> clone() const = 0;
};

/// Ordered chain of layers.
class Sequential {
 public:
  Sequential() = default;
  Sequential(const Sequential& other);
  Sequential& operator=(const Sequential& other);
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  void push_back(std::string name, std::unique_ptr<Layer> layer);
  void insert(std::size_t index, std::string name, std::unique_ptr<Layer> layer);
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Layer& at(std::size_t i) { return *layers_.at(i); }
  const Layer& at(std::size_t i) const { return *layers_.at(i); }

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy);

  /// Parameter names are `<prefix>.<layer name>.<param>`.
  std::vector<ParamRef> parameters(const std::string& prefix);
  std::vector<BufferRef> buffers(const std::string& prefix);
  void initialize(Rng& rng);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::string> names_;
};

}  // namespace mtlse::nn
