#include "mtlse/nn/layer.hpp"

namespace mtlse::nn {

Sequential::Sequential(const Sequential& other) : names_(other.names_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Sequential& Sequential::operator=(const Sequential& other) {
  if (this != &other) {
    Sequential copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Sequential::push_back(std::string name, std::unique_ptr<Layer> layer) {
  names_.push_back(std::move(name));
  layers_.push_back(std::move(layer));
}

void Sequential::insert(std::size_t index, std::string name, std::unique_ptr<Layer> layer) {
  names_.insert(names_.begin() + static_cast<std::ptrdiff_t>(index), std::move(name));
  layers_.insert(layers_.begin() + static_cast<std::ptrdiff_t>(index), std::move(layer));
}

Tensor Sequential::forward(const Tensor& x, Mode mode) {
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h, mode);
  return h;
}

Tensor Sequential::backward(const Tensor& dy) {
  Tensor g = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<ParamRef> Sequential::parameters(const std::string& prefix) {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& p : layers_[i]->parameters()) {
      out.push_back({prefix + "." + names_[i] + "." + p.name, p.param});
    }
  }
  return out;
}

std::vector<BufferRef> Sequential::buffers(const std::string& prefix) {
  std::vector<BufferRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& b : layers_[i]->buffers()) {
      out.push_back({prefix + "." + names_[i] + "." + b.name, b.tensor});
    }
  }
  return out;
}

void Sequential::initialize(Rng& rng) {
  for (auto& l : layers_) l->initialize(rng);
}

}  // namespace mtlse::nn
