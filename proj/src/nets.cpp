#include <stdexcept>

#include "dicg/nets.hpp"

namespace dicg {

Mlp::Mlp(std::string prefix, int in_dim, std::vector<int> hidden, int out_dim, bool final_tanh)
    : prefix_(std::move(prefix)), in_dim_(in_dim), out_dim_(out_dim), final_tanh_(final_tanh) {
  if (in_dim <= 0 || out_dim <= 0) throw std::invalid_argument("Mlp: dimensions must be positive");
  widths_.push_back(in_dim);
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("Mlp: hidden width must be positive");
    widths_.push_back(h);
  }
  widths_.push_back(out_dim);
}

void Mlp::register_params(ParameterStore& store) const {
  for (size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::string base = prefix_ + ".L" + std::to_string(l);
    store.create(base + ".W", widths_[l], widths_[l + 1]);
    store.create(base + ".b", 1, widths_[l + 1]);
  }
}

void Mlp::init_params(ParameterStore& store, RngStream& rng) const {
  for (size_t l = 0; l + 1 < widths_.size(); ++l)
    store.init_uniform_xavier(prefix_ + ".L" + std::to_string(l) + ".W", rng);
}

Tensor Mlp::forward(Tape& tape, const ParameterStore& store, Tensor x) const {
  if (x.cols() != in_dim_)
    throw std::invalid_argument("Mlp '" + prefix_ + "': input is " + x.value().shape_str() +
                                ", expected cols " + std::to_string(in_dim_));
  Tensor h = x;
  const size_t layers = widths_.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const std::string base = prefix_ + ".L" + std::to_string(l);
    Tensor w = tape.param(store, base + ".W");
    Tensor b = tape.param(store, base + ".b");
    h = add_row_broadcast(matmul(h, w), b);
    if (l + 1 < layers || final_tanh_) h = tanh_map(h);
  }
  return h;
}

void init_store(ParameterStore& store, RngStream& rng) {
  for (const auto& name : store.names()) {
    if (name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0) continue;
    store.init_uniform_xavier(name, rng);
  }
}

}  // namespace dicg
