#pragma once

#include <string>
#include <vector>

#include "dicg/autodiff.hpp"
#include "dicg/params.hpp"
#include "dicg/rng.hpp"

namespace dicg {

// Fully connected stack with tanh hidden activations. Parameters are
// registered under "<prefix>.L<i>.W" / "<prefix>.L<i>.b"; W is stored
// in x out so a forward layer is x W + b.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, int in_dim, std::vector<int> hidden, int out_dim,
      bool final_tanh = false);

  void register_params(ParameterStore& store) const;
  // Xavier-uniform weights, zero biases; consumes the stream in layer order.
  void init_params(ParameterStore& store, RngStream& rng) const;

  // x: rows x in_dim -> rows x out_dim.
  Tensor forward(Tape& tape, const ParameterStore& store, Tensor x) const;

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string prefix_;
  int in_dim_ = 0;
  int out_dim_ = 0;
  std::vector<int> widths_;  // in, hidden..., out
  bool final_tanh_ = false;
};

// Shared helper: init every parameter of a store in name order. Names ending
// in ".b" get zeros, everything else Xavier-uniform.
void init_store(ParameterStore& store, RngStream& rng);

}  // namespace dicg
