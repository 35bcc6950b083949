#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dicg/matrix.hpp"
#include "dicg/rng.hpp"

namespace dicg {

// Gradients keyed by parameter name. std::map keeps iteration order stable,
// which keeps optimizer updates deterministic.
using GradMap = std::map<std::string, Matrix>;

// Named parameter tensors plus per-parameter Adam state. Names are unique
// and shapes are fixed at creation. A store may be read concurrently by
// rollout workers; mutation (adam_step, load_values) is the learner's.
class ParameterStore {
 public:
  std::shared_ptr<Matrix> create(const std::string& name, int rows, int cols);
  std::shared_ptr<const Matrix> get(const std::string& name) const;
  std::shared_ptr<Matrix> get_mutable(const std::string& name);
  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  std::vector<std::string> names() const;
  size_t count() const { return entries_.size(); }
  int64_t step_count(const std::string& name) const;

  // Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); rows are treated
  // as fan_in and cols as fan_out for W stored as in x out.
  void init_uniform_xavier(const std::string& name, RngStream& rng);

  // Adam with bias correction. Every gradient must match an existing
  // parameter's shape; parameters without a gradient are left untouched.
  void adam_step(const GradMap& grads, double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

  // Replace parameter values from a loaded checkpoint. The name set and all
  // shapes must match exactly; optimizer state is reset.
  void load_values(const std::map<std::string, Matrix>& values);
  std::map<std::string, Matrix> snapshot_values() const;

 private:
  struct Entry {
    std::shared_ptr<Matrix> value;
    Matrix m;  // first moment
    Matrix v;  // second moment
    int64_t step = 0;
  };
  std::map<std::string, Entry> entries_;
};

double global_grad_norm(const GradMap& grads);
// Scales all gradients by max_norm/norm when the global norm exceeds max_norm.
void clip_grad_norm(GradMap& grads, double max_norm);

}  // namespace dicg
