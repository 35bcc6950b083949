#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dicg/dicg_net.hpp"
#include "dicg/worlds/world.hpp"

namespace dicg {

// Architecture selection and network widths for one run.
struct AlgoSpec {
  std::string kind;  // dicg_ce | dicg_de | dicg_de_uniform | amlp_de | dec | cent
  std::vector<int> encoder_widths{128};
  int embed_dim = 64;
  int gcn_layers = 2;
  std::vector<int> policy_widths{128, 64, 32};
  std::vector<int> critic_widths{64, 64, 32};
  bool per_agent_baseline = false;
};

struct WorldDims {
  int n_slots = 0;
  int obs_dim = 0;
  int n_actions = 0;
  int noop_action = 0;
};
WorldDims world_dims(const World& w);

// Minibatch of timesteps stacked into (steps * n_slots)-row matrices.
struct StackedBatch {
  int n_slots = 0;
  int steps = 0;
  std::shared_ptr<Matrix> obs;             // (steps*n) x obs_dim
  std::shared_ptr<const Matrix> alive_col; // (steps*n) x 1
  std::vector<int> actions;                // steps*n (noop at non-live rows)
  Matrix old_logp;                         // (steps*n) x 1
  Matrix adv;                              // (steps*n) x 1, live-masked team advantage
  Matrix returns;                          // steps x 1
  double alive_total = 0.0;
};

struct BatchEval {
  Tensor logp;     // (steps*n) x 1
  Tensor entropy;  // (steps*n) x 1
  Tensor value;    // steps x 1 (or (steps*n) x 1 with per-agent baselines)
  bool per_agent_value = false;
};

struct ActOut {
  std::vector<int> actions;
  std::vector<double> logp;  // 0 at non-live slots
  double value = 0.0;        // critic estimate for the current state
};

// One trainable architecture: how to act during rollouts and how to
// re-evaluate a stacked batch during optimization. Forward passes are pure
// given a parameter snapshot; act/state_value may run concurrently from
// rollout workers while updates are serialized on the learner.
class Algorithm {
 public:
  virtual ~Algorithm() = default;
  virtual std::string kind() const = 0;

  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const WorldDims& dims() const { return dims_; }

  virtual ActOut act(const Matrix& obs, const std::vector<uint8_t>& alive, RngStream& rng,
                     bool greedy) const = 0;
  virtual double state_value(const Matrix& obs, const std::vector<uint8_t>& alive) const = 0;
  virtual BatchEval evaluate_batch(Tape& tape, const StackedBatch& batch) const = 0;

  // Probe hooks; return false when the architecture has no such module.
  virtual bool attention_matrix(const Matrix& obs, const std::vector<uint8_t>& alive,
                                Matrix* adjacency) const {
    (void)obs, (void)alive, (void)adjacency;
    return false;
  }
  virtual bool embedding_matrices(const Matrix& obs, const std::vector<uint8_t>& alive,
                                  Matrix* e0, Matrix* etilde) const {
    (void)obs, (void)alive, (void)e0, (void)etilde;
    return false;
  }

 protected:
  explicit Algorithm(WorldDims dims) : dims_(dims) {}
  WorldDims dims_;
  ParameterStore params_;
};

// Constructs and seeds the requested architecture.
std::unique_ptr<Algorithm> make_algorithm(const AlgoSpec& spec, const WorldDims& dims,
                                          uint64_t init_seed);

const std::vector<std::string>& algorithm_kinds();

// Per-step uniform adjacency (the DICG-DE-uniform ablation entry point).
// Errors when no agent is live.
Matrix uniform_adjacency(const std::vector<uint8_t>& alive);

}  // namespace dicg
