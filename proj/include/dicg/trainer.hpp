#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dicg/algos.hpp"

namespace dicg {

struct PpoConfig {
  double clip = 0.2;
  double lr = 3e-4;
  double gamma = 0.99;
  double lambda = 0.97;  // GAE
  double entropy_coef = 0.1;
  double value_coef = 0.5;
  int epochs = 10;
  int minibatches = 4;
  long batch_size = 60000;  // environment steps per iteration
  double grad_clip = 10.0;  // global norm; <= 0 disables
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// On-policy rollout data. Steps from all episodes are concatenated; each
// step stores the pre-action observation stack and per-agent action data.
struct TrajectoryBatch {
  int n_slots = 0;
  int obs_dim = 0;
  int n_actions = 0;
  long steps = 0;

  Matrix obs;                   // (steps*n) x obs_dim
  std::vector<uint8_t> alive;   // steps*n
  std::vector<int> actions;     // steps*n
  std::vector<double> logp;     // steps*n, behavior-policy log-probabilities
  std::vector<double> rewards;  // steps, shared team reward
  std::vector<double> values;   // steps, critic estimate at collection time
  std::vector<uint8_t> terminal;   // episode ended at this step
  std::vector<uint8_t> truncated;  // batch cut here mid-episode
  std::vector<double> bootstrap;   // next-state value where truncated

  std::vector<double> episode_returns;  // completed episodes only
  std::vector<int> episode_lengths;
  std::vector<uint8_t> episode_success;
};

// Deterministic given (parameters, seed, workers): the batch is sharded into
// `workers` independently seeded world streams and concatenated in shard
// order. Episodes cut by a shard boundary are truncated with a bootstrap
// value from the critic.
TrajectoryBatch collect_rollouts(const Algorithm& algo, const World& prototype, long batch_steps,
                                 uint64_t seed, int workers = 1);

// GAE over one contiguous segment. terminals marks episode ends inside the
// segment; when the last step is not terminal, tail_bootstrap is used as the
// next-state value. Returned advantages are raw (not normalized); returns
// are advantages + values.
void gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                    const std::vector<uint8_t>& terminals, double tail_bootstrap, double gamma,
                    double lambda, std::vector<double>* advantages, std::vector<double>* returns);

struct PpoLossParts {
  Tensor loss;  // scalar
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
};
// Clipped-surrogate + entropy bonus + value regression on one stacked
// minibatch. Errors with diagnostics when probability ratios go non-finite.
PpoLossParts ppo_loss(Tape& tape, const Algorithm& algo, const StackedBatch& batch,
                      const PpoConfig& cfg);

struct IterationMetrics {
  int iteration = 0;
  long env_steps_total = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double wallclock_s = 0.0;
};

// One training iteration: collect a batch, estimate advantages, run the
// PPO epochs, and report batch statistics. env_steps_total is accumulated
// into *env_steps_total.
IterationMetrics train_iteration(Algorithm& algo, const World& prototype, const PpoConfig& cfg,
                                 int iteration, uint64_t run_seed, int workers,
                                 long* env_steps_total);

struct EvalMetrics {
  int episodes = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
  double mean_length = 0.0;
};
// Runs episodes without learning; greedy picks argmax actions. event_sink,
// when given, receives every world event (for episode audit logs).
using EventSink = std::function<void(int episode, const WorldEvent&)>;
EvalMetrics evaluate(const Algorithm& algo, const World& prototype, int episodes, uint64_t seed,
                     bool greedy, const EventSink& event_sink = nullptr);

struct RunOptions {
  int iterations = 1;
  uint64_t seed = 1;
  std::string out_dir;
  int workers = 1;
  int eval_every = 10;
  int eval_episodes = 20;
  int checkpoint_every = 10;
  bool wallclock = false;  // off: wallclock_s column is 0 so runs reproduce byte-exactly
  bool quiet = false;
};

// Full training run: writes metrics.csv, eval.csv, periodic checkpoints and
// ckpt_final.bin under out_dir.
void train_run(Algorithm& algo, const World& prototype, const PpoConfig& cfg,
               const RunOptions& opts);

}  // namespace dicg
