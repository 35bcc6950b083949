#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dicg/matrix.hpp"

namespace dicg {

// One auditable reward event (capture, penalty, collision, ...).
struct WorldEvent {
  int step = 0;
  std::string kind;
  std::vector<int> entities;
  double reward_delta = 0.0;
};

struct WorldStep {
  Matrix obs;                  // n_slots x obs_dim; non-live rows zero
  std::vector<uint8_t> alive;  // one flag per slot
  double reward = 0.0;         // shared team reward
  bool done = false;
  std::vector<WorldEvent> events;
  std::vector<std::string> warnings;
};

// A seeded, deterministic multi-agent environment. Instances are
// single-threaded and own their RNG stream; run many instances in parallel
// with disjoint seeds if needed.
class World {
 public:
  virtual ~World() = default;

  virtual std::string name() const = 0;
  virtual int n_slots() const = 0;
  virtual int obs_dim() const = 0;
  virtual int action_count() const = 0;
  virtual int max_steps() const = 0;

  virtual WorldStep reset(uint64_t seed) = 0;
  virtual WorldStep step(const std::vector<int>& actions) = 0;

  // Episode-level success flag; meaningful once done.
  virtual bool success() const = 0;

  // Action filled in for non-live slots (e.g. brake).
  virtual int noop_action() const { return 0; }

  // Fresh instance with the same configuration (unseeded).
  virtual std::unique_ptr<World> clone_fresh() const = 0;

  virtual int step_count() const = 0;
};

}  // namespace dicg
