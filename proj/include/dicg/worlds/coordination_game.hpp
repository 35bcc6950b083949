#pragma once

#include "dicg/worlds/world.hpp"

namespace dicg {

struct CoordinationGameConfig {
  int n_agents = 2;
  int n_actions = 2;
};

// Single-step sanity game: the team earns reward 1 exactly when every agent
// picks action 0, otherwise 0. The optimum is known by enumeration, which
// makes this the smallest end-to-end check that an algorithm can learn a
// coordinated joint action. Observations are the agent's one-hot slot id.
class CoordinationGameWorld final : public World {
 public:
  explicit CoordinationGameWorld(CoordinationGameConfig cfg);

  std::string name() const override { return "coordination"; }
  int n_slots() const override { return cfg_.n_agents; }
  int obs_dim() const override { return cfg_.n_agents; }
  int action_count() const override { return cfg_.n_actions; }
  int max_steps() const override { return 1; }
  int step_count() const override { return step_; }

  WorldStep reset(uint64_t seed) override;
  WorldStep step(const std::vector<int>& actions) override;
  bool success() const override { return success_; }
  std::unique_ptr<World> clone_fresh() const override;

 private:
  Matrix observe() const;
  CoordinationGameConfig cfg_;
  int step_ = 0;
  bool done_ = false;
  bool success_ = false;
};

}  // namespace dicg
