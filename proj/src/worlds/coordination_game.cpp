#include <stdexcept>

#include "dicg/worlds/coordination_game.hpp"

namespace dicg {

CoordinationGameWorld::CoordinationGameWorld(CoordinationGameConfig cfg) : cfg_(cfg) {
  if (cfg_.n_agents < 1 || cfg_.n_actions < 2)
    throw std::invalid_argument("coordination: need >= 1 agent and >= 2 actions");
}

Matrix CoordinationGameWorld::observe() const {
  Matrix obs(cfg_.n_agents, cfg_.n_agents);
  for (int i = 0; i < cfg_.n_agents; ++i) obs.at(i, i) = 1.0;
  return obs;
}

WorldStep CoordinationGameWorld::reset(uint64_t) {
  step_ = 0;
  done_ = false;
  success_ = false;
  WorldStep out;
  out.obs = observe();
  out.alive.assign(cfg_.n_agents, 1);
  return out;
}

WorldStep CoordinationGameWorld::step(const std::vector<int>& actions) {
  if (done_) throw std::logic_error("coordination: step after episode end");
  if (static_cast<int>(actions.size()) != cfg_.n_agents)
    throw std::invalid_argument("coordination: one action per agent required");
  bool all_zero = true;
  for (int a : actions) {
    if (a < 0 || a >= cfg_.n_actions)
      throw std::out_of_range("coordination: invalid action " + std::to_string(a));
    if (a != 0) all_zero = false;
  }
  step_ = 1;
  done_ = true;
  success_ = all_zero;
  WorldStep out;
  out.obs = observe();
  out.alive.assign(cfg_.n_agents, 1);
  out.reward = all_zero ? 1.0 : 0.0;
  out.done = true;
  if (all_zero) out.events.push_back({1, "coordinated", {}, 1.0});
  return out;
}

std::unique_ptr<World> CoordinationGameWorld::clone_fresh() const {
  return std::make_unique<CoordinationGameWorld>(cfg_);
}

}  // namespace dicg
