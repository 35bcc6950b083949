#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "dicg/trainer.hpp"
#include "dicg/worlds/world.hpp"

namespace dicg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WorldConfig {
  std::string name = "predator_prey";  // predator_prey | traffic_junction | coordination

  // predator_prey
  int grid_size = 10;
  int n_predators = 8;
  int n_prey = 8;
  double penalty = 0.0;
  double capture_reward = 10.0;
  double step_cost = -0.1;
  int max_steps = 200;
  int view_radius = 2;
  std::string capture_range = "moore";  // moore | von_neumann
  double prey_stay_prob = 0.2;

  // traffic_junction
  std::string difficulty = "easy";  // easy | medium | hard
  double collision_penalty = -10.0;
  double congestion_coef = 0.01;

  // coordination
  int n_agents = 2;
  int n_actions = 2;
};

// One run: world + architecture + optimization settings. Key defaults follow
// the published experiment tables for the named (world, algo) pair; unknown
// keys are rejected with their path.
struct RunConfig {
  WorldConfig world;
  AlgoSpec algo;
  PpoConfig ppo;
  uint64_t seed = 1;
  int iterations = 10;
  std::string out_dir = "runs/out";
  int workers = 1;
  int eval_every = 10;
  int eval_episodes = 20;
  int checkpoint_every = 10;
  bool wallclock = false;
};

// Appendix-style defaults for a (world, algo) pair before file overrides.
RunConfig default_config(const std::string& world_name, const std::string& algo_kind,
                         const std::string& difficulty = "easy");

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config_file(const std::string& path);

// Canonical serialization; parse(serialize(c)) preserves all content.
std::string serialize_run_config(const RunConfig& cfg);

std::unique_ptr<World> make_world(const WorldConfig& cfg);

}  // namespace dicg
