#pragma once

#include "dicg/rng.hpp"
#include "dicg/worlds/world.hpp"

namespace dicg {

enum class CaptureRange { kMoore, kVonNeumann };

struct PredatorPreyConfig {
  int grid_size = 10;
  int n_predators = 8;
  int n_prey = 8;
  double penalty = 0.0;          // p <= 0, issued per solo capture attempt
  double capture_reward = 10.0;  // per captured prey
  double step_cost = -0.1;       // per team step
  int max_steps = 200;
  int view_radius = 2;           // field of view is (2r+1)^2
  CaptureRange capture_range = CaptureRange::kMoore;
  double prey_stay_prob = 0.2;

  void validate() const;
};

struct Cell {
  int r = 0;
  int c = 0;
  bool operator==(const Cell& o) const { return r == o.r && c == o.c; }
};

// Grid pursuit task. Predators are the agents; prey flee with a seeded
// randomized rule. A prey surrounded by two or more predators in capture
// range is removed for a team reward; a single predator in range draws the
// solo-attempt penalty. Actions: 0 up, 1 down, 2 left, 3 right, 4 stay.
//
// Observation row per predator: own (row, col) scaled to [0, 1], then a
// (2r+1)^2 binary predator-occupancy window and a (2r+1)^2 binary
// prey-occupancy window centred on the predator (row-major, off-grid = 0).
class PredatorPreyWorld final : public World {
 public:
  explicit PredatorPreyWorld(PredatorPreyConfig cfg);

  std::string name() const override { return "predator_prey"; }
  int n_slots() const override { return cfg_.n_predators; }
  int obs_dim() const override;
  int action_count() const override { return 5; }
  int max_steps() const override { return cfg_.max_steps; }
  int step_count() const override { return step_; }

  WorldStep reset(uint64_t seed) override;
  WorldStep step(const std::vector<int>& actions) override;
  bool success() const override { return prey_alive_count() == 0; }
  std::unique_ptr<World> clone_fresh() const override;

  const PredatorPreyConfig& config() const { return cfg_; }
  const std::vector<Cell>& predator_positions() const { return predators_; }
  const std::vector<Cell>& prey_positions() const { return prey_; }
  const std::vector<uint8_t>& prey_alive() const { return prey_live_; }
  int prey_alive_count() const;

  // Exposed for direct tests of the flee rule: moves every live prey once.
  void move_prey(RngStream& rng);

 private:
  Matrix observe() const;
  bool predator_at(const Cell& c) const;
  bool prey_at(const Cell& c) const;
  int predators_in_range(const Cell& prey_cell) const;

  PredatorPreyConfig cfg_;
  std::vector<Cell> predators_;
  std::vector<Cell> prey_;
  std::vector<uint8_t> prey_live_;
  int step_ = 0;
  bool done_ = false;
  RngStream rng_{0};
};

}  // namespace dicg
