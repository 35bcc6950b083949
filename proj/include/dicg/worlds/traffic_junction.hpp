#pragma once

#include "dicg/rng.hpp"
#include "dicg/worlds/world.hpp"

namespace dicg {

enum class TjDifficulty { kEasy, kMedium, kHard };

// Difficulty-derived geometry and schedule. Fixed per difficulty:
//   easy:   2 one-way roads,  grid  7, 1 junction,  n_max  5, add 0.3,  20 steps
//   medium: 2 two-way roads,  grid 14, 1 junction,  n_max 10, add 0.2,  40 steps
//   hard:   4 two-way roads,  grid 18, 4 junctions, n_max 20, add 0.05, 60 steps
struct TrafficJunctionConfig {
  TjDifficulty difficulty = TjDifficulty::kEasy;
  double collision_penalty = -10.0;  // per involved car per collision step
  double congestion_coef = 0.01;     // cost is -coef * tau per active car
  int vision_radius = 1;

  void validate() const;

  int roads() const;
  int directions() const;
  int dim() const;
  int junction_count() const;
  int n_max() const;
  double add_rate() const;
  int max_steps() const;
};

// One driving lane: a straight line of cells in driving order.
struct TjLane {
  std::vector<int> cells;  // cell = r * dim + c
};

// Cars enter at lane heads with a spawn probability per free entry, follow a
// pre-assigned route cell by cell (gas advances, brake holds), pay a
// congestion cost growing with their time in the system, and penalize the
// team whenever two or more cars share a cell. An episode succeeds when no
// collision ever happened. Actions: 0 = gas, 1 = brake.
//
// Observation row per active car: one-hot grid position (dim^2), one-hot
// route id, 3x3 occupancy-count window, and tau / max_steps.
class TrafficJunctionWorld final : public World {
 public:
  explicit TrafficJunctionWorld(TrafficJunctionConfig cfg);

  std::string name() const override { return "traffic_junction"; }
  int n_slots() const override { return cfg_.n_max(); }
  int obs_dim() const override;
  int action_count() const override { return 2; }
  int max_steps() const override { return cfg_.max_steps(); }
  int step_count() const override { return step_; }

  WorldStep reset(uint64_t seed) override;
  WorldStep step(const std::vector<int>& actions) override;
  bool success() const override { return !collision_happened_; }
  int noop_action() const override { return 1; }  // brake
  std::unique_ptr<World> clone_fresh() const override;

  const TrafficJunctionConfig& config() const { return cfg_; }
  int route_count() const { return static_cast<int>(routes_.size()); }
  const std::vector<int>& route_cells(int route_id) const { return routes_[route_id]; }
  int entry_count() const { return static_cast<int>(entries_.size()); }
  int active_count() const;
  bool collision_happened() const { return collision_happened_; }

  struct CarSlot {
    bool active = false;
    int route_id = -1;
    int route_idx = 0;
    int tau = 0;
  };
  const std::vector<CarSlot>& cars() const { return cars_; }

 private:
  void build_geometry();
  Matrix observe() const;
  int car_cell(const CarSlot& c) const;  // -1 when off grid

  TrafficJunctionConfig cfg_;
  std::vector<TjLane> lanes_;
  std::vector<std::vector<int>> routes_;      // cell sequences
  std::vector<int> entries_;                  // entry cells (lane heads)
  std::vector<std::vector<int>> entry_routes_;  // route ids per entry
  std::vector<CarSlot> cars_;
  int step_ = 0;
  bool done_ = false;
  bool collision_happened_ = false;
  RngStream rng_{0};
};

}  // namespace dicg
