#include <algorithm>
#include <map>
#include <stdexcept>

#include "dicg/worlds/traffic_junction.hpp"

namespace dicg {

void TrafficJunctionConfig::validate() const {
  if (collision_penalty > 0.0)
    throw std::invalid_argument("traffic_junction: collision_penalty must be <= 0");
  if (congestion_coef < 0.0)
    throw std::invalid_argument("traffic_junction: congestion_coef must be >= 0");
  if (vision_radius != 1)
    throw std::invalid_argument("traffic_junction: vision radius is fixed to one grid");
}

int TrafficJunctionConfig::roads() const {
  switch (difficulty) {
    case TjDifficulty::kEasy: return 2;
    case TjDifficulty::kMedium: return 4;
    case TjDifficulty::kHard: return 8;
  }
  return 0;
}
int TrafficJunctionConfig::directions() const {
  return difficulty == TjDifficulty::kEasy ? 1 : 2;
}
int TrafficJunctionConfig::dim() const {
  switch (difficulty) {
    case TjDifficulty::kEasy: return 7;
    case TjDifficulty::kMedium: return 14;
    case TjDifficulty::kHard: return 18;
  }
  return 0;
}
int TrafficJunctionConfig::junction_count() const {
  return difficulty == TjDifficulty::kHard ? 4 : 1;
}
int TrafficJunctionConfig::n_max() const {
  switch (difficulty) {
    case TjDifficulty::kEasy: return 5;
    case TjDifficulty::kMedium: return 10;
    case TjDifficulty::kHard: return 20;
  }
  return 0;
}
double TrafficJunctionConfig::add_rate() const {
  switch (difficulty) {
    case TjDifficulty::kEasy: return 0.3;
    case TjDifficulty::kMedium: return 0.2;
    case TjDifficulty::kHard: return 0.05;
  }
  return 0.0;
}
int TrafficJunctionConfig::max_steps() const {
  switch (difficulty) {
    case TjDifficulty::kEasy: return 20;
    case TjDifficulty::kMedium: return 40;
    case TjDifficulty::kHard: return 60;
  }
  return 0;
}

TrafficJunctionWorld::TrafficJunctionWorld(TrafficJunctionConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  build_geometry();
  cars_.assign(cfg_.n_max(), CarSlot{});
}

void TrafficJunctionWorld::build_geometry() {
  const int d = cfg_.dim();
  lanes_.clear();

  auto add_lane = [&](bool horizontal, int fixed, bool forward) {
    TjLane lane;
    for (int t = 0; t < d; ++t) {
      const int u = forward ? t : d - 1 - t;
      lane.cells.push_back(horizontal ? fixed * d + u : u * d + fixed);
    }
    lanes_.push_back(std::move(lane));
  };

  if (cfg_.difficulty == TjDifficulty::kEasy) {
    const int mid = d / 2;
    add_lane(true, mid, true);    // eastbound across the middle row
    add_lane(false, mid, true);   // southbound down the middle column
  } else {
    // Two-way roads occupy adjacent line pairs (a, a+1): the lower index
    // runs backward (west / north-exit side), the higher forward.
    std::vector<int> pairs = cfg_.difficulty == TjDifficulty::kMedium
                                 ? std::vector<int>{d / 2 - 1}
                                 : std::vector<int>{5, 11};
    for (int a : pairs) {
      add_lane(true, a, false);   // westbound
      add_lane(true, a + 1, true);  // eastbound
    }
    for (int a : pairs) {
      add_lane(false, a, true);     // southbound
      add_lane(false, a + 1, false);  // northbound
    }
  }

  // Routes: depth-first over lane transitions at crossing cells. Turning is
  // only possible in two-direction modes; a transition follows the crossing
  // lane strictly forward from the shared cell.
  routes_.clear();
  entries_.clear();
  entry_routes_.clear();
  const bool turns = cfg_.directions() == 2;

  std::vector<std::map<int, int>> cell_index(lanes_.size());
  for (size_t l = 0; l < lanes_.size(); ++l)
    for (size_t i = 0; i < lanes_[l].cells.size(); ++i)
      cell_index[l][lanes_[l].cells[i]] = static_cast<int>(i);

  for (size_t entry_lane = 0; entry_lane < lanes_.size(); ++entry_lane) {
    entries_.push_back(lanes_[entry_lane].cells.front());
    entry_routes_.emplace_back();

    std::vector<int> prefix;
    std::vector<uint8_t> used(lanes_.size(), 0);

    auto dfs = [&](auto&& self, size_t lane, int from_idx) -> void {
      used[lane] = 1;
      const auto& cells = lanes_[lane].cells;
      // Straight to the end of this lane.
      std::vector<int> straight = prefix;
      straight.insert(straight.end(), cells.begin() + from_idx, cells.end());
      entry_routes_.back().push_back(static_cast<int>(routes_.size()));
      routes_.push_back(std::move(straight));
      if (turns) {
        for (size_t other = 0; other < lanes_.size(); ++other) {
          if (used[other]) continue;
          for (int i = from_idx; i < static_cast<int>(cells.size()); ++i) {
            auto it = cell_index[other].find(cells[i]);
            if (it == cell_index[other].end()) continue;
            if (it->second + 1 >= static_cast<int>(lanes_[other].cells.size())) continue;
            const size_t keep = prefix.size();
            prefix.insert(prefix.end(), cells.begin() + from_idx, cells.begin() + i + 1);
            self(self, other, it->second + 1);
            prefix.resize(keep);
          }
        }
      }
      used[lane] = 0;
    };
    dfs(dfs, entry_lane, 0);
  }
}

int TrafficJunctionWorld::obs_dim() const {
  return cfg_.dim() * cfg_.dim() + route_count() + 9 + 1;
}

int TrafficJunctionWorld::active_count() const {
  int c = 0;
  for (const CarSlot& car : cars_) c += car.active ? 1 : 0;
  return c;
}

int TrafficJunctionWorld::car_cell(const CarSlot& c) const {
  if (!c.active || c.route_idx >= static_cast<int>(routes_[c.route_id].size())) return -1;
  return routes_[c.route_id][c.route_idx];
}

WorldStep TrafficJunctionWorld::reset(uint64_t seed) {
  rng_ = RngStream(seed);
  step_ = 0;
  done_ = false;
  collision_happened_ = false;
  cars_.assign(cfg_.n_max(), CarSlot{});
  WorldStep out;
  out.obs = observe();
  out.alive.assign(cfg_.n_max(), 0);
  return out;
}

WorldStep TrafficJunctionWorld::step(const std::vector<int>& actions) {
  if (done_) throw std::logic_error("traffic_junction: step after episode end");
  if (static_cast<int>(actions.size()) != cfg_.n_max())
    throw std::invalid_argument("traffic_junction: expected one action per car slot");

  step_ += 1;
  WorldStep out;
  double reward = 0.0;

  // 1) Movement; gas advances one route cell, brake holds. Time in system
  //    advances for every active car.
  for (int i = 0; i < cfg_.n_max(); ++i) {
    CarSlot& car = cars_[i];
    if (!car.active) {
      if (actions[i] != 1)
        out.warnings.push_back("action for inactive slot " + std::to_string(i) + " ignored");
      continue;
    }
    if (actions[i] != 0 && actions[i] != 1)
      throw std::out_of_range("traffic_junction: invalid action " + std::to_string(actions[i]));
    car.tau += 1;
    if (actions[i] == 0) car.route_idx += 1;
  }

  // 2) Collisions: any cell holding two or more cars.
  std::map<int, std::vector<int>> occupancy;
  for (int i = 0; i < cfg_.n_max(); ++i) {
    const int cell = car_cell(cars_[i]);
    if (cell >= 0) occupancy[cell].push_back(i);
  }
  for (const auto& [cell, slot_ids] : occupancy) {
    if (slot_ids.size() < 2) continue;
    collision_happened_ = true;
    const double delta = cfg_.collision_penalty * static_cast<double>(slot_ids.size());
    reward += delta;
    WorldEvent ev{step_, "collision", slot_ids, delta};
    out.events.push_back(std::move(ev));
  }

  // 3) Congestion cost, growing with each car's time in the system.
  double congestion = 0.0;
  std::vector<int> active_ids;
  for (int i = 0; i < cfg_.n_max(); ++i) {
    if (!cars_[i].active) continue;
    active_ids.push_back(i);
    congestion -= cfg_.congestion_coef * cars_[i].tau;
  }
  if (!active_ids.empty()) {
    reward += congestion;
    out.events.push_back({step_, "congestion", active_ids, congestion});
  }

  // 4) Cars that drove past their final route cell leave the system.
  for (int i = 0; i < cfg_.n_max(); ++i) {
    CarSlot& car = cars_[i];
    if (car.active && car.route_idx >= static_cast<int>(routes_[car.route_id].size())) {
      out.events.push_back({step_, "arrival", {i}, 0.0});
      car = CarSlot{};
    }
  }

  // 5) Spawns at free entries while capacity remains.
  for (size_t e = 0; e < entries_.size(); ++e) {
    if (active_count() >= cfg_.n_max()) break;
    bool entry_free = true;
    for (const CarSlot& car : cars_)
      if (car_cell(car) == entries_[e]) entry_free = false;
    if (!entry_free) continue;
    if (!rng_.bernoulli(cfg_.add_rate())) continue;
    int slot = -1;
    for (int i = 0; i < cfg_.n_max(); ++i)
      if (!cars_[i].active) {
        slot = i;
        break;
      }
    CarSlot car;
    car.active = true;
    car.route_id = entry_routes_[e][rng_.uniform_int(static_cast<int>(entry_routes_[e].size()))];
    car.route_idx = 0;
    car.tau = 0;
    cars_[slot] = car;
    out.events.push_back({step_, "spawn", {slot, car.route_id}, 0.0});
  }

  done_ = step_ >= cfg_.max_steps();
  out.obs = observe();
  out.alive.resize(cfg_.n_max());
  for (int i = 0; i < cfg_.n_max(); ++i) out.alive[i] = cars_[i].active ? 1 : 0;
  out.reward = reward;
  out.done = done_;
  return out;
}

Matrix TrafficJunctionWorld::observe() const {
  const int d = cfg_.dim();
  Matrix obs(cfg_.n_max(), obs_dim());

  std::map<int, int> counts;
  for (const CarSlot& car : cars_) {
    const int cell = car_cell(car);
    if (cell >= 0) counts[cell] += 1;
  }

  for (int i = 0; i < cfg_.n_max(); ++i) {
    const CarSlot& car = cars_[i];
    const int cell = car_cell(car);
    if (cell < 0) continue;
    double* row = obs.row(i);
    row[cell] = 1.0;
    row[d * d + car.route_id] = 1.0;
    const int r = cell / d, c = cell % d;
    int k = 0;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc, ++k) {
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || rr >= d || cc < 0 || cc >= d) continue;
        auto it = counts.find(rr * d + cc);
        if (it != counts.end()) row[d * d + route_count() + k] = it->second;
      }
    }
    row[d * d + route_count() + 9] = static_cast<double>(car.tau) / cfg_.max_steps();
  }
  return obs;
}

std::unique_ptr<World> TrafficJunctionWorld::clone_fresh() const {
  return std::make_unique<TrafficJunctionWorld>(cfg_);
}

}  // namespace dicg
