#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "dicg/worlds/predator_prey.hpp"

namespace dicg {

namespace {
constexpr int kDr[5] = {-1, 1, 0, 0, 0};  // up, down, left, right, stay
constexpr int kDc[5] = {0, 0, -1, 1, 0};

int manhattan(const Cell& a, const Cell& b) { return std::abs(a.r - b.r) + std::abs(a.c - b.c); }
int chebyshev(const Cell& a, const Cell& b) {
  return std::max(std::abs(a.r - b.r), std::abs(a.c - b.c));
}
}  // namespace

void PredatorPreyConfig::validate() const {
  if (grid_size < 2) throw std::invalid_argument("predator_prey: grid_size must be >= 2");
  if (n_predators < 1 || n_prey < 1)
    throw std::invalid_argument("predator_prey: need at least one predator and prey");
  if (n_predators + n_prey > grid_size * grid_size)
    throw std::invalid_argument("predator_prey: grid too small for all entities");
  if (penalty > 0.0) throw std::invalid_argument("predator_prey: penalty must be <= 0");
  if (max_steps < 1) throw std::invalid_argument("predator_prey: max_steps must be >= 1");
  if (view_radius < 1) throw std::invalid_argument("predator_prey: view_radius must be >= 1");
  if (prey_stay_prob < 0.0 || prey_stay_prob > 1.0)
    throw std::invalid_argument("predator_prey: prey_stay_prob must be in [0, 1]");
}

PredatorPreyWorld::PredatorPreyWorld(PredatorPreyConfig cfg) : cfg_(cfg) { cfg_.validate(); }

int PredatorPreyWorld::obs_dim() const {
  const int w = 2 * cfg_.view_radius + 1;
  return 2 + 2 * w * w;
}

int PredatorPreyWorld::prey_alive_count() const {
  int c = 0;
  for (uint8_t a : prey_live_) c += a ? 1 : 0;
  return c;
}

bool PredatorPreyWorld::predator_at(const Cell& c) const {
  for (const Cell& p : predators_)
    if (p == c) return true;
  return false;
}

bool PredatorPreyWorld::prey_at(const Cell& c) const {
  for (size_t i = 0; i < prey_.size(); ++i)
    if (prey_live_[i] && prey_[i] == c) return true;
  return false;
}

int PredatorPreyWorld::predators_in_range(const Cell& prey_cell) const {
  int count = 0;
  for (const Cell& p : predators_) {
    const int d = cfg_.capture_range == CaptureRange::kMoore ? chebyshev(p, prey_cell)
                                                             : manhattan(p, prey_cell);
    if (d == 1) ++count;
  }
  return count;
}

WorldStep PredatorPreyWorld::reset(uint64_t seed) {
  rng_ = RngStream(seed);
  step_ = 0;
  done_ = false;
  predators_.assign(cfg_.n_predators, Cell{});
  prey_.assign(cfg_.n_prey, Cell{});
  prey_live_.assign(cfg_.n_prey, 1);

  // All entities on distinct cells, drawn uniformly.
  std::vector<uint8_t> used(static_cast<size_t>(cfg_.grid_size) * cfg_.grid_size, 0);
  auto place = [&]() {
    while (true) {
      const int r = rng_.uniform_int(cfg_.grid_size);
      const int c = rng_.uniform_int(cfg_.grid_size);
      if (!used[static_cast<size_t>(r) * cfg_.grid_size + c]) {
        used[static_cast<size_t>(r) * cfg_.grid_size + c] = 1;
        return Cell{r, c};
      }
    }
  };
  for (Cell& p : predators_) p = place();
  for (Cell& q : prey_) q = place();

  WorldStep out;
  out.obs = observe();
  out.alive.assign(cfg_.n_predators, 1);
  return out;
}

void PredatorPreyWorld::move_prey(RngStream& rng) {
  for (size_t i = 0; i < prey_.size(); ++i) {
    if (!prey_live_[i]) continue;
    Cell& q = prey_[i];
    if (rng.uniform() < cfg_.prey_stay_prob) continue;

    std::vector<Cell> candidates;
    for (int a = 0; a < 4; ++a) {
      Cell c{q.r + kDr[a], q.c + kDc[a]};
      if (c.r < 0 || c.r >= cfg_.grid_size || c.c < 0 || c.c >= cfg_.grid_size) continue;
      if (predator_at(c) || prey_at(c)) continue;
      candidates.push_back(c);
    }
    if (candidates.empty()) continue;

    // Flee the nearest predator within the prey's own view; otherwise wander.
    std::vector<const Cell*> visible;
    for (const Cell& p : predators_)
      if (chebyshev(p, q) <= cfg_.view_radius) visible.push_back(&p);

    if (visible.empty()) {
      q = candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
      continue;
    }
    int best = -1;
    std::vector<Cell> best_cells;
    for (const Cell& c : candidates) {
      int nearest = INT32_MAX;
      for (const Cell* p : visible) nearest = std::min(nearest, manhattan(c, *p));
      if (nearest > best) {
        best = nearest;
        best_cells.assign(1, c);
      } else if (nearest == best) {
        best_cells.push_back(c);
      }
    }
    q = best_cells[rng.uniform_int(static_cast<int>(best_cells.size()))];
  }
}

WorldStep PredatorPreyWorld::step(const std::vector<int>& actions) {
  if (done_) throw std::logic_error("predator_prey: step after episode end");
  if (static_cast<int>(actions.size()) != cfg_.n_predators)
    throw std::invalid_argument("predator_prey: expected one action per predator");
  for (int a : actions)
    if (a < 0 || a >= 5)
      throw std::out_of_range("predator_prey: invalid action index " + std::to_string(a));

  step_ += 1;
  WorldStep out;

  // 1) Simultaneous predator moves. Off-grid moves and moves onto a live
  //    prey cell fall back to stay (prey never share a cell with predators).
  std::vector<Cell> next = predators_;
  for (int i = 0; i < cfg_.n_predators; ++i) {
    Cell c{predators_[i].r + kDr[actions[i]], predators_[i].c + kDc[actions[i]]};
    if (c.r < 0 || c.r >= cfg_.grid_size || c.c < 0 || c.c >= cfg_.grid_size) continue;
    if (prey_at(c)) continue;
    next[i] = c;
  }
  predators_ = next;

  // 2) Prey flee.
  move_prey(rng_);

  // 3) Capture resolution on the post-move positions.
  double reward = 0.0;
  for (size_t i = 0; i < prey_.size(); ++i) {
    if (!prey_live_[i]) continue;
    const int in_range = predators_in_range(prey_[i]);
    if (in_range >= 2) {
      prey_live_[i] = 0;
      reward += cfg_.capture_reward;
      out.events.push_back({step_, "capture", {static_cast<int>(i)}, cfg_.capture_reward});
    } else if (in_range == 1) {
      reward += cfg_.penalty;
      out.events.push_back({step_, "solo_attempt", {static_cast<int>(i)}, cfg_.penalty});
    }
  }

  // 4) Team step cost.
  reward += cfg_.step_cost;
  out.events.push_back({step_, "step_cost", {}, cfg_.step_cost});

  done_ = prey_alive_count() == 0 || step_ >= cfg_.max_steps;
  out.obs = observe();
  out.alive.assign(cfg_.n_predators, 1);
  out.reward = reward;
  out.done = done_;
  return out;
}

Matrix PredatorPreyWorld::observe() const {
  const int w = 2 * cfg_.view_radius + 1;
  Matrix obs(cfg_.n_predators, obs_dim());
  const double denom = cfg_.grid_size > 1 ? cfg_.grid_size - 1.0 : 1.0;
  for (int i = 0; i < cfg_.n_predators; ++i) {
    double* row = obs.row(i);
    const Cell& self = predators_[i];
    row[0] = self.r / denom;
    row[1] = self.c / denom;
    for (const Cell& p : predators_) {
      const int dr = p.r - self.r, dc = p.c - self.c;
      if (std::abs(dr) > cfg_.view_radius || std::abs(dc) > cfg_.view_radius) continue;
      row[2 + (dr + cfg_.view_radius) * w + (dc + cfg_.view_radius)] = 1.0;
    }
    for (size_t q = 0; q < prey_.size(); ++q) {
      if (!prey_live_[q]) continue;
      const int dr = prey_[q].r - self.r, dc = prey_[q].c - self.c;
      if (std::abs(dr) > cfg_.view_radius || std::abs(dc) > cfg_.view_radius) continue;
      row[2 + w * w + (dr + cfg_.view_radius) * w + (dc + cfg_.view_radius)] = 1.0;
    }
  }
  return obs;
}

std::unique_ptr<World> PredatorPreyWorld::clone_fresh() const {
  return std::make_unique<PredatorPreyWorld>(cfg_);
}

}  // namespace dicg
