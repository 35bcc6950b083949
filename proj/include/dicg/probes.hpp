#pragma once

#include <vector>

#include "dicg/config.hpp"

namespace dicg {

struct AttentionBucket {
  int distance = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  long count = 0;
};

// Rolls out episodes on the pursuit world and relates soft-edge weights to
// inter-agent Manhattan distance; distance 0 collects self-weights. The
// algorithm must expose an attention module.
std::vector<AttentionBucket> probe_attention_distance(const Algorithm& algo,
                                                      const WorldConfig& world_cfg, int episodes,
                                                      uint64_t seed);

struct PredictionRow {
  int from_agent = 0;
  int to_agent = 0;
  double pre_acc = 0.0;   // classifier on pre-integration embeddings e_i
  double post_acc = 0.0;  // classifier on integrated embeddings ~e_i
  long train_samples = 0;
  long test_samples = 0;
};

// For sampled agent pairs (i, j), trains small classifiers that predict
// agent j's action from agent i's embedding, before and after graph
// integration, and reports held-out accuracy (80/20 split, fixed seed).
std::vector<PredictionRow> probe_action_prediction(const Algorithm& algo,
                                                   const WorldConfig& world_cfg, int pairs,
                                                   int epochs, uint64_t seed, int episodes = 50);

}  // namespace dicg
