#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dicg/probes.hpp"
#include "dicg/worlds/predator_prey.hpp"

namespace dicg {

std::vector<AttentionBucket> probe_attention_distance(const Algorithm& algo,
                                                      const WorldConfig& world_cfg, int episodes,
                                                      uint64_t seed) {
  auto world_base = make_world(world_cfg);
  auto* world = dynamic_cast<PredatorPreyWorld*>(world_base.get());
  if (!world)
    throw std::runtime_error("probe-attention: requires the predator_prey world (grid distance)");

  struct Acc {
    double sum = 0.0, sumsq = 0.0;
    long count = 0;
  };
  std::map<int, Acc> buckets;
  RngStream policy_rng(derive_seed(seed, 0xA77));

  for (int ep = 0; ep < episodes; ++ep) {
    WorldStep cur = world->reset(derive_seed(seed, 0x3000 + ep));
    while (!cur.done) {
      Matrix adjacency;
      if (!algo.attention_matrix(cur.obs, cur.alive, &adjacency))
        throw std::runtime_error("probe-attention: algorithm '" + algo.kind() +
                                 "' has no attention module");
      const auto& pos = world->predator_positions();
      const int n = static_cast<int>(pos.size());
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int d = std::abs(pos[i].r - pos[j].r) + std::abs(pos[i].c - pos[j].c);
          Acc& a = buckets[d];
          const double w = adjacency.at(i, j);
          a.sum += w;
          a.sumsq += w * w;
          a.count += 1;
        }
      }
      ActOut act = algo.act(cur.obs, cur.alive, policy_rng, /*greedy=*/false);
      cur = world->step(act.actions);
    }
  }

  std::vector<AttentionBucket> out;
  for (const auto& [d, a] : buckets) {
    AttentionBucket b;
    b.distance = d;
    b.count = a.count;
    b.mean = a.sum / a.count;
    const double var = std::max(0.0, a.sumsq / a.count - b.mean * b.mean);
    b.stderr_mean = a.count > 1 ? std::sqrt(var / a.count) : 0.0;
    out.push_back(b);
  }
  return out;
}

namespace {

struct PairDataset {
  std::vector<Matrix> pre;   // one row matrix per sample (1 x d)
  std::vector<Matrix> post;
  std::vector<int> labels;
};

double train_and_score(const std::vector<const Matrix*>& xs, const std::vector<int>& ys,
                       int embed_dim, int n_actions, int epochs, uint64_t seed) {
  const long total = static_cast<long>(xs.size());
  const long train_n = total * 8 / 10;
  const long test_n = total - train_n;
  if (train_n < 1 || test_n < 1)
    throw std::runtime_error("probe-prediction: not enough trajectory samples for an 80/20 split");

  ParameterStore store;
  Mlp net("probe", embed_dim, {64}, n_actions);
  net.register_params(store);
  RngStream rng(derive_seed(seed, 0x90BE));
  init_store(store, rng);

  std::vector<long> order(total);
  for (long i = 0; i < total; ++i) order[i] = i;
  rng.shuffle(order);

  const int batch = 128;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (long lo = 0; lo < train_n; lo += batch) {
      const long hi = std::min(train_n, lo + batch);
      Matrix x(static_cast<int>(hi - lo), embed_dim);
      std::vector<int> y(hi - lo);
      for (long r = lo; r < hi; ++r) {
        const Matrix& src = *xs[order[r]];
        std::copy(src.v.begin(), src.v.end(), x.row(static_cast<int>(r - lo)));
        y[r - lo] = ys[order[r]];
      }
      Tape tape;
      Tensor logits = net.forward(tape, store, tape.leaf(std::move(x)));
      auto stats = categorical_stats(logits, y);
      Tensor loss = scale(sum_all(stats.logprob), -1.0 / static_cast<double>(hi - lo));
      tape.backward(loss);
      GradMap grads;
      tape.param_grads(grads);
      store.adam_step(grads, 1e-3);
    }
  }

  long correct = 0;
  for (long r = train_n; r < total; ++r) {
    Tape tape;
    Tensor logits = net.forward(tape, store, tape.leaf(*xs[order[r]]));
    const Matrix& z = logits.value();
    int a = 0;
    for (int j = 1; j < z.cols; ++j)
      if (z.v[j] > z.v[a]) a = j;
    if (a == ys[order[r]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_n);
}

}  // namespace

std::vector<PredictionRow> probe_action_prediction(const Algorithm& algo,
                                                   const WorldConfig& world_cfg, int pairs,
                                                   int epochs, uint64_t seed, int episodes) {
  auto world = make_world(world_cfg);
  const int n = world->n_slots();
  if (n < 2) throw std::runtime_error("probe-prediction: needs at least two agents");

  {
    Matrix probe_obs(n, world->obs_dim());
    std::vector<uint8_t> alive(n, 1);
    Matrix e0;
    if (!algo.embedding_matrices(probe_obs, alive, &e0, nullptr))
      throw std::runtime_error("probe-prediction: algorithm '" + algo.kind() +
                               "' has no embedding stack");
  }

  // Evaluation trajectories with per-step embeddings and joint actions.
  std::vector<Matrix> pre, post;          // step matrices (n x d)
  std::vector<std::vector<int>> actions;  // per step
  std::vector<std::vector<uint8_t>> alive_log;
  RngStream policy_rng(derive_seed(seed, 0xAC7));
  for (int ep = 0; ep < episodes; ++ep) {
    WorldStep cur = world->reset(derive_seed(seed, 0x4000 + ep));
    while (!cur.done) {
      Matrix e0, etl;
      if (algo.embedding_matrices(cur.obs, cur.alive, &e0, &etl)) {
        ActOut act = algo.act(cur.obs, cur.alive, policy_rng, /*greedy=*/false);
        pre.push_back(std::move(e0));
        post.push_back(std::move(etl));
        actions.push_back(act.actions);
        alive_log.push_back(cur.alive);
        cur = world->step(act.actions);
      } else {
        ActOut act = algo.act(cur.obs, cur.alive, policy_rng, false);
        cur = world->step(act.actions);
      }
    }
  }
  if (pre.empty()) throw std::runtime_error("probe-prediction: no usable trajectory steps");
  const int embed_dim = pre.front().cols;

  // Distinct ordered pairs (i, j), i != j.
  RngStream pair_rng(derive_seed(seed, 0x3A17));
  const long max_pairs = static_cast<long>(n) * (n - 1);
  if (pairs > max_pairs)
    throw std::runtime_error("probe-prediction: more pairs requested than exist");
  std::vector<std::pair<int, int>> chosen;
  while (static_cast<int>(chosen.size()) < pairs) {
    int i = pair_rng.uniform_int(n);
    int j = pair_rng.uniform_int(n - 1);
    if (j >= i) ++j;
    if (std::find(chosen.begin(), chosen.end(), std::make_pair(i, j)) == chosen.end())
      chosen.emplace_back(i, j);
  }

  std::vector<PredictionRow> out;
  for (const auto& [i, j] : chosen) {
    std::vector<Matrix> xs_pre, xs_post;
    std::vector<int> ys;
    for (size_t t = 0; t < pre.size(); ++t) {
      if (!alive_log[t][i] || !alive_log[t][j]) continue;
      Matrix xp(1, embed_dim), xq(1, embed_dim);
      std::copy(pre[t].row(i), pre[t].row(i) + embed_dim, xp.row(0));
      std::copy(post[t].row(i), post[t].row(i) + embed_dim, xq.row(0));
      xs_pre.push_back(std::move(xp));
      xs_post.push_back(std::move(xq));
      ys.push_back(actions[t][j]);
    }
    std::vector<const Matrix*> p1, p2;
    for (const auto& m : xs_pre) p1.push_back(&m);
    for (const auto& m : xs_post) p2.push_back(&m);
    PredictionRow row;
    row.from_agent = i;
    row.to_agent = j;
    row.train_samples = static_cast<long>(ys.size()) * 8 / 10;
    row.test_samples = static_cast<long>(ys.size()) - row.train_samples;
    const uint64_t pair_seed = derive_seed(seed, 0x7000 + i * 131 + j);
    row.pre_acc = train_and_score(p1, ys, embed_dim, world->action_count(), epochs, pair_seed);
    row.post_acc = train_and_score(p2, ys, embed_dim, world->action_count(), epochs, pair_seed);
    out.push_back(row);
  }
  return out;
}

}  // namespace dicg
