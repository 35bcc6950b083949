#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "dicg/checkpoint.hpp"
#include "dicg/metrics.hpp"
#include "dicg/trainer.hpp"

namespace dicg {

namespace {

TrajectoryBatch make_empty_batch(const Algorithm& algo) {
  TrajectoryBatch b;
  b.n_slots = algo.dims().n_slots;
  b.obs_dim = algo.dims().obs_dim;
  b.n_actions = algo.dims().n_actions;
  b.obs = Matrix(0, b.obs_dim);
  return b;
}

// Collects `quota` steps on one world stream.
TrajectoryBatch collect_shard(const Algorithm& algo, const World& prototype, long quota,
                              uint64_t shard_seed) {
  TrajectoryBatch b = make_empty_batch(algo);
  if (quota <= 0) return b;
  const int n = b.n_slots;
  b.obs = Matrix(static_cast<int>(quota) * n, b.obs_dim);
  b.alive.reserve(quota * n);

  auto world = prototype.clone_fresh();
  RngStream policy_rng(derive_seed(shard_seed, 0xACT));
  long collected = 0;
  int episode = 0;
  while (collected < quota) {
    WorldStep cur = world->reset(derive_seed(shard_seed, 0x1000 + episode));
    ++episode;
    double ep_return = 0.0;
    int ep_len = 0;
    while (true) {
      ActOut act = algo.act(cur.obs, cur.alive, policy_rng, /*greedy=*/false);
      WorldStep next = world->step(act.actions);

      double* dst = b.obs.row(static_cast<int>(collected) * n);
      std::copy(cur.obs.v.begin(), cur.obs.v.end(), dst);
      b.alive.insert(b.alive.end(), cur.alive.begin(), cur.alive.end());
      b.actions.insert(b.actions.end(), act.actions.begin(), act.actions.end());
      b.logp.insert(b.logp.end(), act.logp.begin(), act.logp.end());
      b.rewards.push_back(next.reward);
      b.values.push_back(act.value);
      b.terminal.push_back(next.done ? 1 : 0);
      b.truncated.push_back(0);
      b.bootstrap.push_back(0.0);
      ++collected;
      ep_return += next.reward;
      ++ep_len;

      if (next.done) {
        b.episode_returns.push_back(ep_return);
        b.episode_lengths.push_back(ep_len);
        b.episode_success.push_back(world->success() ? 1 : 0);
        break;
      }
      if (collected >= quota) {
        b.truncated.back() = 1;
        b.bootstrap.back() = algo.state_value(next.obs, next.alive);
        break;
      }
      cur = std::move(next);
    }
  }
  b.steps = collected;
  return b;
}

void append_batch(TrajectoryBatch& dst, TrajectoryBatch&& src) {
  const int n = dst.n_slots;
  Matrix merged(static_cast<int>(dst.steps + src.steps) * n, dst.obs_dim);
  std::copy(dst.obs.v.begin(), dst.obs.v.end(), merged.v.begin());
  std::copy(src.obs.v.begin(), src.obs.v.end(), merged.v.begin() + dst.obs.v.size());
  dst.obs = std::move(merged);
  auto cat = [](auto& a, auto& b) { a.insert(a.end(), b.begin(), b.end()); };
  cat(dst.alive, src.alive);
  cat(dst.actions, src.actions);
  cat(dst.logp, src.logp);
  cat(dst.rewards, src.rewards);
  cat(dst.values, src.values);
  cat(dst.terminal, src.terminal);
  cat(dst.truncated, src.truncated);
  cat(dst.bootstrap, src.bootstrap);
  cat(dst.episode_returns, src.episode_returns);
  cat(dst.episode_lengths, src.episode_lengths);
  cat(dst.episode_success, src.episode_success);
  dst.steps += src.steps;
}

void gae_core(const std::vector<double>& rewards, const std::vector<double>& values,
              const std::vector<uint8_t>& terminal, const std::vector<uint8_t>& truncated,
              const std::vector<double>& bootstrap, double gamma, double lambda,
              std::vector<double>* adv_out, std::vector<double>* ret_out) {
  const size_t n = rewards.size();
  if (values.size() != n || terminal.size() != n || truncated.size() != n ||
      bootstrap.size() != n)
    throw std::invalid_argument("gae: input lengths disagree");
  adv_out->assign(n, 0.0);
  ret_out->assign(n, 0.0);
  double carry = 0.0;
  for (size_t idx = n; idx-- > 0;) {
    double delta;
    if (terminal[idx]) {
      delta = rewards[idx] - values[idx];
      carry = delta;
    } else if (truncated[idx]) {
      delta = rewards[idx] + gamma * bootstrap[idx] - values[idx];
      carry = delta;
    } else {
      if (idx + 1 >= n)
        throw std::invalid_argument("gae: segment must end terminal or truncated");
      delta = rewards[idx] + gamma * values[idx + 1] - values[idx];
      carry = delta + gamma * lambda * carry;
    }
    (*adv_out)[idx] = carry;
    (*ret_out)[idx] = carry + values[idx];
  }
}

StackedBatch gather_minibatch(const TrajectoryBatch& b, const std::vector<long>& steps,
                              const std::vector<double>& adv_norm,
                              const std::vector<double>& returns) {
  const int n = b.n_slots;
  StackedBatch sb;
  sb.n_slots = n;
  sb.steps = static_cast<int>(steps.size());
  sb.obs = std::make_shared<Matrix>(sb.steps * n, b.obs_dim);
  auto alive = std::make_shared<Matrix>(sb.steps * n, 1);
  sb.actions.resize(static_cast<size_t>(sb.steps) * n);
  sb.old_logp = Matrix(sb.steps * n, 1);
  sb.adv = Matrix(sb.steps * n, 1);
  sb.returns = Matrix(sb.steps, 1);
  for (int r = 0; r < sb.steps; ++r) {
    const long t = steps[r];
    std::copy(b.obs.row(static_cast<int>(t) * n), b.obs.row(static_cast<int>(t) * n) + n * b.obs_dim,
              sb.obs->row(r * n));
    sb.returns.v[r] = returns[t];
    for (int i = 0; i < n; ++i) {
      const long src = t * n + i;
      const long dst = static_cast<long>(r) * n + i;
      const bool live = b.alive[src] != 0;
      alive->v[dst] = live ? 1.0 : 0.0;
      sb.actions[dst] = b.actions[src];
      sb.old_logp.v[dst] = b.logp[src];
      sb.adv.v[dst] = live ? adv_norm[t] : 0.0;
      if (live) sb.alive_total += 1.0;
    }
  }
  sb.alive_col = alive;
  return sb;
}

}  // namespace

TrajectoryBatch collect_rollouts(const Algorithm& algo, const World& prototype, long batch_steps,
                                 uint64_t seed, int workers) {
  if (batch_steps < 0) throw std::invalid_argument("collect_rollouts: negative batch size");
  if (workers < 1) workers = 1;
  if (batch_steps == 0) return make_empty_batch(algo);
  if (workers == 1) return collect_shard(algo, prototype, batch_steps, derive_seed(seed, 0));

  std::vector<long> quotas(workers, batch_steps / workers);
  for (int w = 0; w < batch_steps % workers; ++w) quotas[w] += 1;
  std::vector<TrajectoryBatch> shards(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w)
    threads.emplace_back([&, w] {
      shards[w] = collect_shard(algo, prototype, quotas[w], derive_seed(seed, w));
    });
  for (auto& t : threads) t.join();
  TrajectoryBatch out = std::move(shards[0]);
  for (int w = 1; w < workers; ++w) append_batch(out, std::move(shards[w]));
  return out;
}

void gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                    const std::vector<uint8_t>& terminals, double tail_bootstrap, double gamma,
                    double lambda, std::vector<double>* advantages, std::vector<double>* returns) {
  const size_t n = rewards.size();
  std::vector<uint8_t> truncated(n, 0);
  std::vector<double> bootstrap(n, 0.0);
  if (n > 0 && !terminals[n - 1]) {
    truncated[n - 1] = 1;
    bootstrap[n - 1] = tail_bootstrap;
  }
  gae_core(rewards, values, terminals, truncated, bootstrap, gamma, lambda, advantages, returns);
}

PpoLossParts ppo_loss(Tape& tape, const Algorithm& algo, const StackedBatch& b,
                      const PpoConfig& cfg) {
  if (b.steps <= 0) throw std::invalid_argument("ppo_loss: empty batch");
  const double alive_total = b.alive_total > 0.0 ? b.alive_total : 1.0;

  BatchEval ev = algo.evaluate_batch(tape, b);
  Tensor old_logp = tape.leaf(b.old_logp);
  Tensor ratio = exp_map(sub(ev.logp, old_logp));
  for (double r : ratio.value().v)
    if (!std::isfinite(r))
      throw std::runtime_error(
          "ppo_loss: non-finite probability ratio (diverged policy or corrupt batch); "
          "max |new-old| logp = " +
          std::to_string([&] {
            double m = 0.0;
            for (size_t i = 0; i < b.old_logp.v.size(); ++i)
              m = std::max(m, std::abs(ev.logp.value().v[i] - b.old_logp.v[i]));
            return m;
          }()));

  Tensor adv = tape.leaf(b.adv);
  Tensor surr1 = mul(ratio, adv);
  Tensor surr2 = mul(clip(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip), adv);
  Tensor surrogate = scale(sum_all(min_elem(surr1, surr2)), 1.0 / alive_total);
  Tensor entropy_mean = scale(sum_all(ev.entropy), 1.0 / alive_total);

  Tensor value_loss;
  if (ev.per_agent_value) {
    // Per-agent baselines regress every live agent's value on the shared
    // team return of its step.
    Matrix rep(b.steps * b.n_slots, 1);
    for (int t = 0; t < b.steps; ++t)
      for (int i = 0; i < b.n_slots; ++i)
        rep.v[static_cast<size_t>(t) * b.n_slots + i] =
            b.alive_col->v[static_cast<size_t>(t) * b.n_slots + i] != 0.0 ? b.returns.v[t] : 0.0;
    Tensor verr = sub(ev.value, tape.leaf(std::move(rep)));
    value_loss = scale(sum_all(mul(verr, verr)), 1.0 / alive_total);
  } else {
    Tensor verr = sub(ev.value, tape.leaf(b.returns));
    value_loss = scale(sum_all(mul(verr, verr)), 1.0 / b.steps);
  }

  Tensor loss = add(add(scale(surrogate, -1.0), scale(entropy_mean, -cfg.entropy_coef)),
                    scale(value_loss, cfg.value_coef));

  PpoLossParts parts;
  parts.loss = loss;
  parts.policy_loss = -surrogate.value().v[0];
  parts.value_loss = value_loss.value().v[0];
  parts.entropy = entropy_mean.value().v[0];
  double kl = 0.0;
  for (size_t i = 0; i < b.old_logp.v.size(); ++i)
    kl += b.old_logp.v[i] - ev.logp.value().v[i];
  parts.approx_kl = kl / alive_total;
  return parts;
}

IterationMetrics train_iteration(Algorithm& algo, const World& prototype, const PpoConfig& cfg,
                                 int iteration, uint64_t run_seed, int workers,
                                 long* env_steps_total) {
  IterationMetrics m;
  m.iteration = iteration;

  TrajectoryBatch batch = collect_rollouts(algo, prototype, cfg.batch_size,
                                           derive_seed(run_seed, 0xC0DE + iteration), workers);
  if (env_steps_total) {
    *env_steps_total += batch.steps;
    m.env_steps_total = *env_steps_total;
  }
  if (!batch.episode_returns.empty()) {
    m.mean_return = std::accumulate(batch.episode_returns.begin(), batch.episode_returns.end(), 0.0) /
                    static_cast<double>(batch.episode_returns.size());
    int succ = 0;
    for (uint8_t s : batch.episode_success) succ += s;
    m.success_rate = static_cast<double>(succ) / static_cast<double>(batch.episode_success.size());
  }
  if (batch.steps == 0) return m;

  std::vector<double> adv, ret;
  gae_core(batch.rewards, batch.values, batch.terminal, batch.truncated, batch.bootstrap,
           cfg.gamma, cfg.lambda, &adv, &ret);

  // Normalize advantages over the whole batch before the loss.
  double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double stdev = std::sqrt(var / adv.size());
  for (double& a : adv) a = (a - mean) / (stdev + 1e-8);

  RngStream shuffle_rng(derive_seed(run_seed, 0x5F0F + iteration));
  std::vector<long> order(batch.steps);
  std::iota(order.begin(), order.end(), 0);
  const int nmb = std::max(1, cfg.minibatches);

  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (int mb = 0; mb < nmb; ++mb) {
      const long lo = batch.steps * mb / nmb;
      const long hi = batch.steps * (mb + 1) / nmb;
      if (hi <= lo) continue;
      std::vector<long> idx(order.begin() + lo, order.begin() + hi);
      StackedBatch sb = gather_minibatch(batch, idx, adv, ret);
      Tape tape;
      PpoLossParts parts = ppo_loss(tape, algo, sb, cfg);
      tape.backward(parts.loss);
      GradMap grads;
      tape.param_grads(grads);
      if (cfg.grad_clip > 0.0) clip_grad_norm(grads, cfg.grad_clip);
      algo.params().adam_step(grads, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
      m.policy_loss += parts.policy_loss;
      m.value_loss += parts.value_loss;
      m.entropy += parts.entropy;
      m.approx_kl += parts.approx_kl;
      ++updates;
    }
  }
  if (updates > 0) {
    m.policy_loss /= updates;
    m.value_loss /= updates;
    m.entropy /= updates;
    m.approx_kl /= updates;
  }
  return m;
}

EvalMetrics evaluate(const Algorithm& algo, const World& prototype, int episodes, uint64_t seed,
                     bool greedy, const EventSink& event_sink) {
  EvalMetrics m;
  if (episodes <= 0) return m;
  auto world = prototype.clone_fresh();
  RngStream rng(derive_seed(seed, 0xEA7));
  double total_return = 0.0;
  long total_len = 0;
  int successes = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    WorldStep cur = world->reset(derive_seed(seed, 0x2000 + ep));
    double ep_return = 0.0;
    while (!cur.done) {
      ActOut act = algo.act(cur.obs, cur.alive, rng, greedy);
      cur = world->step(act.actions);
      if (event_sink)
        for (const WorldEvent& ev : cur.events) event_sink(ep, ev);
      ep_return += cur.reward;
      ++total_len;
    }
    total_return += ep_return;
    successes += world->success() ? 1 : 0;
  }
  m.episodes = episodes;
  m.mean_return = total_return / episodes;
  m.success_rate = static_cast<double>(successes) / episodes;
  m.mean_length = static_cast<double>(total_len) / episodes;
  return m;
}

void train_run(Algorithm& algo, const World& prototype, const PpoConfig& cfg,
               const RunOptions& opts) {
  namespace fs = std::filesystem;
  if (opts.out_dir.empty()) throw std::invalid_argument("train_run: out_dir required");
  fs::create_directories(opts.out_dir);
  MetricsWriter metrics(opts.out_dir + "/metrics.csv");
  MetricsWriter eval_log(opts.out_dir + "/eval.csv",
                         {"iteration", "episodes", "mean_return", "success_rate", "mean_length"});

  long env_steps_total = 0;
  for (int iter = 0; iter < opts.iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationMetrics m =
        train_iteration(algo, prototype, cfg, iter, opts.seed, opts.workers, &env_steps_total);
    if (opts.wallclock) {
      m.wallclock_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    metrics.append(m);
    if (!opts.quiet)
      std::cout << "iter " << iter << "  steps " << m.env_steps_total << "  return "
                << m.mean_return << "  success " << m.success_rate << "  entropy " << m.entropy
                << std::endl;
    if (opts.eval_every > 0 && (iter + 1) % opts.eval_every == 0) {
      EvalMetrics e = evaluate(algo, prototype, opts.eval_episodes,
                               derive_seed(opts.seed, 0xE0A1 + iter), /*greedy=*/true);
      eval_log.append_row({static_cast<double>(iter), static_cast<double>(e.episodes),
                           e.mean_return, e.success_rate, e.mean_length});
    }
    if (opts.checkpoint_every > 0 && (iter + 1) % opts.checkpoint_every == 0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "ckpt_%06d.bin", iter + 1);
      save_checkpoint(algo.params(), opts.out_dir + "/" + std::string(buf));
    }
  }
  save_checkpoint(algo.params(), opts.out_dir + "/ckpt_final.bin");
}

}  // namespace dicg
