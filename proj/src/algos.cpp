#include <algorithm>
#include <stdexcept>

#include "dicg/algos.hpp"

namespace dicg {

WorldDims world_dims(const World& w) {
  return WorldDims{w.n_slots(), w.obs_dim(), w.action_count(), w.noop_action()};
}

Matrix uniform_adjacency(const std::vector<uint8_t>& alive) {
  bool any = false;
  for (uint8_t a : alive) any = any || a;
  if (!any) throw std::invalid_argument("uniform_adjacency: no live agents");
  return uniform_adjacency_blocks(alive, static_cast<int>(alive.size()));
}

namespace {

int live_count(const std::vector<uint8_t>& alive) {
  int c = 0;
  for (uint8_t a : alive) c += a ? 1 : 0;
  return c;
}

// Samples one action per live row from softmax(logits); greedy picks the
// argmax (lowest index wins ties). Stored log-probabilities use the same
// log-sum-exp as the recorded training op.
void sample_rows(const Matrix& logits, const std::vector<uint8_t>& alive, RngStream& rng,
                 bool greedy, int noop, ActOut& out) {
  const int n = logits.rows, k = logits.cols;
  out.actions.assign(n, noop);
  out.logp.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    const double* z = logits.row(i);
    const double lse = log_sum_exp(z, k);
    int a = 0;
    if (greedy) {
      for (int j = 1; j < k; ++j)
        if (z[j] > z[a]) a = j;
    } else {
      const double u = rng.uniform();
      double cum = 0.0;
      a = k - 1;
      for (int j = 0; j < k; ++j) {
        cum += std::exp(z[j] - lse);
        if (u < cum) {
          a = j;
          break;
        }
      }
    }
    out.actions[i] = a;
    out.logp[i] = z[a] - lse;
  }
}

std::vector<int> fit_widths(const std::vector<int>& widths) { return widths; }

// ---- DICG-CE: coordination stack in the actor, concat-observation critic --

class DicgCeAlgo final : public Algorithm {
 public:
  DicgCeAlgo(const AlgoSpec& spec, const WorldDims& dims, uint64_t seed) : Algorithm(dims) {
    DicgConfig cfg;
    cfg.n_max = dims.n_slots;
    cfg.obs_dim = dims.obs_dim;
    cfg.encoder_widths = spec.encoder_widths;
    cfg.embed_dim = spec.embed_dim;
    cfg.gcn_layers = spec.gcn_layers;
    cfg.action_count = dims.n_actions;
    cfg.mode = DicgMode::kCtce;
    cfg.head_widths = spec.policy_widths;
    net_ = DicgNet(cfg);
    critic_ = Mlp("critic", dims.n_slots * dims.obs_dim, fit_widths(spec.critic_widths), 1);
    net_.register_params(params_);
    critic_.register_params(params_);
    RngStream rng(seed);
    init_store(params_, rng);
  }

  std::string kind() const override { return "dicg_ce"; }

  ActOut act(const Matrix& obs, const std::vector<uint8_t>& alive, RngStream& rng,
             bool greedy) const override {
    ActOut out;
    out.value = state_value(obs, alive);
    if (live_count(alive) == 0) {
      out.actions.assign(dims_.n_slots, dims_.noop_action);
      out.logp.assign(dims_.n_slots, 0.0);
      return out;
    }
    Tape tape;
    auto fwd = net_.forward_step(tape, params_, obs, alive);
    auto alive_col = DicgNet::alive_column(alive);
    Tensor logits = net_.ctce_logits(tape, params_, fwd.etilde, alive_col);
    sample_rows(logits.value(), alive, rng, greedy, dims_.noop_action, out);
    return out;
  }

  double state_value(const Matrix& obs, const std::vector<uint8_t>&) const override {
    Tape tape;
    Tensor o = tape.leaf(obs);
    Tensor flat = reshape(o, 1, dims_.n_slots * dims_.obs_dim);
    return critic_.forward(tape, params_, flat).value().v[0];
  }

  BatchEval evaluate_batch(Tape& tape, const StackedBatch& b) const override {
    Tensor obs = tape.leaf_shared(b.obs, false);
    auto fwd = net_.forward_stacked(tape, params_, obs, b.alive_col);
    Tensor logits = net_.ctce_logits(tape, params_, fwd.etilde, b.alive_col);
    auto stats = categorical_stats(logits, b.actions, b.alive_col);
    Tensor flat = reshape(obs, b.steps, dims_.n_slots * dims_.obs_dim);
    Tensor value = critic_.forward(tape, params_, flat);
    return BatchEval{stats.logprob, stats.entropy, value, false};
  }

  bool attention_matrix(const Matrix& obs, const std::vector<uint8_t>& alive,
                        Matrix* adjacency) const override {
    if (live_count(alive) == 0) return false;
    Tape tape;
    auto fwd = net_.forward_step(tape, params_, obs, alive);
    if (adjacency) *adjacency = fwd.adjacency.value();
    return true;
  }

  bool embedding_matrices(const Matrix& obs, const std::vector<uint8_t>& alive, Matrix* e0,
                          Matrix* etilde) const override {
    if (live_count(alive) == 0) return false;
    Tape tape;
    auto fwd = net_.forward_step(tape, params_, obs, alive);
    if (e0) *e0 = fwd.e0.value();
    if (etilde) *etilde = fwd.etilde.value();
    return true;
  }

 private:
  DicgNet net_;
  Mlp critic_;
};

// ---- DICG-DE: local policies, coordination stack in the critic ------------

class DicgDeAlgo final : public Algorithm {
 public:
  DicgDeAlgo(const AlgoSpec& spec, const WorldDims& dims, uint64_t seed, bool uniform)
      : Algorithm(dims), uniform_(uniform) {
    DicgConfig cfg;
    cfg.n_max = dims.n_slots;
    cfg.obs_dim = dims.obs_dim;
    cfg.encoder_widths = spec.encoder_widths;
    cfg.embed_dim = spec.embed_dim;
    cfg.gcn_layers = spec.gcn_layers;
    cfg.mode = DicgMode::kCtde;
    cfg.per_agent_baseline = spec.per_agent_baseline;
    cfg.uniform_attention = uniform;
    net_ = DicgNet(cfg);
    policy_ = Mlp("policy", dims.obs_dim, spec.policy_widths, dims.n_actions);
    net_.register_params(params_);
    policy_.register_params(params_);
    RngStream rng(seed);
    init_store(params_, rng);
  }

  std::string kind() const override { return uniform_ ? "dicg_de_uniform" : "dicg_de"; }

  ActOut act(const Matrix& obs, const std::vector<uint8_t>& alive, RngStream& rng,
             bool greedy) const override {
    ActOut out;
    out.value = state_value(obs, alive);
    if (live_count(alive) == 0) {
      out.actions.assign(dims_.n_slots, dims_.noop_action);
      out.logp.assign(dims_.n_slots, 0.0);
      return out;
    }
    Tape tape;
    Tensor logits = policy_.forward(tape, params_, tape.leaf(obs));
    sample_rows(logits.value(), alive, rng, greedy, dims_.noop_action, out);
    return out;
  }

  double state_value(const Matrix& obs, const std::vector<uint8_t>& alive) const override {
    if (live_count(alive) == 0) return 0.0;
    Tape tape;
    auto fwd = net_.forward_step(tape, params_, obs, alive);
    Tensor v = net_.ctde_baseline_step(tape, params_, fwd.etilde, alive);
    if (!net_.config().per_agent_baseline) return v.value().v[0];
    // Per-agent mode: the scalar used for advantage estimation is the mean
    // over live agents, which equals the aggregated scalar baseline.
    double s = 0.0;
    int c = 0;
    for (int i = 0; i < v.rows(); ++i)
      if (alive[i]) {
        s += v.value().v[i];
        ++c;
      }
    return c > 0 ? s / c : 0.0;
  }

  BatchEval evaluate_batch(Tape& tape, const StackedBatch& b) const override {
    Tensor obs = tape.leaf_shared(b.obs, false);
    Tensor logits = policy_.forward(tape, params_, obs);
    auto stats = categorical_stats(logits, b.actions, b.alive_col);
    auto fwd = net_.forward_stacked(tape, params_, obs, b.alive_col);
    Tensor value = net_.ctde_baseline(tape, params_, fwd.etilde, b.alive_col);
    return BatchEval{stats.logprob, stats.entropy, value, net_.config().per_agent_baseline};
  }

  bool attention_matrix(const Matrix& obs, const std::vector<uint8_t>& alive,
                        Matrix* adjacency) const override {
    if (live_count(alive) == 0) return false;
    Tape tape;
    auto fwd = net_.forward_step(tape, params_, obs, alive);
    if (adjacency) *adjacency = fwd.adjacency.value();
    return true;
  }

  bool embedding_matrices(const Matrix& obs, const std::vector<uint8_t>& alive, Matrix* e0,
                          Matrix* etilde) const override {
    if (live_count(alive) == 0) return false;
    Tape tape;
    auto fwd = net_.forward_step(tape, params_, obs, alive);
    if (e0) *e0 = fwd.e0.value();
    if (etilde) *etilde = fwd.etilde.value();
    return true;
  }

 private:
  DicgNet net_;
  Mlp policy_;
  bool uniform_ = false;
};

// ---- DEC: shared local policy, concat-observation critic ------------------

class DecAlgo final : public Algorithm {
 public:
  DecAlgo(const AlgoSpec& spec, const WorldDims& dims, uint64_t seed) : Algorithm(dims) {
    policy_ = Mlp("policy", dims.obs_dim, spec.policy_widths, dims.n_actions);
    critic_ = Mlp("critic", dims.n_slots * dims.obs_dim, spec.critic_widths, 1);
    policy_.register_params(params_);
    critic_.register_params(params_);
    RngStream rng(seed);
    init_store(params_, rng);
  }

  std::string kind() const override { return "dec"; }

  ActOut act(const Matrix& obs, const std::vector<uint8_t>& alive, RngStream& rng,
             bool greedy) const override {
    ActOut out;
    out.value = state_value(obs, alive);
    if (live_count(alive) == 0) {
      out.actions.assign(dims_.n_slots, dims_.noop_action);
      out.logp.assign(dims_.n_slots, 0.0);
      return out;
    }
    Tape tape;
    Tensor logits = policy_.forward(tape, params_, tape.leaf(obs));
    sample_rows(logits.value(), alive, rng, greedy, dims_.noop_action, out);
    return out;
  }

  double state_value(const Matrix& obs, const std::vector<uint8_t>&) const override {
    Tape tape;
    Tensor flat = reshape(tape.leaf(obs), 1, dims_.n_slots * dims_.obs_dim);
    return critic_.forward(tape, params_, flat).value().v[0];
  }

  BatchEval evaluate_batch(Tape& tape, const StackedBatch& b) const override {
    Tensor obs = tape.leaf_shared(b.obs, false);
    Tensor logits = policy_.forward(tape, params_, obs);
    auto stats = categorical_stats(logits, b.actions, b.alive_col);
    Tensor flat = reshape(obs, b.steps, dims_.n_slots * dims_.obs_dim);
    Tensor value = critic_.forward(tape, params_, flat);
    return BatchEval{stats.logprob, stats.entropy, value, false};
  }

 private:
  Mlp policy_;
  Mlp critic_;
};

// ---- CENT: one policy over the joint observation, factored heads ----------

class CentAlgo final : public Algorithm {
 public:
  CentAlgo(const AlgoSpec& spec, const WorldDims& dims, uint64_t seed) : Algorithm(dims) {
    policy_ = Mlp("policy", dims.n_slots * dims.obs_dim, spec.policy_widths,
                  dims.n_slots * dims.n_actions);
    critic_ = Mlp("critic", dims.n_slots * dims.obs_dim, spec.critic_widths, 1);
    policy_.register_params(params_);
    critic_.register_params(params_);
    RngStream rng(seed);
    init_store(params_, rng);
  }

  std::string kind() const override { return "cent"; }

  ActOut act(const Matrix& obs, const std::vector<uint8_t>& alive, RngStream& rng,
             bool greedy) const override {
    ActOut out;
    out.value = state_value(obs, alive);
    if (live_count(alive) == 0) {
      out.actions.assign(dims_.n_slots, dims_.noop_action);
      out.logp.assign(dims_.n_slots, 0.0);
      return out;
    }
    Tape tape;
    Tensor flat = reshape(tape.leaf(obs), 1, dims_.n_slots * dims_.obs_dim);
    Tensor logits = reshape(policy_.forward(tape, params_, flat), dims_.n_slots, dims_.n_actions);
    sample_rows(logits.value(), alive, rng, greedy, dims_.noop_action, out);
    return out;
  }

  double state_value(const Matrix& obs, const std::vector<uint8_t>&) const override {
    Tape tape;
    Tensor flat = reshape(tape.leaf(obs), 1, dims_.n_slots * dims_.obs_dim);
    return critic_.forward(tape, params_, flat).value().v[0];
  }

  BatchEval evaluate_batch(Tape& tape, const StackedBatch& b) const override {
    Tensor obs = tape.leaf_shared(b.obs, false);
    Tensor flat = reshape(obs, b.steps, dims_.n_slots * dims_.obs_dim);
    Tensor joint = policy_.forward(tape, params_, flat);
    Tensor logits = reshape(joint, b.steps * dims_.n_slots, dims_.n_actions);
    auto stats = categorical_stats(logits, b.actions, b.alive_col);
    Tensor value = critic_.forward(tape, params_, flat);
    return BatchEval{stats.logprob, stats.entropy, value, false};
  }

 private:
  Mlp policy_;
  Mlp critic_;
};

// ---- AMLP-DE: encoder + attention kept, graph convolution replaced by an
// MLP over the concatenated embeddings and attention weights ----------------

class AmlpDeAlgo final : public Algorithm {
 public:
  AmlpDeAlgo(const AlgoSpec& spec, const WorldDims& dims, uint64_t seed)
      : Algorithm(dims), embed_dim_(spec.embed_dim) {
    policy_ = Mlp("policy", dims.obs_dim, spec.policy_widths, dims.n_actions);
    encoder_ = Mlp("encoder", dims.obs_dim, spec.encoder_widths, spec.embed_dim,
                   /*final_tanh=*/true);
    amlp_ = Mlp("amlp", dims.n_slots * spec.embed_dim + dims.n_slots * dims.n_slots,
                spec.critic_widths, 1);
    policy_.register_params(params_);
    encoder_.register_params(params_);
    params_.create("attention.Wa", spec.embed_dim, spec.embed_dim);
    amlp_.register_params(params_);
    RngStream rng(seed);
    init_store(params_, rng);
  }

  std::string kind() const override { return "amlp_de"; }

  ActOut act(const Matrix& obs, const std::vector<uint8_t>& alive, RngStream& rng,
             bool greedy) const override {
    ActOut out;
    out.value = state_value(obs, alive);
    if (live_count(alive) == 0) {
      out.actions.assign(dims_.n_slots, dims_.noop_action);
      out.logp.assign(dims_.n_slots, 0.0);
      return out;
    }
    Tape tape;
    Tensor logits = policy_.forward(tape, params_, tape.leaf(obs));
    sample_rows(logits.value(), alive, rng, greedy, dims_.noop_action, out);
    return out;
  }

  double state_value(const Matrix& obs, const std::vector<uint8_t>& alive) const override {
    Tape tape;
    Tensor v = critic_value(tape, tape.leaf(obs), DicgNet::alive_column(alive), 1);
    return v.value().v[0];
  }

  BatchEval evaluate_batch(Tape& tape, const StackedBatch& b) const override {
    Tensor obs = tape.leaf_shared(b.obs, false);
    Tensor logits = policy_.forward(tape, params_, obs);
    auto stats = categorical_stats(logits, b.actions, b.alive_col);
    Tensor value = critic_value(tape, obs, b.alive_col, b.steps);
    return BatchEval{stats.logprob, stats.entropy, value, false};
  }

  bool attention_matrix(const Matrix& obs, const std::vector<uint8_t>& alive,
                        Matrix* adjacency) const override {
    if (live_count(alive) == 0) return false;
    Tape tape;
    auto [e0, m] = embed_and_attend(tape, tape.leaf(obs), DicgNet::alive_column(alive));
    if (adjacency) *adjacency = m.value();
    return true;
  }

 private:
  std::pair<Tensor, Tensor> embed_and_attend(Tape& tape, Tensor obs,
                                             std::shared_ptr<const Matrix> alive_col) const {
    Tensor e = encoder_.forward(tape, params_, obs);
    auto mask = std::make_shared<Matrix>(e.rows(), e.cols());
    for (int i = 0; i < e.rows(); ++i) {
      const double a = alive_col->v[i];
      double* r = mask->row(i);
      for (int j = 0; j < e.cols(); ++j) r[j] = a;
    }
    Tensor e0 = mul(e, tape.leaf(Matrix(*mask)));
    Tensor wa = tape.param(params_, "attention.Wa");
    Tensor m = attention_adjacency_op(tape, e0, wa, std::move(alive_col), dims_.n_slots);
    return {e0, m};
  }

  // flatten(E0) ++ flatten(M) per timestep, through the critic MLP.
  Tensor critic_value(Tape& tape, Tensor obs, std::shared_ptr<const Matrix> alive_col,
                      int steps) const {
    auto [e0, m] = embed_and_attend(tape, obs, std::move(alive_col));
    Tensor e_flat = reshape(e0, steps, dims_.n_slots * embed_dim_);
    Tensor m_flat = reshape(m, steps, dims_.n_slots * dims_.n_slots);
    return amlp_.forward(tape, params_, concat_cols(e_flat, m_flat));
  }

  Mlp policy_;
  Mlp encoder_;
  Mlp amlp_;
  int embed_dim_ = 0;
};

}  // namespace

const std::vector<std::string>& algorithm_kinds() {
  static const std::vector<std::string> kinds = {"dicg_ce", "dicg_de", "dicg_de_uniform",
                                                 "amlp_de", "dec", "cent"};
  return kinds;
}

std::unique_ptr<Algorithm> make_algorithm(const AlgoSpec& spec, const WorldDims& dims,
                                          uint64_t init_seed) {
  if (spec.kind == "dicg_ce") return std::make_unique<DicgCeAlgo>(spec, dims, init_seed);
  if (spec.kind == "dicg_de") return std::make_unique<DicgDeAlgo>(spec, dims, init_seed, false);
  if (spec.kind == "dicg_de_uniform")
    return std::make_unique<DicgDeAlgo>(spec, dims, init_seed, true);
  if (spec.kind == "amlp_de") return std::make_unique<AmlpDeAlgo>(spec, dims, init_seed);
  if (spec.kind == "dec") return std::make_unique<DecAlgo>(spec, dims, init_seed);
  if (spec.kind == "cent") return std::make_unique<CentAlgo>(spec, dims, init_seed);
  throw std::invalid_argument("make_algorithm: unknown algo kind '" + spec.kind + "'");
}

}  // namespace dicg
