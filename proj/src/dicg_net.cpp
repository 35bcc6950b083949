#include <stdexcept>

#include "dicg/dicg_net.hpp"

namespace dicg {

namespace {

// Replicates a rows x 1 column mask across `cols` columns.
std::shared_ptr<Matrix> spread_mask(const Matrix& col, int cols) {
  auto out = std::make_shared<Matrix>(col.rows, cols);
  for (int i = 0; i < col.rows; ++i) {
    const double m = col.v[i];
    double* r = out->row(i);
    for (int j = 0; j < cols; ++j) r[j] = m;
  }
  return out;
}

int count_live(const std::vector<uint8_t>& alive) {
  int c = 0;
  for (uint8_t a : alive) c += a ? 1 : 0;
  return c;
}

}  // namespace

void DicgConfig::validate() const {
  if (n_max <= 0) throw std::invalid_argument("DicgConfig: n_max must be positive");
  if (obs_dim <= 0) throw std::invalid_argument("DicgConfig: obs_dim must be positive");
  if (embed_dim < 1) throw std::invalid_argument("DicgConfig: embed_dim must be >= 1");
  if (gcn_layers < 1) throw std::invalid_argument("DicgConfig: gcn_layers must be >= 1");
  if (mode == DicgMode::kCtce && action_count <= 0)
    throw std::invalid_argument("DicgConfig: action_count required in CTCE mode");
}

DicgNet::DicgNet(DicgConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  encoder_ = Mlp("encoder", cfg_.obs_dim, cfg_.encoder_widths, cfg_.embed_dim,
                 /*final_tanh=*/true);
  if (cfg_.mode == DicgMode::kCtce)
    head_ = Mlp("head", cfg_.embed_dim, cfg_.head_widths, cfg_.action_count);
}

void DicgNet::register_params(ParameterStore& store) const {
  encoder_.register_params(store);
  if (!cfg_.uniform_attention)
    store.create("attention.Wa", cfg_.embed_dim, cfg_.embed_dim);
  for (int l = 0; l < cfg_.gcn_layers; ++l)
    store.create("gcn.L" + std::to_string(l) + ".Wc", cfg_.embed_dim, cfg_.embed_dim);
  if (cfg_.mode == DicgMode::kCtce) {
    head_.register_params(store);
  } else {
    store.create("aggregator.W", cfg_.embed_dim, 1);
    store.create("aggregator.b", 1, 1);
  }
}

std::shared_ptr<Matrix> DicgNet::alive_column(const std::vector<uint8_t>& alive) {
  auto col = std::make_shared<Matrix>(static_cast<int>(alive.size()), 1);
  for (size_t i = 0; i < alive.size(); ++i) col->v[i] = alive[i] ? 1.0 : 0.0;
  return col;
}

Tensor DicgNet::encode(Tape& tape, const ParameterStore& store, Tensor obs,
                       std::shared_ptr<const Matrix> alive_col) const {
  if (obs.cols() != cfg_.obs_dim)
    throw std::invalid_argument("encode: observation width " + std::to_string(obs.cols()) +
                                " does not match obs_dim " + std::to_string(cfg_.obs_dim));
  if (obs.rows() % cfg_.n_max != 0)
    throw std::invalid_argument("encode: rows not a multiple of n_max");
  Tensor e = encoder_.forward(tape, store, obs);
  // Bias and tanh give non-live rows a nonzero constant; mask them back to 0.
  Tensor mask = tape.leaf(Matrix(*spread_mask(*alive_col, cfg_.embed_dim)));
  return mul(e, mask);
}

Tensor DicgNet::attention_adjacency(Tape& tape, const ParameterStore& store, Tensor e0,
                                    std::shared_ptr<const Matrix> alive_col) const {
  const int n = cfg_.n_max;
  const int rows = e0.rows();
  const int blocks = rows / n;

  if (cfg_.uniform_attention) {
    std::vector<uint8_t> alive(rows);
    for (int i = 0; i < rows; ++i) alive[i] = alive_col->v[i] != 0.0 ? 1 : 0;
    return tape.leaf(uniform_adjacency_blocks(alive, n));
  }

  Tensor wa = tape.param(store, "attention.Wa");
  return attention_adjacency_op(tape, e0, wa, std::move(alive_col), n);
}

Tensor attention_adjacency_op(Tape& tape, Tensor e0, Tensor wa,
                              std::shared_ptr<const Matrix> alive_col, int n_max) {
  const int n = n_max;
  const int rows = e0.rows();
  const int blocks = rows / n;
  // scores(i,j) = e_j^T Wa e_i  ==  row i of (E Wa^T) dotted with row j of E.
  Tensor x = matmul_nt(e0, wa);
  Tensor s = block_matmul_nt(x, e0, n);

  // Live rows attend over live columns; a non-live row keeps only its own
  // column so the softmax stays well formed, then the row is zeroed.
  auto mask = std::make_shared<Matrix>(rows, n);
  for (int b = 0; b < blocks; ++b) {
    for (int i = 0; i < n; ++i) {
      const int r = b * n + i;
      const bool live_i = alive_col->v[r] != 0.0;
      double* mr = mask->row(r);
      for (int j = 0; j < n; ++j)
        mr[j] = live_i ? (alive_col->v[b * n + j] != 0.0 ? 1.0 : 0.0) : (i == j ? 1.0 : 0.0);
    }
  }
  Tensor m = softmax_rows(s, mask);
  Tensor row_mask = tape.leaf(Matrix(*spread_mask(*alive_col, n)));
  return mul(m, row_mask);
}

Tensor DicgNet::gcn_layer(Tape& tape, const ParameterStore& store, Tensor h, Tensor adjacency,
                          int layer) const {
  if (layer < 0 || layer >= cfg_.gcn_layers)
    throw std::invalid_argument("gcn_layer: layer index out of range");
  Tensor wc = tape.param(store, "gcn.L" + std::to_string(layer) + ".Wc");
  Tensor mh = block_matmul_nn(adjacency, h, cfg_.n_max);
  return tanh_map(matmul(mh, wc));
}

DicgNet::Forward DicgNet::forward_stacked(Tape& tape, const ParameterStore& store, Tensor obs,
                                          std::shared_ptr<const Matrix> alive_col) const {
  Tensor e0 = encode(tape, store, obs, alive_col);
  Tensor adjacency = attention_adjacency(tape, store, e0, alive_col);
  Tensor h = e0;
  for (int l = 0; l < cfg_.gcn_layers; ++l) h = gcn_layer(tape, store, h, adjacency, l);
  Tensor etilde = add(e0, h);
  return Forward{e0, etilde, adjacency};
}

DicgNet::Forward DicgNet::forward_step(Tape& tape, const ParameterStore& store, const Matrix& obs,
                                       const std::vector<uint8_t>& alive) const {
  if (static_cast<int>(alive.size()) != cfg_.n_max)
    throw std::invalid_argument("forward_step: alive mask size mismatch");
  if (count_live(alive) == 0)
    throw std::invalid_argument("forward_step: no live agents");
  Tensor o = tape.leaf(obs);
  return forward_stacked(tape, store, o, alive_column(alive));
}

Tensor DicgNet::ctce_logits(Tape& tape, const ParameterStore& store, Tensor etilde,
                            std::shared_ptr<const Matrix> alive_col) const {
  if (cfg_.mode != DicgMode::kCtce)
    throw std::logic_error("ctce_logits: network is not in CTCE mode");
  Tensor logits = head_.forward(tape, store, etilde);
  Tensor mask = tape.leaf(Matrix(*spread_mask(*alive_col, cfg_.action_count)));
  return mul(logits, mask);
}

Tensor DicgNet::ctde_baseline(Tape& tape, const ParameterStore& store, Tensor etilde,
                              std::shared_ptr<const Matrix> alive_col) const {
  if (cfg_.mode != DicgMode::kCtde)
    throw std::logic_error("ctde_baseline: network is not in CTDE mode");
  Tensor w = tape.param(store, "aggregator.W");
  Tensor b = tape.param(store, "aggregator.b");
  Tensor per_row = add_row_broadcast(matmul(etilde, w), b);
  Tensor masked = mul(per_row, tape.leaf(Matrix(*alive_col)));
  if (cfg_.per_agent_baseline) return masked;
  return block_mean_rows(masked, alive_col, cfg_.n_max);
}

Tensor DicgNet::ctde_baseline_step(Tape& tape, const ParameterStore& store, Tensor etilde,
                                   const std::vector<uint8_t>& alive) const {
  if (count_live(alive) == 0)
    throw std::invalid_argument("ctde_baseline: no live agents");
  return ctde_baseline(tape, store, etilde, alive_column(alive));
}

Matrix uniform_adjacency_blocks(const std::vector<uint8_t>& alive, int n_max) {
  if (n_max <= 0 || alive.size() % static_cast<size_t>(n_max) != 0)
    throw std::invalid_argument("uniform_adjacency_blocks: bad mask length");
  const int blocks = static_cast<int>(alive.size()) / n_max;
  Matrix m(static_cast<int>(alive.size()), n_max);
  for (int b = 0; b < blocks; ++b) {
    int live = 0;
    for (int i = 0; i < n_max; ++i) live += alive[b * n_max + i] ? 1 : 0;
    if (live == 0) continue;
    const double w = 1.0 / live;
    for (int i = 0; i < n_max; ++i) {
      if (!alive[b * n_max + i]) continue;
      double* r = m.row(b * n_max + i);
      for (int j = 0; j < n_max; ++j)
        if (alive[b * n_max + j]) r[j] = w;
    }
  }
  return m;
}

}  // namespace dicg
