#pragma once

#include <memory>
#include <vector>

#include "dicg/nets.hpp"

namespace dicg {

enum class DicgMode { kCtce, kCtde };

struct DicgConfig {
  int n_max = 0;
  int obs_dim = 0;
  std::vector<int> encoder_widths{128};
  int embed_dim = 64;
  int gcn_layers = 2;
  int action_count = 0;
  DicgMode mode = DicgMode::kCtde;
  std::vector<int> head_widths{128, 64, 32};  // CTCE policy head
  bool per_agent_baseline = false;            // CTDE: skip the mean over agents
  bool uniform_attention = false;             // ablation: fixed 1/n_alive edges

  void validate() const;
};

// The coordination stack: shared observation encoder, attention-derived soft
// adjacency, graph convolution layers, residual integration, and one output
// head (shared policy head in CTCE mode, linear aggregator in CTDE mode).
//
// The stacked entry points process T timestep blocks of n_max rows at once;
// blocks with zero live rows are tolerated there (their rows and values come
// out zero). The single-step wrappers enforce the public contract that at
// least one agent is live.
class DicgNet {
 public:
  DicgNet() = default;
  explicit DicgNet(DicgConfig cfg);

  void register_params(ParameterStore& store) const;
  const DicgConfig& config() const { return cfg_; }

  // Column mask of live rows (rows x 1) replicated from per-step masks.
  static std::shared_ptr<Matrix> alive_column(const std::vector<uint8_t>& alive);

  // Shared encoder on stacked rows; rows of non-live agents forced to zero.
  Tensor encode(Tape& tape, const ParameterStore& store, Tensor obs,
                std::shared_ptr<const Matrix> alive_col) const;

  // Soft adjacency from bilinear attention scores, one n_max x n_max block
  // per timestep: score(i,j) = e_j^T Wa e_i, masked row softmax over live
  // columns. Rows/columns of non-live agents are zero. Live rows sum to 1.
  Tensor attention_adjacency(Tape& tape, const ParameterStore& store, Tensor e0,
                             std::shared_ptr<const Matrix> alive_col) const;

  // One graph convolution layer: tanh(M H Wc_layer) per block.
  Tensor gcn_layer(Tape& tape, const ParameterStore& store, Tensor h, Tensor adjacency,
                   int layer) const;

  struct Forward {
    Tensor e0;         // (T*n) x d
    Tensor etilde;     // (T*n) x d
    Tensor adjacency;  // (T*n) x n
  };
  Forward forward_stacked(Tape& tape, const ParameterStore& store, Tensor obs,
                          std::shared_ptr<const Matrix> alive_col) const;

  // Single-step wrapper (T = 1). Errors when no agent is live.
  Forward forward_step(Tape& tape, const ParameterStore& store, const Matrix& obs,
                       const std::vector<uint8_t>& alive) const;

  // CTCE: shared policy head on integrated embeddings -> (T*n) x k logits;
  // non-live rows are zeroed (a fixed uniform no-op distribution).
  Tensor ctce_logits(Tape& tape, const ParameterStore& store, Tensor etilde,
                     std::shared_ptr<const Matrix> alive_col) const;

  // CTDE: linear aggregator per row, then mean over live rows per block ->
  // T x 1 centralized values (or (T*n) x 1 when per_agent_baseline is set).
  Tensor ctde_baseline(Tape& tape, const ParameterStore& store, Tensor etilde,
                       std::shared_ptr<const Matrix> alive_col) const;

  // Single-step baseline; errors when no agent is live.
  Tensor ctde_baseline_step(Tape& tape, const ParameterStore& store, Tensor etilde,
                            const std::vector<uint8_t>& alive) const;

 private:
  DicgConfig cfg_;
  Mlp encoder_;
  Mlp head_;
};

// Fixed 1/n_alive adjacency over live agents (the attention ablation): one
// block per timestep, zero entries for non-live rows/columns.
Matrix uniform_adjacency_blocks(const std::vector<uint8_t>& alive, int n_max);

// The attention step on its own (also used by the attention-MLP ablation):
// bilinear scores from e0 blocks and wa, masked row softmax, zeroed non-live
// rows and columns.
Tensor attention_adjacency_op(Tape& tape, Tensor e0, Tensor wa,
                              std::shared_ptr<const Matrix> alive_col, int n_max);

}  // namespace dicg
