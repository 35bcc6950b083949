#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dicg/matrix.hpp"
#include "dicg/params.hpp"

namespace dicg {

class Tape;

// Handle to a node on a tape. Cheap to copy; the tape owns all storage.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Matrix& value() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
  double scalar() const;  // value of a 1x1 tensor
};

enum class OpKind : uint8_t {
  Leaf,
  MatMul,        // a b
  MatMulNT,      // a b^T
  BlockNT,       // per block: A_b B_b^T
  BlockNN,       // per block: A_b B_b
  Add,
  Sub,
  Mul,
  Scale,         // c0 * a
  AddRowBcast,   // a + broadcast row b
  Tanh,
  Exp,
  Clip,          // clamp to [c0, c1], zero gradient outside the open interval
  MinElem,       // elementwise min; gradient follows the smaller side (ties: a)
  SoftmaxRows,   // masked row softmax
  LogProbRows,   // log softmax gathered at an action index per unmasked row
  EntropyRows,   // categorical entropy per unmasked row
  SumAll,        // sum of all entries -> 1x1
  Reshape,       // same buffer, new shape
  ConcatCols,    // [a | b]
  BlockMeanRows, // per block: mean over mask-selected rows -> one row per block
};

// Dynamic tape: operations execute eagerly and record what backward needs.
// One backward pass per tape; gradients accumulate additively at fan-out.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(Matrix m, bool requires_grad = false);
  // Leaf sharing storage with the caller (used for parameters; no copy).
  Tensor leaf_shared(std::shared_ptr<const Matrix> m, bool requires_grad,
                     std::string param_name = {});
  // Parameter leaf: shares the store's matrix and tags it for param_grads().
  Tensor param(const ParameterStore& store, const std::string& name);

  size_t node_count() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // Reverse-mode sweep from a 1x1 loss. Errors if the loss is not scalar or
  // the tape was already consumed.
  void backward(Tensor loss);

  // Gradient of the last backward with respect to a tensor (zeros if the
  // tensor was never reached). Only meaningful after backward().
  Matrix grad_of(Tensor t) const;

  // Accumulates (+=) gradients of parameter leaves into `out`.
  void param_grads(GradMap& out) const;

  const Matrix& value(int id) const;

  struct Node {
    OpKind op = OpKind::Leaf;
    int a = -1, b = -1;
    std::shared_ptr<const Matrix> shared;  // leaf payload when shared
    Matrix value;                          // output (or owned leaf data)
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    double c0 = 0.0, c1 = 0.0;
    int block = 0;
    std::shared_ptr<const Matrix> aux;   // mask or saved probabilities
    std::shared_ptr<const Matrix> aux2;  // second saved payload
    std::vector<int> actions;
    std::string param_name;

    const Matrix& val() const { return shared ? *shared : value; }
  };

  // Internal: append a computed node, returns its handle.
  Tensor push(Node n);
  const Node& node(int id) const { return nodes_[id]; }

 private:
  void backprop_node(int id);
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---- recorded operations -------------------------------------------------
Tensor matmul(Tensor a, Tensor b);
Tensor matmul_nt(Tensor a, Tensor b);
Tensor block_matmul_nt(Tensor a, Tensor b, int block);
Tensor block_matmul_nn(Tensor a, Tensor b, int block);
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);
Tensor scale(Tensor a, double c);
Tensor add_row_broadcast(Tensor a, Tensor row);
Tensor tanh_map(Tensor a);
Tensor exp_map(Tensor a);
Tensor clip(Tensor a, double lo, double hi);
Tensor min_elem(Tensor a, Tensor b);
// Masked row softmax. mask entries are 0/1 and must leave at least one
// active entry per row; masked outputs are exactly 0. Null mask = all on.
Tensor softmax_rows(Tensor a, std::shared_ptr<const Matrix> mask = nullptr);
Tensor sum_all(Tensor a);
Tensor reshape(Tensor a, int rows, int cols);
Tensor concat_cols(Tensor a, Tensor b);
// Per block of `block` rows: mean over rows with row_mask != 0; one output
// row per block (zero when the block has no selected rows).
Tensor block_mean_rows(Tensor a, std::shared_ptr<const Matrix> row_mask, int block);

struct CategoricalStats {
  Tensor logprob;  // n x 1, log pi(action | logits row); 0 for masked rows
  Tensor entropy;  // n x 1, categorical entropy; 0 for masked rows
};
// Per-row categorical log-probability and entropy, both differentiable
// through the logits. row_mask (n x 1, may be null) selects live rows;
// action indices of masked rows are ignored.
CategoricalStats categorical_stats(Tensor logits, const std::vector<int>& actions,
                                   std::shared_ptr<const Matrix> row_mask = nullptr);

// Stable log(sum(exp(z))) over k entries. Action sampling and the recorded
// log-probability ops share this, so stored rollout log-probabilities are
// bit-identical to what a training-time forward recomputes.
double log_sum_exp(const double* z, int k);

}  // namespace dicg
