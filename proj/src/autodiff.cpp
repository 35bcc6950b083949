#include <cmath>
#include <stdexcept>

#include "dicg/autodiff.hpp"
#include "dicg/kernels.hpp"

namespace dicg {

const Matrix& Tensor::value() const {
  if (!valid()) throw std::logic_error("Tensor: invalid handle");
  return tape->value(id);
}

double Tensor::scalar() const {
  const Matrix& m = value();
  if (m.rows != 1 || m.cols != 1)
    throw std::invalid_argument("Tensor::scalar: tensor is " + m.shape_str() + ", not 1x1");
  return m.v[0];
}

Tensor Tape::leaf(Matrix m, bool requires_grad) {
  Node n;
  n.op = OpKind::Leaf;
  n.value = std::move(m);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Tensor Tape::leaf_shared(std::shared_ptr<const Matrix> m, bool requires_grad,
                         std::string param_name) {
  if (!m) throw std::invalid_argument("leaf_shared: null matrix");
  Node n;
  n.op = OpKind::Leaf;
  n.shared = std::move(m);
  n.requires_grad = requires_grad;
  n.param_name = std::move(param_name);
  return push(std::move(n));
}

Tensor Tape::param(const ParameterStore& store, const std::string& name) {
  return leaf_shared(store.get(name), true, name);
}

Tensor Tape::push(Node n) {
  if (consumed_) throw std::logic_error("Tape: recording on a consumed tape");
  nodes_.push_back(std::move(n));
  return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value(int id) const { return nodes_[id].val(); }

namespace {

Tape& same_tape(Tensor a, Tensor b) {
  if (!a.valid() || !b.valid() || a.tape != b.tape)
    throw std::logic_error("op: tensors must live on the same tape");
  return *a.tape;
}

Matrix& ensure_grad(Tape::Node& n) {
  if (!n.has_grad) {
    n.grad = Matrix(n.val().rows, n.val().cols);
    n.has_grad = true;
  }
  return n.grad;
}

}  // namespace

// ---- forward builders ------------------------------------------------------

Tensor matmul(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = OpKind::MatMul;
  n.a = a.id;
  n.b = b.id;
  n.value = Matrix(a.rows(), b.cols());
  kernels::matmul_nn(a.value(), b.value(), n.value);
  n.requires_grad = t.node(a.id).requires_grad || t.node(b.id).requires_grad;
  return t.push(std::move(n));
}

Tensor matmul_nt(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = OpKind::MatMulNT;
  n.a = a.id;
  n.b = b.id;
  n.value = Matrix(a.rows(), b.rows());
  kernels::matmul_nt(a.value(), b.value(), n.value);
  n.requires_grad = t.node(a.id).requires_grad || t.node(b.id).requires_grad;
  return t.push(std::move(n));
}

Tensor block_matmul_nt(Tensor a, Tensor b, int block) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = OpKind::BlockNT;
  n.a = a.id;
  n.b = b.id;
  n.block = block;
  n.value = Matrix(a.rows(), block);
  kernels::block_matmul_nt(a.value(), b.value(), block, n.value);
  n.requires_grad = t.node(a.id).requires_grad || t.node(b.id).requires_grad;
  return t.push(std::move(n));
}

Tensor block_matmul_nn(Tensor a, Tensor b, int block) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = OpKind::BlockNN;
  n.a = a.id;
  n.b = b.id;
  n.block = block;
  n.value = Matrix(a.rows(), b.cols());
  kernels::block_matmul_nn(a.value(), b.value(), block, n.value);
  n.requires_grad = t.node(a.id).requires_grad || t.node(b.id).requires_grad;
  return t.push(std::move(n));
}

namespace {
Tensor binary_ewise(OpKind op, Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  n.value = Matrix(a.rows(), a.cols());
  switch (op) {
    case OpKind::Add: kernels::ewise_add(a.value(), b.value(), n.value); break;
    case OpKind::Sub: kernels::ewise_sub(a.value(), b.value(), n.value); break;
    case OpKind::Mul: kernels::ewise_mul(a.value(), b.value(), n.value); break;
    default: throw std::logic_error("binary_ewise: bad op");
  }
  n.requires_grad = t.node(a.id).requires_grad || t.node(b.id).requires_grad;
  return t.push(std::move(n));
}
}  // namespace

Tensor add(Tensor a, Tensor b) { return binary_ewise(OpKind::Add, a, b); }
Tensor sub(Tensor a, Tensor b) { return binary_ewise(OpKind::Sub, a, b); }
Tensor mul(Tensor a, Tensor b) { return binary_ewise(OpKind::Mul, a, b); }

Tensor scale(Tensor a, double c) {
  Tape& t = *a.tape;
  Tape::Node n;
  n.op = OpKind::Scale;
  n.a = a.id;
  n.c0 = c;
  n.value = Matrix(a.rows(), a.cols());
  kernels::scale(a.value(), c, n.value);
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

Tensor add_row_broadcast(Tensor a, Tensor row) {
  Tape& t = same_tape(a, row);
  Tape::Node n;
  n.op = OpKind::AddRowBcast;
  n.a = a.id;
  n.b = row.id;
  n.value = Matrix(a.rows(), a.cols());
  kernels::add_row_broadcast(a.value(), row.value(), n.value);
  n.requires_grad = t.node(a.id).requires_grad || t.node(row.id).requires_grad;
  return t.push(std::move(n));
}

Tensor tanh_map(Tensor a) {
  Tape& t = *a.tape;
  Tape::Node n;
  n.op = OpKind::Tanh;
  n.a = a.id;
  n.value = Matrix(a.rows(), a.cols());
  kernels::tanh_forward(a.value(), n.value);
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

Tensor exp_map(Tensor a) {
  Tape& t = *a.tape;
  Tape::Node n;
  n.op = OpKind::Exp;
  n.a = a.id;
  n.value = Matrix(a.rows(), a.cols());
  kernels::exp_forward(a.value(), n.value);
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

Tensor clip(Tensor a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clip: lo > hi");
  Tape& t = *a.tape;
  Tape::Node n;
  n.op = OpKind::Clip;
  n.a = a.id;
  n.c0 = lo;
  n.c1 = hi;
  n.value = Matrix(a.rows(), a.cols());
  const Matrix& av = a.value();
  for (size_t i = 0; i < av.size(); ++i)
    n.value.v[i] = av.v[i] < lo ? lo : (av.v[i] > hi ? hi : av.v[i]);
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

Tensor min_elem(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  if (!a.value().same_shape(b.value()))
    throw std::invalid_argument("min_elem: shape mismatch");
  Tape::Node n;
  n.op = OpKind::MinElem;
  n.a = a.id;
  n.b = b.id;
  n.value = Matrix(a.rows(), a.cols());
  const Matrix &av = a.value(), &bv = b.value();
  for (size_t i = 0; i < av.size(); ++i) n.value.v[i] = av.v[i] <= bv.v[i] ? av.v[i] : bv.v[i];
  n.requires_grad = t.node(a.id).requires_grad || t.node(b.id).requires_grad;
  return t.push(std::move(n));
}

Tensor softmax_rows(Tensor a, std::shared_ptr<const Matrix> mask) {
  Tape& t = *a.tape;
  Tape::Node n;
  n.op = OpKind::SoftmaxRows;
  n.a = a.id;
  n.aux = std::move(mask);
  n.value = Matrix(a.rows(), a.cols());
  kernels::softmax_rows(a.value(), n.aux.get(), n.value);
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

Tensor sum_all(Tensor a) {
  Tape& t = *a.tape;
  Tape::Node n;
  n.op = OpKind::SumAll;
  n.a = a.id;
  n.value = Matrix(1, 1);
  n.value.v[0] = kernels::sum_all(a.value());
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

Tensor reshape(Tensor a, int rows, int cols) {
  if (static_cast<size_t>(rows) * cols != a.value().size())
    throw std::invalid_argument("reshape: element count mismatch");
  Tape& t = *a.tape;
  Tape::Node n;
  n.op = OpKind::Reshape;
  n.a = a.id;
  n.value = Matrix(rows, cols, a.value().v);
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

Tensor concat_cols(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b);
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row count mismatch");
  Tape::Node n;
  n.op = OpKind::ConcatCols;
  n.a = a.id;
  n.b = b.id;
  n.value = Matrix(a.rows(), a.cols() + b.cols());
  const Matrix &av = a.value(), &bv = b.value();
  for (int i = 0; i < av.rows; ++i) {
    double* o = n.value.row(i);
    const double* ar = av.row(i);
    const double* br = bv.row(i);
    for (int j = 0; j < av.cols; ++j) o[j] = ar[j];
    for (int j = 0; j < bv.cols; ++j) o[av.cols + j] = br[j];
  }
  n.requires_grad = t.node(a.id).requires_grad || t.node(b.id).requires_grad;
  return t.push(std::move(n));
}

Tensor block_mean_rows(Tensor a, std::shared_ptr<const Matrix> row_mask, int block) {
  Tape& t = *a.tape;
  const Matrix& av = a.value();
  if (block <= 0 || av.rows % block != 0)
    throw std::invalid_argument("block_mean_rows: rows not divisible by block");
  if (row_mask && (row_mask->rows != av.rows || row_mask->cols != 1))
    throw std::invalid_argument("block_mean_rows: row_mask must be rows x 1");
  const int nblocks = av.rows / block;
  Tape::Node n;
  n.op = OpKind::BlockMeanRows;
  n.a = a.id;
  n.block = block;
  n.aux = std::move(row_mask);
  n.value = Matrix(nblocks, av.cols);
  for (int bk = 0; bk < nblocks; ++bk) {
    int cnt = 0;
    double* o = n.value.row(bk);
    for (int i = 0; i < block; ++i) {
      const int r = bk * block + i;
      if (n.aux && n.aux->v[r] == 0.0) continue;
      ++cnt;
      const double* ar = av.row(r);
      for (int j = 0; j < av.cols; ++j) o[j] += ar[j];
    }
    if (cnt > 0) {
      const double inv = 1.0 / cnt;
      for (int j = 0; j < av.cols; ++j) o[j] *= inv;
    }
  }
  n.requires_grad = t.node(a.id).requires_grad;
  return t.push(std::move(n));
}

double log_sum_exp(const double* z, int k) {
  double mx = z[0];
  for (int j = 1; j < k; ++j) mx = z[j] > mx ? z[j] : mx;
  double sum = 0.0;
  for (int j = 0; j < k; ++j) sum += std::exp(z[j] - mx);
  return mx + std::log(sum);
}

CategoricalStats categorical_stats(Tensor logits, const std::vector<int>& actions,
                                   std::shared_ptr<const Matrix> row_mask) {
  Tape& t = *logits.tape;
  const Matrix& z = logits.value();
  if (static_cast<int>(actions.size()) != z.rows)
    throw std::invalid_argument("categorical_stats: one action per row required");
  if (row_mask && (row_mask->rows != z.rows || row_mask->cols != 1))
    throw std::invalid_argument("categorical_stats: row_mask must be rows x 1");

  // Shared per-row probabilities, saved once for both backward rules.
  auto probs = std::make_shared<Matrix>(z.rows, z.cols);
  Matrix logp_out(z.rows, 1);
  Matrix ent_out(z.rows, 1);
  for (int i = 0; i < z.rows; ++i) {
    if (row_mask && row_mask->v[i] == 0.0) continue;
    const int a = actions[i];
    if (a < 0 || a >= z.cols)
      throw std::out_of_range("categorical_stats: action index " + std::to_string(a) +
                              " out of range for " + std::to_string(z.cols) + " actions (row " +
                              std::to_string(i) + ")");
    const double* zr = z.row(i);
    const double lse = log_sum_exp(zr, z.cols);
    double h = 0.0;
    double* pr = probs->row(i);
    for (int j = 0; j < z.cols; ++j) {
      const double lp = zr[j] - lse;
      pr[j] = std::exp(lp);
      h -= pr[j] * lp;
    }
    logp_out.v[i] = zr[a] - lse;
    ent_out.v[i] = h;
  }

  const bool rg = t.node(logits.id).requires_grad;

  Tape::Node nl;
  nl.op = OpKind::LogProbRows;
  nl.a = logits.id;
  nl.value = std::move(logp_out);
  nl.aux = probs;
  nl.aux2 = row_mask;
  nl.actions = actions;
  nl.requires_grad = rg;
  Tensor lp = t.push(std::move(nl));

  Tape::Node ne;
  ne.op = OpKind::EntropyRows;
  ne.a = logits.id;
  ne.value = std::move(ent_out);
  ne.aux = probs;
  ne.aux2 = row_mask;
  ne.requires_grad = rg;
  Tensor en = t.push(std::move(ne));

  return CategoricalStats{lp, en};
}

// ---- backward --------------------------------------------------------------

void Tape::backward(Tensor loss) {
  if (loss.tape != this || !loss.valid()) throw std::logic_error("backward: foreign tensor");
  if (consumed_) throw std::logic_error("backward: tape already consumed");
  const Matrix& lv = nodes_[loss.id].val();
  if (lv.rows != 1 || lv.cols != 1)
    throw std::invalid_argument("backward: loss must be 1x1, got " + lv.shape_str());
  consumed_ = true;
  Matrix& g = ensure_grad(nodes_[loss.id]);
  g.v[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad || n.op == OpKind::Leaf) continue;
    backprop_node(id);
  }
}

void Tape::backprop_node(int id) {
  Node& n = nodes_[id];
  const Matrix& g = n.grad;
  Node* na = n.a >= 0 ? &nodes_[n.a] : nullptr;
  Node* nb = n.b >= 0 ? &nodes_[n.b] : nullptr;
  const bool need_a = na && na->requires_grad;
  const bool need_b = nb && nb->requires_grad;

  switch (n.op) {
    case OpKind::Leaf:
      break;
    case OpKind::MatMul:
      if (need_a) kernels::matmul_nt(g, nb->val(), ensure_grad(*na), true);
      if (need_b) kernels::matmul_tn(na->val(), g, ensure_grad(*nb), true);
      break;
    case OpKind::MatMulNT:
      if (need_a) kernels::matmul_nn(g, nb->val(), ensure_grad(*na), true);
      if (need_b) kernels::matmul_tn(g, na->val(), ensure_grad(*nb), true);
      break;
    case OpKind::BlockNT:
      if (need_a) kernels::block_matmul_nn(g, nb->val(), n.block, ensure_grad(*na), true);
      if (need_b) kernels::block_matmul_tn(g, na->val(), n.block, ensure_grad(*nb), true);
      break;
    case OpKind::BlockNN:
      if (need_a) kernels::block_matmul_nt(g, nb->val(), n.block, ensure_grad(*na), true);
      if (need_b) kernels::block_matmul_tn(na->val(), g, n.block, ensure_grad(*nb), true);
      break;
    case OpKind::Add:
      if (need_a) kernels::axpy(1.0, g, ensure_grad(*na));
      if (need_b) kernels::axpy(1.0, g, ensure_grad(*nb));
      break;
    case OpKind::Sub:
      if (need_a) kernels::axpy(1.0, g, ensure_grad(*na));
      if (need_b) kernels::axpy(-1.0, g, ensure_grad(*nb));
      break;
    case OpKind::Mul: {
      if (need_a) {
        Matrix tmp(g.rows, g.cols);
        kernels::ewise_mul(g, nb->val(), tmp);
        kernels::axpy(1.0, tmp, ensure_grad(*na));
      }
      if (need_b) {
        Matrix tmp(g.rows, g.cols);
        kernels::ewise_mul(g, na->val(), tmp);
        kernels::axpy(1.0, tmp, ensure_grad(*nb));
      }
      break;
    }
    case OpKind::Scale:
      if (need_a) kernels::axpy(n.c0, g, ensure_grad(*na));
      break;
    case OpKind::AddRowBcast: {
      if (need_a) kernels::axpy(1.0, g, ensure_grad(*na));
      if (need_b) {
        Matrix cs(1, g.cols);
        kernels::col_sums(g, cs);
        kernels::axpy(1.0, cs, ensure_grad(*nb));
      }
      break;
    }
    case OpKind::Tanh:
      if (need_a) kernels::tanh_backward(g, n.value, ensure_grad(*na));
      break;
    case OpKind::Exp: {
      if (need_a) {
        Matrix tmp(g.rows, g.cols);
        kernels::ewise_mul(g, n.value, tmp);
        kernels::axpy(1.0, tmp, ensure_grad(*na));
      }
      break;
    }
    case OpKind::Clip: {
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        const Matrix& x = na->val();
        for (size_t i = 0; i < x.size(); ++i)
          if (x.v[i] > n.c0 && x.v[i] < n.c1) ga.v[i] += g.v[i];
      }
      break;
    }
    case OpKind::MinElem: {
      const Matrix& av = na->val();
      const Matrix& bv = nb->val();
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        for (size_t i = 0; i < av.size(); ++i)
          if (av.v[i] <= bv.v[i]) ga.v[i] += g.v[i];
      }
      if (need_b) {
        Matrix& gb = ensure_grad(*nb);
        for (size_t i = 0; i < av.size(); ++i)
          if (av.v[i] > bv.v[i]) gb.v[i] += g.v[i];
      }
      break;
    }
    case OpKind::SoftmaxRows: {
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        const Matrix& y = n.value;
        const Matrix* mask = n.aux.get();
        for (int i = 0; i < y.rows; ++i) {
          const double* yr = y.row(i);
          const double* gr = g.row(i);
          const double* mr = mask ? mask->row(i) : nullptr;
          double dot = 0.0;
          for (int j = 0; j < y.cols; ++j)
            if (!mr || mr[j] != 0.0) dot += gr[j] * yr[j];
          double* gar = ga.row(i);
          for (int j = 0; j < y.cols; ++j)
            if (!mr || mr[j] != 0.0) gar[j] += yr[j] * (gr[j] - dot);
        }
      }
      break;
    }
    case OpKind::LogProbRows: {
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        const Matrix& p = *n.aux;
        const Matrix* rm = n.aux2.get();
        for (int i = 0; i < p.rows; ++i) {
          if (rm && rm->v[i] == 0.0) continue;
          const double gi = g.v[i];
          const double* pr = p.row(i);
          double* gar = ga.row(i);
          for (int j = 0; j < p.cols; ++j) gar[j] -= gi * pr[j];
          gar[n.actions[i]] += gi;
        }
      }
      break;
    }
    case OpKind::EntropyRows: {
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        const Matrix& p = *n.aux;
        const Matrix* rm = n.aux2.get();
        for (int i = 0; i < p.rows; ++i) {
          if (rm && rm->v[i] == 0.0) continue;
          const double gi = g.v[i];
          const double h = n.value.v[i];
          const double* pr = p.row(i);
          double* gar = ga.row(i);
          for (int j = 0; j < p.cols; ++j) gar[j] -= gi * pr[j] * (std::log(pr[j]) + h);
        }
      }
      break;
    }
    case OpKind::SumAll:
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        const double gi = g.v[0];
        for (size_t i = 0; i < ga.size(); ++i) ga.v[i] += gi;
      }
      break;
    case OpKind::Reshape:
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        for (size_t i = 0; i < ga.size(); ++i) ga.v[i] += g.v[i];
      }
      break;
    case OpKind::ConcatCols: {
      const int ca = na->val().cols;
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        for (int i = 0; i < g.rows; ++i) {
          const double* gr = g.row(i);
          double* gar = ga.row(i);
          for (int j = 0; j < ca; ++j) gar[j] += gr[j];
        }
      }
      if (need_b) {
        Matrix& gb = ensure_grad(*nb);
        for (int i = 0; i < g.rows; ++i) {
          const double* gr = g.row(i);
          double* gbr = gb.row(i);
          for (int j = 0; j < gb.cols; ++j) gbr[j] += gr[ca + j];
        }
      }
      break;
    }
    case OpKind::BlockMeanRows: {
      if (need_a) {
        Matrix& ga = ensure_grad(*na);
        const int block = n.block;
        const int nblocks = ga.rows / block;
        for (int bk = 0; bk < nblocks; ++bk) {
          int cnt = 0;
          for (int i = 0; i < block; ++i) {
            const int r = bk * block + i;
            if (!n.aux || n.aux->v[r] != 0.0) ++cnt;
          }
          if (cnt == 0) continue;
          const double inv = 1.0 / cnt;
          const double* gr = g.row(bk);
          for (int i = 0; i < block; ++i) {
            const int r = bk * block + i;
            if (n.aux && n.aux->v[r] == 0.0) continue;
            double* gar = ga.row(r);
            for (int j = 0; j < ga.cols; ++j) gar[j] += inv * gr[j];
          }
        }
      }
      break;
    }
  }
}

Matrix Tape::grad_of(Tensor t) const {
  if (t.tape != this || !t.valid()) throw std::logic_error("grad_of: foreign tensor");
  const Node& n = nodes_[t.id];
  if (n.has_grad) return n.grad;
  return Matrix(n.val().rows, n.val().cols);
}

void Tape::param_grads(GradMap& out) const {
  for (const Node& n : nodes_) {
    if (n.param_name.empty() || !n.has_grad) continue;
    auto it = out.find(n.param_name);
    if (it == out.end()) {
      out.emplace(n.param_name, n.grad);
    } else {
      if (!it->second.same_shape(n.grad))
        throw std::invalid_argument("param_grads: shape clash for " + n.param_name);
      kernels::axpy(1.0, n.grad, it->second);
    }
  }
}

}  // namespace dicg
