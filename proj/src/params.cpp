#include <cmath>
#include <stdexcept>

#include "dicg/params.hpp"

namespace dicg {

std::shared_ptr<Matrix> ParameterStore::create(const std::string& name, int rows, int cols) {
  if (name.empty()) throw std::invalid_argument("ParameterStore: empty name");
  if (entries_.count(name))
    throw std::invalid_argument("ParameterStore: duplicate parameter '" + name + "'");
  Entry e;
  e.value = std::make_shared<Matrix>(rows, cols);
  e.m = Matrix(rows, cols);
  e.v = Matrix(rows, cols);
  auto ptr = e.value;
  entries_.emplace(name, std::move(e));
  return ptr;
}

std::shared_ptr<const Matrix> ParameterStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw std::invalid_argument("ParameterStore: unknown parameter '" + name + "'");
  return it->second.value;
}

std::shared_ptr<Matrix> ParameterStore::get_mutable(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw std::invalid_argument("ParameterStore: unknown parameter '" + name + "'");
  return it->second.value;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, _] : entries_) out.push_back(k);
  return out;
}

int64_t ParameterStore::step_count(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw std::invalid_argument("ParameterStore: unknown parameter '" + name + "'");
  return it->second.step;
}

void ParameterStore::init_uniform_xavier(const std::string& name, RngStream& rng) {
  auto m = get_mutable(name);
  const double a = std::sqrt(6.0 / (m->rows + m->cols));
  for (double& x : m->v) x = rng.uniform_range(-a, a);
}

void ParameterStore::adam_step(const GradMap& grads, double lr, double beta1, double beta2,
                               double eps) {
  for (const auto& [name, g] : grads) {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw std::invalid_argument("adam_step: gradient for unknown parameter '" + name + "'");
    Entry& e = it->second;
    if (!g.same_shape(*e.value))
      throw std::invalid_argument("adam_step: gradient shape " + g.shape_str() +
                                  " does not match parameter '" + name + "' (" +
                                  e.value->shape_str() + ")");
    e.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(e.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(e.step));
    double* w = e.value->v.data();
    double* m = e.m.v.data();
    double* v = e.v.v.data();
    const double* gv = g.v.data();
    const size_t n = g.size();
    for (size_t i = 0; i < n; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * gv[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * gv[i] * gv[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

void ParameterStore::load_values(const std::map<std::string, Matrix>& values) {
  for (const auto& [name, e] : entries_)
    if (!values.count(name))
      throw std::invalid_argument("load_values: checkpoint is missing parameter '" + name + "'");
  for (const auto& [name, m] : values) {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw std::invalid_argument("load_values: checkpoint has unexpected parameter '" + name +
                                  "'");
    Entry& e = it->second;
    if (!m.same_shape(*e.value))
      throw std::invalid_argument("load_values: parameter '" + name + "' has shape " +
                                  m.shape_str() + ", expected " + e.value->shape_str());
    *e.value = m;
    e.m = Matrix(m.rows, m.cols);
    e.v = Matrix(m.rows, m.cols);
    e.step = 0;
  }
}

std::map<std::string, Matrix> ParameterStore::snapshot_values() const {
  std::map<std::string, Matrix> out;
  for (const auto& [name, e] : entries_) out.emplace(name, *e.value);
  return out;
}

double global_grad_norm(const GradMap& grads) {
  double s = 0.0;
  for (const auto& [_, g] : grads)
    for (double x : g.v) s += x * x;
  return std::sqrt(s);
}

void clip_grad_norm(GradMap& grads, double max_norm) {
  const double norm = global_grad_norm(grads);
  if (norm <= max_norm || norm == 0.0) return;
  const double f = max_norm / norm;
  for (auto& [_, g] : grads)
    for (double& x : g.v) x *= f;
}

}  // namespace dicg
