//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/nn/tensor.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <cmath>
#include <limits>
#include <sstream>

#include "retrograph/error.hpp"

namespace retro::nn {

namespace {

constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();

std::string shape_str(const Matrix &m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_tape(Var a, Var b) {
  if (a.tape() != b.tape())
    throw ShapeMismatch("operands live on different tapes");
}

void require_same_shape(const char *op, Var a, Var b) {
  require_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch(std::string(op) + ": " + shape_str(a.value()) + " vs " + shape_str(b.value()));
}

}  // namespace

// ---- ParamStore -----------------------------------------------------------

Param &ParamStore::add(const std::string &name, int rows, int cols, std::mt19937_64 &rng) {
  Param &p = add_zero(name, rows, cols);
  p.fan_in = std::max(rows, 1);
  double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < p.value.size(); ++i)
    p.value.data()[i] = static_cast<Real>(dist(rng));
  return p;
}

Param &ParamStore::add_zero(const std::string &name, int rows, int cols) {
  auto [it, inserted] = params_.try_emplace(name);
  if (!inserted)
    throw ShapeMismatch("parameter " + name + " defined twice");
  Param &p = it->second;
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  p.fan_in = std::max(rows, 1);
  return p;
}

Param &ParamStore::get(const std::string &name) {
  auto it = params_.find(name);
  if (it == params_.end())
    throw CheckpointError("unknown parameter " + name);
  return it->second;
}

const Param &ParamStore::get(const std::string &name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw CheckpointError("unknown parameter " + name);
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto &kv: params_)
    out.push_back(kv.first);
  return out;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto &kv: params_)
    n += static_cast<std::size_t>(kv.second.value.size());
  return n;
}

void tune_allocator() {
#if defined(__GLIBC__)
  static const bool done = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
  (void)done;
#endif
}

void ParamStore::zero_grad() {
  for (auto &kv: params_)
    kv.second.grad.setZero();
}

// ---- Tape -----------------------------------------------------------------

const Matrix &Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, size() - 1);
}

Var Tape::param(Param &p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end())
    return Var(this, it->second);
  Node n;
  n.value = p.value;
  n.needs_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  param_nodes_[&p] = size() - 1;
  return Var(this, size() - 1);
}

Var Tape::push(Matrix value, std::vector<int> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (int i: inputs)
    n.needs_grad = n.needs_grad || nodes_[i].needs_grad;
  if (n.needs_grad)
    n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, size() - 1);
}

Matrix &Tape::grad(int id) {
  Node &n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

BackwardReport Tape::backward(Var loss, ParamStore *store) {
  if (loss.tape() != this || loss.rows() != 1 || loss.cols() != 1)
    throw ShapeMismatch("backward needs a 1x1 loss on this tape");
  if (!std::isfinite(static_cast<double>(loss.scalar()))) {
    clear();
    throw NonFinite("loss is not finite");
  }
  grad(loss.id())(0, 0) = 1;
  for (int id = loss.id(); id >= 0; --id) {
    Node &n = nodes_[id];
    if (!n.has_grad || !n.needs_grad)
      continue;
    if (n.backward)
      n.backward(*this, id);
    else if (n.param != nullptr)
      n.param->grad += n.grad;
  }
  BackwardReport report;
  if (store != nullptr) {
    for (auto &[name, p]: store->all()) {
      auto it = param_nodes_.find(&p);
      if (it == param_nodes_.end() || !nodes_[it->second].has_grad)
        report.disconnected.push_back(name);
      if (!p.grad.allFinite()) {
        clear();
        throw NonFinite("gradient of " + name + " is not finite");
      }
    }
  }
  clear();
  return report;
}

void Tape::clear() {
  nodes_.clear();
  param_nodes_.clear();
}

// ---- operations -----------------------------------------------------------

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows())
    throw ShapeMismatch("matmul: " + shape_str(a.value()) + " * " + shape_str(b.value()));
  Tape *t = a.tape();
  Matrix out;
  out.noalias() = a.value() * b.value();
  int ia = a.id(), ib = b.id();
  return t->push(std::move(out), { ia, ib }, [ia, ib](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    if (tp.needs_grad(ia))
      tp.grad(ia).noalias() += g * tp.value(ib).transpose();
    if (tp.needs_grad(ib))
      tp.grad(ib).noalias() += tp.value(ia).transpose() * g;
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() + b.value(), { ia, ib }, [ia, ib](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    if (tp.needs_grad(ia))
      tp.grad(ia) += g;
    if (tp.needs_grad(ib))
      tp.grad(ib) += g;
  });
}

Var add(std::initializer_list<Var> terms) {
  if (terms.size() == 0)
    throw ShapeMismatch("add of nothing");
  std::vector<int> ids;
  const Var &first = *terms.begin();
  Matrix out = first.value();
  for (const Var &v: terms) {
    require_same_shape("add", first, v);
    ids.push_back(v.id());
  }
  for (auto it = terms.begin() + 1; it != terms.end(); ++it)
    out += it->value();
  return first.tape()->push(std::move(out), ids, [ids](Tape &tp, int self) {
    for (int i: ids) {
      if (tp.needs_grad(i))
        tp.grad(i) += tp.grad(self);
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() - b.value(), { ia, ib }, [ia, ib](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    if (tp.needs_grad(ia))
      tp.grad(ia) += g;
    if (tp.needs_grad(ib))
      tp.grad(ib) -= g;
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value().cwiseProduct(b.value()), { ia, ib }, [ia, ib](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    if (tp.needs_grad(ia))
      tp.grad(ia) += g.cwiseProduct(tp.value(ib));
    if (tp.needs_grad(ib))
      tp.grad(ib) += g.cwiseProduct(tp.value(ia));
  });
}

Var scale(Var a, Real s) {
  int ia = a.id();
  return a.tape()->push(a.value() * s, { ia }, [ia, s](Tape &tp, int self) { tp.grad(ia) += tp.grad(self) * s; });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ShapeMismatch("add_row: " + shape_str(a.value()) + " + " + shape_str(row.value()));
  int ia = a.id(), ir = row.id();
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape()->push(std::move(out), { ia, ir }, [ia, ir](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    if (tp.needs_grad(ia))
      tp.grad(ia) += g;
    if (tp.needs_grad(ir))
      tp.grad(ir) += g.colwise().sum();
  });
}

Var relu(Var a) {
  int ia = a.id();
  return a.tape()->push(a.value().cwiseMax(Real(0)), { ia }, [ia](Tape &tp, int self) {
    const Matrix &x = tp.value(ia);
    tp.grad(ia) += (x.array() > Real(0)).select(tp.grad(self), Real(0));
  });
}

Var sigmoid(Var a) {
  int ia = a.id();
  Matrix out = a.value().unaryExpr([](Real x) {
    if (x >= 0)
      return Real(1) / (Real(1) + std::exp(-x));
    Real e = std::exp(x);
    return e / (Real(1) + e);
  });
  return a.tape()->push(std::move(out), { ia }, [ia](Tape &tp, int self) {
    const Matrix &y = tp.value(self);
    tp.grad(ia) += tp.grad(self).cwiseProduct(y.cwiseProduct((Real(1) - y.array()).matrix()));
  });
}

Var abs_diff(Var a, Var b) {
  require_same_shape("abs_diff", a, b);
  int ia = a.id(), ib = b.id();
  return a.tape()->push((a.value() - b.value()).cwiseAbs(), { ia, ib }, [ia, ib](Tape &tp, int self) {
    Matrix sign = (tp.value(ia) - tp.value(ib)).unaryExpr([](Real d) { return Real((d > 0) - (d < 0)); });
    Matrix g = tp.grad(self).cwiseProduct(sign);
    if (tp.needs_grad(ia))
      tp.grad(ia) += g;
    if (tp.needs_grad(ib))
      tp.grad(ib) -= g;
  });
}

Var concat_cols(const std::vector<Var> &parts) {
  if (parts.empty())
    throw ShapeMismatch("concat of nothing");
  int rows = parts[0].rows(), cols = 0;
  std::vector<int> ids, offsets;
  for (const Var &p: parts) {
    require_same_tape(parts[0], p);
    if (p.rows() != rows)
      throw ShapeMismatch("concat_cols: row counts differ");
    ids.push_back(p.id());
    offsets.push_back(cols);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k)
    out.middleCols(offsets[k], parts[k].cols()) = parts[k].value();
  return parts[0].tape()->push(std::move(out), ids, [ids, offsets](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.needs_grad(ids[k]))
        tp.grad(ids[k]) += g.middleCols(offsets[k], tp.value(ids[k]).cols());
    }
  });
}

Var concat_rows(const std::vector<Var> &parts) {
  if (parts.empty())
    throw ShapeMismatch("concat of nothing");
  int cols = parts[0].cols(), rows = 0;
  std::vector<int> ids, offsets;
  for (const Var &p: parts) {
    require_same_tape(parts[0], p);
    if (p.cols() != cols)
      throw ShapeMismatch("concat_rows: column counts differ");
    ids.push_back(p.id());
    offsets.push_back(rows);
    rows += p.rows();
  }
  Matrix out(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k)
    out.middleRows(offsets[k], parts[k].rows()) = parts[k].value();
  return parts[0].tape()->push(std::move(out), ids, [ids, offsets](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.needs_grad(ids[k]))
        tp.grad(ids[k]) += g.middleRows(offsets[k], tp.value(ids[k]).rows());
    }
  });
}

Var sum_rows(Var a) {
  int ia = a.id();
  Matrix out = a.value().colwise().sum();
  return a.tape()->push(std::move(out), { ia }, [ia](Tape &tp, int self) {
    tp.grad(ia).rowwise() += tp.grad(self).row(0);
  });
}

Var sum_all(Var a) {
  int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->push(std::move(out), { ia }, [ia](Tape &tp, int self) {
    tp.grad(ia).array() += tp.grad(self)(0, 0);
  });
}

Var reshape(Var a, int rows, int cols) {
  if (static_cast<Eigen::Index>(rows) * cols != a.value().size())
    throw ShapeMismatch("reshape: " + shape_str(a.value()) + " to " + std::to_string(rows) + "x" + std::to_string(cols));
  int ia = a.id();
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return a.tape()->push(std::move(out), { ia }, [ia](Tape &tp, int self) {
    Matrix &g = tp.grad(ia);
    Eigen::Map<Matrix>(g.data(), g.rows(), g.cols()) += Eigen::Map<const Matrix>(tp.grad(self).data(), g.rows(), g.cols());
  });
}

Var gather_rows(Var a, std::vector<int> index) {
  const Matrix &x = a.value();
  Matrix out(static_cast<Eigen::Index>(index.size()), x.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= x.rows())
      throw ShapeMismatch("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = x.row(index[i]);
  }
  int ia = a.id();
  return a.tape()->push(std::move(out), { ia }, [ia, index = std::move(index)](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    Matrix &ga = tp.grad(ia);
    for (std::size_t i = 0; i < index.size(); ++i)
      ga.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var scatter_add_rows(Var a, std::vector<int> index, int rows) {
  const Matrix &x = a.value();
  if (static_cast<Eigen::Index>(index.size()) != x.rows())
    throw ShapeMismatch("scatter_add_rows: index length differs from row count");
  Matrix out = Matrix::Zero(rows, x.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= rows)
      throw ShapeMismatch("scatter_add_rows: index out of range");
    out.row(index[i]) += x.row(static_cast<Eigen::Index>(i));
  }
  int ia = a.id();
  return a.tape()->push(std::move(out), { ia }, [ia, index = std::move(index)](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    Matrix &ga = tp.grad(ia);
    for (std::size_t i = 0; i < index.size(); ++i)
      ga.row(static_cast<Eigen::Index>(i)) += g.row(index[i]);
  });
}

Var pick(Var a, std::vector<std::pair<int, int>> cells) {
  const Matrix &x = a.value();
  Matrix out(static_cast<Eigen::Index>(cells.size()), 1);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto [r, c] = cells[i];
    if (r < 0 || r >= x.rows() || c < 0 || c >= x.cols())
      throw ShapeMismatch("pick: cell out of range");
    out(static_cast<Eigen::Index>(i), 0) = x(r, c);
  }
  int ia = a.id();
  return a.tape()->push(std::move(out), { ia }, [ia, cells = std::move(cells)](Tape &tp, int self) {
    const Matrix &g = tp.grad(self);
    Matrix &ga = tp.grad(ia);
    for (std::size_t i = 0; i < cells.size(); ++i)
      ga(cells[i].first, cells[i].second) += g(static_cast<Eigen::Index>(i), 0);
  });
}

namespace {

// Log-softmax over the index ranges produced by `range(k)` for k < count.
// Works on a flat buffer so rows and segments share one implementation.
template <typename Range>
void log_softmax_flat(const Real *x, Real *y, int count, Range range, const std::vector<std::uint8_t> *mask) {
  for (int k = 0; k < count; ++k) {
    auto [begin, end] = range(k);
    Real mx = kNegInf;
    for (int i = begin; i < end; ++i) {
      if (mask == nullptr || (*mask)[i])
        mx = std::max(mx, x[i]);
    }
    if (mx == kNegInf)
      throw ShapeMismatch("log-softmax over an empty or fully masked group");
    Real s = 0;
    for (int i = begin; i < end; ++i) {
      if (mask == nullptr || (*mask)[i])
        s += std::exp(x[i] - mx);
    }
    Real lse = mx + std::log(s);
    for (int i = begin; i < end; ++i)
      y[i] = (mask == nullptr || (*mask)[i]) ? x[i] - lse : kNegInf;
  }
}

// d/dx of log-softmax: g - softmax * sum(g), skipping masked entries.
template <typename Range>
void log_softmax_back(const Real *y, const Real *g, Real *gx, int count, Range range,
                      const std::vector<std::uint8_t> *mask) {
  for (int k = 0; k < count; ++k) {
    auto [begin, end] = range(k);
    Real gs = 0;
    for (int i = begin; i < end; ++i) {
      if (mask == nullptr || (*mask)[i])
        gs += g[i];
    }
    for (int i = begin; i < end; ++i) {
      if (mask == nullptr || (*mask)[i])
        gx[i] += g[i] - std::exp(y[i]) * gs;
    }
  }
}

}  // namespace

Var log_softmax_rows(Var a, const std::vector<std::uint8_t> *mask) {
  const Matrix &x = a.value();
  int rows = static_cast<int>(x.rows()), cols = static_cast<int>(x.cols());
  if (mask != nullptr && static_cast<Eigen::Index>(mask->size()) != x.size())
    throw ShapeMismatch("mask size differs from input");
  std::vector<std::uint8_t> m;
  if (mask != nullptr)
    m = *mask;
  auto range = [cols](int k) { return std::pair<int, int>(k * cols, (k + 1) * cols); };
  Matrix out(rows, cols);
  log_softmax_flat(x.data(), out.data(), rows, range, mask);
  int ia = a.id();
  bool masked = mask != nullptr;
  return a.tape()->push(std::move(out), { ia }, [ia, range, rows, masked, m = std::move(m)](Tape &tp, int self) {
    log_softmax_back(tp.value(self).data(), tp.grad(self).data(), tp.grad(ia).data(), rows, range,
                     masked ? &m : nullptr);
  });
}

Var softmax_rows(Var a, const std::vector<std::uint8_t> *mask) {
  Var lp = log_softmax_rows(a, mask);
  int il = lp.id();
  Matrix out = lp.value().array().exp().matrix();
  return a.tape()->push(std::move(out), { il }, [il](Tape &tp, int self) {
    // dp/dlogp = p
    tp.grad(il) += tp.grad(self).cwiseProduct(tp.value(self));
  });
}

Var log_softmax_segments(Var a, const std::vector<int> &starts, const std::vector<std::uint8_t> *mask) {
  const Matrix &x = a.value();
  if (x.cols() != 1)
    throw ShapeMismatch("log_softmax_segments expects a column vector");
  if (starts.empty() || starts.front() != 0 || starts.back() != x.rows())
    throw ShapeMismatch("segment bounds do not cover the input");
  if (mask != nullptr && static_cast<Eigen::Index>(mask->size()) != x.rows())
    throw ShapeMismatch("mask size differs from input");
  std::vector<std::uint8_t> m;
  if (mask != nullptr)
    m = *mask;
  int count = static_cast<int>(starts.size()) - 1;
  auto range = [starts](int k) { return std::pair<int, int>(starts[k], starts[k + 1]); };
  Matrix out(x.rows(), 1);
  log_softmax_flat(x.data(), out.data(), count, range, mask);
  int ia = a.id();
  bool masked = mask != nullptr;
  return a.tape()->push(std::move(out), { ia }, [ia, range, count, masked, m = std::move(m)](Tape &tp, int self) {
    log_softmax_back(tp.value(self).data(), tp.grad(self).data(), tp.grad(ia).data(), count, range,
                     masked ? &m : nullptr);
  });
}

Var bce_with_logits(Var z, const std::vector<std::uint8_t> &targets) {
  const Matrix &x = z.value();
  if (x.cols() != 1 || static_cast<Eigen::Index>(targets.size()) != x.rows())
    throw ShapeMismatch("bce_with_logits: shape");
  Real loss = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Real v = x(i, 0);
    // -log sigmoid(v) = softplus(-v); -log(1 - sigmoid(v)) = softplus(v)
    Real arg = targets[i] ? -v : v;
    loss += std::max(arg, Real(0)) + std::log1p(std::exp(-std::abs(arg)));
  }
  Matrix out(1, 1);
  out(0, 0) = loss;
  int iz = z.id();
  return z.tape()->push(std::move(out), { iz }, [iz, targets](Tape &tp, int self) {
    const Matrix &x = tp.value(iz);
    Real g = tp.grad(self)(0, 0);
    Matrix &gz = tp.grad(iz);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Real v = x(i, 0);
      Real s = v >= 0 ? Real(1) / (Real(1) + std::exp(-v)) : std::exp(v) / (Real(1) + std::exp(v));
      gz(i, 0) += g * (s - (targets[i] ? Real(1) : Real(0)));
    }
  });
}

Var nll_rows(Var logp, const std::vector<int> &labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logp.rows())
    throw ShapeMismatch("nll_rows: one label per row");
  std::vector<std::pair<int, int>> cells;
  for (std::size_t i = 0; i < labels.size(); ++i)
    cells.emplace_back(static_cast<int>(i), labels[i]);
  return scale(sum_all(pick(logp, std::move(cells))), Real(-1));
}

}  // namespace retro::nn
