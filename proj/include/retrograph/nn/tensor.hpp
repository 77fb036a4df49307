//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_NN_TENSOR_HPP_
#define RETROGRAPH_NN_TENSOR_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace retro::nn {

#ifdef RETROGRAPH_FLOAT32
using Real = float;
#else
using Real = double;
#endif

using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Param {
  Matrix value;
  Matrix grad;
  int fan_in = 1;
};

// Named learnable tensors. Iteration order is the name order, which keeps
// optimizer updates and checkpoints deterministic.
class ParamStore {
public:
  // Creates a parameter initialized uniformly in +-1/sqrt(fan_in), where
  // fan_in is the row count. Throws if the name exists.
  Param &add(const std::string &name, int rows, int cols, std::mt19937_64 &rng);
  Param &add_zero(const std::string &name, int rows, int cols);

  bool contains(const std::string &name) const { return params_.count(name) != 0; }
  Param &get(const std::string &name);
  const Param &get(const std::string &name) const;

  std::map<std::string, Param> &all() { return params_; }
  const std::map<std::string, Param> &all() const { return params_; }
  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;

  void zero_grad();

private:
  std::map<std::string, Param> params_;
};

class Tape;

// Handle to a node on a tape.
class Var {
public:
  Var() = default;
  Var(Tape *tape, int id): tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape *tape() const { return tape_; }
  const Matrix &value() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  Real scalar() const { return value()(0, 0); }

private:
  Tape *tape_ = nullptr;
  int id_ = -1;
};

struct BackwardReport {
  // Parameters of the store that received no gradient from the loss.
  std::vector<std::string> disconnected;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so walking them
// backwards is a valid topological order.
class Tape {
public:
  using BackwardFn = std::function<void(Tape &, int self)>;

  Var constant(Matrix value);
  Var param(Param &p);
  Var param(ParamStore &store, const std::string &name) { return param(store.get(name)); }
  Var push(Matrix value, std::vector<int> inputs, BackwardFn backward);

  const Matrix &value(int id) const { return nodes_[id].value; }
  // Gradient buffer of a node, allocated as zeros on first access.
  Matrix &grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  // Back-propagates d(loss)/d(node) into the parameters. The loss must be
  // 1x1. Checks the loss and every parameter gradient for NaN/Inf. Clears
  // the tape.
  BackwardReport backward(Var loss, ParamStore *store = nullptr);

  int size() const { return static_cast<int>(nodes_.size()); }
  void clear();

private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool needs_grad = false;
    BackwardFn backward;
    Param *param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Param *, int> param_nodes_;
};

// Keeps large tape buffers on the heap instead of fresh mmap calls. Safe to
// call more than once; a no-op outside glibc.
void tune_allocator();

// ---- operations -----------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var add(std::initializer_list<Var> terms);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, Real s);
// a (n x d) plus a 1 x d row added to every row.
Var add_row(Var a, Var row);
Var relu(Var a);
Var sigmoid(Var a);
Var abs_diff(Var a, Var b);
Var concat_cols(const std::vector<Var> &parts);
Var concat_rows(const std::vector<Var> &parts);
// Column sums: (n x d) -> (1 x d).
Var sum_rows(Var a);
Var sum_all(Var a);
Var reshape(Var a, int rows, int cols);
Var gather_rows(Var a, std::vector<int> index);
// out[index[i]] += a[i]; out has `rows` rows.
Var scatter_add_rows(Var a, std::vector<int> index, int rows);
// Elements a(r, c) stacked into a column.
Var pick(Var a, std::vector<std::pair<int, int>> cells);

// Row-wise log-softmax. Masked entries (mask 0) get -inf and no gradient.
// A row with every entry masked is an error.
Var log_softmax_rows(Var a, const std::vector<std::uint8_t> *mask = nullptr);
Var softmax_rows(Var a, const std::vector<std::uint8_t> *mask = nullptr);
// Log-softmax of a column vector within contiguous segments
// [starts[k], starts[k+1]); `starts` ends with the total length.
Var log_softmax_segments(Var a, const std::vector<int> &starts, const std::vector<std::uint8_t> *mask = nullptr);
// Sum over rows of -log sigmoid(z) for target 1 and -log(1 - sigmoid(z))
// for target 0; z is a column vector.
Var bce_with_logits(Var z, const std::vector<std::uint8_t> &targets);
// Sum of -logp(i, labels[i]) over rows.
Var nll_rows(Var logp, const std::vector<int> &labels);

}  // namespace retro::nn

#endif  // RETROGRAPH_NN_TENSOR_HPP_
