//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "retrograph/error.hpp"
#include "retrograph/nn/checkpoint.hpp"
#include "retrograph/nn/optim.hpp"
#include "retrograph/nn/tensor.hpp"

using namespace retro;
using nn::Matrix;
namespace oracle = retro::testing;

namespace {

Matrix mat(int r, int c, std::initializer_list<nn::Real> v) {
  Matrix m(r, c);
  int i = 0;
  for (nn::Real x: v)
    m.data()[i++] = x;
  return m;
}

}  // namespace

TEST(Tensor, ReluExample) {
  nn::Tape t;
  nn::Var y = nn::relu(t.constant(mat(1, 3, { -1, 0, 2 })));
  EXPECT_EQ(y.value(), mat(1, 3, { 0, 0, 2 }));
}

TEST(Tensor, SoftmaxExample) {
  nn::Tape t;
  nn::Var y = nn::softmax_rows(t.constant(mat(1, 2, { 0, std::log(3.0) })));
  EXPECT_NEAR(y.value()(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(y.value()(0, 1), 0.75, 1e-15);
}

TEST(Tensor, MaskedSoftmax) {
  nn::Tape t;
  std::vector<std::uint8_t> mask = { 1, 0, 1 };
  nn::Var y = nn::log_softmax_rows(t.constant(mat(1, 3, { 1, 100, 1 })), &mask);
  EXPECT_NEAR(y.value()(0, 0), std::log(0.5), 1e-15);
  EXPECT_EQ(y.value()(0, 1), -std::numeric_limits<nn::Real>::infinity());
  std::vector<std::uint8_t> none = { 0, 0, 0 };
  EXPECT_THROW(nn::log_softmax_rows(t.constant(mat(1, 3, { 1, 2, 3 })), &none), ShapeMismatch);
}

TEST(Tensor, SumGradientIsOnes) {
  nn::ParamStore store;
  store.add_zero("x", 2, 3).value = mat(2, 3, { 1, 2, 3, 4, 5, 6 });
  nn::Tape t;
  t.backward(nn::sum_all(t.param(store, "x")), &store);
  EXPECT_EQ(store.get("x").grad, Matrix::Ones(2, 3));
}

TEST(Tensor, DisconnectedParameterReported) {
  nn::ParamStore store;
  store.add_zero("used", 1, 1);
  store.add_zero("unused", 1, 1);
  nn::Tape t;
  nn::BackwardReport r = t.backward(nn::sum_all(t.param(store, "used")), &store);
  ASSERT_EQ(r.disconnected.size(), 1u);
  EXPECT_EQ(r.disconnected[0], "unused");
  EXPECT_EQ(store.get("unused").grad.size() == 0 ? 0.0 : store.get("unused").grad.norm(), 0.0);
}

TEST(Tensor, NonFiniteLossRejected) {
  nn::ParamStore store;
  store.add_zero("x", 1, 1).value(0, 0) = std::numeric_limits<nn::Real>::infinity();
  nn::Tape t;
  EXPECT_THROW(t.backward(nn::sum_all(t.param(store, "x")), &store), NonFinite);
}

TEST(Tensor, ShapeErrors) {
  nn::Tape t;
  EXPECT_THROW(nn::matmul(t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(2, 3))), ShapeMismatch);
  EXPECT_THROW(nn::add(t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(3, 2))), ShapeMismatch);
  EXPECT_THROW(nn::gather_rows(t.constant(Matrix::Zero(2, 3)), { 2 }), ShapeMismatch);
}

// Every differentiable op in one loss, checked against finite differences.
TEST(Tensor, CompositeGradients) {
  std::mt19937_64 rng(3);
  nn::ParamStore store;
  store.add("a", 4, 3, rng);
  store.add("b", 3, 5, rng);
  store.add("row", 1, 5, rng);
  store.add("c", 4, 5, rng);
  auto loss = [&](nn::Tape &t) {
    nn::Var a = t.param(store, "a"), b = t.param(store, "b");
    nn::Var h = nn::add_row(nn::matmul(a, b), t.param(store, "row"));
    nn::Var s = nn::sigmoid(h);
    nn::Var d = nn::abs_diff(s, t.param(store, "c"));
    nn::Var m = nn::mul(d, nn::scale(s, 1.5));
    nn::Var g = nn::gather_rows(m, { 0, 2, 2, 3 });
    nn::Var sc = nn::scatter_add_rows(g, { 1, 0, 1, 2 }, 3);
    nn::Var cat = nn::concat_rows({ sc, nn::sum_rows(m) });
    nn::Var lp = nn::log_softmax_rows(cat);
    nn::Var z = nn::reshape(nn::concat_cols({ nn::sub(h, t.param(store, "c")), m }), 40, 1);
    std::vector<std::uint8_t> tg(40);
    for (int i = 0; i < 40; ++i)
      tg[i] = static_cast<std::uint8_t>(i % 3 == 0);
    nn::Var seg = nn::log_softmax_segments(nn::pick(h, { { 0, 0 }, { 1, 1 }, { 2, 2 }, { 3, 3 }, { 0, 4 } }),
                                           { 0, 2, 5 });
    return nn::add({ nn::nll_rows(lp, { 0, 4, 2, 1 }), nn::bce_with_logits(z, tg), nn::sum_all(seg) });
  };
  oracle::GradCheck gc = oracle::check_gradients(store, loss);
  EXPECT_LT(gc.max_rel_error, 1e-6) << gc.worst;
  EXPECT_GT(gc.probed, 50);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  nn::ParamStore store;
  store.add_zero("x", 1, 2).value = mat(1, 2, { 1.0, -3.0 });
  store.get("x").grad = mat(1, 2, { 0.5, -7.0 });
  nn::Adam opt(nn::AdamConfig { .lr = 0.1 });
  opt.step(store);
  EXPECT_NEAR(store.get("x").value(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(store.get("x").value(0, 1), -2.9, 1e-6);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, QuadraticConverges) {
  nn::ParamStore store;
  store.add_zero("x", 1, 3).value = mat(1, 3, { 4, -2, 7 });
  Matrix target = mat(1, 3, { 1, 2, 3 });
  nn::Adam opt(nn::AdamConfig { .lr = 0.05 });
  for (int i = 0; i < 3000; ++i) {
    store.zero_grad();
    nn::Tape t;
    nn::Var d = nn::sub(t.param(store, "x"), t.constant(target));
    t.backward(nn::sum_all(nn::mul(d, d)), &store);
    opt.step(store);
  }
  EXPECT_LT((store.get("x").value - target).norm(), 1e-3);
}

TEST(Plateau, DecaysAfterPatience) {
  nn::PlateauSchedule s(0.01, 2);
  EXPECT_FALSE(s.update(0.5));
  EXPECT_FALSE(s.update(0.505));
  EXPECT_TRUE(s.update(0.505));
  EXPECT_FALSE(s.update(0.6));
  EXPECT_DOUBLE_EQ(s.best(), 0.6);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  nn::ParamStore a;
  a.add("enc.w", 7, 5, rng);
  a.add("head.b", 1, 3, rng);
  std::string dir = (std::filesystem::temp_directory_path() / "retrograph_ckpt_test").string();
  std::filesystem::remove_all(dir);
  nn::save_checkpoint(dir, a, { { "hidden", 5 } }, 11);
  nn::ParamStore b;
  b.add_zero("enc.w", 7, 5);
  b.add_zero("head.b", 1, 3);
  nlohmann::json meta = nn::load_checkpoint(dir, b);
  EXPECT_EQ(a.get("enc.w").value, b.get("enc.w").value);
  EXPECT_EQ(a.get("head.b").value, b.get("head.b").value);
  EXPECT_EQ(meta.dump().find("\"hidden\":5") != std::string::npos, true);

  nn::ParamStore wrong;
  wrong.add_zero("enc.w", 5, 7);
  wrong.add_zero("head.b", 1, 3);
  EXPECT_THROW(nn::load_checkpoint(dir, wrong), CheckpointError);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(nn::load_checkpoint(dir, b), CheckpointError);
}
