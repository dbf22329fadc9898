#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "finsage/autograd.hpp"
#include "finsage/optim.hpp"
#include "finsage/rng.hpp"
#include "finsage/tensor.hpp"
#include "fd_check.hpp"

using namespace finsage;
using finsage::testing::fd_check;

TEST_CASE("tensor basics") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  for (std::size_t i = 0; i < 6; ++i) CHECK(t.data()[i] == 0.0);

  Tensor v({4}, {1, 2, 3, 4});
  CHECK(v.rows() == 1);   // rank-1 acts as a single row
  CHECK(v.cols() == 4);

  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK_THROWS(Tensor({2, 2}).item());
  CHECK_THROWS(Tensor({2, 2}, {1.0}));

  Tensor bad({2}, {1.0, std::nan("")});
  CHECK_THROWS_WITH(bad.check_finite("unit-test"),
                    doctest::Contains("unit-test"));
  Tensor ok({2}, {1.0, -1.0});
  CHECK_NOTHROW(ok.check_finite("unit-test"));

  Rng rng(3);
  Tensor g = Tensor::glorot(50, 30, rng);
  const double limit = std::sqrt(6.0 / 80.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.data()[i] <= limit);
    CHECK(g.data()[i] >= -limit);
  }
}

TEST_CASE("forward values match hand-worked results") {
  ag::Tape t;

  SUBCASE("matmul with identity") {
    auto a = t.constant(Tensor({3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
    auto i = t.constant(Tensor::eye(3));
    auto c = ag::matmul(i, a);
    for (std::size_t k = 0; k < 9; ++k) CHECK(c.value().data()[k] == a.value().data()[k]);
  }

  SUBCASE("sigmoid at zero is one half") {
    auto x = t.constant(Tensor::scalar(0.0));
    CHECK(ag::sigmoid(x).value().item() == 0.5);
  }

  SUBCASE("l2 normalization of a 3-4-5 row") {
    auto x = t.constant(Tensor({1, 2}, {3.0, 4.0}));
    auto y = ag::l2_normalize_rows(x);
    CHECK(y.value().at(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(y.value().at(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
  }

  SUBCASE("l2 normalization passes zero rows through and unit-norms the rest") {
    Rng rng(5);
    Tensor m = Tensor::gauss({6, 8}, rng);
    for (std::size_t j = 0; j < 8; ++j) m.at(2, j) = 0.0;
    auto y = ag::l2_normalize_rows(t.constant(m));
    for (std::size_t i = 0; i < 6; ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < 8; ++j) sq += y.value().at(i, j) * y.value().at(i, j);
      if (i == 2)
        CHECK(sq == 0.0);
      else
        CHECK(std::fabs(std::sqrt(sq) - 1.0) < 1e-12);
    }
  }

  SUBCASE("softmax cross entropy of uniform logits is ln C") {
    auto x = t.constant(Tensor::full({4, 7}, 0.37));
    auto loss = ag::softmax_cross_entropy(x, {0, 3, 6, 2});
    CHECK(loss.value().item() == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  }

  SUBCASE("group_mean averages within groups and zeroes empty ones") {
    auto x = t.constant(Tensor({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8}));
    auto m = ag::group_mean(x, {0, 0, 2, 2}, 3);
    CHECK(m.value().at(0, 0) == 2.0);
    CHECK(m.value().at(0, 1) == 3.0);
    CHECK(m.value().at(1, 0) == 0.0);
    CHECK(m.value().at(1, 1) == 0.0);
    CHECK(m.value().at(2, 0) == 6.0);
    CHECK(m.value().at(2, 1) == 7.0);
  }

  SUBCASE("dropout with p=0 or train=false is the identity") {
    Rng rng(1);
    auto x = t.constant(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
    auto y = ag::dropout(x, 0.0, rng, true);
    CHECK(y.index() == x.index());
    auto z = ag::dropout(x, 0.5, rng, false);
    CHECK(z.index() == x.index());
  }

  SUBCASE("dropout keeps entries scaled by 1/(1-p) or zeroed") {
    Rng rng(2);
    auto x = t.constant(Tensor::full({10, 10}, 1.0));
    auto y = ag::dropout(x, 0.4, rng, true);
    int kept = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      const double v = y.value().data()[i];
      const bool zero = v == 0.0;
      const bool scaled = std::fabs(v - 1.0 / 0.6) < 1e-15;
      CHECK((zero || scaled));
      kept += scaled;
    }
    CHECK(kept > 35);
    CHECK(kept < 85);
  }
}

TEST_CASE("binary cross entropy matches the hand-worked derivative at z=0") {
  ag::Tape t;
  auto z = t.leaf(Tensor::scalar(0.0), "z");
  auto p = ag::sigmoid(z);
  auto loss = ag::binary_cross_entropy(p, Tensor::scalar(1.0));
  CHECK(loss.value().item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  t.backward(loss);
  CHECK(z.grad().item() == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("gradients accumulate when a node is reused") {
  ag::Tape t;
  auto x = t.leaf(Tensor::scalar(3.0), "x");
  auto y = ag::sum_all(ag::add(x, x));
  t.backward(y);
  CHECK(x.grad().item() == 2.0);
}

TEST_CASE("backward ignores constants and unused leaves get zero gradients") {
  ag::Tape t;
  auto x = t.leaf(Tensor::scalar(2.0), "x");
  auto unused = t.leaf(Tensor::scalar(5.0), "unused");
  auto c = t.constant(Tensor::scalar(10.0));
  auto loss = ag::sum_all(ag::mul(x, c));
  t.backward(loss);
  auto grads = t.named_grads();
  CHECK(grads.at("x").item() == 10.0);
  CHECK(grads.at("unused").item() == 0.0);
  (void)unused;
}

// ---------------------------------------------------------------------------
// Finite-difference checks: every op that carries gradients in the models.

namespace {

using Builder = std::function<ag::Var(ag::Tape&, const ParamStore&)>;

void check_op(const ParamStore& params_in, const Builder& build, double tol = 1e-4) {
  ParamStore params = params_in;
  ag::Tape tape;
  ag::Var loss = build(tape, params);
  tape.backward(loss);
  ag::Gradients grads = tape.named_grads();
  auto eval = [&build](const ParamStore& ps) {
    ag::Tape t2;
    return build(t2, ps).value().item();
  };
  auto res = fd_check(eval, params, grads);
  INFO("worst entry: ", res.worst);
  CHECK(res.max_rel_err < tol);
}

ParamStore one_param(const std::string& name, Tensor v) {
  ParamStore ps;
  ps.add(name, std::move(v));
  return ps;
}

ag::Var leaf_of(ag::Tape& t, const ParamStore& ps, const std::string& name) {
  return t.leaf(ps.at(name), name);
}

}  // namespace

TEST_CASE("finite differences agree with backward for every op") {
  Rng rng(2024);

  SUBCASE("matmul both sides") {
    ParamStore ps;
    ps.add("a", Tensor::gauss({3, 4}, rng));
    ps.add("b", Tensor::gauss({4, 2}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      return ag::sum_all(ag::matmul(leaf_of(t, p, "a"), leaf_of(t, p, "b")));
    });
  }

  SUBCASE("add, sub, mul, scale, neg") {
    ParamStore ps;
    ps.add("a", Tensor::gauss({2, 5}, rng));
    ps.add("b", Tensor::gauss({2, 5}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto a = leaf_of(t, p, "a");
      auto b = leaf_of(t, p, "b");
      auto y = ag::sub(ag::add(a, b), ag::scale(ag::mul(a, b), 0.5));
      return ag::sum_all(ag::neg(y));
    });
  }

  SUBCASE("add_rowvec bias broadcast") {
    ParamStore ps;
    ps.add("x", Tensor::gauss({4, 3}, rng));
    ps.add("bias", Tensor::gauss({3}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      return ag::mean_all(ag::add_rowvec(leaf_of(t, p, "x"), leaf_of(t, p, "bias")));
    });
  }

  SUBCASE("concat_cols then matmul") {
    ParamStore ps;
    ps.add("a", Tensor::gauss({3, 2}, rng));
    ps.add("b", Tensor::gauss({3, 4}, rng));
    ps.add("w", Tensor::gauss({6, 2}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto cat = ag::concat_cols({leaf_of(t, p, "a"), leaf_of(t, p, "b")});
      return ag::sum_all(ag::matmul(cat, leaf_of(t, p, "w")));
    });
  }

  SUBCASE("gather_rows with repeated indices") {
    ParamStore ps;
    ps.add("x", Tensor::gauss({5, 3}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto g = ag::gather_rows(leaf_of(t, p, "x"), {4, 0, 0, 2, 4});
      return ag::mean_all(ag::mul(g, g));
    });
  }

  SUBCASE("group_mean including an empty group") {
    ParamStore ps;
    ps.add("x", Tensor::gauss({6, 3}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto m = ag::group_mean(leaf_of(t, p, "x"), {0, 0, 0, 3, 3, 1}, 4);
      return ag::sum_all(ag::mul(m, m));
    });
  }

  SUBCASE("relu away from the kink") {
    ParamStore ps;
    Tensor x = Tensor::gauss({4, 4}, rng);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::fabs(x.data()[i]) < 1e-3) x.data()[i] = 0.1;  // keep FD off the kink
    ps.add("x", x);
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      return ag::sum_all(ag::relu(leaf_of(t, p, "x")));
    });
  }

  SUBCASE("sigmoid") {
    ParamStore ps;
    ps.add("x", Tensor::gauss({3, 3}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      return ag::mean_all(ag::sigmoid(leaf_of(t, p, "x")));
    });
  }

  SUBCASE("dropout with a fixed stream") {
    ParamStore ps;
    ps.add("x", Tensor::gauss({4, 6}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      Rng mask_rng(99);  // rebuilt every call: identical mask on every eval
      auto y = ag::dropout(leaf_of(t, p, "x"), 0.5, mask_rng, true);
      return ag::sum_all(ag::mul(y, y));
    });
  }

  SUBCASE("l2_normalize_rows") {
    ParamStore ps;
    ps.add("x", Tensor::gauss({4, 5}, rng));
    ps.add("w", Tensor::gauss({5, 2}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto y = ag::l2_normalize_rows(leaf_of(t, p, "x"));
      return ag::sum_all(ag::matmul(y, leaf_of(t, p, "w")));
    });
  }

  SUBCASE("transpose and reshape") {
    ParamStore ps;
    ps.add("x", Tensor::gauss({3, 4}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto y = ag::transpose(leaf_of(t, p, "x"));
      auto z = ag::reshape(y, {2, 6});
      return ag::mean_all(ag::mul(z, z));
    });
  }

  SUBCASE("rowwise_dot") {
    ParamStore ps;
    ps.add("a", Tensor::gauss({5, 4}, rng));
    ps.add("b", Tensor::gauss({5, 4}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto d = ag::rowwise_dot(leaf_of(t, p, "a"), leaf_of(t, p, "b"));
      return ag::mean_all(ag::sigmoid(d));
    });
  }

  SUBCASE("log_clamped away from the clamp") {
    ParamStore ps;
    Tensor x = Tensor::full({3, 3}, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 0.2 + 0.6 * rng.next_double();
    ps.add("x", x);
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      return ag::sum_all(ag::log_clamped(leaf_of(t, p, "x")));
    });
  }

  SUBCASE("softmax cross entropy") {
    ParamStore ps;
    ps.add("logits", Tensor::gauss({5, 3}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      return ag::softmax_cross_entropy(leaf_of(t, p, "logits"), {0, 2, 1, 1, 0});
    });
  }

  SUBCASE("binary cross entropy through sigmoid") {
    ParamStore ps;
    ps.add("z", Tensor::gauss({6}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      Tensor targets({6}, {1, 0, 1, 1, 0, 0});
      return ag::binary_cross_entropy(ag::sigmoid(leaf_of(t, p, "z")), targets);
    });
  }

  SUBCASE("two-layer network end to end") {
    ParamStore ps;
    ps.add("w1", Tensor::gauss({6, 8}, rng, 0.5));
    ps.add("b1", Tensor::gauss({8}, rng, 0.1));
    ps.add("w2", Tensor::gauss({8, 3}, rng, 0.5));
    ps.add("x", Tensor::gauss({7, 6}, rng));
    check_op(ps, [](ag::Tape& t, const ParamStore& p) {
      auto h = ag::relu(ag::add_rowvec(ag::matmul(leaf_of(t, p, "x"), leaf_of(t, p, "w1")),
                                       leaf_of(t, p, "b1")));
      auto z = ag::l2_normalize_rows(h);
      auto logits = ag::matmul(z, leaf_of(t, p, "w2"));
      return ag::softmax_cross_entropy(logits, {0, 1, 2, 0, 1, 2, 0});
    });
  }
}

TEST_CASE("adam first step moves each weight by about lr in the gradient direction") {
  ParamStore ps;
  ps.add("w", Tensor({3}, {1.0, -2.0, 0.5}));
  ag::Gradients grads;
  grads.emplace("w", Tensor({3}, {0.3, -0.7, 2.0}));
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.01;
  adam_step(ps, grads, state, cfg);
  CHECK(ps.at("w").data()[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(ps.at("w").data()[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(ps.at("w").data()[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
  CHECK(state.t == 1);
}

TEST_CASE("adam leaves parameters with zero or missing gradients unchanged") {
  ParamStore ps;
  ps.add("a", Tensor({2}, {1.5, -0.5}));
  ps.add("b", Tensor({2}, {3.0, 4.0}));
  ag::Gradients grads;
  grads.emplace("a", Tensor({2}));  // explicit zeros
  AdamState state;
  adam_step(ps, grads, state, AdamConfig{});
  CHECK(ps.at("a").data()[0] == 1.5);
  CHECK(ps.at("a").data()[1] == -0.5);
  CHECK(ps.at("b").data()[0] == 3.0);
  CHECK(ps.at("b").data()[1] == 4.0);
}

TEST_CASE("adam drives a quadratic bowl to the minimum") {
  ParamStore ps;
  ps.add("x", Tensor::scalar(1.0));
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.05;
  for (int i = 0; i < 500; ++i) {
    ag::Tape t;
    auto x = t.leaf(ps.at("x"), "x");
    auto loss = ag::sum_all(ag::mul(x, x));
    t.backward(loss);
    adam_step(ps, t.named_grads(), state, cfg);
  }
  CHECK(std::fabs(ps.at("x").item()) < 1e-2);
}
