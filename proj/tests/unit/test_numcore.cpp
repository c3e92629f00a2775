#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gft/errors.hpp"
#include "gft/numcore/kernels.hpp"
#include "gft/numcore/ops.hpp"
#include "gft/numcore/params.hpp"
#include "gradcheck.hpp"

using namespace gft;
using namespace gft::numcore;
using gft::testing::gradient_check;
using gft::testing::random_tensor;

namespace {

void check_all(const std::vector<gft::testing::GradReport>& reports, double tol = 1e-4) {
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.rel_error <= tol);
  }
}

}  // namespace

TEST_CASE("matmul: identity and hand example") {
  auto i2 = Tensor::from_rows({{1, 0}, {0, 1}});
  auto p = matmul(i2, i2);
  CHECK(std::vector<double>(p.values().begin(), p.values().end()) == std::vector<double>{1, 0, 0, 1});
  auto r = matmul(Tensor::from_rows({{1, 2}, {3, 4}}), Tensor::from_rows({{1}, {1}}));
  CHECK(r.shape() == Shape{2, 1});
  CHECK(r.at(0, 0) == 3);
  CHECK(r.at(1, 0) == 7);
}

TEST_CASE("matmul: shape mismatch names both shapes") {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({2, 3});
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("matmul: gradient of sum is ones * b^T") {
  std::mt19937_64 rng(1);
  auto a = random_tensor({5, 7}, rng);
  auto b = random_tensor({7, 3}, rng);
  a.set_requires_grad(true);
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(sum(matmul(a, b)));
  }
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      double expect = 0;
      for (std::size_t c = 0; c < 3; ++c) expect += b.at(j, c);
      CHECK(a.grad()[i * 7 + j] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("softmax examples") {
  auto s = softmax(Tensor::from_rows({{0, 0, 0}}));
  for (double v : s.values()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
  auto t = softmax(Tensor::from_rows({{1000, 0, 0}}));
  CHECK(std::abs(t.values()[0] - 1.0) <= 1e-12);
  CHECK(std::abs(t.values()[1]) <= 1e-12);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_tensor({3, 4}, rng, 10.0);
    auto y = softmax(x);
    for (std::size_t r = 0; r < 3; ++r) {
      double total = 0;
      for (std::size_t c = 0; c < 4; ++c) total += y.at(r, c);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("softmax along axis 0 matches transposed softmax") {
  std::mt19937_64 rng(3);
  auto x = random_tensor({4, 3}, rng);
  auto a = softmax(x, 0);
  auto b = transpose(softmax(transpose(x)));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values()[i] == b.values()[i]);
}

TEST_CASE("softmax propagates NaN") {
  auto s = softmax(Tensor::from_rows({{0, std::nan(""), 1}}));
  CHECK(std::isnan(s.values()[0]));
}

TEST_CASE("layer_norm examples") {
  auto g = Tensor::full({2}, 1.0);
  auto b = Tensor::zeros({2});
  auto c = layer_norm(Tensor::from_rows({{3, 3}}), g, b);
  CHECK(c.values()[0] == 0.0);
  CHECK(c.values()[1] == 0.0);
  auto n = layer_norm(Tensor::from_rows({{1, -1}}), g, b);
  CHECK(n.values()[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(n.values()[1] == doctest::Approx(-1.0).epsilon(1e-4));

  std::mt19937_64 rng(5);
  auto x = random_tensor({3, 8}, rng, 4.0);
  auto y = layer_norm(x, Tensor::full({8}, 1.0), Tensor::zeros({8}));
  for (std::size_t r = 0; r < 3; ++r) {
    double m = 0;
    for (std::size_t c = 0; c < 8; ++c) m += y.at(r, c);
    CHECK(std::abs(m / 8) <= 1e-10);
  }
}

TEST_CASE("backward: sum and half squared norm") {
  auto x = Tensor::from_rows({{1, -2, 3}, {0.5, 4, -1}}, true);
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(x));
  }
  for (double g : x.grad()) CHECK(g == 1.0);
  x.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(scale(sum(mul(x, x)), 0.5));
  }
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == doctest::Approx(x.values()[i]));
}

TEST_CASE("backward: contract errors") {
  auto x = Tensor::from_rows({{1, 2}}, true);
  Tape tape;
  TapeScope scope(tape);
  auto y = mul(x, x);
  CHECK_THROWS_AS(tape.backward(y), ContractError);
  auto loss = sum(y);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), ContractError);
  CHECK(tape.consumed());
  Tape other;
  CHECK_THROWS_AS(other.backward(loss), ContractError);
}

TEST_CASE("backward without a tape is rejected and eval mode records nothing") {
  auto x = Tensor::from_rows({{1, 2}}, true);
  auto loss = sum(mul(x, x));
  CHECK_THROWS_AS(loss.backward(), ContractError);
  CHECK(loss.node()->parents.empty());
}

TEST_CASE("every primitive matches central differences") {
  std::mt19937_64 rng(11);
  auto a = random_tensor({4, 5}, rng);
  auto b = random_tensor({5, 3}, rng);
  auto c = random_tensor({4, 5}, rng);
  auto bias = random_tensor({5}, rng);
  auto gain = random_tensor({5}, rng);
  auto w = random_tensor({4, 5}, rng);  // fixed projection to make losses non-trivial
  auto project = [&](const Tensor& t) { return sum(mul(t, w)); };
  auto project_any = [&](const Tensor& t) {
    std::mt19937_64 r(99);
    return sum(mul(t, random_tensor(t.shape(), r)));
  };
  const int labels[4] = {0, 2, 1, 2};

  check_all(gradient_check([&] { return project_any(matmul(a, b)); }, {{"a", a}, {"b", b}}));
  check_all(gradient_check([&] { return project_any(matmul_nt(a, c)); }, {{"a", a}, {"c", c}}));
  check_all(gradient_check([&] { return project_any(transpose(a)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(add(a, c)); }, {{"a", a}, {"c", c}}));
  check_all(gradient_check([&] { return project(sub(a, c)); }, {{"a", a}, {"c", c}}));
  check_all(gradient_check([&] { return project(mul(a, c)); }, {{"a", a}, {"c", c}}));
  check_all(gradient_check([&] { return project(scale(a, -1.7)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(add_bias(a, bias)); }, {{"a", a}, {"bias", bias}}));
  auto lb = random_tensor({3}, rng);
  check_all(gradient_check([&] { return project_any(linear(a, b, lb)); }, {{"a", a}, {"b", b}, {"lb", lb}}));
  check_all(gradient_check([&] { return project(relu(a)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(leaky_relu(a, 0.2)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(gelu(a)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(softmax(a)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(softmax(a, 0)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(log_softmax(a)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(layer_norm(a, gain, bias)); },
                           {{"a", a}, {"gain", gain}, {"bias", bias}}));
  check_all(gradient_check([&] { return project_any(concat_rows({a, c})); }, {{"a", a}, {"c", c}}));
  check_all(gradient_check([&] { return project_any(concat_cols({a, c})); }, {{"a", a}, {"c", c}}));
  check_all(gradient_check([&] { return project_any(slice_rows(a, 1, 2)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project_any(slice_cols(a, 2, 3)); }, {{"a", a}}));
  const std::size_t idx[5] = {3, 0, 3, 1, 2};
  check_all(gradient_check([&] { return project_any(gather_rows(a, idx)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project_any(repeat_rows(a, 3)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project_any(group_max(a, 2)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project_any(max_rows(a)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project_any(reshape(a, {10, 2})); }, {{"a", a}}));
  check_all(gradient_check([&] { return mean(mul(a, a)); }, {{"a", a}}));
  check_all(gradient_check([&] { return project(dropout(a, 0.3, 42)); }, {{"a", a}}));
  check_all(gradient_check([&] { return cross_entropy(slice_cols(a, 0, 3), labels); }, {{"a", a}}), 1e-6);
  check_all(gradient_check([&] { return nll_loss(log_softmax(a), labels); }, {{"a", a}}));
}

TEST_CASE("cross entropy examples") {
  const int l0[1] = {2};
  CHECK(cross_entropy(Tensor::from_rows({{0, 0, 0, 0}}), l0).item() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(cross_entropy(Tensor::from_rows({{0, 0, 200, 0}}), l0).item() <= 1e-12);
  const int bad[1] = {4};
  CHECK_THROWS_AS(cross_entropy(Tensor::from_rows({{0, 0, 0, 0}}), bad), ArgumentError);
}

TEST_CASE("nll loss examples") {
  std::vector<double> uniform(3 * 50, -std::log(50.0));
  const int labels[3] = {0, 17, 49};
  CHECK(nll_loss(Tensor({3, 50}, uniform), labels).item() == doctest::Approx(std::log(50.0)).epsilon(1e-12));
  std::vector<double> perfect(3 * 50, -1e300);
  for (int i = 0; i < 3; ++i) perfect[i * 50 + labels[i]] = 0.0;
  CHECK(nll_loss(Tensor({3, 50}, perfect), labels).item() == 0.0);
  std::mt19937_64 rng(2);
  auto logits = random_tensor({3, 50}, rng, 3.0);
  CHECK(nll_loss(log_softmax(logits), labels).item() ==
        doctest::Approx(cross_entropy(logits, labels).item()).epsilon(1e-12));
  const int bad[3] = {0, 50, 1};
  CHECK_THROWS_AS(nll_loss(Tensor({3, 50}, uniform), bad), ArgumentError);
}

TEST_CASE("dropout with p=0 is the identity and masks are seeded") {
  std::mt19937_64 rng(4);
  auto x = random_tensor({3, 6}, rng);
  CHECK(dropout(x, 0.0, 1).node() == x.node());
  auto a = dropout(x, 0.5, 9), b = dropout(x, 0.5, 9);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values()[i] == b.values()[i]);
}

TEST_CASE("group_max gives the gradient to the first maximal row") {
  auto x = Tensor::from_rows({{1, 5}, {1, 2}}, true);
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(sum(group_max(x, 2)));
  }
  CHECK(std::vector<double>(x.grad().begin(), x.grad().end()) == std::vector<double>{1, 1, 0, 0});
}

TEST_CASE("parallel kernels agree bitwise with the serial reference") {
  namespace k = kernels;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist;
  for (std::size_t m : {1u, 7u, 64u, 200u}) {
    const std::size_t kk = 33, n = 91;
    std::vector<double> a(m * kk), b(kk * n), bt(n * kk), at(kk * m);
    for (auto* v : {&a, &b, &bt, &at}) {
      for (auto& x : *v) x = dist(rng);
    }
    std::vector<double> c1(m * n, 0.5), c2(m * n, 0.5);
    k::matmul_nn(a, b, c1, m, kk, n, true);
    k::reference::matmul_nn(a, b, c2, m, kk, n, true);
    CHECK(c1 == c2);
    k::matmul_nt(a, bt, c1, m, kk, n, false);
    k::reference::matmul_nt(a, bt, c2, m, kk, n, false);
    CHECK(c1 == c2);
    k::matmul_tn(at, b, c1, m, kk, n, false);
    k::reference::matmul_tn(at, b, c2, m, kk, n, false);
    CHECK(c1 == c2);
    std::vector<double> p(m * 3);
    for (auto& x : p) x = dist(rng);
    std::vector<double> d1(m * m), d2(m * m);
    k::pairwise_sqdist(p, p, d1, m, m, 3);
    k::reference::pairwise_sqdist(p, p, d2, m, m, 3);
    CHECK(d1 == d2);
    std::vector<double> md1(m, 1e300), md2(m, 1e300);
    std::size_t n1 = 0, n2 = 0;
    for (int it = 0; it < 5; ++it) {
      n1 = k::fps_update(p, md1, m, 3, n1);
      n2 = k::reference::fps_update(p, md2, m, 3, n2);
      CHECK(n1 == n2);
    }
    CHECK(md1 == md2);
  }
}

TEST_CASE("param store: names, counts and freezing") {
  ParamStore store;
  store.add("a.w", {3, 4}, true);
  store.add("b.w", {5}, false);
  CHECK_THROWS_AS(store.add("a.w", {1}, false), ArgumentError);
  CHECK(store.total_count() == 17);
  CHECK(store.trainable_count() == 5);
  store.set_frozen("a.w", false);
  CHECK(store.trainable_count() == 17);
  CHECK(store.contains("b.w"));
  CHECK_FALSE(store.contains("c"));
}
