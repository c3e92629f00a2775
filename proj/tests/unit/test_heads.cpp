#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gft/errors.hpp"
#include "gft/heads/classifier.hpp"
#include "gft/heads/metrics.hpp"
#include "gft/heads/segmentation.hpp"
#include "gft/numcore/ops.hpp"
#include "gradcheck.hpp"

using namespace gft;
using namespace gft::heads;
using numcore::Tensor;
using gft::testing::random_tensor;

namespace {

bool same(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

struct SegFixture {
  numcore::ParamStore store;
  SegDecoderConfig cfg;
  std::unique_ptr<SegDecoder> dec;
  std::map<int, Tensor> taps;
  backbone::TokenLayout layout{1, 3, 6, true};
  pointops::TokenizedCloud geometry;
  pointops::PointCloud cloud;

  SegFixture() {
    cfg.embed_dim = 8;
    cfg.dec_dim = 6;
    cfg.dec_blocks = 1;
    cfg.dec_heads = 2;
    cfg.dec_mlp_hidden = 8;
    cfg.point_hidden = 5;
    cfg.num_parts = 4;
    cfg.taps = {1, 2};
    dec = std::make_unique<SegDecoder>(store, "seg", cfg);
    std::mt19937_64 rng(1);
    dec->init(rng);
    for (auto& p : store.params()) {
      if (p.name.find("weight") != std::string::npos) numcore::fill_normal(p.tensor, 0.4, rng);
    }
    taps[1] = random_tensor({10, 8}, rng);
    taps[2] = random_tensor({10, 8}, rng);
    std::uniform_real_distribution<double> u(-1, 1);
    cloud.xyz.resize(3 * 30);
    for (auto& x : cloud.xyz) x = u(rng);
    geometry.num_groups = 6;
    for (std::size_t l = 0; l < 6; ++l) {
      geometry.center_indices.push_back(l * 5);
      for (int d = 0; d < 3; ++d) geometry.centers.push_back(cloud.xyz[3 * l * 5 + d]);
    }
  }
};

}  // namespace

TEST_CASE("pooling is invariant to patch and prompt permutations") {
  std::mt19937_64 rng(2);
  backbone::TokenLayout layout{1, 3, 5, true};
  auto tokens = random_tensor({9, 4}, rng);
  auto pooled = pool_tokens(tokens, layout);
  CHECK(pooled.shape() == numcore::Shape{1, 12});
  std::vector<std::size_t> perm{0, 3, 1, 2, 8, 6, 4, 7, 5};
  CHECK(same(pool_tokens(numcore::gather_rows(tokens, perm), layout), pooled));

  auto no_prompt = pool_tokens(tokens, layout, {true, true, false});
  for (std::size_t j = 8; j < 12; ++j) CHECK(no_prompt.at(0, j) == 0.0);
  backbone::TokenLayout bare{1, 0, 8, true};
  auto empty_prompts = pool_tokens(tokens, bare);
  for (std::size_t j = 8; j < 12; ++j) CHECK(empty_prompts.at(0, j) == 0.0);
}

TEST_CASE("classifier: zero weights, eval determinism, dropout") {
  numcore::ParamStore store;
  ClassifierHead head(store, "head", 12, {8, 8}, 5, 0.5);
  auto pooled = Tensor::full({1, 12}, 0.3);
  auto zero = head.forward(pooled);
  for (double v : zero.values()) CHECK(v == 0.0);
  CHECK(argmax(zero.values()) == 0);

  std::mt19937_64 rng(3);
  head.init(rng);
  auto x = random_tensor({1, 12}, rng);
  CHECK(same(head.forward(x), head.forward(x)));
  CHECK(same(head.forward(x, true, 7), head.forward(x, true, 7)));
  CHECK_FALSE(same(head.forward(x, true, 7), head.forward(x, true, 8)));
  CHECK(head.forward(x).shape() == numcore::Shape{1, 5});
}

TEST_CASE("argmax ties go to the lowest index") {
  const double v[4] = {1, 3, 3, 2};
  CHECK(argmax(v) == 1);
}

TEST_CASE("interpolation weights: rows sum to one and exact hits") {
  std::vector<double> centers{0, 0, 0, 1, 0, 0, 0, 2, 0, 5, 5, 5};
  std::vector<double> points{1, 0, 0, 0.3, 0.1, 0, 9, 9, 9};
  auto w = interpolation_weights(points, centers, 3);
  CHECK(w.size() == 12);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 0.0);
  CHECK(w[3] == 0.0);
  for (int r = 0; r < 3; ++r) {
    CHECK(std::abs(w[r * 4] + w[r * 4 + 1] + w[r * 4 + 2] + w[r * 4 + 3] - 1.0) <= 1e-12);
  }
  // Point 1: inverse distances to its three nearest centers.
  const double d0 = std::sqrt(0.09 + 0.01), d1 = std::sqrt(0.49 + 0.01), d2 = std::sqrt(0.09 + 3.61);
  const double z = 1 / (d0 + 1e-8) + 1 / (d1 + 1e-8) + 1 / (d2 + 1e-8);
  CHECK(w[4] == doctest::Approx(1 / (d0 + 1e-8) / z).epsilon(1e-12));
  CHECK(w[7] == 0.0);
}

TEST_CASE("segmentation decoder: shape, duplicated point, point permutation, center hit") {
  SegFixture f;
  auto logits = f.dec->forward(f.taps, f.layout, f.geometry, f.cloud);
  CHECK(logits.shape() == numcore::Shape{30, 4});

  auto dup = f.cloud;
  for (int d = 0; d < 3; ++d) dup.xyz.push_back(f.cloud.xyz[3 * 7 + d]);
  auto l2 = f.dec->forward(f.taps, f.layout, f.geometry, dup);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(l2.at(30, c) == l2.at(7, c));
    CHECK(l2.at(7, c) == logits.at(7, c));
  }

  std::vector<std::size_t> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(4);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto permuted = f.cloud;
  for (std::size_t i = 0; i < 30; ++i) {
    for (int d = 0; d < 3; ++d) permuted.xyz[3 * i + d] = f.cloud.xyz[3 * perm[i] + d];
  }
  CHECK(same(f.dec->forward(f.taps, f.layout, f.geometry, permuted), numcore::gather_rows(logits, perm)));

  // Point 5 is the second center: its propagated feature is that token's.
  auto w = interpolation_weights(f.cloud.xyz, f.geometry.centers, 3);
  CHECK(w[5 * 6 + 1] == 1.0);
}

TEST_CASE("segmentation decoder gradients match central differences") {
  SegFixture f;
  std::vector<int> labels(30);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = static_cast<int>(i % 4);
  std::vector<std::pair<std::string, Tensor>> leaves{{"tap1", f.taps[1]}};
  for (auto& p : f.store.params()) leaves.emplace_back(p.name, p.tensor);
  auto reports = gft::testing::gradient_check(
      [&] {
        return numcore::nll_loss(numcore::log_softmax(f.dec->forward(f.taps, f.layout, f.geometry, f.cloud)), labels);
      },
      leaves);
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.rel_error <= 1e-4);
  }
}

TEST_CASE("metrics: accuracy") {
  const int p[4] = {0, 1, 2, 2};
  const int l[4] = {0, 1, 2, 2};
  CHECK(overall_accuracy(p, l) == 1.0);
  const int q[4] = {0, 0, 2, 1};
  CHECK(overall_accuracy(q, l) == 0.5);
  CHECK_THROWS_AS(overall_accuracy(std::span<const int>{}, std::span<const int>{}), ArgumentError);
  CHECK_THROWS_AS(overall_accuracy(std::span<const int>(p, 3), l), ArgumentError);
}

TEST_CASE("metrics: hand-computed instance and class mIoU") {
  std::map<int, std::vector<int>> parts{{0, {0, 1}}, {1, {2, 3}}};
  std::vector<ShapePrediction> shapes{
      {0, {0, 1, 1}, {0, 0, 1}},  // IoU 1/2, 1/2
      {1, {2, 2, 3}, {2, 2, 3}},  // 1, 1
      {1, {2, 2, 2}, {2, 3, 3}},  // 1/3, 0
  };
  auto s = segmentation_scores(shapes, parts);
  CHECK(s.instance_miou == doctest::Approx((0.5 + 1.0 + 1.0 / 6) / 3).epsilon(1e-12));
  CHECK(s.class_miou == doctest::Approx((0.5 + (1.0 + 1.0 / 6) / 2) / 2).epsilon(1e-12));
  CHECK(s.point_accuracy == doctest::Approx(6.0 / 9).epsilon(1e-12));
  CHECK(s.instance_miou != doctest::Approx(s.class_miou));

  auto perfect = segmentation_scores({{0, {0, 1}, {0, 1}}, {1, {3, 3}, {3, 3}}}, parts);
  CHECK(perfect.instance_miou == 1.0);
  CHECK(perfect.class_miou == 1.0);

  // Part 2 absent from both: counts as 1.
  const int pred[2] = {3, 3}, lab[2] = {3, 3}, cat[2] = {2, 3};
  CHECK(shape_miou(pred, lab, cat) == 1.0);
  CHECK_THROWS_AS(segmentation_scores({}, parts), ArgumentError);
}
