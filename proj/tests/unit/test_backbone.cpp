#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gft/backbone/checkpoint.hpp"
#include "gft/backbone/encoder.hpp"
#include "gft/errors.hpp"
#include "gft/numcore/ops.hpp"
#include "gradcheck.hpp"

using namespace gft;
using namespace gft::backbone;
using numcore::Tensor;
using gft::testing::random_tensor;

namespace {

struct Stack {
  numcore::ParamStore store;
  std::vector<EncoderLayerWeights> layers;
  Stack(std::size_t depth, std::size_t dim, std::size_t heads, std::uint64_t seed, double std = 0.2) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < depth; ++i) {
      layers.emplace_back(store, "layers." + std::to_string(i), dim, heads, 2 * dim, true);
      layers.back().init(rng, std);
    }
  }
};

bool same(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gft_backbone_" + name);
}

// Plain transcription of the pre-norm block without the library's attention
// helper: per head softmax(q k^T / sqrt(d)) v.
Tensor reference_block(const Tensor& x, const EncoderLayerWeights& w) {
  using namespace numcore;
  const std::size_t r = x.rows(), d = x.cols(), hd = d / w.heads;
  auto h = layer_norm(x, w.ln1_gain, w.ln1_bias);
  auto qkv = linear(h, w.qkv_w, w.qkv_b);
  std::vector<double> mixed(r * d, 0.0);
  for (std::size_t head = 0; head < w.heads; ++head) {
    for (std::size_t i = 0; i < r; ++i) {
      std::vector<double> s(r);
      double mx = -1e300;
      for (std::size_t j = 0; j < r; ++j) {
        double dot = 0;
        for (std::size_t c = 0; c < hd; ++c) dot += qkv.at(i, head * hd + c) * qkv.at(j, d + head * hd + c);
        s[j] = dot / std::sqrt(static_cast<double>(hd));
        mx = std::max(mx, s[j]);
      }
      double z = 0;
      for (auto& v : s) z += (v = std::exp(v - mx));
      for (std::size_t c = 0; c < hd; ++c) {
        double acc = 0;
        for (std::size_t j = 0; j < r; ++j) acc += s[j] / z * qkv.at(j, 2 * d + head * hd + c);
        mixed[i * d + head * hd + c] = acc;
      }
    }
  }
  auto y = add(x, linear(Tensor({r, d}, mixed), w.proj_w, w.proj_b));
  auto m = linear(gelu(linear(layer_norm(y, w.ln2_gain, w.ln2_bias), w.fc1_w, w.fc1_b)), w.fc2_w, w.fc2_b);
  return add(y, m);
}

}  // namespace

TEST_CASE("self-attention layer: shape, zero weights, attention rows") {
  Stack s(1, 12, 3, 1);
  std::mt19937_64 rng(2);
  auto x = random_tensor({7, 12}, rng);
  std::vector<Tensor> att;
  auto y = self_attention_layer(x, s.layers[0], &att);
  CHECK(y.shape() == x.shape());
  REQUIRE(att.size() == 3);
  for (const auto& a : att) {
    for (std::size_t i = 0; i < 7; ++i) {
      double total = 0;
      for (std::size_t j = 0; j < 7; ++j) total += a.at(i, j);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }

  Stack z(1, 12, 3, 1);
  z.layers[0].init(rng, 0.0);
  CHECK(same(self_attention_layer(x, z.layers[0]), x));
}

TEST_CASE("encoder layers are frozen") {
  Stack s(2, 8, 2, 3);
  for (const auto& p : s.store.params()) CHECK(p.frozen);
}

TEST_CASE("encode matches a directly coded loop") {
  Stack s(3, 12, 3, 4);
  std::mt19937_64 rng(5);
  auto x = random_tensor({9, 12}, rng);
  Tensor expect = x;
  for (const auto& w : s.layers) expect = reference_block(expect, w);
  auto got = encode(x, s.layers).final;
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.values()[i] == doctest::Approx(expect.values()[i]).epsilon(1e-12));
}

TEST_CASE("encode: single layer, identity hooks, taps, bad indices") {
  std::mt19937_64 rng(6);
  Stack one(1, 8, 2, 7);
  auto x = random_tensor({5, 8}, rng);
  CHECK(same(encode(x, one.layers).final, self_attention_layer(x, one.layers[0])));

  Stack s(12, 8, 2, 8, 0.05);
  EncodeRequest req;
  for (int i = 1; i <= 12; ++i) req.before_layer[i] = [](const Tensor& t) { return t; };
  CHECK(same(encode(x, s.layers, req).final, encode(x, s.layers).final));

  EncodeRequest taps;
  taps.taps = {3, 6, 9, 11};
  taps.attention_layers = {12};
  auto r = encode(x, s.layers, taps);
  REQUIRE(r.taps.size() == 4);
  for (const auto& [i, t] : r.taps) CHECK(t.shape() == x.shape());
  CHECK(r.attention.at(12).size() == 2);

  EncodeRequest bad;
  bad.before_layer[13] = [](const Tensor& t) { return t; };
  CHECK_THROWS_AS(encode(x, s.layers, bad), ArgumentError);
  EncodeRequest bad_tap;
  bad_tap.taps = {0};
  CHECK_THROWS_AS(encode(x, s.layers, bad_tap), ArgumentError);
  EncodeRequest reshaping;
  reshaping.before_layer[2] = [](const Tensor& t) { return numcore::slice_rows(t, 0, 2); };
  CHECK_THROWS_AS(encode(x, s.layers, reshaping), ContractError);
}

TEST_CASE("encoder gradients match central differences") {
  Stack s(2, 8, 2, 9, 0.3);
  std::mt19937_64 rng(10);
  auto x = random_tensor({5, 8}, rng);
  auto w = random_tensor({5, 8}, rng);
  std::vector<std::pair<std::string, Tensor>> leaves{{"x", x}};
  for (auto& p : s.store.params()) leaves.emplace_back(p.name, p.tensor);
  auto reports = gft::testing::gradient_check(
      [&] { return numcore::sum(numcore::mul(encode(x, s.layers).final, w)); }, leaves);
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.rel_error <= 1e-4);
  }
}

TEST_CASE("checkpoint round trip is bit-exact in float32") {
  Stack s(2, 8, 2, 11);
  s.store.set_frozen("layers.1.norm2.bias", false);
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(s.store, path);

  Stack t(2, 8, 2, 12);
  load_checkpoint(t.store, path);
  for (std::size_t i = 0; i < s.store.params().size(); ++i) {
    const auto& a = s.store.params()[i];
    const auto& b = t.store.params()[i];
    CHECK(a.name == b.name);
    CHECK(a.frozen == b.frozen);
    for (std::size_t j = 0; j < a.tensor.size(); ++j) {
      CHECK(static_cast<float>(a.tensor.values()[j]) == static_cast<float>(b.tensor.values()[j]));
    }
  }
  save_checkpoint(t.store, temp_path("roundtrip2.ckpt"));
  std::ifstream f1(path, std::ios::binary), f2(temp_path("roundtrip2.ckpt"), std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {}), b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
}

TEST_CASE("checkpoint errors") {
  Stack s(1, 8, 2, 13);
  const auto path = temp_path("errors.ckpt");
  save_checkpoint(s.store, path);
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});

  SUBCASE("truncated") {
    std::ofstream(temp_path("trunc.ckpt"), std::ios::binary) << bytes.substr(0, bytes.size() - 5);
    CHECK_THROWS_WITH_AS(read_checkpoint(temp_path("trunc.ckpt")), doctest::Contains("truncated"), FormatError);
  }
  SUBCASE("bad magic") {
    std::string b = bytes;
    b[0] = 'X';
    std::ofstream(temp_path("magic.ckpt"), std::ios::binary) << b;
    CHECK_THROWS_AS(read_checkpoint(temp_path("magic.ckpt")), FormatError);
  }
  SUBCASE("bad version") {
    std::string b = bytes;
    b[8] = 9;
    std::ofstream(temp_path("version.ckpt"), std::ios::binary) << b;
    CHECK_THROWS_WITH_AS(read_checkpoint(temp_path("version.ckpt")), doctest::Contains("version"), FormatError);
  }
  SUBCASE("unknown tensor") {
    auto entries = read_checkpoint(path);
    entries.push_back({"extra.tensor", {2}, true, {1.f, 2.f}});
    CHECK_THROWS_WITH_AS(apply_checkpoint(s.store, entries), doctest::Contains("extra.tensor"), FormatError);
  }
  SUBCASE("shape mismatch") {
    auto entries = read_checkpoint(path);
    entries[0].shape = {4, 2};
    CHECK_THROWS_WITH_AS(apply_checkpoint(s.store, entries), doctest::Contains("shape"), FormatError);
  }
  SUBCASE("missing tensor") {
    auto entries = read_checkpoint(path);
    entries.pop_back();
    CHECK_THROWS_WITH_AS(apply_checkpoint(s.store, entries), doctest::Contains("missing"), FormatError);
  }
}
