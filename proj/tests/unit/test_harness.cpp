#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gft/backbone/checkpoint.hpp"
#include "gft/errors.hpp"
#include "gft/harness/attention_export.hpp"
#include "gft/harness/cloud_io.hpp"
#include "gft/harness/config_file.hpp"
#include "gft/harness/few_shot.hpp"
#include "gft/harness/optim.hpp"
#include "gft/harness/synth.hpp"
#include "gft/harness/trainer.hpp"
#include "gft/numcore/ops.hpp"

using namespace gft;
using namespace gft::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gft_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("cloud files: parse, errors, round trip") {
  auto dir = fresh_dir("io");
  write(dir / "a.xyzl", "XYZL 1 3 0\n0 0 0\n1 2 3\n-1.5 0.25 4e-3\n");
  auto c = load_cloud(dir / "a.xyzl");
  CHECK(c.size() == 3);
  CHECK(c.xyz[8] == 4e-3);
  CHECK(c.point_labels.empty());

  write(dir / "short.xyzl", "XYZL 1 5 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n");
  CHECK_THROWS_AS(load_cloud(dir / "short.xyzl"), FormatError);

  write(dir / "bad.xyzl", "XYZL 1 2 1\n0 0 0 1\n0 x 0 1\n");
  try {
    load_cloud(dir / "bad.xyzl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write(dir / "nolabel.xyzl", "XYZL 1 1 1\n0 0 0\n");
  CHECK_THROWS_AS(load_cloud(dir / "nolabel.xyzl"), ParseError);

  pointops::PointCloud p;
  p.xyz = {0.1234567891, -2.5, 1e-7, 3.14159, 2.71828, -0.333333333};
  p.point_labels = {1, 0};
  save_cloud(p, dir / "rt.xyzl");
  auto q = load_cloud(dir / "rt.xyzl");
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(q.xyz[i] - p.xyz[i]) <= 1e-6);
  CHECK(q.point_labels == p.point_labels);
}

TEST_CASE("manifest: labels, splits, validation") {
  auto dir = fresh_dir("manifest");
  DatasetManifest m;
  m.root = dir;
  m.entries = {{"a.xyzl", 0, Split::train}, {"b.xyzl", 1, Split::test}, {"c.xyzl", 1, Split::train}};
  save_manifest(m, dir / "manifest.csv");
  auto back = load_manifest(dir / "manifest.csv");
  CHECK(back.entries.size() == 3);
  CHECK(back.num_classes() == 2);
  CHECK(back.split(Split::train).size() == 2);

  write(dir / "gap.csv", "path,label,split\na.xyzl,0,train\nb.xyzl,2,test\n");
  CHECK_THROWS_AS(load_manifest(dir / "gap.csv"), FormatError);
  write(dir / "header.csv", "file,label\na.xyzl,0\n");
  CHECK_THROWS_AS(load_manifest(dir / "header.csv"), FormatError);
  write(dir / "seg.csv", "path,split\na.xyzl,train\n");
  CHECK_FALSE(load_manifest(dir / "seg.csv").has_labels());
}

TEST_CASE("synth: reproducible bytes, sphere radius, parts coverage") {
  SynthOptions o;
  o.n_instances = 12;
  o.n_points = 128;
  o.seed = 5;
  auto d1 = fresh_dir("synth1"), d2 = fresh_dir("synth2");
  auto m = synth_dataset(o, d1);
  synth_dataset(o, d2);
  for (const auto& e : m.entries) CHECK(slurp(d1 / e.path) == slurp(d2 / e.path));
  CHECK(slurp(d1 / "manifest.csv") == slurp(d2 / "manifest.csv"));
  CHECK(m.split(Split::test).size() == 4);

  SynthOptions big;
  big.n_instances = 300;
  auto all = synth_dataset(big, fresh_dir("synth300"));
  CHECK(all.split(Split::train).size() == 200);
  CHECK(all.split(Split::test).size() == 100);

  for (std::size_t i = 0; i < 40; i += 4) {
    auto inst = synth_instance(o, i);
    CHECK(*inst.cloud.object_label == 0);
    double cx = 0, cy = 0, cz = 0;
    const std::size_t n = inst.cloud.size();
    for (std::size_t j = 0; j < n; ++j) {
      cx += inst.cloud.xyz[3 * j];
      cy += inst.cloud.xyz[3 * j + 1];
      cz += inst.cloud.xyz[3 * j + 2];
    }
    cx /= n, cy /= n, cz /= n;
    const double bound = kSphereRadius * inst.scale * (1 + 4 * o.noise_sigma);
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = inst.cloud.xyz[3 * j] - cx, dy = inst.cloud.xyz[3 * j + 1] - cy,
                   dz = inst.cloud.xyz[3 * j + 2] - cz;
      CHECK(std::sqrt(dx * dx + dy * dy + dz * dz) <= bound);
    }
  }

  SynthOptions parts = o;
  parts.kind = SynthKind::parts3;
  for (std::size_t i = 0; i < 20; ++i) {
    auto inst = synth_instance(parts, i);
    std::set<int> seen(inst.cloud.point_labels.begin(), inst.cloud.point_labels.end());
    CHECK(seen == std::set<int>{0, 1, 2});
  }
  // Upright cones keep the apex on +y and the base at y = -0.6.
  SynthOptions upright = o;
  upright.full_rotation = false;
  for (std::size_t i = 2; i < 40; i += 4) {
    auto inst = synth_instance(upright, i);
    double lo = 1e9, hi = -1e9;
    for (std::size_t j = 0; j < inst.cloud.size(); ++j) {
      lo = std::min(lo, inst.cloud.xyz[3 * j + 1]);
      hi = std::max(hi, inst.cloud.xyz[3 * j + 1]);
    }
    const double slack = 3.5 * o.noise_sigma * inst.scale;
    CHECK(hi <= inst.scale + slack);
    CHECK(lo >= -0.6 * inst.scale - slack);
    CHECK(lo <= -0.6 * inst.scale + slack);
  }

  SynthOptions tiny = o;
  tiny.n_points = 63;
  CHECK_THROWS_AS(synth_instance(tiny, 0), ArgumentError);
}

TEST_CASE("augmentation keeps the y extent under rotation") {
  SynthOptions o;
  auto c = synth_instance(o, 1).cloud;
  auto r = c;
  std::mt19937_64 rng(3);
  augment(r, {true, false, false}, rng);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(r.xyz[3 * i + 1] == doctest::Approx(c.xyz[3 * i + 1]).epsilon(1e-12));
    const double rc = std::hypot(c.xyz[3 * i], c.xyz[3 * i + 2]);
    CHECK(std::hypot(r.xyz[3 * i], r.xyz[3 * i + 2]) == doctest::Approx(rc).epsilon(1e-9));
  }
}

TEST_CASE("few-shot sampling") {
  DatasetManifest m;
  for (int c = 0; c < 10; ++c) {
    for (int i = 0; i < 30; ++i) m.entries.push_back({"x" + std::to_string(c) + "_" + std::to_string(i), c,
                                                      i < 20 ? Split::train : Split::test});
  }
  auto t = sample_few_shot(m, 5, 10, 7);
  CHECK(t.train.size() == 50);
  CHECK(t.class_ids.size() == 5);
  std::set<std::string> paths;
  for (const auto& e : t.train) {
    paths.insert(e.path);
    CHECK(*e.label >= 0);
    CHECK(*e.label < 5);
  }
  CHECK(paths.size() == 50);
  auto u = sample_few_shot(m, 5, 10, 7);
  CHECK(u.class_ids == t.class_ids);
  for (std::size_t i = 0; i < 50; ++i) CHECK(u.train[i].path == t.train[i].path);
  CHECK_THROWS_AS(sample_few_shot(m, 5, 21, 7), ArgumentError);
  CHECK_THROWS_AS(sample_few_shot(m, 11, 1, 7), ArgumentError);
}

TEST_CASE("cosine schedule endpoints and shape") {
  TrainConfig cfg;
  CHECK(std::abs(cosine_schedule(0, cfg) - 1e-6) <= 1e-12);
  CHECK(std::abs(cosine_schedule(10, cfg) - 5e-4) <= 1e-12);
  CHECK(std::abs(cosine_schedule(300, cfg) - 1e-6) <= 1e-12);
  const double t = cfg.epochs - cfg.warmup_epochs;
  const double dev = (5e-4 - 1e-6) * (1 - std::cos(std::numbers::pi / t)) / 2;
  CHECK(cosine_schedule(299, cfg) == doctest::Approx(1e-6 + dev).epsilon(1e-12));
  double prev = cosine_schedule(10, cfg);
  for (int e = 11; e <= 300; ++e) {
    const double lr = cosine_schedule(e, cfg);
    CHECK(lr <= prev);
    prev = lr;
  }
  CHECK(std::abs(cosine_schedule(10 - 1e-9, cfg) - cosine_schedule(10, cfg)) <= 1e-9);
  CHECK_THROWS_AS(cosine_schedule(301, cfg), ArgumentError);
  TrainConfig bad;
  bad.warmup_epochs = 300;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("AdamW: decay, freezing, first step") {
  numcore::ParamStore store;
  auto a = store.add("a", {2}, false);
  auto f = store.add("f", {2}, true);
  numcore::fill_constant(a, 2.0);
  numcore::fill_constant(f, 2.0);
  {
    numcore::Tape tape;
    numcore::TapeScope scope(tape);
    tape.backward(numcore::sum(numcore::mul(f, f)));
  }
  AdamW opt(0.9, 0.999, 1e-8, 0.1);
  opt.step(store, 0.01);
  CHECK(a.values()[0] == doctest::Approx(2.0 * (1 - 0.01 * 0.1)).epsilon(1e-15));
  CHECK(f.values()[0] == 2.0);

  numcore::ParamStore one;
  auto p = one.add("p", {1}, false);
  numcore::fill_constant(p, 1.0);
  {
    numcore::Tape tape;
    numcore::TapeScope scope(tape);
    tape.backward(numcore::scale(numcore::mul(p, p), 0.5));
  }
  AdamW plain;
  plain.step(one, 0.1);
  // m_hat = g, v_hat = g^2 after bias correction.
  const double g = 1.0;
  const double m_hat = (0.1 * g) / (1 - 0.9), v_hat = (0.001 * g * g) / (1 - 0.999);
  CHECK(p.values()[0] == doctest::Approx(1.0 - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8)).epsilon(1e-15));
}

TEST_CASE("config file parsing") {
  auto entries = parse_config_text("# comment\nlearning_rate = 1e-3\nedgeconv_dims=32,16\n\ninteraction_layers=[1, 2]\n");
  auto cfg = apply_config(entries);
  CHECK(cfg.train.learning_rate == 1e-3);
  CHECK(cfg.model.edgeconv.dims == std::vector<std::size_t>{32, 16});
  CHECK(cfg.model.interaction_layers == std::set<int>{1, 2});

  auto full = apply_config(parse_config_text("prompt_length=10\npreset=classification\n"));
  CHECK(full.model.dim == 384);
  CHECK(full.model.prompt_length == 10);

  try {
    apply_config(parse_config_text("epochs=3\n\nbogus_key=1\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config_text("epochs 3\n"), ParseError);
  CHECK_THROWS_AS(apply_config(parse_config_text("epochs=three\n")), ParseError);
}

TEST_CASE("attention export") {
  backbone::TokenLayout layout{1, 2, 4, true};
  const double u = 1.0 / 7;
  std::vector<numcore::Tensor> maps(2, numcore::Tensor::full({7, 7}, u));
  std::vector<double> centers(12, 0.5);
  auto a = patch_attention(maps, layout, centers, AttentionDirection::cls_query);
  REQUIRE(a.weights.size() == 4);
  for (double w : a.weights) CHECK(w == doctest::Approx(u).epsilon(1e-15));
  CHECK(a.excluded_mass == doctest::Approx(3.0 / 7).epsilon(1e-12));

  auto cfg = model::GftModelConfig::tiny();
  model::GftModel model(cfg, 1);
  auto cloud = synth_instance(SynthOptions{SynthKind::classification4, 1, 64}, 0).cloud;
  cloud.xyz.resize(3 * cfg.num_points);
  auto att = extract_attention(model, cloud, static_cast<int>(cfg.depth));
  CHECK(att.weights.size() == cfg.num_groups);
  double total = 0;
  for (double w : att.weights) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    total += w;
  }
  CHECK(total <= 1.0 + 1e-12);
  CHECK(extract_attention(model, cloud, 1, AttentionDirection::patch_query).weights.size() == cfg.num_groups);
  CHECK_THROWS_AS(extract_attention(model, cloud, 0), ArgumentError);
  CHECK_THROWS_AS(extract_attention(model, cloud, 4), ArgumentError);

  auto dir = fresh_dir("attention");
  write_attention_csv(att, dir / "a.csv");
  std::istringstream in(slurp(dir / "a.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "center_x,center_y,center_z,weight");
  std::string last;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      last = line;
    } else {
      ++rows;
    }
  }
  CHECK(rows == cfg.num_groups);
  CHECK(last.rfind("# excluded_mass=", 0) == 0);
}

TEST_CASE("training: one epoch, reruns, frozen weights, best checkpoint") {
  auto cfg = model::GftModelConfig::tiny();
  SynthOptions so;
  so.n_points = 64;
  so.n_instances = 6;
  std::vector<pointops::PointCloud> clouds;
  for (std::size_t i = 0; i < so.n_instances; ++i) {
    auto c = synth_instance(so, i).cloud;
    c.object_label = static_cast<int>(i % 3);
    clouds.push_back(c);
  }
  TrainConfig tc;
  tc.epochs = 1;
  tc.warmup_epochs = 0;
  tc.batch_size = 2;
  {
    model::GftModel m(cfg, 0);
    auto r = train(m, {clouds[0], clouds[1]}, {clouds[2]}, tc);
    CHECK(r.log.size() == 1);
    CHECK(r.steps == 1);
  }

  tc.epochs = 3;
  tc.learning_rate = 1e-2;
  auto dir = fresh_dir("train");
  std::vector<pointops::PointCloud> train_set(clouds.begin(), clouds.begin() + 4);
  std::vector<pointops::PointCloud> eval_set(clouds.begin() + 4, clouds.end());
  model::GftModel m1(cfg, 3), m2(cfg, 3);
  const auto before = m1.params().params();
  std::vector<std::vector<double>> initial;
  for (const auto& p : before) initial.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  TrainOptions opts;
  opts.checkpoint_path = dir / "best.ckpt";
  opts.log_path = dir / "log.csv";
  auto r1 = train(m1, train_set, eval_set, tc, opts);
  auto r2 = train(m2, train_set, eval_set, tc);
  REQUIRE(r1.log.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r1.log[i].loss == r2.log[i].loss);
    CHECK(r1.log[i].metric == r2.log[i].metric);
  }
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto& p = m1.params().params()[i];
    const bool unchanged = std::equal(initial[i].begin(), initial[i].end(), p.tensor.values().begin());
    if (p.frozen) CHECK(unchanged);
  }
  // Best epoch is the first one reaching the maximum metric.
  int first_best = 0;
  for (std::size_t i = 0; i < r1.log.size(); ++i) {
    if (r1.log[i].metric > r1.log[first_best].metric) first_best = static_cast<int>(i);
  }
  CHECK(r1.best_epoch == first_best);
  CHECK(fs::exists(dir / "best.ckpt"));
  std::istringstream log(slurp(dir / "log.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) ++lines;
  CHECK(lines == 4);
}
