#include "gft/harness/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "gft/errors.hpp"

namespace gft::harness {

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;
constexpr double kPi = std::numbers::pi;

Mat3 random_rotation(std::mt19937_64& rng) {
  // Uniform unit quaternion.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2 * kPi * u2), x = a * std::cos(2 * kPi * u2);
  const double y = b * std::sin(2 * kPi * u3), z = b * std::cos(2 * kPi * u3);
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

Mat3 rotation_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}

Vec3 rotate(const Mat3& r, const Vec3& p) {
  return {r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2], r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2],
          r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2]};
}

Vec3 truncated_noise(double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sigma);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 3.5 * 3.5 * sigma * sigma) return v;
  }
}

// Fibonacci lattice: near-uniform and centred, so the centroid sits on the
// sphere center up to the noise.
Vec3 sphere_point(std::size_t i, std::size_t n) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
  const double t = golden * static_cast<double>(i);
  return {r * std::cos(t) * kSphereRadius, y * kSphereRadius, r * std::sin(t) * kSphereRadius};
}

Vec3 box_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::uniform_int_distribution<int> face(0, 5);
  const int f = face(rng);
  Vec3 p{u(rng), u(rng), u(rng)};
  p[static_cast<std::size_t>(f / 2)] = (f % 2 == 0) ? 0.8 : -0.8;
  return p;
}

Vec3 cone_point(std::mt19937_64& rng) {
  // Apex at y = +1, base radius 0.8 at y = -0.6. Area-weighted lateral/base.
  constexpr double h = 1.6, r = 0.8;
  const double slant = std::sqrt(h * h + r * r);
  const double lateral = kPi * r * slant, base = kPi * r * r;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double theta = 2 * kPi * u(rng);
  if (u(rng) < lateral / (lateral + base)) {
    const double t = std::sqrt(u(rng));  // distance fraction from the apex
    return {t * r * std::cos(theta), 1.0 - t * h, t * r * std::sin(theta)};
  }
  const double rr = r * std::sqrt(u(rng));
  return {rr * std::cos(theta), 1.0 - h, rr * std::sin(theta)};
}

Vec3 torus_point(std::mt19937_64& rng) {
  constexpr double big = 0.7, small = 0.28;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double a = 2 * kPi * u(rng), b = 2 * kPi * u(rng);
    // Rejection on the area element (big + small cos b).
    if (u(rng) * (big + small) > big + small * std::cos(b)) continue;
    return {(big + small * std::cos(b)) * std::cos(a), small * std::sin(b), (big + small * std::cos(b)) * std::sin(a)};
  }
}

// Capped cylinder of radius r, height h centred at the origin; the top cap
// is a shallow dome so it differs locally from the flat bottom.
Vec3 cylinder_point(int part, double r, double h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double theta = 2 * kPi * u(rng);
  if (part == 0) return {r * std::cos(theta), h * (u(rng) - 0.5), r * std::sin(theta)};
  const double rr = r * std::sqrt(u(rng));
  if (part == 1) {
    const double dome = 0.5 * r * (1.0 - (rr * rr) / (r * r));
    return {rr * std::cos(theta), 0.5 * h + dome, rr * std::sin(theta)};
  }
  return {rr * std::cos(theta), -0.5 * h, rr * std::sin(theta)};
}

}  // namespace

SynthKind parse_synth_kind(const std::string& text) {
  if (text == "classification4") return SynthKind::classification4;
  if (text == "parts3") return SynthKind::parts3;
  throw ArgumentError("unknown synthetic dataset kind '" + text + "'");
}

SynthInstance synth_instance(const SynthOptions& options, std::size_t index) {
  if (options.n_points < 64) throw ArgumentError("synthetic clouds need at least 64 points");
  std::mt19937_64 rng(options.seed * 0x100000001B3ULL + index * 0x9E3779B97F4A7C15ULL + 17);
  std::uniform_real_distribution<double> scale_dist(0.8, 1.2);
  SynthInstance inst;
  inst.scale = scale_dist(rng);
  auto& cloud = inst.cloud;
  const std::size_t n = options.n_points;
  cloud.xyz.reserve(3 * n);
  const double sigma = options.noise_sigma * inst.scale;

  if (options.kind == SynthKind::classification4) {
    const int label = static_cast<int>(index % 4);
    cloud.object_label = label;
    std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
    const Mat3 rot = options.full_rotation ? random_rotation(rng) : rotation_y(angle(rng));
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 p;
      switch (label) {
        case 0: p = sphere_point(i, n); break;
        case 1: p = box_point(rng); break;
        case 2: p = cone_point(rng); break;
        default: p = torus_point(rng); break;
      }
      p = rotate(rot, p);
      const Vec3 e = truncated_noise(sigma, rng);
      for (std::size_t d = 0; d < 3; ++d) cloud.xyz.push_back(p[d] * inst.scale + e[d]);
    }
  } else {
    std::uniform_real_distribution<double> radius(0.4, 0.7), height(1.0, 1.8), angle(0.0, 2 * kPi);
    const double r = radius(rng), h = height(rng);
    const Mat3 rot = rotation_y(angle(rng));
    const std::size_t caps = n / 5;
    for (std::size_t i = 0; i < n; ++i) {
      const int part = i < n - 2 * caps ? 0 : (i < n - caps ? 1 : 2);
      Vec3 p = rotate(rot, cylinder_point(part, r, h, rng));
      const Vec3 e = truncated_noise(sigma, rng);
      for (std::size_t d = 0; d < 3; ++d) cloud.xyz.push_back(p[d] * inst.scale + e[d]);
      cloud.point_labels.push_back(part);
    }
  }
  return inst;
}

DatasetManifest synth_dataset(const SynthOptions& options, const std::filesystem::path& out_dir) {
  if (options.n_instances == 0) throw ArgumentError("synthetic dataset needs at least one instance");
  std::filesystem::create_directories(out_dir);
  DatasetManifest m;
  m.root = out_dir;
  const std::size_t classes = options.kind == SynthKind::classification4 ? 4 : 1;
  for (std::size_t i = 0; i < options.n_instances; ++i) {
    auto inst = synth_instance(options, i);
    char name[32];
    std::snprintf(name, sizeof name, "cloud_%05zu.xyzl", i);
    save_cloud(inst.cloud, out_dir / name);
    ManifestEntry e;
    e.path = name;
    e.label = inst.cloud.object_label;
    // Per-class rank decides the split.
    const std::size_t per_class = (options.n_instances - i % classes + classes - 1) / classes;
    const std::size_t rank = i / classes;
    const auto n_test = static_cast<std::size_t>(std::llround(options.test_fraction * static_cast<double>(per_class)));
    e.split = rank + n_test >= per_class ? Split::test : Split::train;
    m.entries.push_back(std::move(e));
  }
  save_manifest(m, out_dir / "manifest.csv");
  return m;
}

void augment(pointops::PointCloud& cloud, const AugmentOptions& options, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi), scale(0.8, 1.2), shift(-0.1, 0.1);
  const Mat3 rot = options.rotate ? rotation_y(angle(rng)) : Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const double s = options.scale ? scale(rng) : 1.0;
  Vec3 t{0, 0, 0};
  if (options.translate) t = {shift(rng), shift(rng), shift(rng)};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Vec3 p = rotate(rot, {cloud.xyz[3 * i], cloud.xyz[3 * i + 1], cloud.xyz[3 * i + 2]});
    for (std::size_t d = 0; d < 3; ++d) cloud.xyz[3 * i + d] = p[d] * s + t[d];
  }
}

}  // namespace gft::harness
