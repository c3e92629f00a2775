#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "gft/harness/cloud_io.hpp"
#include "gft/pointops/geometry.hpp"

namespace gft::harness {

enum class SynthKind {
  classification4,  // sphere, box, cone, torus
  parts3,           // capped cylinder: side, top (domed), bottom (flat)
};

SynthKind parse_synth_kind(const std::string& text);

struct SynthOptions {
  SynthKind kind = SynthKind::classification4;
  std::size_t n_instances = 300;
  std::size_t n_points = 256;
  // Noise std as a fraction of the instance scale; each point's noise vector
  // is truncated at 3.5 sigma.
  double noise_sigma = 0.01;
  double test_fraction = 1.0 / 3.0;
  std::uint64_t seed = 0;
  // classification4 only: true draws a uniform rotation from SO(3), false
  // rotates about y (upright shapes).
  bool full_rotation = true;
};

// Unit-scale radius of the generated sphere before the random scale.
inline constexpr double kSphereRadius = 1.0;

struct SynthInstance {
  pointops::PointCloud cloud;
  double scale = 1.0;  // the sphere radius is kSphereRadius * scale
};

// Instance `index` of the dataset. Class = index % num_classes, so the
// classes are balanced.
SynthInstance synth_instance(const SynthOptions& options, std::size_t index);

// Writes cloud_NNNNN.xyzl files and manifest.csv into `out_dir`; returns the
// manifest. The last round(test_fraction * n) instances of each class go to
// the test split.
DatasetManifest synth_dataset(const SynthOptions& options, const std::filesystem::path& out_dir);

// Training-time augmentation about the y (gravity) axis.
struct AugmentOptions {
  bool rotate = false;     // uniform angle in [0, 2pi)
  bool scale = false;      // uniform in [0.8, 1.2]
  bool translate = false;  // uniform in [-0.1, 0.1]^3
};

void augment(pointops::PointCloud& cloud, const AugmentOptions& options, std::mt19937_64& rng);

}  // namespace gft::harness
