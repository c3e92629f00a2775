#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gft/pointops/geometry.hpp"

namespace gft::harness {

// "XYZL v1" text format:
//   XYZL 1 <N> <has_labels:0|1>
//   x y z [label]        (N lines, '.' decimal, space separated)
pointops::PointCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const pointops::PointCloud& cloud, const std::filesystem::path& path);

enum class Split { train, test };
std::string to_string(Split split);
Split parse_split(const std::string& text);

struct ManifestEntry {
  std::string path;  // relative to the manifest directory unless absolute
  std::optional<int> label;
  Split split = Split::train;
};

// CSV with header `path,label,split` (classification) or `path,split`
// (segmentation).
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  bool has_labels() const;
  // 1 + max label; 0 for segmentation manifests.
  int num_classes() const;
  std::vector<ManifestEntry> split(Split s) const;
  std::filesystem::path resolve(const ManifestEntry& e) const;
};

DatasetManifest load_manifest(const std::filesystem::path& csv);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv);

// Loads every entry of `entries`, attaching the manifest label as the
// object label.
std::vector<pointops::PointCloud> load_clouds(const DatasetManifest& manifest,
                                              const std::vector<ManifestEntry>& entries);

}  // namespace gft::harness
