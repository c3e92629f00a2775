#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gft::pointops {

struct PointCloud {
  std::vector<double> xyz;  // N x 3, row-major
  std::vector<int> point_labels;  // empty or N part ids
  std::optional<int> object_label;

  std::size_t size() const noexcept { return xyz.size() / 3; }
  std::array<double, 3> point(std::size_t i) const { return {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]}; }
};

// Throws ArgumentError when the cloud is empty, ragged or non-finite, or a
// label is outside [0, num_classes) (num_classes == 0 skips label checks).
void validate(const PointCloud& cloud, int num_classes = 0);

// Greedy maximin subset of `m` points, starting at index 0. Ties go to the
// lowest index. Indices are returned in selection order.
std::vector<std::size_t> fps(std::span<const double> points, std::size_t m);

// k nearest rows of `points` for every row of `queries` (both row-major with
// `dim` columns), ascending by squared Euclidean distance with ties to the
// lower index. With include_self == false the queries must be the points
// themselves and row i never lists i. Result is Q x k, row-major.
std::vector<std::size_t> knn(std::span<const double> queries, std::span<const double> points, std::size_t dim,
                             std::size_t k, bool include_self);

struct TokenizedCloud {
  std::vector<std::size_t> center_indices;  // L
  std::vector<double> centers;              // L x 3
  std::vector<std::size_t> groups;          // L x k_group
  std::vector<double> group_coords;         // L x k_group x 3, neighbour - center
  std::size_t num_groups = 0;
  std::size_t group_size = 0;
};

// FPS centers + KNN (self included) groups, re-centered on each center.
TokenizedCloud group_points(const PointCloud& cloud, std::size_t num_groups, std::size_t group_size);

}  // namespace gft::pointops
