#include "gft/pointops/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gft/errors.hpp"
#include "gft/numcore/kernels.hpp"

namespace gft::pointops {

namespace kernels = numcore::kernels;

void validate(const PointCloud& cloud, int num_classes) {
  if (cloud.xyz.empty() || cloud.xyz.size() % 3 != 0) {
    throw ArgumentError("point cloud needs N >= 1 rows of 3 coordinates");
  }
  for (double v : cloud.xyz) {
    if (!std::isfinite(v)) throw ArgumentError("point cloud has a non-finite coordinate");
  }
  if (!cloud.point_labels.empty() && cloud.point_labels.size() != cloud.size()) {
    throw ArgumentError("point label count does not match point count");
  }
  if (num_classes > 0) {
    for (int l : cloud.point_labels) {
      if (l < 0 || l >= num_classes) throw ArgumentError("point label " + std::to_string(l) + " out of range");
    }
    if (cloud.object_label && (*cloud.object_label < 0 || *cloud.object_label >= num_classes)) {
      throw ArgumentError("object label " + std::to_string(*cloud.object_label) + " out of range");
    }
  }
}

std::vector<std::size_t> fps(std::span<const double> points, std::size_t m) {
  const std::size_t n = points.size() / 3;
  if (m == 0 || m > n) {
    throw ArgumentError("fps: requested " + std::to_string(m) + " samples from " + std::to_string(n) + " points");
  }
  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::size_t current = 0;
  picked.push_back(current);
  for (std::size_t t = 1; t < m; ++t) {
    current = kernels::fps_update(points, min_dist, n, 3, current);
    picked.push_back(current);
  }
  return picked;
}

std::vector<std::size_t> knn(std::span<const double> queries, std::span<const double> points, std::size_t dim,
                             std::size_t k, bool include_self) {
  if (dim == 0) throw ArgumentError("knn: dimension must be positive");
  const std::size_t q = queries.size() / dim;
  const std::size_t n = points.size() / dim;
  if (!include_self && q != n) throw ArgumentError("knn: excluding self requires queries == points");
  const std::size_t available = include_self ? n : n - 1;
  if (k == 0 || k > available) {
    throw ArgumentError("knn: k=" + std::to_string(k) + " but only " + std::to_string(available) +
                        " candidates");
  }
  std::vector<double> dist(q * n);
  kernels::pairwise_sqdist(queries, points, dist, q, n, dim);
  std::vector<std::size_t> out(q * k);
#pragma omp parallel for schedule(static) if (q * n > 4096)
  for (long long ii = 0; ii < static_cast<long long>(q); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      if (include_self || j != i) order.push_back(j);
    const double* row = dist.data() + i * n;
    auto closer = [row](std::size_t a, std::size_t b) { return row[a] < row[b] || (row[a] == row[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
    std::copy_n(order.begin(), k, out.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  return out;
}

TokenizedCloud group_points(const PointCloud& cloud, std::size_t num_groups, std::size_t group_size) {
  validate(cloud);
  TokenizedCloud tc;
  tc.num_groups = num_groups;
  tc.group_size = group_size;
  tc.center_indices = fps(cloud.xyz, num_groups);
  tc.centers.resize(num_groups * 3);
  for (std::size_t g = 0; g < num_groups; ++g)
    for (std::size_t d = 0; d < 3; ++d) tc.centers[g * 3 + d] = cloud.xyz[tc.center_indices[g] * 3 + d];
  tc.groups = knn(tc.centers, cloud.xyz, 3, group_size, true);
  tc.group_coords.resize(num_groups * group_size * 3);
  for (std::size_t g = 0; g < num_groups; ++g) {
    for (std::size_t j = 0; j < group_size; ++j) {
      const std::size_t p = tc.groups[g * group_size + j];
      for (std::size_t d = 0; d < 3; ++d)
        tc.group_coords[(g * group_size + j) * 3 + d] = cloud.xyz[p * 3 + d] - tc.centers[g * 3 + d];
    }
  }
  return tc;
}

}  // namespace gft::pointops
