#pragma once

#include <cstddef>
#include <span>

// Dense inner loops shared by the ops and geometry code.
//
// The functions in `kernels` are OpenMP-parallel over output rows. Every
// output element is reduced by exactly one thread in ascending index order,
// so results do not depend on the thread count. The `kernels::reference`
// namespace holds plain serial loops with the same summation order; tests
// and the benchmark compare the two.
namespace gft::numcore::kernels {

// c[m x n] (+)= a[m x k] * b[k x n]
void matmul_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);
// c[m x n] (+)= a[m x k] * b[n x k]^T
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);
// c[m x n] (+)= a[k x m]^T * b[k x n]
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);

// out[q x n] = squared Euclidean distance between query row i and point row j.
void pairwise_sqdist(std::span<const double> queries, std::span<const double> points, std::span<double> out,
                     std::size_t q, std::size_t n, std::size_t dim);

// min_dist[i] = min(min_dist[i], |p_i - p_pivot|^2); returns argmax of the
// updated array, ties to the lowest index.
std::size_t fps_update(std::span<const double> points, std::span<double> min_dist, std::size_t n, std::size_t dim,
                       std::size_t pivot);

namespace reference {

void matmul_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);
void pairwise_sqdist(std::span<const double> queries, std::span<const double> points, std::span<double> out,
                     std::size_t q, std::size_t n, std::size_t dim);
std::size_t fps_update(std::span<const double> points, std::span<double> min_dist, std::size_t n, std::size_t dim,
                       std::size_t pivot);

}  // namespace reference

int max_threads();

}  // namespace gft::numcore::kernels
