#include "gft/numcore/kernels.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gft::numcore::kernels {

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1 << 15;
using Index = long long;
}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void matmul_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (Index i = 0; i < static_cast<Index>(m); ++i) {
    double* crow = pc + i * n;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    const double* arow = pa + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (Index i = 0; i < static_cast<Index>(m); ++i) {
    const double* arow = pa + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = pb + j * k;
      double s = accumulate ? pc[i * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      pc[i * n + j] = s;
    }
  }
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (Index i = 0; i < static_cast<Index>(m); ++i) {
    double* crow = pc + i * n;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[p * m + i];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void pairwise_sqdist(std::span<const double> queries, std::span<const double> points, std::span<double> out,
                     std::size_t q, std::size_t n, std::size_t dim) {
  const double* pq = queries.data();
  const double* pp = points.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (q * n * dim > kParallelWork)
  for (Index i = 0; i < static_cast<Index>(q); ++i) {
    const double* qi = pq + i * dim;
    for (std::size_t j = 0; j < n; ++j) {
      const double* pj = pp + j * dim;
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = qi[d] - pj[d];
        s += diff * diff;
      }
      po[i * n + j] = s;
    }
  }
}

std::size_t fps_update(std::span<const double> points, std::span<double> min_dist, std::size_t n, std::size_t dim,
                       std::size_t pivot) {
  const double* pp = points.data();
  const double* pv = pp + pivot * dim;
  double* md = min_dist.data();
  std::size_t best = 0;
  double best_val = -1.0;
#pragma omp parallel if (n * dim > kParallelWork)
  {
    std::size_t local_best = 0;
    double local_val = -1.0;
#pragma omp for schedule(static) nowait
    for (Index i = 0; i < static_cast<Index>(n); ++i) {
      const double* pi = pp + i * dim;
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pi[d] - pv[d];
        s += diff * diff;
      }
      if (s < md[i]) md[i] = s;
      if (md[i] > local_val) {
        local_val = md[i];
        local_best = static_cast<std::size_t>(i);
      }
    }
#pragma omp critical
    {
      if (local_val > best_val || (local_val == best_val && local_best < best)) {
        best_val = local_val;
        best = local_best;
      }
    }
  }
  return best;
}

namespace reference {

void matmul_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = s;
    }
  }
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
}

void pairwise_sqdist(std::span<const double> queries, std::span<const double> points, std::span<double> out,
                     std::size_t q, std::size_t n, std::size_t dim) {
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = queries[i * dim + d] - points[j * dim + d];
        s += diff * diff;
      }
      out[i * n + j] = s;
    }
  }
}

std::size_t fps_update(std::span<const double> points, std::span<double> min_dist, std::size_t n, std::size_t dim,
                       std::size_t pivot) {
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = points[i * dim + d] - points[pivot * dim + d];
      s += diff * diff;
    }
    min_dist[i] = std::min(min_dist[i], s);
    if (min_dist[i] > best_val) {
      best_val = min_dist[i];
      best = i;
    }
  }
  return best;
}

}  // namespace reference

}  // namespace gft::numcore::kernels
