// Compiled with -mavx2 (and without -mfma); only reached after a runtime
// CPU check in dispatch.cpp.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace kilnloop::kernels {
namespace {

double combine(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double total = combine(acc);
  for (std::size_t i = blocked; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double total = combine(acc);
  for (std::size_t i = blocked; i < n; ++i) total += a[i];
  return total;
}

double sq_diff_sum_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = combine(acc);
  for (std::size_t i = blocked; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

double sq_offset_sum_avx2(const double* a, double c, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const __m256d cv = _mm256_set1_pd(c);
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), cv);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = combine(acc);
  for (std::size_t i = blocked; i < n; ++i) {
    const double d = a[i] - c;
    total += d * d;
  }
  return total;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  }
  for (std::size_t i = blocked; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void momentum_step_avx2(double mu, double lr, const double* g, double* v, double* w,
                        std::size_t n) {
  const __m256d muv = _mm256_set1_pd(mu);
  const __m256d lrv = _mm256_set1_pd(lr);
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4) {
    const __m256d vel = _mm256_sub_pd(_mm256_mul_pd(muv, _mm256_loadu_pd(v + i)),
                                      _mm256_mul_pd(lrv, _mm256_loadu_pd(g + i)));
    _mm256_storeu_pd(v + i, vel);
    _mm256_storeu_pd(w + i, _mm256_add_pd(_mm256_loadu_pd(w + i), vel));
  }
  for (std::size_t i = blocked; i < n; ++i) {
    v[i] = mu * v[i] - lr * g[i];
    w[i] = w[i] + v[i];
  }
}

void swarm_step_avx2(const SwarmStep& s) {
  const std::size_t n = s.velocity.size();
  const __m256d w = _mm256_set1_pd(s.inertia);
  const __m256d c1 = _mm256_set1_pd(s.cognitive);
  const __m256d c2 = _mm256_set1_pd(s.social);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4) {
    const __m256d x = _mm256_loadu_pd(s.position.data() + i);
    const __m256d pull_p = _mm256_mul_pd(_mm256_mul_pd(c1, _mm256_loadu_pd(s.r1.data() + i)),
                                         _mm256_sub_pd(_mm256_loadu_pd(s.personal_best.data() + i), x));
    const __m256d pull_g = _mm256_mul_pd(_mm256_mul_pd(c2, _mm256_loadu_pd(s.r2.data() + i)),
                                         _mm256_sub_pd(_mm256_loadu_pd(s.global_best.data() + i), x));
    __m256d v = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(w, _mm256_loadu_pd(s.velocity.data() + i)), pull_p), pull_g);
    const __m256d vmax = _mm256_loadu_pd(s.v_max.data() + i);
    // Operand order matches std::max(v, lo) / std::min(v, hi) on ties.
    v = _mm256_max_pd(_mm256_xor_pd(vmax, sign), v);
    v = _mm256_min_pd(vmax, v);
    _mm256_storeu_pd(s.velocity.data() + i, v);
    __m256d nx = _mm256_add_pd(x, v);
    nx = _mm256_max_pd(_mm256_loadu_pd(s.lower.data() + i), nx);
    nx = _mm256_min_pd(_mm256_loadu_pd(s.upper.data() + i), nx);
    _mm256_storeu_pd(s.position.data() + i, nx);
  }
  for (std::size_t i = blocked; i < n; ++i) {
    const double x = s.position[i];
    double v = (s.inertia * s.velocity[i] + (s.cognitive * s.r1[i]) * (s.personal_best[i] - x)) +
               (s.social * s.r2[i]) * (s.global_best[i] - x);
    v = v < -s.v_max[i] ? -s.v_max[i] : v;
    v = s.v_max[i] < v ? s.v_max[i] : v;
    s.velocity[i] = v;
    double nx = x + v;
    nx = nx < s.lower[i] ? s.lower[i] : nx;
    nx = s.upper[i] < nx ? s.upper[i] : nx;
    s.position[i] = nx;
  }
}

}  // namespace

namespace detail {

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{"avx2",           dot_avx2,           sum_avx2,
                                 sq_diff_sum_avx2, sq_offset_sum_avx2, axpy_avx2,
                                 momentum_step_avx2, swarm_step_avx2};
  return table;
}

}  // namespace detail
}  // namespace kilnloop::kernels
