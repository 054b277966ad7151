#include <algorithm>

#include "kernels_impl.hpp"

namespace kilnloop::kernels {
namespace {

// Lane-striped reductions: element i feeds lane i % 4 for every full block of
// four, then the tail is added in order. This mirrors one 256-bit register of
// doubles exactly.

double combine(const double lane[4]) { return (lane[0] + lane[1]) + (lane[2] + lane[3]); }

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4)
    for (std::size_t l = 0; l < 4; ++l) lane[l] += a[i + l] * b[i + l];
  double acc = combine(lane);
  for (std::size_t i = blocked; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4)
    for (std::size_t l = 0; l < 4; ++l) lane[l] += a[i + l];
  double acc = combine(lane);
  for (std::size_t i = blocked; i < n; ++i) acc += a[i];
  return acc;
}

double sq_diff_sum_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4)
    for (std::size_t l = 0; l < 4; ++l) {
      const double d = a[i + l] - b[i + l];
      lane[l] += d * d;
    }
  double acc = combine(lane);
  for (std::size_t i = blocked; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double sq_offset_sum_scalar(const double* a, double c, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t blocked = n - n % 4;
  for (std::size_t i = 0; i < blocked; i += 4)
    for (std::size_t l = 0; l < 4; ++l) {
      const double d = a[i + l] - c;
      lane[l] += d * d;
    }
  double acc = combine(lane);
  for (std::size_t i = blocked; i < n; ++i) {
    const double d = a[i] - c;
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void momentum_step_scalar(double mu, double lr, const double* g, double* v, double* w,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = mu * v[i] - lr * g[i];
    w[i] = w[i] + v[i];
  }
}

void swarm_step_scalar(const SwarmStep& s) {
  const std::size_t n = s.velocity.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = s.position[i];
    double v = (s.inertia * s.velocity[i] + (s.cognitive * s.r1[i]) * (s.personal_best[i] - x)) +
               (s.social * s.r2[i]) * (s.global_best[i] - x);
    v = std::min(std::max(v, -s.v_max[i]), s.v_max[i]);
    s.velocity[i] = v;
    s.position[i] = std::min(std::max(x + v, s.lower[i]), s.upper[i]);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",           dot_scalar,           sum_scalar,
                                 sq_diff_sum_scalar, sq_offset_sum_scalar, axpy_scalar,
                                 momentum_step_scalar, swarm_step_scalar};
  return table;
}

}  // namespace kilnloop::kernels
