#pragma once

// Data-parallel inner loops used by the MLP, the metrics and the swarm update.
//
// Each kernel has a scalar reference and, on x86-64, an AVX2 variant chosen
// at runtime. Reductions accumulate in four interleaved lanes combined as
// (l0 + l1) + (l2 + l3) followed by the tail in order, and no kernel uses
// fused multiply-add, so every variant returns bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace kilnloop::kernels {

/// Flat swarm state for one velocity/position step. All spans share a length.
struct SwarmStep {
  std::span<double> velocity;
  std::span<double> position;
  std::span<const double> personal_best;
  std::span<const double> global_best;  // tiled to the swarm length
  std::span<const double> r1;
  std::span<const double> r2;
  std::span<const double> v_max;
  std::span<const double> lower;
  std::span<const double> upper;
  double inertia = 0.0;
  double cognitive = 0.0;
  double social = 0.0;
};

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // sum_i (a_i - b_i)^2
  double (*sq_diff_sum)(const double* a, const double* b, std::size_t n);
  // sum_i (a_i - c)^2
  double (*sq_offset_sum)(const double* a, double c, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // v = mu * v - lr * g; w += v
  void (*momentum_step)(double mu, double lr, const double* g, double* v, double* w, std::size_t n);
  void (*swarm_step)(const SwarmStep& step);
};

enum class Backend { Scalar, Avx2 };

const KernelTable& scalar_table();

/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// The table selected for this process: AVX2 when available unless the
/// KILNLOOP_SIMD environment variable is set to "scalar".
const KernelTable& active();

/// Overrides the runtime choice; returns false if the backend is unavailable.
bool select_backend(Backend backend);

// Convenience wrappers over active().
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sq_diff_sum(std::span<const double> a, std::span<const double> b);
double sq_offset_sum(std::span<const double> a, double c);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void momentum_step(double mu, double lr, std::span<const double> g, std::span<double> v,
                   std::span<double> w);
void swarm_step(const SwarmStep& step);

}  // namespace kilnloop::kernels
