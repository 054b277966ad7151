#include <cassert>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace kilnloop::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(KILNLOOP_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_choice() {
  if (const char* env = std::getenv("KILNLOOP_SIMD"); env && std::string_view(env) == "scalar")
    return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

const KernelTable*& current() {
  static const KernelTable* table = initial_choice();
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(KILNLOOP_HAVE_AVX2)
  if (cpu_has_avx2()) return &detail::avx2_table_unchecked();
#endif
  return nullptr;
}

const KernelTable& active() { return *current(); }

bool select_backend(Backend backend) {
  if (backend == Backend::Scalar) {
    current() = &scalar_table();
    return true;
  }
  const KernelTable* t = avx2_table();
  if (!t) return false;
  current() = t;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

double sq_diff_sum(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().sq_diff_sum(a.data(), b.data(), a.size());
}

double sq_offset_sum(std::span<const double> a, double c) {
  return active().sq_offset_sum(a.data(), c, a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void momentum_step(double mu, double lr, std::span<const double> g, std::span<double> v,
                   std::span<double> w) {
  assert(g.size() == v.size() && v.size() == w.size());
  active().momentum_step(mu, lr, g.data(), v.data(), w.data(), g.size());
}

void swarm_step(const SwarmStep& step) { active().swarm_step(step); }

}  // namespace kilnloop::kernels
