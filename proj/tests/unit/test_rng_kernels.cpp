#include <catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <vector>

#include "kilnloop/kernels.hpp"
#include "kilnloop/rng.hpp"

using namespace kilnloop;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -10.0, double hi = 10.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_bits(a[i], b[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("rng streams are reproducible", "[rng]") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    REQUIRE(x == b.next_u64());
    (void)c.next_u64();
  }
  REQUIRE(derive_seed(7, 1) != derive_seed(7, 2));
  REQUIRE(derive_seed(7, 1) == derive_seed(7, 1));
}

TEST_CASE("uniform_int covers its closed range", "[rng]") {
  Rng rng(1);
  std::vector<int> seen(6, 0);
  for (int i = 0; i < 6000; ++i) {
    const auto v = rng.uniform_int(3, 8);
    REQUIRE(v >= 3);
    REQUIRE(v <= 8);
    ++seen[static_cast<std::size_t>(v - 3)];
  }
  for (int count : seen) REQUIRE(count > 800);
}

TEST_CASE("normal draws have unit variance", "[rng]") {
  Rng rng(9);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  REQUIRE(std::abs(mean) < 0.03);
  REQUIRE(std::abs(sq / n - mean * mean - 1.0) < 0.05);
}

TEST_CASE("shuffle is a permutation", "[rng]") {
  Rng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) REQUIRE(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("scalar kernels match naive loops", "[kernels]") {
  const auto& k = kernels::scalar_table();
  const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 4, 3, 2, 1};
  REQUIRE(k.dot(a.data(), b.data(), a.size()) == 35.0);
  REQUIRE(k.sum(a.data(), a.size()) == 15.0);
  REQUIRE(k.sq_diff_sum(a.data(), b.data(), a.size()) == 40.0);
  REQUIRE(k.sq_offset_sum(a.data(), 3.0, a.size()) == 10.0);
  std::vector<double> y = b;
  k.axpy(2.0, a.data(), y.data(), y.size());
  REQUIRE(y == std::vector<double>{7, 8, 9, 10, 11});
  std::vector<double> v{1, 1}, w{0, 0};
  const std::vector<double> g{2, -2};
  k.momentum_step(0.5, 0.1, g.data(), v.data(), w.data(), 2);
  REQUIRE(v[0] == Catch::Approx(0.3));
  REQUIRE(v[1] == Catch::Approx(0.7));
  REQUIRE(w == v);
}

TEST_CASE("swarm step clamps velocity and position", "[kernels]") {
  std::vector<double> v{0.0}, x{0.5};
  const std::vector<double> pb{10.0}, gb{10.0}, r1{1.0}, r2{1.0}, vmax{0.25}, lo{0.0}, hi{1.0};
  kernels::scalar_table().swarm_step({v, x, pb, gb, r1, r2, vmax, lo, hi, 0.729, 1.5, 1.5});
  REQUIRE(v[0] == 0.25);
  REQUIRE(x[0] == 0.75);
  kernels::scalar_table().swarm_step({v, x, pb, gb, r1, r2, vmax, lo, hi, 0.729, 1.5, 1.5});
  REQUIRE(x[0] == 1.0);
}

TEST_CASE("AVX2 kernels are bit-identical to the scalar reference", "[kernels]") {
  const kernels::KernelTable* simd = kernels::avx2_table();
  if (simd == nullptr) SKIP("AVX2 variant unavailable on this machine or build");
  const auto& ref = kernels::scalar_table();
  Rng rng(2024);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vector(rng, n), b = random_vector(rng, n);
    const double c = rng.uniform(-3.0, 3.0);
    REQUIRE(same_bits(ref.dot(a.data(), b.data(), n), simd->dot(a.data(), b.data(), n)));
    REQUIRE(same_bits(ref.sum(a.data(), n), simd->sum(a.data(), n)));
    REQUIRE(same_bits(ref.sq_diff_sum(a.data(), b.data(), n), simd->sq_diff_sum(a.data(), b.data(), n)));
    REQUIRE(same_bits(ref.sq_offset_sum(a.data(), c, n), simd->sq_offset_sum(a.data(), c, n)));

    auto y1 = b, y2 = b;
    ref.axpy(c, a.data(), y1.data(), n);
    simd->axpy(c, a.data(), y2.data(), n);
    REQUIRE(same_bits(y1, y2));

    auto v1 = random_vector(rng, n), w1 = random_vector(rng, n);
    auto v2 = v1, w2 = w1;
    ref.momentum_step(0.9, 0.01, a.data(), v1.data(), w1.data(), n);
    simd->momentum_step(0.9, 0.01, a.data(), v2.data(), w2.data(), n);
    REQUIRE(same_bits(v1, v2));
    REQUIRE(same_bits(w1, w2));

    auto vel1 = random_vector(rng, n, -2, 2), pos1 = random_vector(rng, n, -1, 1);
    auto vel2 = vel1, pos2 = pos1;
    const auto pb = random_vector(rng, n, -1, 1), gb = random_vector(rng, n, -1, 1);
    const auto r1 = random_vector(rng, n, 0, 1), r2 = random_vector(rng, n, 0, 1);
    std::vector<double> vmax(n, 0.5), lo(n, -1.0), hi(n, 1.0);
    ref.swarm_step({vel1, pos1, pb, gb, r1, r2, vmax, lo, hi, 0.729, 1.49445, 1.49445});
    simd->swarm_step({vel2, pos2, pb, gb, r1, r2, vmax, lo, hi, 0.729, 1.49445, 1.49445});
    REQUIRE(same_bits(vel1, vel2));
    REQUIRE(same_bits(pos1, pos2));
  }
}

TEST_CASE("backend selection can be forced to scalar", "[kernels]") {
  REQUIRE(kernels::select_backend(kernels::Backend::Scalar));
  REQUIRE(kernels::active().name == kernels::scalar_table().name);
  if (kernels::avx2_table() != nullptr) REQUIRE(kernels::select_backend(kernels::Backend::Avx2));
}
