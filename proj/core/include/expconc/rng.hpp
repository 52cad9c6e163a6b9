#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace expconc {

// splitmix64 step; used to derive independent seeds from (seed, n, index)
// tuples so trial streams are schedule-independent.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic seed derivation: mix_seed(a, b, c) is a pure function of its
// arguments, identical on every platform.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

// mt19937_64 wrapper that hand-rolls its floating-point draws, so identical
// seeds give bit-identical streams everywhere (std:: distributions are
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform on [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform index in [0, m)
  std::size_t index(std::size_t m) { return static_cast<std::size_t>(engine_() % m); }

  // coordinates uniform in [-1,1]^d, then rescaled into the unit ball
  Eigen::VectorXd uniform_in_ball(int dim, double radius);

 private:
  std::mt19937_64 engine_;
};

// Deterministic low-discrepancy sequence (Halton, prime bases). index is
// 1-based; dimension count is fixed at construction.
class Halton {
 public:
  explicit Halton(int dims);
  // point(i)[k] in (0,1)
  Eigen::VectorXd point(std::uint64_t index) const;

 private:
  std::vector<int> bases_;
};

}  // namespace expconc
