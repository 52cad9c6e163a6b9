#include "expconc/rng.hpp"

#include "expconc/errors.hpp"

namespace expconc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

Eigen::VectorXd Rng::uniform_in_ball(int dim, double radius) {
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) v[k] = uniform(-1.0, 1.0);
  const double nrm = v.norm();
  if (nrm > 1.0) v /= nrm;
  return radius * v;
}

namespace {
constexpr int kPrimes[] = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,
                           43,  47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101,
                           103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
                           173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
                           241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313};

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}
}  // namespace

Halton::Halton(int dims) {
  if (dims < 1 || dims > static_cast<int>(sizeof(kPrimes) / sizeof(int)))
    throw parameter_error("Halton: dimension out of range [1, 65]");
  bases_.assign(kPrimes, kPrimes + dims);
}

Eigen::VectorXd Halton::point(std::uint64_t index) const {
  Eigen::VectorXd p(static_cast<int>(bases_.size()));
  for (std::size_t k = 0; k < bases_.size(); ++k)
    p[static_cast<int>(k)] = radical_inverse(index, bases_[k]);
  return p;
}

}  // namespace expconc
