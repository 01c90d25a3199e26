#include "l1ksvd/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace l1ksvd {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(RngSeed seed) : key_(mix64(seed.value + kGolden)) {}

std::uint64_t Rng::next_u64() { return mix64(key_ + kGolden * ++counter_); }

double Rng::uniform() {
  // 53 random bits centered in their cell, never 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Index Rng::uniform_index(Index n) {
  if (n <= 0) throw InvalidArgument("Rng::uniform_index: n must be positive");
  const auto bound = static_cast<std::uint64_t>(n);
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = 0;
  do {
    r = next_u64();
  } while (r >= limit);
  return static_cast<Index>(r % bound);
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(FromKey{}, mix64(key_ ^ mix64(stream * kGolden + 0x632BE59BD9B4E019ULL)));
}

RngSeed Rng::derive_seed(std::uint64_t stream) const {
  return RngSeed{mix64(key_ ^ mix64(stream * kGolden + 0x8CB92BA72F3D8DD7ULL))};
}

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

std::vector<Index> random_permutation(Rng& rng, Index n) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const Index j = rng.uniform_index(i + 1);
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

}  // namespace l1ksvd
