#pragma once

#include "l1ksvd/types.hpp"

#include <cstdint>
#include <optional>

namespace l1ksvd {

/// Counter-based generator: output k is a bijective mix of (key, k), so a
/// stream is fully determined by its key and position. `split` derives an
/// independent child key, which is how trials and sub-tasks get their own
/// streams without sharing state.
class Rng {
public:
  explicit Rng(RngSeed seed);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal (Box-Muller).
  double normal();

  /// Uniform integer in [0, n). n must be positive.
  Index uniform_index(Index n);

  /// Child stream; distinct `stream` ids give unrelated sequences.
  Rng split(std::uint64_t stream) const;

  /// Seed that reconstructs a child stream (for manifests).
  RngSeed derive_seed(std::uint64_t stream) const;

private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols);

/// Fisher-Yates permutation of 0..n-1.
std::vector<Index> random_permutation(Rng& rng, Index n);

}  // namespace l1ksvd
