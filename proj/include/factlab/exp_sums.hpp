#pragma once

#include <complex>
#include <cstdint>

#include "factlab/residue_set.hpp"

namespace factlab {

// Complex exponential sums over factorial arguments, their maxima over the
// frequency a, and the integer moment counts tied to them by orthogonality.

struct SumValue {
  std::uint64_t a = 0;
  std::complex<double> value;

  double magnitude() const noexcept { return std::abs(value); }
};

// sum_{n=L+1}^{L+N} exp(2 pi i a n! / p). Requires L + N < p.
SumValue single_sum(std::uint64_t a, std::uint64_t L, std::uint64_t N, const PrimeModulus& m);

// sum_{x in A} sum_{n=L+1}^{L+N} exp(2 pi i a x n! / p).
SumValue double_sum(std::uint64_t a, std::uint64_t L, std::uint64_t N, const ResidueSet& A);

struct MaxSearch {
  enum class Mode { full, sampled };
  Mode mode = Mode::full;
  std::uint64_t sample_count = 0;  // sampled mode: number of frequencies drawn
  std::uint64_t seed = 0;
  std::uint64_t full_cap = 1ull << 21;  // full mode refuses p above this
  int threads = 1;
};

struct MaxResult {
  std::uint64_t a = 0;       // smallest maximizing frequency (full mode)
  double magnitude = 0.0;
  bool exact = false;        // true iff every a in [1, p-1] was scanned
};

// max over a in [1, p-1] of |single_sum(a, L, N)|, exact or sampled.
MaxResult max_single(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                     const MaxSearch& search = {});

struct MomentLimits {
  // Bound on convolution work (window length x table size x order).
  std::uint64_t work_budget = 1ull << 34;
};

// Number of 2l-tuples (n_1..n_l, n_{l+1}..n_{2l}) from (L, L+N]^{2l} whose
// factorial half-sums agree mod p. Exact integer count via l rounds of
// cyclic convolution. Throws Error(budget_exceeded) when the work bound or
// the 64-bit count range would be exceeded.
std::uint64_t moment_count(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                           unsigned ell, const MomentLimits& lim = {});

// (1/p) sum_{a=0}^{p-1} |single_sum(a, L, N)|^power. Requires p <= full_cap.
double frequency_power_mean(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                            unsigned power, std::uint64_t full_cap = 1ull << 21,
                            int threads = 1);

// Relative gap between the analytic mean |S|^{2l} and the integer count:
// |mean - count| / count. Small values confirm both sides.
double moment_identity_error(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                             unsigned ell, std::uint64_t full_cap = 1ull << 21,
                             int threads = 1);

}  // namespace factlab
