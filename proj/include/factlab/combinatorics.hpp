#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factlab/residue_set.hpp"

namespace factlab {

// |X/Y| * |Z| versus |XZ| * |ZY|: the triangle comparison behind quotient-set
// lower bounds. holds is a theorem for nonempty sets without 0, so a false
// value signals a defect in the set machinery.
struct RuzsaCheck {
  std::uint64_t quotient_size = 0;  // |X/Y|
  std::uint64_t xz_size = 0;        // |XZ|
  std::uint64_t zy_size = 0;        // |ZY|
  std::uint64_t z_size = 0;
  bool holds = false;               // quotient_size * z_size <= xz_size * zy_size
};

RuzsaCheck ruzsa_check(const ResidueSet& x, const ResidueSet& y, const ResidueSet& z,
                       const OpLimits& lim = {});

enum class SubsetStrategy { exhaustive, greedy };

// Searches for a subset X' of X with |X'| > |X|/2 minimizing the iterated
// product |X' B_1 ... B_k| relative to the per-factor growths. The reported
// ratio |X' B_1...B_k| * |X|^{k-1} / (|X B_1| * ... * |X B_k|) is at most
// 1 + o(1) in theory; the exhaustive strategy finds the true minimum, the
// greedy strategy (drop the element shrinking the product most, recompute
// each round) an upper bound for it.
struct KatzShenResult {
  std::vector<std::uint64_t> subset;  // ascending
  std::uint64_t iterated_size = 0;    // |X' B_1 ... B_k|
  double ratio = 0.0;
};

// Exhaustive strategy requires |X| <= 20 (cap error above).
KatzShenResult katz_shen_ratio(const ResidueSet& x, const std::vector<ResidueSet>& factors,
                               SubsetStrategy strategy, const OpLimits& lim = {});

// Count of pairs 1 <= x <= X, 1 <= y <= Y with x = s0 * y mod p and
// gcd(x, y) = 1, plus its ratio to the first-order size 1 + X*Y/p.
struct CongruencePairCount {
  std::uint64_t count = 0;
  double ratio = 0.0;
};

CongruencePairCount coprime_solution_count(const PrimeModulus& m, std::uint64_t s0,
                                           std::uint64_t x_bound, std::uint64_t y_bound);

// Distinct values of n! mod p over 1 <= n <= p (0 included, reached at
// n = p) and the count of residues never hit.
struct FactorialValueStats {
  std::uint64_t p = 0;
  std::uint64_t distinct = 0;
  std::uint64_t missing = 0;

  double distinct_fraction() const noexcept {
    return static_cast<double>(distinct) / static_cast<double>(p);
  }
  double missing_fraction() const noexcept {
    return static_cast<double>(missing) / static_cast<double>(p);
  }
};

FactorialValueStats factorial_value_stats(const PrimeModulus& m,
                                          std::uint64_t scan_cap = 1ull << 26);

// Piecewise lower-bound curves for factorial product and quotient sets.
// Families (I = {1..N}, M an arbitrary subset of the units of size M):
//   quotient_set              |A_N / A_N|, four ranges of N
//   product_set               |A_N A_N| in the two mid ranges of N
//   product_set_small_n       |A_N A_N| below p^(3/5)
//   interval_product          |I * M|: min of p/log^2(N), N^2/log^2(N), NM/log(N)
//   interval_product_large_n  |I * M| for N >= p^(1/2), two ranges
enum class BoundFamily {
  quotient_set,
  product_set,
  product_set_small_n,
  interval_product,
  interval_product_large_n,
};

const char* bound_family_name(BoundFamily family) noexcept;

struct BoundProfile {
  BoundFamily family = BoundFamily::quotient_set;
  std::uint64_t p = 0;
  std::uint64_t n = 0;
  std::uint64_t m = 0;            // second size parameter where the family uses one
  double constant = 1.0;          // leading constant multiplier
  double cutoff_constant = 1.0;   // constant inside the lowest range threshold
};

struct BoundValue {
  double value = 0.0;  // NaN when out of regime
  std::string case_label;
  bool asymptotic_placeholder = false;  // an o(1) in the exponent was set to 0
  bool in_regime = false;
};

// All logarithms are natural. Out-of-regime parameters yield a report with
// in_regime = false, never an exception.
BoundValue bound_curve(const BoundProfile& profile);

}  // namespace factlab
