#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "factlab/modular.hpp"

namespace factlab {

namespace detail {
struct SetBuilder;
}

enum class SetRepr { automatic, dense, sparse };

// Limits and knobs shared by the pairwise set operations.
struct OpLimits {
  // Upper bound on |A|*|B| pair operations for exact product/quotient/sum
  // and energy computations. Exceeding it raises Error(budget_exceeded).
  std::uint64_t pair_budget = 1ull << 34;
  int threads = 1;
  SetRepr result_repr = SetRepr::automatic;
};

struct FactorialSetOptions {
  // Permit counts >= p; the value 0 then joins the set.
  bool allow_zero_tail = false;
  SetRepr repr = SetRepr::automatic;
};

// A set of residues mod p. Dense (bit array) for small universes or dense
// sets, sorted vector otherwise; choice is automatic unless forced.
// Iteration is always in ascending residue order for both layouts.
class ResidueSet {
public:
  // Values are reduced mod p and deduplicated.
  ResidueSet(PrimeModulus m, const std::vector<std::uint64_t>& values,
             SetRepr repr = SetRepr::automatic);

  // {n! mod p : 1 <= n <= count}.
  static ResidueSet factorials(const PrimeModulus& m, std::uint64_t count,
                               const FactorialSetOptions& opts = {});

  const PrimeModulus& modulus() const noexcept { return m_; }
  std::uint64_t universe() const noexcept { return m_.value(); }
  std::uint64_t cardinality() const noexcept { return count_; }
  bool is_dense() const noexcept { return dense_; }

  bool contains(std::uint64_t v) const noexcept {
    if (v >= m_.value()) return false;
    if (dense_) return (words_[v >> 6] >> (v & 63)) & 1;
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), v);
    return it != sorted_.end() && *it == v;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    if (dense_) {
      for (std::size_t wi = 0; wi < words_.size(); ++wi) {
        std::uint64_t w = words_[wi];
        while (w) {
          fn(static_cast<std::uint64_t>(wi) * 64 +
             static_cast<std::uint64_t>(std::countr_zero(w)));
          w &= w - 1;
        }
      }
    } else {
      for (std::uint64_t v : sorted_) fn(v);
    }
  }

  // Ascending.
  std::vector<std::uint64_t> values() const;

  // Representation policy: dense when the universe is at most kDenseUniverseMax
  // bits or the set fills more than 1/64 of it.
  static bool prefer_dense(std::uint64_t p, std::uint64_t expected_count) noexcept {
    return p <= kDenseUniverseMax || expected_count >= p / 64;
  }

  static constexpr std::uint64_t kDenseUniverseMax = 1ull << 27;

private:
  friend struct detail::SetBuilder;

  ResidueSet(PrimeModulus m, bool dense) : m_(std::move(m)), dense_(dense) {}

  PrimeModulus m_;
  bool dense_ = false;
  std::uint64_t count_ = 0;
  std::vector<std::uint64_t> words_;   // dense layout
  std::vector<std::uint64_t> sorted_;  // sparse layout, ascending
};

// A·B, A/B, A+B as sets of residues. Quotient requires 0 not in B. All three
// respect OpLimits::pair_budget and parallelize over chunks of the smaller
// operand with order-independent merges.
ResidueSet product_set(const ResidueSet& a, const ResidueSet& b, const OpLimits& lim = {});
ResidueSet quotient_set(const ResidueSet& a, const ResidueSet& b, const OpLimits& lim = {});
ResidueSet sumset(const ResidueSet& a, const ResidueSet& b, const OpLimits& lim = {});

// Left operand of a multiplicative energy count: an explicit set, the
// interval {1..n}, or the primes up to n, all inside [1, p). Non-owning over
// an explicit set, which must outlive the view.
class SetView {
public:
  static SetView of_set(const ResidueSet& s);
  static SetView interval(const PrimeModulus& m, std::uint64_t n);
  static SetView primes_up_to(const PrimeModulus& m, std::uint64_t n);

  const PrimeModulus& modulus() const noexcept { return m_; }
  std::uint64_t size() const noexcept;
  const char* kind_name() const noexcept;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    switch (kind_) {
      case Kind::set:
        set_->for_each(fn);
        break;
      case Kind::interval:
        for (std::uint64_t v = 1; v <= n_; ++v) fn(v);
        break;
      case Kind::primes:
        for (std::uint64_t v : primes_) fn(v);
        break;
    }
  }

  bool contains_zero() const noexcept;

private:
  enum class Kind { set, interval, primes };

  SetView(Kind kind, PrimeModulus m) : kind_(kind), m_(std::move(m)) {}

  Kind kind_;
  PrimeModulus m_;
  const ResidueSet* set_ = nullptr;
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> primes_;
};

// Number of pairs ((s,m),(s',m')) in (S x M)^2 with s*m = s'*m' mod p, i.e.
// the sum over products v of c(v)^2. Requires 0 outside both S and M.
struct EnergyCount {
  std::uint64_t p = 0;
  std::uint64_t count = 0;
  std::uint64_t left_size = 0;
  std::uint64_t right_size = 0;
};

EnergyCount multiplicative_energy(const SetView& s, const ResidueSet& m,
                                  const OpLimits& lim = {});

// Sampled estimate of |A*B| when the exact pairwise pass is over budget.
struct CardinalityEstimate {
  double value = 0.0;
  double ci_low = 0.0;   // ~95% interval from the estimator variance
  double ci_high = 0.0;
  bool exact = false;    // true when the full enumeration was affordable
  std::uint64_t samples = 0;
};

// Samples `samples` uniform pairs, then corrects each distinct observed
// product by its inclusion probability (computed exactly from the product's
// multiplicity). Deterministic for a fixed seed. Falls back to the exact
// count when |A|*|B| <= samples.
CardinalityEstimate estimate_product_cardinality(const ResidueSet& a, const ResidueSet& b,
                                                 std::uint64_t samples, std::uint64_t seed);

// Set files: header "p=<p> n=<cardinality>" then one residue per line,
// ascending. Writing then reading reproduces the set exactly.
void write_set(const ResidueSet& s, std::ostream& out);
ResidueSet read_set(std::istream& in);

}  // namespace factlab
