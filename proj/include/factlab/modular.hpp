#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "factlab/errors.hpp"

namespace factlab {

// Deterministic for the full 64-bit range: trial division by the witness
// primes, then strong probable-prime tests to each of them.
bool is_prime(std::uint64_t n) noexcept;

// Smallest prime >= n. Throws Error(invalid_argument) past the largest
// 64-bit prime.
std::uint64_t next_prime(std::uint64_t n);

namespace detail {
struct PhaseTable;
}

// A validated prime modulus with the arithmetic used everywhere else.
// Immutable and cheap to copy; copies share the lazily built table of p-th
// roots of unity.
class PrimeModulus {
public:
  // p must be prime and < 2^63. Throws Error(invalid_argument) otherwise.
  explicit PrimeModulus(std::uint64_t p);

  std::uint64_t value() const noexcept { return p_; }

  std::uint64_t reduce(std::uint64_t x) const noexcept { return x % p_; }

  // a, b must already be reduced.
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept {
    std::uint64_t s = a + b;  // no overflow: a, b < 2^63
    return s >= p_ ? s - p_ : s;
  }

  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const noexcept {
    return a >= b ? a - b : a + p_ - b;
  }

  std::uint64_t neg(std::uint64_t a) const noexcept { return a == 0 ? 0 : p_ - a; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept {
    if (fits32_) return a * b % p_;
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p_);
  }

  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const noexcept;

  // Multiplicative inverse of a (reduced, nonzero). Throws on a == 0.
  std::uint64_t inv(std::uint64_t a) const;

  // exp(2*pi*i*t/p). t is reduced mod p first. Backed by a shared table for
  // p <= kPhaseTableMax, computed directly above that.
  std::complex<double> unit_phase(std::uint64_t t) const;

  static constexpr std::uint64_t kPhaseTableMax = 1ull << 20;
  static constexpr std::uint64_t kMaxModulus = (1ull << 63) - 1;

  friend bool operator==(const PrimeModulus& a, const PrimeModulus& b) noexcept {
    return a.p_ == b.p_;
  }

private:
  std::uint64_t p_;
  bool fits32_;
  std::shared_ptr<detail::PhaseTable> phases_;
};

// Inverses of every element of `values` (all reduced, nonzero) using one
// inversion plus 3(n-1) multiplications.
std::vector<std::uint64_t> batch_inverse(std::span<const std::uint64_t> values,
                                         const PrimeModulus& m);

}  // namespace factlab
