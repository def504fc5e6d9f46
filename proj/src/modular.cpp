#include "factlab/modular.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

namespace factlab {

namespace {

std::uint64_t mulmod_u128(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % n);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t n) {
  std::uint64_t r = 1 % n;
  base %= n;
  while (exp) {
    if (exp & 1) r = mulmod_u128(r, base, n);
    base = mulmod_u128(base, base, n);
    exp >>= 1;
  }
  return r;
}

// Witness set covering all n < 3.3e24, hence the whole 64-bit range.
constexpr std::uint64_t kWitnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

bool strong_probable_prime(std::uint64_t n, std::uint64_t a, std::uint64_t d, int r) {
  std::uint64_t x = powmod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < r; ++i) {
    x = mulmod_u128(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

}  // namespace

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t q : kWitnesses) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (std::uint64_t a : kWitnesses) {
    if (!strong_probable_prime(n, a, d, r)) return false;
  }
  return true;
}

std::uint64_t next_prime(std::uint64_t n) {
  constexpr std::uint64_t kLargest64BitPrime = 18446744073709551557ull;
  if (n > kLargest64BitPrime)
    fail(Status::invalid_argument, "next_prime: no 64-bit prime at or above " + std::to_string(n));
  if (n <= 2) return 2;
  std::uint64_t c = n | 1;
  while (!is_prime(c)) c += 2;
  return c;
}

namespace detail {

struct PhaseTable {
  std::once_flag once;
  std::vector<std::complex<double>> roots;
};

}  // namespace detail

PrimeModulus::PrimeModulus(std::uint64_t p) : p_(p), fits32_(p < (1ull << 32)) {
  if (p > kMaxModulus)
    fail(Status::invalid_argument, "modulus " + std::to_string(p) + " exceeds 2^63 - 1");
  if (!is_prime(p))
    fail(Status::invalid_argument, "modulus " + std::to_string(p) + " is not prime");
  if (p <= kPhaseTableMax) phases_ = std::make_shared<detail::PhaseTable>();
}

std::uint64_t PrimeModulus::pow(std::uint64_t base, std::uint64_t exp) const noexcept {
  std::uint64_t r = 1 % p_;
  base %= p_;
  while (exp) {
    if (exp & 1) r = mul(r, base);
    base = mul(base, base);
    exp >>= 1;
  }
  return r;
}

std::uint64_t PrimeModulus::inv(std::uint64_t a) const {
  if (a == 0) fail(Status::invalid_argument, "inverse of 0 mod " + std::to_string(p_));
  // Fermat: a^(p-2). p is validated prime, so this is exact.
  return pow(a, p_ - 2);
}

std::complex<double> PrimeModulus::unit_phase(std::uint64_t t) const {
  t %= p_;
  if (phases_) {
    std::call_once(phases_->once, [this] {
      phases_->roots.resize(p_);
      const double step = 2.0 * std::numbers::pi / static_cast<double>(p_);
      for (std::uint64_t i = 0; i < p_; ++i)
        phases_->roots[i] = std::polar(1.0, step * static_cast<double>(i));
    });
    return phases_->roots[t];
  }
  const double angle =
      2.0 * std::numbers::pi * (static_cast<double>(t) / static_cast<double>(p_));
  return std::polar(1.0, angle);
}

std::vector<std::uint64_t> batch_inverse(std::span<const std::uint64_t> values,
                                         const PrimeModulus& m) {
  std::vector<std::uint64_t> out(values.size());
  if (values.empty()) return out;
  // Prefix products, one shared inversion, then peel back.
  std::uint64_t acc = 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0) fail(Status::invalid_argument, "batch_inverse: zero element");
    out[i] = acc;
    acc = m.mul(acc, values[i]);
  }
  std::uint64_t inv_acc = m.inv(acc);
  for (std::size_t i = values.size(); i-- > 0;) {
    out[i] = m.mul(out[i], inv_acc);
    inv_acc = m.mul(inv_acc, values[i]);
  }
  return out;
}

}  // namespace factlab
