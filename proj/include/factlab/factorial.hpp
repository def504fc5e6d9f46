#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "factlab/modular.hpp"

namespace factlab {

// splitmix64 finalizer; part of the public checkpoint format.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

// Integrity word for a checkpoint line.
inline std::uint64_t checkpoint_check(std::uint64_t p, std::uint64_t n,
                                      std::uint64_t value) noexcept {
  return mix64(p ^ mix64(n ^ mix64(value)));
}

// One resumable position in a factorial scan: value = n! mod p.
// Serialized as a line of four decimal fields "p n value check".
struct FactorialCheckpoint {
  std::uint64_t p = 0;
  std::uint64_t n = 0;
  std::uint64_t value = 0;
  std::uint64_t check = 0;

  static FactorialCheckpoint make(std::uint64_t p, std::uint64_t n, std::uint64_t value) {
    return {p, n, value, checkpoint_check(p, n, value)};
  }

  bool intact() const noexcept { return check == checkpoint_check(p, n, value); }
};

struct FactorialRangeOptions {
  std::uint64_t checkpoint_stride = 1ull << 20;
  // Permit window indices >= p (all such factorials vanish mod p).
  bool allow_zero_tail = false;
  int threads = 1;
  std::optional<FactorialCheckpoint> resume;
};

// n! mod p for a single n. Returns 0 once n >= p.
std::uint64_t factorial_mod(std::uint64_t n, const PrimeModulus& m);

// The factorials (L+1)!, ..., (L+N)! mod p in index order, plus the
// checkpoints emitted at stride-aligned indices inside the window.
class FactorialWindow {
public:
  FactorialWindow(PrimeModulus m, std::uint64_t start, std::vector<std::uint64_t> values,
                  std::vector<FactorialCheckpoint> checkpoints)
      : m_(std::move(m)),
        start_(start),
        values_(std::move(values)),
        checkpoints_(std::move(checkpoints)) {}

  const PrimeModulus& modulus() const noexcept { return m_; }
  std::uint64_t start() const noexcept { return start_; }
  std::uint64_t length() const noexcept { return values_.size(); }

  // n must lie in [start+1, start+length].
  std::uint64_t value_at(std::uint64_t n) const;

  std::span<const std::uint64_t> values() const noexcept { return values_; }
  const std::vector<FactorialCheckpoint>& checkpoints() const noexcept { return checkpoints_; }

private:
  PrimeModulus m_;
  std::uint64_t start_;
  std::vector<std::uint64_t> values_;
  std::vector<FactorialCheckpoint> checkpoints_;
};

// Computes the window [L+1, L+N]. Rejects windows reaching p unless
// opts.allow_zero_tail. A resume checkpoint must satisfy n <= L and pass the
// integrity and consistency checks; the result is identical to a fresh run.
// Multi-threaded runs produce bit-identical output to single-threaded ones.
FactorialWindow factorial_range(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                                const FactorialRangeOptions& opts = {});

// Streaming scan calling fn(n, n! mod p) for n = L+1 .. L+N without storing
// the window. Same window preconditions as factorial_range.
template <typename Fn>
void factorial_scan(std::uint64_t L, std::uint64_t N, const PrimeModulus& m, Fn&& fn,
                    bool allow_zero_tail = false) {
  const std::uint64_t p = m.value();
  if (N == 0) fail(Status::invalid_argument, "factorial_scan: empty window");
  if (L > PrimeModulus::kMaxModulus - N)
    fail(Status::invalid_argument, "factorial_scan: window end overflows");
  if (!allow_zero_tail && L + N >= p)
    fail(Status::invalid_argument,
         "factorial_scan: window reaches " + std::to_string(p) +
             "; factorials vanish there (set allow_zero_tail to permit)");
  std::uint64_t f = 1;
  for (std::uint64_t n = 1; n <= L; ++n) {
    f = m.mul(f, n % p);
    if (f == 0) break;  // stays 0 from here on
  }
  for (std::uint64_t n = L + 1; n <= L + N; ++n) {
    f = m.mul(f, n % p);
    fn(n, f);
  }
}

// Checkpoint files: one "p n value check" line per checkpoint.
void write_checkpoints(const std::vector<FactorialCheckpoint>& checkpoints, std::ostream& out);

// Throws Error(corrupt_data) on malformed lines or integrity failures.
std::vector<FactorialCheckpoint> read_checkpoints(std::istream& in);

}  // namespace factlab
