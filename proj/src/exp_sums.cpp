#include "factlab/exp_sums.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "detail/accum.hpp"
#include "detail/parallel.hpp"
#include "detail/rng.hpp"
#include "factlab/factorial.hpp"

namespace factlab {

namespace {

std::vector<std::uint64_t> window_factorials(std::uint64_t L, std::uint64_t N,
                                             const PrimeModulus& m, const char* who) {
  std::vector<std::uint64_t> f;
  f.reserve(N);
  factorial_scan(L, N, m, [&](std::uint64_t, std::uint64_t v) { f.push_back(v); });
  (void)who;
  return f;
}

double int_pow(double x, unsigned e) {
  double r = 1.0;
  while (e) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

}  // namespace

SumValue single_sum(std::uint64_t a, std::uint64_t L, std::uint64_t N, const PrimeModulus& m) {
  a = m.reduce(a);
  detail::ComplexSum acc;
  factorial_scan(L, N, m,
                 [&](std::uint64_t, std::uint64_t f) { acc.add(m.unit_phase(m.mul(a, f))); });
  return {a, acc.value()};
}

SumValue double_sum(std::uint64_t a, std::uint64_t L, std::uint64_t N, const ResidueSet& A) {
  const PrimeModulus& m = A.modulus();
  a = m.reduce(a);
  std::vector<std::uint64_t> xs = A.values();
  detail::ComplexSum acc;
  factorial_scan(L, N, m, [&](std::uint64_t, std::uint64_t f) {
    std::uint64_t t = m.mul(a, f);
    for (std::uint64_t x : xs) acc.add(m.unit_phase(m.mul(t, x)));
  });
  return {a, acc.value()};
}

MaxResult max_single(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                     const MaxSearch& search) {
  const std::uint64_t p = m.value();
  std::vector<std::uint64_t> fvals = window_factorials(L, N, m, "max_single");

  auto magnitude_at = [&](std::uint64_t a) {
    detail::ComplexSum acc;
    for (std::uint64_t f : fvals) acc.add(m.unit_phase(m.mul(a, f)));
    return std::abs(acc.value());
  };

  if (search.mode == MaxSearch::Mode::sampled) {
    if (search.sample_count == 0)
      fail(Status::invalid_argument, "max_single: sampled mode needs sample_count >= 1");
    std::mt19937_64 gen(search.seed);
    MaxResult best{0, -1.0, false};
    for (std::uint64_t k = 0; k < search.sample_count; ++k) {
      std::uint64_t a = 1 + detail::uniform_below(gen, p - 1);
      double mag = magnitude_at(a);
      if (mag > best.magnitude || (mag == best.magnitude && a < best.a)) best = {a, mag, false};
    }
    return best;
  }

  if (p > search.full_cap)
    fail(Status::cap_exceeded, "max_single: full scan cap " + std::to_string(search.full_cap) +
                                   " is below p = " + std::to_string(p) +
                                   " (raise full_cap or use sampled mode)");

  int threads = search.threads < 1 ? 1 : search.threads;
  std::uint64_t total = p - 1;
  std::uint64_t nchunks = std::min<std::uint64_t>(threads, total);
  std::vector<MaxResult> part(nchunks, MaxResult{0, -1.0, true});
  detail::parallel_chunks(total, threads, [&](int ci, std::uint64_t begin, std::uint64_t end) {
    MaxResult best{0, -1.0, true};
    for (std::uint64_t i = begin; i < end; ++i) {
      std::uint64_t a = 1 + i;
      double mag = magnitude_at(a);
      if (mag > best.magnitude || (mag == best.magnitude && a < best.a)) best = {a, mag, true};
    }
    part[ci] = best;
  });
  MaxResult best{0, -1.0, true};
  for (const MaxResult& r : part)
    if (r.magnitude > best.magnitude || (r.magnitude == best.magnitude && r.a < best.a &&
                                         r.a != 0))
      best = r;
  return best;
}

std::uint64_t moment_count(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                           unsigned ell, const MomentLimits& lim) {
  const std::uint64_t p = m.value();
  if (ell == 0) fail(Status::invalid_argument, "moment_count: order must be at least 1");
  // c values are bounded by N^ell; insist that bound fits u64 so per-class
  // counters cannot wrap.
  if (ell * std::log2(static_cast<double>(N) + 1.0) >= 63.0)
    fail(Status::budget_exceeded, "moment_count: N^ell exceeds the 64-bit counter range");

  std::vector<std::uint64_t> fvals = window_factorials(L, N, m, "moment_count");

  constexpr std::uint64_t kDenseMax = 1ull << 24;
  unsigned __int128 energy = 0;
  if (p <= kDenseMax) {
    const unsigned __int128 work =
        static_cast<unsigned __int128>(ell) * p * N;
    if (work > lim.work_budget)
      fail(Status::budget_exceeded, "moment_count: convolution work " +
                                        std::to_string(static_cast<double>(work)) +
                                        " exceeds the budget");
    // counts[t] = number of i-tuples whose factorial sum is t, per round i.
    std::vector<std::uint64_t> cur(p, 0), next(p, 0);
    cur[0] = 1;
    for (unsigned round = 0; round < ell; ++round) {
      std::fill(next.begin(), next.end(), 0);
      for (std::uint64_t t = 0; t < p; ++t) {
        std::uint64_t c = cur[t];
        if (c == 0) continue;
        for (std::uint64_t f : fvals) next[m.add(t, f)] += c;
      }
      cur.swap(next);
    }
    for (std::uint64_t t = 0; t < p; ++t)
      energy += static_cast<unsigned __int128>(cur[t]) * cur[t];
  } else {
    std::unordered_map<std::uint64_t, std::uint64_t> cur, next;
    cur[0] = 1;
    std::uint64_t spent = 0;
    for (unsigned round = 0; round < ell; ++round) {
      spent += cur.size() * N;
      if (spent > lim.work_budget)
        fail(Status::budget_exceeded, "moment_count: convolution work exceeds the budget");
      next.clear();
      for (const auto& [t, c] : cur)
        for (std::uint64_t f : fvals) next[m.add(t, f)] += c;
      cur.swap(next);
    }
    for (const auto& [t, c] : cur) energy += static_cast<unsigned __int128>(c) * c;
  }
  if (energy > std::numeric_limits<std::uint64_t>::max())
    fail(Status::budget_exceeded, "moment_count: count exceeds the 64-bit range");
  return static_cast<std::uint64_t>(energy);
}

double frequency_power_mean(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                            unsigned power, std::uint64_t full_cap, int threads) {
  const std::uint64_t p = m.value();
  if (power == 0) fail(Status::invalid_argument, "frequency_power_mean: power must be >= 1");
  if (p > full_cap)
    fail(Status::cap_exceeded, "frequency_power_mean: full scan cap " +
                                   std::to_string(full_cap) + " is below p = " +
                                   std::to_string(p));
  std::vector<std::uint64_t> fvals = window_factorials(L, N, m, "frequency_power_mean");

  if (threads < 1) threads = 1;
  std::uint64_t nchunks = std::min<std::uint64_t>(threads, p);
  std::vector<detail::NeumaierSum> part(nchunks);
  detail::parallel_chunks(p, threads, [&](int ci, std::uint64_t begin, std::uint64_t end) {
    detail::NeumaierSum local;
    for (std::uint64_t a = begin; a < end; ++a) {
      detail::ComplexSum acc;
      for (std::uint64_t f : fvals) acc.add(m.unit_phase(m.mul(a, f)));
      std::complex<double> z = acc.value();
      double mag2 = z.real() * z.real() + z.imag() * z.imag();
      double term = int_pow(mag2, power / 2);
      if (power & 1) term *= std::sqrt(mag2);
      local.add(term);
    }
    part[ci] = local;
  });
  detail::NeumaierSum total;
  for (const auto& s : part) total.merge(s);
  return total.value() / static_cast<double>(p);
}

double moment_identity_error(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                             unsigned ell, std::uint64_t full_cap, int threads) {
  std::uint64_t count = moment_count(L, N, m, ell);
  double mean = frequency_power_mean(L, N, m, 2 * ell, full_cap, threads);
  // count >= N^ell >= 1: the diagonal tuples alone reach it.
  return std::abs(mean - static_cast<double>(count)) / static_cast<double>(count);
}

}  // namespace factlab
