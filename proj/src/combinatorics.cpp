#include "factlab/combinatorics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "detail/bits.hpp"
#include "factlab/factorial.hpp"

namespace factlab {

namespace {

void require_no_zero(const ResidueSet& s, const char* who, const char* which) {
  if (s.contains(0))
    fail(Status::invalid_argument, std::string(who) + ": set " + which + " contains 0");
  if (s.cardinality() == 0)
    fail(Status::invalid_argument, std::string(who) + ": set " + which + " is empty");
}

}  // namespace

RuzsaCheck ruzsa_check(const ResidueSet& x, const ResidueSet& y, const ResidueSet& z,
                       const OpLimits& lim) {
  if (!(x.modulus() == y.modulus()) || !(x.modulus() == z.modulus()))
    fail(Status::invalid_argument, "ruzsa_check: operands use different moduli");
  require_no_zero(x, "ruzsa_check", "X");
  require_no_zero(y, "ruzsa_check", "Y");
  require_no_zero(z, "ruzsa_check", "Z");
  RuzsaCheck out;
  out.quotient_size = quotient_set(x, y, lim).cardinality();
  out.xz_size = product_set(x, z, lim).cardinality();
  out.zy_size = product_set(z, y, lim).cardinality();
  out.z_size = z.cardinality();
  out.holds = static_cast<unsigned __int128>(out.quotient_size) * out.z_size <=
              static_cast<unsigned __int128>(out.xz_size) * out.zy_size;
  return out;
}

namespace {

std::uint64_t iterated_product_size(const PrimeModulus& m,
                                    const std::vector<std::uint64_t>& subset,
                                    const std::vector<ResidueSet>& factors,
                                    const OpLimits& lim) {
  ResidueSet cur(m, subset);
  for (const ResidueSet& b : factors) cur = product_set(cur, b, lim);
  return cur.cardinality();
}

}  // namespace

KatzShenResult katz_shen_ratio(const ResidueSet& x, const std::vector<ResidueSet>& factors,
                               SubsetStrategy strategy, const OpLimits& lim) {
  const PrimeModulus& m = x.modulus();
  require_no_zero(x, "katz_shen_ratio", "X");
  if (factors.empty())
    fail(Status::invalid_argument, "katz_shen_ratio: need at least one factor set");
  for (const ResidueSet& b : factors) {
    if (!(b.modulus() == m))
      fail(Status::invalid_argument, "katz_shen_ratio: operands use different moduli");
    require_no_zero(b, "katz_shen_ratio", "B_i");
  }

  const std::vector<std::uint64_t> xvals = x.values();
  const std::size_t n = xvals.size();

  // Denominator: product of the undropped growths |X B_i|, scaled by |X|^(k-1).
  double denom = 1.0;
  for (const ResidueSet& b : factors)
    denom *= static_cast<double>(product_set(x, b, lim).cardinality());
  double xpow = std::pow(static_cast<double>(n), static_cast<double>(factors.size()) - 1.0);

  auto evaluate = [&](const std::vector<std::uint64_t>& subset) {
    return iterated_product_size(m, subset, factors, lim);
  };
  auto admissible = [&](std::size_t size) { return 2 * size > n; };

  std::vector<std::uint64_t> best_subset = xvals;
  std::uint64_t best_size = evaluate(xvals);

  if (strategy == SubsetStrategy::exhaustive) {
    constexpr std::size_t kExhaustiveCap = 20;
    if (n > kExhaustiveCap)
      fail(Status::cap_exceeded,
           "katz_shen_ratio: exhaustive strategy caps |X| at " +
               std::to_string(kExhaustiveCap) + ", got " + std::to_string(n));
    // Ascending mask order with strict improvement keeps ties deterministic.
    for (std::uint64_t mask = 1; mask + 1 < (1ull << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) * 2 <= n) continue;
      std::vector<std::uint64_t> subset;
      subset.reserve(static_cast<std::size_t>(std::popcount(mask)));
      for (std::size_t i = 0; i < n; ++i)
        if ((mask >> i) & 1) subset.push_back(xvals[i]);
      std::uint64_t size = evaluate(subset);
      if (size < best_size) {
        best_size = size;
        best_subset = std::move(subset);
      }
    }
  } else {
    // Drop the element whose removal shrinks the product most; recompute the
    // whole scan each round; keep the best admissible configuration seen.
    std::vector<std::uint64_t> cur = xvals;
    while (admissible(cur.size() - 1)) {
      std::uint64_t round_best = std::numeric_limits<std::uint64_t>::max();
      std::size_t drop = cur.size();
      for (std::size_t i = 0; i < cur.size(); ++i) {
        std::vector<std::uint64_t> cand;
        cand.reserve(cur.size() - 1);
        for (std::size_t j = 0; j < cur.size(); ++j)
          if (j != i) cand.push_back(cur[j]);
        std::uint64_t size = evaluate(cand);
        if (size < round_best) {
          round_best = size;
          drop = i;
        }
      }
      cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(drop));
      if (round_best < best_size) {
        best_size = round_best;
        best_subset = cur;
      }
    }
  }

  KatzShenResult out;
  out.subset = std::move(best_subset);
  out.iterated_size = best_size;
  out.ratio = static_cast<double>(best_size) * xpow / denom;
  return out;
}

CongruencePairCount coprime_solution_count(const PrimeModulus& m, std::uint64_t s0,
                                           std::uint64_t x_bound, std::uint64_t y_bound) {
  const std::uint64_t p = m.value();
  if (x_bound == 0 || x_bound >= p || y_bound == 0 || y_bound >= p)
    fail(Status::invalid_argument,
         "coprime_solution_count: bounds must lie in [1, p-1]");
  s0 = m.reduce(s0);
  CongruencePairCount out;
  for (std::uint64_t y = 1; y <= y_bound; ++y) {
    std::uint64_t x = m.mul(s0, y);
    if (x >= 1 && x <= x_bound && std::gcd(x, y) == 1) ++out.count;
  }
  out.ratio = static_cast<double>(out.count) /
              (1.0 + static_cast<double>(x_bound) * static_cast<double>(y_bound) /
                         static_cast<double>(p));
  return out;
}

FactorialValueStats factorial_value_stats(const PrimeModulus& m, std::uint64_t scan_cap) {
  const std::uint64_t p = m.value();
  if (p > scan_cap)
    fail(Status::cap_exceeded, "factorial_value_stats: p = " + std::to_string(p) +
                                   " exceeds the full-scan cap " + std::to_string(scan_cap));
  detail::Bitset seen(p);
  std::uint64_t f = 1;
  for (std::uint64_t n = 1; n <= p; ++n) {
    f = m.mul(f, n % p);
    seen.set(f);
  }
  FactorialValueStats out;
  out.p = p;
  out.distinct = seen.count();
  out.missing = p - out.distinct;
  return out;
}

const char* bound_family_name(BoundFamily family) noexcept {
  switch (family) {
    case BoundFamily::quotient_set:
      return "quotient_set";
    case BoundFamily::product_set:
      return "product_set";
    case BoundFamily::product_set_small_n:
      return "product_set_small_n";
    case BoundFamily::interval_product:
      return "interval_product";
    case BoundFamily::interval_product_large_n:
      return "interval_product_large_n";
  }
  return "?";
}

namespace {

BoundValue out_of_regime() {
  BoundValue v;
  v.value = std::numeric_limits<double>::quiet_NaN();
  v.case_label = "out_of_regime";
  v.asymptotic_placeholder = false;
  v.in_regime = false;
  return v;
}

BoundValue in_regime(double value, const char* label, bool placeholder) {
  BoundValue v;
  v.value = value;
  v.case_label = label;
  v.asymptotic_placeholder = placeholder;
  v.in_regime = true;
  return v;
}

}  // namespace

BoundValue bound_curve(const BoundProfile& profile) {
  if (profile.p < 2 || profile.n == 0)
    fail(Status::invalid_argument, "bound_curve: p and N must be positive");
  if (profile.constant <= 0.0 || profile.cutoff_constant <= 0.0)
    fail(Status::invalid_argument, "bound_curve: constants must be positive");
  const double p = static_cast<double>(profile.p);
  const double N = static_cast<double>(profile.n);
  const double M = static_cast<double>(profile.m);
  const double lp = std::log(p);
  const double C = profile.constant;

  switch (profile.family) {
    case BoundFamily::quotient_set: {
      if (N > p) return out_of_regime();
      const double K = p / N;
      const double Q = N / (std::sqrt(p) * lp * lp);
      const double x1 = std::pow(p, 7.0 / 8.0) * lp;
      const double x2 = std::pow(p, 4.0 / 5.0) * std::pow(lp, 8.0 / 5.0);
      const double x3 = std::pow(p, 4.0 / 5.0) * std::pow(lp, 4.0 / 5.0);
      const double x4 = profile.cutoff_constant * std::sqrt(p) * lp * lp;
      if (N >= x1) return in_regime(C * p, "full_line", false);
      if (x1 >= N && N >= x2) {
        if (Q <= 1.0) return out_of_regime();  // log Q must be positive here
        return in_regime(C * N * std::cbrt(Q) * std::pow(std::log(Q), -2.0 / 3.0),
                         "q_cuberoot_logq", false);
      }
      if (x2 >= N && N >= x3) return in_regime(C * N * std::sqrt(K), "k_sqrt", false);
      if (x3 >= N && N >= x4) return in_regime(C * N * std::cbrt(Q), "q_cuberoot", false);
      return out_of_regime();
    }
    case BoundFamily::product_set: {
      const double mid_lo = std::pow(p, 29.0 / 40.0) * lp;
      const double mid_hi = std::pow(p, 7.0 / 8.0) * lp;
      if (mid_lo <= N && N <= mid_hi)
        return in_regime(C * N / (std::pow(p, 1.0 / 8.0) * lp), "mid_range", false);
      if (std::sqrt(p) <= N && N <= mid_lo) {
        double v = std::min(std::pow(p, 3.0 / 5.0),
                            std::pow(N, 2.0 / 3.0) * std::pow(p, 1.0 / 6.0));
        return in_regime(C * v, "low_range", true);
      }
      return out_of_regime();
    }
    case BoundFamily::product_set_small_n: {
      if (N < std::pow(p, 3.0 / 5.0)) return in_regime(C * N, "small_n", true);
      return out_of_regime();
    }
    case BoundFamily::interval_product: {
      if (profile.m == 0)
        fail(Status::invalid_argument, "bound_curve: interval_product needs M >= 1");
      if (N >= p || N < 2) return out_of_regime();  // log N must be positive
      const double ln = std::log(N);
      const double b1 = p / (ln * ln);
      const double b2 = N * N / (ln * ln);
      const double b3 = N * M / ln;
      if (b1 <= b2 && b1 <= b3) return in_regime(C * b1, "p_over_log2", false);
      if (b2 <= b3) return in_regime(C * b2, "n2_over_log2", false);
      return in_regime(C * b3, "nm_over_log", false);
    }
    case BoundFamily::interval_product_large_n: {
      if (profile.m == 0)
        fail(Status::invalid_argument,
             "bound_curve: interval_product_large_n needs M >= 1");
      if (N >= p) return out_of_regime();
      if (N >= std::pow(p, 2.0 / 3.0))
        return in_regime(C * std::min(p, N * M), "high_n", true);
      if (N >= std::sqrt(p)) {
        double v = std::min({p, N * std::pow(M, 0.25) * std::pow(p, 0.25), N * M});
        return in_regime(C * v, "mid_n", true);
      }
      return out_of_regime();
    }
  }
  fail(Status::invalid_argument, "bound_curve: unknown family");
}

}  // namespace factlab
