#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "factlab/combinatorics.hpp"
#include "factlab/factorial.hpp"

using namespace factlab;

namespace {

std::vector<std::uint64_t> random_nonzero(std::mt19937_64& rng, std::uint64_t p,
                                          std::size_t n) {
  std::vector<std::uint64_t> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(1 + rng() % (p - 1));
  return v;
}

}  // namespace

TEST_CASE("triangle comparison on random sets") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::uint64_t p = next_prime(100 + rng() % 2000);
    PrimeModulus m(p);
    ResidueSet x(m, random_nonzero(rng, p, 1 + rng() % 25));
    ResidueSet y(m, random_nonzero(rng, p, 1 + rng() % 25));
    ResidueSet z(m, random_nonzero(rng, p, 1 + rng() % 25));
    RuzsaCheck r = ruzsa_check(x, y, z);
    CHECK(r.holds);
    CHECK(r.z_size == z.cardinality());
    CHECK(r.quotient_size == quotient_set(x, y).cardinality());
    CHECK(r.xz_size == product_set(x, z).cardinality());
    CHECK(r.zy_size == product_set(z, y).cardinality());
    CHECK(r.quotient_size * r.z_size <= r.xz_size * r.zy_size);
  }
  PrimeModulus m(13);
  ResidueSet ok(m, {1, 2});
  ResidueSet zero(m, {0, 1});
  ResidueSet empty(m, std::vector<std::uint64_t>{});
  CHECK_THROWS_AS((void)ruzsa_check(zero, ok, ok), Error);
  CHECK_THROWS_AS((void)ruzsa_check(ok, zero, ok), Error);
  CHECK_THROWS_AS((void)ruzsa_check(ok, ok, zero), Error);
  CHECK_THROWS_AS((void)ruzsa_check(empty, ok, ok), Error);
}

TEST_CASE("subset ratio search") {
  PrimeModulus m(61);
  std::mt19937_64 rng(19);

  SUBCASE("exhaustive matches an in-test scan over admissible subsets") {
    std::vector<std::uint64_t> xv = {3, 7, 11, 19, 23, 31};
    ResidueSet x(m, xv);
    std::vector<ResidueSet> factors;
    factors.emplace_back(m, random_nonzero(rng, 61, 5));
    factors.emplace_back(m, random_nonzero(rng, 61, 4));

    // ratio = |X' B_1 B_2| * |X|^(k-1) / (|X B_1| * |X B_2|), k = 2 here.
    double denom = 1.0;
    for (const ResidueSet& b : factors)
      denom *= static_cast<double>(product_set(x, b).cardinality());
    double xpow = static_cast<double>(x.cardinality());

    double best = 1e300;
    std::uint64_t best_size = 0;
    const std::size_t n = xv.size();
    for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
      if (2 * static_cast<std::size_t>(std::popcount(mask)) <= n) continue;
      std::vector<std::uint64_t> sub;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) sub.push_back(xv[i]);
      ResidueSet s(m, sub);
      ResidueSet it = product_set(product_set(s, factors[0]), factors[1]);
      double ratio = static_cast<double>(it.cardinality()) * xpow / denom;
      if (ratio < best) {
        best = ratio;
        best_size = it.cardinality();
      }
    }

    KatzShenResult r = katz_shen_ratio(x, factors, SubsetStrategy::exhaustive);
    CHECK(r.ratio == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.iterated_size == best_size);
    CHECK(2 * r.subset.size() > x.cardinality());
    CHECK(std::is_sorted(r.subset.begin(), r.subset.end()));
    for (std::uint64_t v : r.subset) CHECK(x.contains(v));

    // The reported subset reproduces the reported iterated size.
    ResidueSet s(m, r.subset);
    ResidueSet it = product_set(product_set(s, factors[0]), factors[1]);
    CHECK(it.cardinality() == r.iterated_size);
  }

  SUBCASE("greedy stays admissible and exhaustive is never worse") {
    for (int trial = 0; trial < 8; ++trial) {
      ResidueSet x(m, random_nonzero(rng, 61, 8 + rng() % 5));
      std::vector<ResidueSet> factors;
      factors.emplace_back(m, random_nonzero(rng, 61, 3 + rng() % 4));
      KatzShenResult g = katz_shen_ratio(x, factors, SubsetStrategy::greedy);
      KatzShenResult e = katz_shen_ratio(x, factors, SubsetStrategy::exhaustive);
      CHECK(2 * g.subset.size() > x.cardinality());
      CHECK(e.ratio <= g.ratio * (1.0 + 1e-12));
      ResidueSet gs(m, g.subset);
      CHECK(product_set(gs, factors[0]).cardinality() == g.iterated_size);
    }
  }

  SUBCASE("exhaustive strategy is capped") {
    std::vector<std::uint64_t> big_vals(24);
    std::iota(big_vals.begin(), big_vals.end(), 1);
    ResidueSet big(m, big_vals);
    REQUIRE(big.cardinality() == 24);
    std::vector<ResidueSet> factors;
    factors.emplace_back(m, std::vector<std::uint64_t>{2, 3});
    try {
      (void)katz_shen_ratio(big, factors, SubsetStrategy::exhaustive);
      FAIL("expected cap_exceeded");
    } catch (const Error& e) {
      CHECK(e.status() == Status::cap_exceeded);
    }
    // Greedy has no such cap.
    CHECK(katz_shen_ratio(big, factors, SubsetStrategy::greedy).iterated_size > 0);
  }

  SUBCASE("factor list must be nonempty and zero-free") {
    ResidueSet x(m, {1, 2, 3});
    CHECK_THROWS_AS((void)katz_shen_ratio(x, {}, SubsetStrategy::greedy), Error);
    std::vector<ResidueSet> zf;
    zf.emplace_back(m, std::vector<std::uint64_t>{0, 1});
    CHECK_THROWS_AS((void)katz_shen_ratio(x, zf, SubsetStrategy::greedy), Error);
  }
}

TEST_CASE("coprime congruence pair counts") {
  // p = 7, s0 = 1, X = Y = 3: pairs with x = y mod 7 are (1,1), (2,2), (3,3);
  // only (1,1) is coprime. Ratio = 1 / (1 + 9/7).
  PrimeModulus m(7);
  CongruencePairCount r = coprime_solution_count(m, 1, 3, 3);
  CHECK(r.count == 1);
  CHECK(r.ratio == doctest::Approx(1.0 / (1.0 + 9.0 / 7.0)));

  auto brute = [](std::uint64_t p, std::uint64_t s0, std::uint64_t X, std::uint64_t Y) {
    std::uint64_t count = 0;
    for (std::uint64_t x = 1; x <= X; ++x)
      for (std::uint64_t y = 1; y <= Y; ++y)
        if (x % p == s0 * y % p && std::gcd(x, y) == 1) ++count;
    return count;
  };

  for (std::uint64_t p = 3; p <= 61; p = next_prime(p + 1)) {
    PrimeModulus q(p);
    std::uint64_t cap = std::min<std::uint64_t>(8, p - 1);
    for (std::uint64_t s0 = 1; s0 < p; ++s0)
      for (std::uint64_t X = 1; X <= cap; ++X)
        for (std::uint64_t Y = 1; Y <= cap; ++Y) {
          CongruencePairCount c = coprime_solution_count(q, s0, X, Y);
          CHECK(c.count == brute(p, s0, X, Y));
          // Swapping the bounds and inverting s0 mirrors the solution set.
          CongruencePairCount inv = coprime_solution_count(q, q.inv(s0), Y, X);
          CHECK(inv.count == c.count);
        }
  }

  // s0 is reduced mod p; the zero class admits no solutions with x >= 1.
  CHECK(coprime_solution_count(m, 0, 3, 3).count == 0);
  CHECK(coprime_solution_count(m, 7, 3, 3).count == 0);
  CHECK_THROWS_AS((void)coprime_solution_count(m, 1, 0, 3), Error);
  CHECK_THROWS_AS((void)coprime_solution_count(m, 1, 7, 3), Error);  // X must stay below p
}

TEST_CASE("factorial value census") {
  // n! mod 7 over n = 1..7: 1, 2, 6, 3, 1, 6, 0 -> distinct {0,1,2,3,6}.
  FactorialValueStats s7 = factorial_value_stats(PrimeModulus(7));
  CHECK(s7.p == 7);
  CHECK(s7.distinct == 5);
  CHECK(s7.missing == 2);
  CHECK(s7.missing_fraction() == doctest::Approx(2.0 / 7.0));
  CHECK(s7.distinct_fraction() == doctest::Approx(5.0 / 7.0));

  for (std::uint64_t p = 2; p <= 101; p = next_prime(p + 1)) {
    PrimeModulus m(p);
    std::set<std::uint64_t> seen;
    std::uint64_t f = 1;
    for (std::uint64_t n = 1; n <= p; ++n) {
      f = m.mul(f, n % p);
      seen.insert(f);
    }
    FactorialValueStats s = factorial_value_stats(m);
    CHECK(s.distinct == seen.size());
    CHECK(s.missing == p - seen.size());
  }

  FactorialValueStats big = factorial_value_stats(PrimeModulus(10'007));
  CHECK(big.missing_fraction() == doctest::Approx(0.365544).epsilon(1e-4));

  try {
    (void)factorial_value_stats(PrimeModulus(10'007), 100);
    FAIL("expected cap_exceeded");
  } catch (const Error& e) {
    CHECK(e.status() == Status::cap_exceeded);
  }
}

TEST_CASE("bound family names") {
  for (BoundFamily f : {BoundFamily::quotient_set, BoundFamily::product_set,
                        BoundFamily::product_set_small_n, BoundFamily::interval_product,
                        BoundFamily::interval_product_large_n})
    CHECK(bound_family_name(f)[0] != '\0');
}

TEST_CASE("quotient-set bound curve") {
  BoundProfile prof;
  prof.family = BoundFamily::quotient_set;
  prof.p = 10'000'000'000'000ull;  // 10^13
  const double p = 1e13;
  const double lp = std::log(p);
  // Range edges, largest to smallest.
  const double x1 = std::pow(p, 7.0 / 8.0) * lp;
  const double x2 = std::pow(p, 4.0 / 5.0) * std::pow(lp, 8.0 / 5.0);
  const double x3 = std::pow(p, 4.0 / 5.0) * std::pow(lp, 4.0 / 5.0);
  const double x4 = std::sqrt(p) * lp * lp;
  REQUIRE(x1 < p);
  REQUIRE(x2 < x1);
  REQUIRE(x3 < x2);
  REQUIRE(x4 < x3);

  auto at = [&](double n) {
    prof.n = static_cast<std::uint64_t>(n);
    return bound_curve(prof);
  };
  auto mid = [](double lo, double hi) { return std::sqrt(lo * hi); };

  BoundValue top = at(mid(x1, p));
  CHECK(top.in_regime);
  CHECK(top.case_label == "full_line");
  CHECK(top.value == doctest::Approx(p));
  CHECK_FALSE(top.asymptotic_placeholder);

  BoundValue second = at(mid(x2, x1));
  CHECK(second.in_regime);
  CHECK(second.case_label == "q_cuberoot_logq");
  {
    double n = static_cast<double>(prof.n);
    double q = n / (std::sqrt(p) * lp * lp);
    REQUIRE(q > 1.0);
    CHECK(second.value ==
          doctest::Approx(n * std::cbrt(q) * std::pow(std::log(q), -2.0 / 3.0)));
  }

  BoundValue third = at(mid(x3, x2));
  CHECK(third.in_regime);
  CHECK(third.case_label == "k_sqrt");
  {
    double n = static_cast<double>(prof.n);
    CHECK(third.value == doctest::Approx(n * std::sqrt(p / n)));
  }

  BoundValue fourth = at(mid(x4, x3));
  CHECK(fourth.in_regime);
  CHECK(fourth.case_label == "q_cuberoot");
  {
    double n = static_cast<double>(prof.n);
    double q = n / (std::sqrt(p) * lp * lp);
    CHECK(fourth.value == doctest::Approx(n * std::cbrt(q)));
  }

  BoundValue low = at(x4 / 2.0);
  CHECK_FALSE(low.in_regime);
  CHECK(low.case_label == "out_of_regime");
  CHECK(std::isnan(low.value));
  prof.n = prof.p + 1;
  CHECK_FALSE(bound_curve(prof).in_regime);

  // The leading constant scales the value linearly.
  prof.n = static_cast<std::uint64_t>(mid(x4, x3));
  prof.constant = 3.0;
  CHECK(bound_curve(prof).value == doctest::Approx(3.0 * fourth.value));
  prof.constant = 1.0;

  // Raising the cutoff constant empties the lowest range.
  prof.cutoff_constant = 1e6;
  CHECK_FALSE(bound_curve(prof).in_regime);
  prof.cutoff_constant = 1.0;

  // Degenerate profiles are rejected outright.
  prof.n = 0;
  CHECK_THROWS_AS((void)bound_curve(prof), Error);
  prof.n = 100;
  prof.constant = 0.0;
  CHECK_THROWS_AS((void)bound_curve(prof), Error);
  prof.constant = 1.0;
  prof.p = 1;
  CHECK_THROWS_AS((void)bound_curve(prof), Error);
}

TEST_CASE("product-set bound curves") {
  BoundProfile prof;
  prof.family = BoundFamily::product_set;
  prof.p = 10'000'000'000'000ull;
  const double p = 1e13;
  const double lp = std::log(p);
  const double mid_lo = std::pow(p, 29.0 / 40.0) * lp;
  const double mid_hi = std::pow(p, 7.0 / 8.0) * lp;

  prof.n = static_cast<std::uint64_t>(std::sqrt(mid_lo * mid_hi));
  BoundValue mid = bound_curve(prof);
  CHECK(mid.in_regime);
  CHECK(mid.case_label == "mid_range");
  CHECK_FALSE(mid.asymptotic_placeholder);
  CHECK(mid.value ==
        doctest::Approx(static_cast<double>(prof.n) / (std::pow(p, 0.125) * lp)));

  prof.n = static_cast<std::uint64_t>(std::sqrt(std::sqrt(p) * mid_lo));
  BoundValue low = bound_curve(prof);
  CHECK(low.in_regime);
  CHECK(low.case_label == "low_range");
  CHECK(low.asymptotic_placeholder);
  {
    double n = static_cast<double>(prof.n);
    double want = std::min(std::pow(p, 0.6), std::pow(n, 2.0 / 3.0) * std::pow(p, 1.0 / 6.0));
    CHECK(low.value == doctest::Approx(want));
  }

  prof.n = static_cast<std::uint64_t>(std::sqrt(p) / 2.0);
  CHECK_FALSE(bound_curve(prof).in_regime);
  prof.n = static_cast<std::uint64_t>(mid_hi * 2.0);
  CHECK_FALSE(bound_curve(prof).in_regime);

  prof.family = BoundFamily::product_set_small_n;
  prof.n = static_cast<std::uint64_t>(std::pow(p, 0.55));
  BoundValue small = bound_curve(prof);
  CHECK(small.in_regime);
  CHECK(small.case_label == "small_n");
  CHECK(small.asymptotic_placeholder);
  CHECK(small.value == doctest::Approx(static_cast<double>(prof.n)));
  prof.n = static_cast<std::uint64_t>(std::pow(p, 0.62));
  CHECK_FALSE(bound_curve(prof).in_regime);  // at or above p^(3/5)
}

TEST_CASE("interval product bound curves") {
  BoundProfile prof;
  prof.family = BoundFamily::interval_product;
  prof.p = 1'000'000;
  prof.n = 100;
  prof.m = 50;
  BoundValue v = bound_curve(prof);
  CHECK(v.in_regime);
  // min(p/ln^2 N, N^2/ln^2 N, NM/ln N) = N^2/ln^2 N here.
  CHECK(v.case_label == "n2_over_log2");
  CHECK(v.value == doctest::Approx(471.5292425290347).epsilon(1e-12));

  prof.m = 10;  // NM/ln N now binds
  BoundValue v2 = bound_curve(prof);
  CHECK(v2.case_label == "nm_over_log");
  CHECK(v2.value == doctest::Approx(1000.0 / std::log(100.0)));

  prof.n = 5'000;
  prof.m = 100'000;
  BoundValue v3 = bound_curve(prof);  // p/ln^2 N binds
  CHECK(v3.case_label == "p_over_log2");
  CHECK(v3.value == doctest::Approx(1e6 / std::pow(std::log(5000.0), 2)));

  // An exact tie between the first two cases goes to the first listed.
  prof.p = 10'000;
  prof.n = 100;
  prof.m = 100;
  BoundValue eq = bound_curve(prof);
  CHECK(eq.case_label == "p_over_log2");

  prof.n = 1;
  CHECK_FALSE(bound_curve(prof).in_regime);  // needs N >= 2 for a positive log
  prof.n = 10'000;
  CHECK_FALSE(bound_curve(prof).in_regime);  // N must stay below p
  prof.n = 100;
  prof.m = 0;
  CHECK_THROWS_AS((void)bound_curve(prof), Error);  // M is not optional here
}

TEST_CASE("interval product bound above sqrt p") {
  BoundProfile prof;
  prof.family = BoundFamily::interval_product_large_n;
  prof.p = 1'000'000'000ull;
  const double p = 1e9;

  prof.n = static_cast<std::uint64_t>(std::pow(p, 0.7));
  prof.m = 1'000;
  BoundValue high = bound_curve(prof);
  CHECK(high.in_regime);
  CHECK(high.case_label == "high_n");
  CHECK(high.asymptotic_placeholder);
  CHECK(high.value ==
        doctest::Approx(std::min(p, static_cast<double>(prof.n) * 1'000.0)));

  prof.n = static_cast<std::uint64_t>(std::pow(p, 0.55));
  BoundValue mid = bound_curve(prof);
  CHECK(mid.in_regime);
  CHECK(mid.case_label == "mid_n");
  {
    double n = static_cast<double>(prof.n);
    double want = std::min({p, n * std::pow(1'000.0, 0.25) * std::pow(p, 0.25), n * 1'000.0});
    CHECK(mid.value == doctest::Approx(want));
  }

  prof.n = static_cast<std::uint64_t>(std::pow(p, 0.45));
  CHECK_FALSE(bound_curve(prof).in_regime);
  prof.n = prof.p;
  CHECK_FALSE(bound_curve(prof).in_regime);
  prof.n = static_cast<std::uint64_t>(std::pow(p, 0.55));
  prof.m = 0;
  CHECK_THROWS_AS((void)bound_curve(prof), Error);
}
