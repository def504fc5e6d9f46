#include "factlab/residue_set.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "detail/parallel.hpp"
#include "detail/rng.hpp"
#include "factlab/factorial.hpp"

namespace factlab {

namespace detail {

struct SetBuilder {
  // words: bit array over [0, p), count: its popcount.
  static ResidueSet from_words(PrimeModulus m, std::vector<std::uint64_t> words,
                               std::uint64_t count, SetRepr repr) {
    bool dense = repr == SetRepr::automatic ? ResidueSet::prefer_dense(m.value(), count)
                                            : repr == SetRepr::dense;
    ResidueSet s(std::move(m), dense);
    s.count_ = count;
    if (dense) {
      s.words_ = std::move(words);
    } else {
      s.sorted_.reserve(count);
      for (std::size_t wi = 0; wi < words.size(); ++wi) {
        std::uint64_t w = words[wi];
        while (w) {
          s.sorted_.push_back(static_cast<std::uint64_t>(wi) * 64 +
                              static_cast<std::uint64_t>(std::countr_zero(w)));
          w &= w - 1;
        }
      }
    }
    return s;
  }

  // values: sorted, unique, reduced.
  static ResidueSet from_sorted(PrimeModulus m, std::vector<std::uint64_t> values,
                                SetRepr repr) {
    const std::uint64_t p = m.value();
    bool dense = repr == SetRepr::automatic ? ResidueSet::prefer_dense(p, values.size())
                                            : repr == SetRepr::dense;
    ResidueSet s(std::move(m), dense);
    s.count_ = values.size();
    if (dense) {
      s.words_.assign((p + 63) / 64, 0);
      for (std::uint64_t v : values) s.words_[v >> 6] |= 1ull << (v & 63);
    } else {
      s.sorted_ = std::move(values);
    }
    return s;
  }
};

}  // namespace detail

ResidueSet::ResidueSet(PrimeModulus m, const std::vector<std::uint64_t>& values, SetRepr repr)
    : ResidueSet(detail::SetBuilder::from_sorted(
          m,
          [&m, &values] {
            std::vector<std::uint64_t> v;
            v.reserve(values.size());
            for (std::uint64_t x : values) v.push_back(m.reduce(x));
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            return v;
          }(),
          repr)) {}

ResidueSet ResidueSet::factorials(const PrimeModulus& m, std::uint64_t count,
                                  const FactorialSetOptions& opts) {
  const std::uint64_t p = m.value();
  if (count == 0) fail(Status::invalid_argument, "factorials: count must be at least 1");
  // Past n = p every factorial is 0, so the set stops growing there.
  std::uint64_t scan_len = std::min(count, p);
  std::vector<std::uint64_t> vals;
  vals.reserve(std::min<std::uint64_t>(scan_len, 1ull << 24));
  factorial_scan(
      0, scan_len, m, [&](std::uint64_t, std::uint64_t f) { vals.push_back(f); },
      opts.allow_zero_tail);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return detail::SetBuilder::from_sorted(m, std::move(vals), opts.repr);
}

std::vector<std::uint64_t> ResidueSet::values() const {
  std::vector<std::uint64_t> out;
  out.reserve(count_);
  for_each([&](std::uint64_t v) { out.push_back(v); });
  return out;
}

namespace {

enum class PairOp { product, quotient, sum };

ResidueSet pairwise_op(const ResidueSet& a, const ResidueSet& b, PairOp op, const OpLimits& lim,
                       const char* who) {
  if (!(a.modulus() == b.modulus()))
    fail(Status::invalid_argument, std::string(who) + ": operands use different moduli");
  const PrimeModulus& m = a.modulus();
  const std::uint64_t p = m.value();
  if (op == PairOp::quotient && b.contains(0))
    fail(Status::invalid_argument, std::string(who) + ": divisor set contains 0");

  const unsigned __int128 pairs =
      static_cast<unsigned __int128>(a.cardinality()) * b.cardinality();
  if (pairs > lim.pair_budget)
    fail(Status::budget_exceeded,
         std::string(who) + ": " + std::to_string(a.cardinality()) + " * " +
             std::to_string(b.cardinality()) +
             " pair operations exceed the budget of " + std::to_string(lim.pair_budget) +
             " (raise OpLimits::pair_budget, or use estimate_product_cardinality)");

  std::vector<std::uint64_t> avals = a.values();
  std::vector<std::uint64_t> bvals = b.values();
  if (op == PairOp::quotient) bvals = batch_inverse(bvals, m);

  auto apply = [&m, op](std::uint64_t x, std::uint64_t y) {
    return op == PairOp::sum ? m.add(x, y) : m.mul(x, y);
  };

  if (p <= ResidueSet::kDenseUniverseMax) {
    const std::size_t nwords = (p + 63) / 64;
    int threads = lim.threads < 1 ? 1 : lim.threads;
    std::vector<std::vector<std::uint64_t>> acc(
        std::min<std::uint64_t>(threads, std::max<std::uint64_t>(avals.size(), 1)));
    detail::parallel_chunks(avals.size(), threads,
                            [&](int ci, std::uint64_t begin, std::uint64_t end) {
                              auto& words = acc[ci];
                              words.assign(nwords, 0);
                              for (std::uint64_t i = begin; i < end; ++i) {
                                std::uint64_t x = avals[i];
                                for (std::uint64_t y : bvals) {
                                  std::uint64_t v = apply(x, y);
                                  words[v >> 6] |= 1ull << (v & 63);
                                }
                              }
                            });
    std::vector<std::uint64_t> words = acc.empty() ? std::vector<std::uint64_t>(nwords, 0)
                                                   : std::move(acc[0]);
    if (words.empty()) words.assign(nwords, 0);
    for (std::size_t ci = 1; ci < acc.size(); ++ci)
      for (std::size_t w = 0; w < nwords; ++w) words[w] |= acc[ci][w];
    std::uint64_t count = 0;
    for (std::uint64_t w : words) count += static_cast<std::uint64_t>(std::popcount(w));
    return detail::SetBuilder::from_words(m, std::move(words), count, lim.result_repr);
  }

  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t x : avals)
    for (std::uint64_t y : bvals) seen.insert(apply(x, y));
  std::vector<std::uint64_t> vals(seen.begin(), seen.end());
  std::sort(vals.begin(), vals.end());
  return detail::SetBuilder::from_sorted(m, std::move(vals), lim.result_repr);
}

}  // namespace

ResidueSet product_set(const ResidueSet& a, const ResidueSet& b, const OpLimits& lim) {
  return pairwise_op(a, b, PairOp::product, lim, "product_set");
}

ResidueSet quotient_set(const ResidueSet& a, const ResidueSet& b, const OpLimits& lim) {
  return pairwise_op(a, b, PairOp::quotient, lim, "quotient_set");
}

ResidueSet sumset(const ResidueSet& a, const ResidueSet& b, const OpLimits& lim) {
  return pairwise_op(a, b, PairOp::sum, lim, "sumset");
}

SetView SetView::of_set(const ResidueSet& s) {
  SetView v(Kind::set, s.modulus());
  v.set_ = &s;
  return v;
}

SetView SetView::interval(const PrimeModulus& m, std::uint64_t n) {
  if (n == 0 || n >= m.value())
    fail(Status::invalid_argument,
         "interval view requires 1 <= n < p; got n = " + std::to_string(n));
  SetView v(Kind::interval, m);
  v.n_ = n;
  return v;
}

SetView SetView::primes_up_to(const PrimeModulus& m, std::uint64_t n) {
  if (n < 2 || n >= m.value())
    fail(Status::invalid_argument,
         "primes view requires 2 <= n < p; got n = " + std::to_string(n));
  constexpr std::uint64_t kSieveCap = 1ull << 27;
  if (n > kSieveCap)
    fail(Status::cap_exceeded, "primes view bound " + std::to_string(n) +
                                   " exceeds the sieve cap " + std::to_string(kSieveCap));
  SetView v(Kind::primes, m);
  v.n_ = n;
  std::vector<bool> composite(n + 1, false);
  for (std::uint64_t q = 2; q * q <= n; ++q)
    if (!composite[q])
      for (std::uint64_t x = q * q; x <= n; x += q) composite[x] = true;
  for (std::uint64_t q = 2; q <= n; ++q)
    if (!composite[q]) v.primes_.push_back(q);
  return v;
}

std::uint64_t SetView::size() const noexcept {
  switch (kind_) {
    case Kind::set:
      return set_->cardinality();
    case Kind::interval:
      return n_;
    case Kind::primes:
      return primes_.size();
  }
  return 0;
}

const char* SetView::kind_name() const noexcept {
  switch (kind_) {
    case Kind::set:
      return "set";
    case Kind::interval:
      return "interval";
    case Kind::primes:
      return "primes";
  }
  return "?";
}

bool SetView::contains_zero() const noexcept {
  return kind_ == Kind::set && set_->contains(0);
}

EnergyCount multiplicative_energy(const SetView& s, const ResidueSet& mset,
                                  const OpLimits& lim) {
  if (!(s.modulus() == mset.modulus()))
    fail(Status::invalid_argument, "multiplicative_energy: operands use different moduli");
  const PrimeModulus& m = s.modulus();
  const std::uint64_t p = m.value();
  if (s.contains_zero())
    fail(Status::invalid_argument, "multiplicative_energy: left operand contains 0");
  if (mset.contains(0))
    fail(Status::invalid_argument, "multiplicative_energy: right set contains 0");

  const unsigned __int128 pairs = static_cast<unsigned __int128>(s.size()) * mset.cardinality();
  if (pairs > lim.pair_budget)
    fail(Status::budget_exceeded,
         "multiplicative_energy: " + std::to_string(s.size()) + " * " +
             std::to_string(mset.cardinality()) + " pair operations exceed the budget of " +
             std::to_string(lim.pair_budget));

  std::vector<std::uint64_t> mvals = mset.values();
  EnergyCount out;
  out.p = p;
  out.left_size = s.size();
  out.right_size = mset.cardinality();
  if (mvals.empty() || s.size() == 0) return out;

  constexpr std::uint64_t kDenseBucketMax = 1ull << 24;
  if (p <= kDenseBucketMax) {
    // c(v) <= min(|S|, |M|) <= p < 2^32, so 32-bit buckets cannot wrap.
    std::vector<std::uint64_t> svals;
    svals.reserve(s.size());
    s.for_each([&](std::uint64_t v) { svals.push_back(v); });
    int threads = lim.threads < 1 ? 1 : lim.threads;
    std::uint64_t nchunks = std::min<std::uint64_t>(threads, svals.size());
    std::vector<std::vector<std::uint32_t>> buckets(nchunks);
    detail::parallel_chunks(svals.size(), threads,
                            [&](int ci, std::uint64_t begin, std::uint64_t end) {
                              auto& bucket = buckets[ci];
                              bucket.assign(p, 0);
                              for (std::uint64_t i = begin; i < end; ++i) {
                                std::uint64_t x = svals[i];
                                for (std::uint64_t y : mvals) ++bucket[m.mul(x, y)];
                              }
                            });
    for (std::size_t ci = 1; ci < buckets.size(); ++ci)
      for (std::uint64_t v = 0; v < p; ++v) buckets[0][v] += buckets[ci][v];
    unsigned __int128 energy = 0;
    for (std::uint64_t v = 0; v < p; ++v) {
      std::uint64_t c = buckets[0][v];
      energy += static_cast<unsigned __int128>(c) * c;
    }
    if (energy > std::numeric_limits<std::uint64_t>::max())
      fail(Status::budget_exceeded, "multiplicative_energy: count exceeds 64-bit range");
    out.count = static_cast<std::uint64_t>(energy);
    return out;
  }

  std::unordered_map<std::uint64_t, std::uint64_t> bucket;
  s.for_each([&](std::uint64_t x) {
    for (std::uint64_t y : mvals) ++bucket[m.mul(x, y)];
  });
  unsigned __int128 energy = 0;
  for (const auto& [v, c] : bucket) energy += static_cast<unsigned __int128>(c) * c;
  if (energy > std::numeric_limits<std::uint64_t>::max())
    fail(Status::budget_exceeded, "multiplicative_energy: count exceeds 64-bit range");
  out.count = static_cast<std::uint64_t>(energy);
  return out;
}

CardinalityEstimate estimate_product_cardinality(const ResidueSet& a, const ResidueSet& b,
                                                 std::uint64_t samples, std::uint64_t seed) {
  if (!(a.modulus() == b.modulus()))
    fail(Status::invalid_argument,
         "estimate_product_cardinality: operands use different moduli");
  if (samples == 0)
    fail(Status::invalid_argument, "estimate_product_cardinality: need at least 1 sample");
  const PrimeModulus& m = a.modulus();

  if (a.cardinality() == 0 || b.cardinality() == 0)
    return {0.0, 0.0, 0.0, true, 0};

  // Zero products exist iff either operand holds 0; factor them out so every
  // sampled product is invertible.
  std::vector<std::uint64_t> avals = a.values();
  std::vector<std::uint64_t> bvals = b.values();
  const bool zero_product = a.contains(0) || b.contains(0);
  std::erase(avals, 0ull);
  std::erase(bvals, 0ull);
  const double zero_add = zero_product ? 1.0 : 0.0;
  if (avals.empty() || bvals.empty())
    return {zero_add, zero_add, zero_add, true, 0};

  const unsigned __int128 total =
      static_cast<unsigned __int128>(avals.size()) * bvals.size();
  if (total <= samples) {
    OpLimits lim;
    lim.pair_budget = static_cast<std::uint64_t>(total);
    ResidueSet prod = product_set(ResidueSet(m, avals), ResidueSet(m, bvals), lim);
    double v = static_cast<double>(prod.cardinality()) + zero_add;
    return {v, v, v, true, static_cast<std::uint64_t>(total)};
  }

  std::mt19937_64 gen(seed);
  std::unordered_map<std::uint64_t, std::uint64_t> tally;
  for (std::uint64_t k = 0; k < samples; ++k) {
    std::uint64_t x = avals[detail::uniform_below(gen, avals.size())];
    std::uint64_t y = bvals[detail::uniform_below(gen, bvals.size())];
    ++tally[m.mul(x, y)];
  }
  std::vector<std::uint64_t> distinct;
  distinct.reserve(tally.size());
  for (const auto& [v, _] : tally) distinct.push_back(v);
  std::sort(distinct.begin(), distinct.end());

  std::vector<std::uint64_t> ainv = batch_inverse(avals, m);
  const double denom = static_cast<double>(avals.size()) * static_cast<double>(bvals.size());
  double estimate = 0.0;
  double variance = 0.0;
  for (std::uint64_t v : distinct) {
    // Exact multiplicity of v over A x B: for each a the cofactor is unique.
    std::uint64_t mult = 0;
    for (std::uint64_t x : ainv)
      if (b.contains(m.mul(v, x))) ++mult;
    const double q = static_cast<double>(mult) / denom;
    const double p_seen = -std::expm1(static_cast<double>(samples) * std::log1p(-q));
    estimate += 1.0 / p_seen;
    variance += (1.0 - p_seen) / (p_seen * p_seen);
  }
  const double width = 1.96 * std::sqrt(variance);
  const double pd = static_cast<double>(m.value());
  CardinalityEstimate out;
  out.value = std::min(estimate + zero_add, pd);
  out.ci_low = std::max(estimate - width, static_cast<double>(distinct.size())) + zero_add;
  out.ci_high = std::min(estimate + width + zero_add, pd);
  out.ci_low = std::min(out.ci_low, out.value);
  out.exact = false;
  out.samples = samples;
  return out;
}

void write_set(const ResidueSet& s, std::ostream& out) {
  out << "p=" << s.universe() << " n=" << s.cardinality() << '\n';
  s.for_each([&](std::uint64_t v) { out << v << '\n'; });
}

ResidueSet read_set(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) fail(Status::corrupt_data, "set file: missing header");
  std::uint64_t p = 0, n = 0;
  {
    std::istringstream hs(header);
    std::string pf, nf;
    if (!(hs >> pf >> nf) || pf.rfind("p=", 0) != 0 || nf.rfind("n=", 0) != 0)
      fail(Status::corrupt_data, "set file: malformed header: " + header);
    try {
      p = std::stoull(pf.substr(2));
      n = std::stoull(nf.substr(2));
    } catch (const std::exception&) {
      fail(Status::corrupt_data, "set file: malformed header: " + header);
    }
  }
  if (!is_prime(p)) fail(Status::corrupt_data, "set file: modulus " + std::to_string(p) + " is not prime");
  PrimeModulus m(p);
  std::vector<std::uint64_t> vals;
  vals.reserve(n);
  std::string line;
  while (vals.size() < n) {
    if (!std::getline(in, line))
      fail(Status::corrupt_data, "set file: expected " + std::to_string(n) +
                                     " residues, found " + std::to_string(vals.size()));
    if (line.empty()) continue;
    std::uint64_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoull(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      fail(Status::corrupt_data, "set file: malformed residue line: " + line);
    }
    if (v >= p) fail(Status::corrupt_data, "set file: residue " + line + " not reduced mod p");
    if (!vals.empty() && v <= vals.back())
      fail(Status::corrupt_data, "set file: residues must be strictly ascending");
    vals.push_back(v);
  }
  while (std::getline(in, line))
    if (!line.empty())
      fail(Status::corrupt_data, "set file: trailing data past the declared count");
  return detail::SetBuilder::from_sorted(m, std::move(vals), SetRepr::automatic);
}

}  // namespace factlab
