#include "factlab/solver.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "detail/bits.hpp"
#include "factlab/factorial.hpp"

namespace factlab {

const char* shape_name(RepShape shape) noexcept {
  switch (shape) {
    case RepShape::wilson_pair:
      return "wilson_pair";
    case RepShape::two_product:
      return "two_product";
    case RepShape::k_term_product:
      return "k_term_product";
    case RepShape::product_plus_factorials:
      return "product_plus_factorials";
    case RepShape::cp_form:
      return "cp_form";
  }
  return "?";
}

std::optional<RepShape> shape_from_name(std::string_view name) noexcept {
  for (RepShape s : {RepShape::wilson_pair, RepShape::two_product, RepShape::k_term_product,
                     RepShape::product_plus_factorials, RepShape::cp_form})
    if (name == shape_name(s)) return s;
  return std::nullopt;
}

std::string certificate_to_text(const RepresentationCertificate& cert) {
  std::ostringstream out;
  out << "shape: " << shape_name(cert.shape) << '\n';
  out << "p: " << cert.p << '\n';
  out << "lambda: " << cert.lambda << '\n';
  out << "bound: " << cert.bound << '\n';
  if (cert.shape == RepShape::cp_form) out << "c: " << cert.c << '\n';
  if (!cert.product_pairs.empty()) {
    out << "pairs:";
    for (const auto& [a, b] : cert.product_pairs) out << ' ' << a << '*' << b;
    out << '\n';
  }
  if (!cert.factorial_terms.empty()) {
    out << "terms:";
    for (std::uint64_t t : cert.factorial_terms) out << ' ' << t;
    out << '\n';
  }
  return out.str();
}

namespace {

[[noreturn]] void corrupt_cert(const std::string& why) {
  fail(Status::corrupt_data, "certificate text: " + why);
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    corrupt_cert(std::string("bad ") + what + " value: " + s);
  }
}

}  // namespace

RepresentationCertificate certificate_from_text(std::string_view text) {
  RepresentationCertificate cert;
  bool saw_shape = false, saw_p = false, saw_lambda = false, saw_bound = false, saw_c = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto colon = line.find(": ");
    if (colon == std::string::npos)
      corrupt_cert("line lacks a 'key: value' form: " + line);
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 2);
    if (key == "shape") {
      if (saw_shape) corrupt_cert("duplicate shape");
      auto s = shape_from_name(value);
      if (!s) corrupt_cert("unknown shape: " + value);
      cert.shape = *s;
      saw_shape = true;
    } else if (key == "p") {
      if (saw_p) corrupt_cert("duplicate p");
      cert.p = parse_u64(value, "p");
      saw_p = true;
    } else if (key == "lambda") {
      if (saw_lambda) corrupt_cert("duplicate lambda");
      cert.lambda = parse_u64(value, "lambda");
      saw_lambda = true;
    } else if (key == "bound") {
      if (saw_bound) corrupt_cert("duplicate bound");
      cert.bound = parse_u64(value, "bound");
      saw_bound = true;
    } else if (key == "c") {
      if (saw_c) corrupt_cert("duplicate c");
      cert.c = parse_u64(value, "c");
      saw_c = true;
    } else if (key == "pairs") {
      if (!cert.product_pairs.empty()) corrupt_cert("duplicate pairs");
      std::istringstream ps(value);
      std::string tok;
      while (ps >> tok) {
        auto star = tok.find('*');
        if (star == std::string::npos || star == 0 || star + 1 == tok.size())
          corrupt_cert("bad pair token: " + tok);
        cert.product_pairs.emplace_back(parse_u64(tok.substr(0, star), "pair index"),
                                        parse_u64(tok.substr(star + 1), "pair index"));
      }
      if (cert.product_pairs.empty()) corrupt_cert("empty pairs line");
    } else if (key == "terms") {
      if (!cert.factorial_terms.empty()) corrupt_cert("duplicate terms");
      std::istringstream ts(value);
      std::string tok;
      while (ts >> tok) cert.factorial_terms.push_back(parse_u64(tok, "term index"));
      if (cert.factorial_terms.empty()) corrupt_cert("empty terms line");
    } else {
      corrupt_cert("unknown key: " + key);
    }
  }
  if (!saw_shape || !saw_p || !saw_lambda || !saw_bound)
    corrupt_cert("missing one of the required keys shape/p/lambda/bound");
  if (saw_c && cert.shape != RepShape::cp_form)
    corrupt_cert("coefficient c only belongs to cp_form");
  return cert;
}

Verification verify_certificate(const RepresentationCertificate& cert) {
  PrimeModulus m(cert.p);
  const std::uint64_t p = m.value();
  if (cert.lambda >= p)
    fail(Status::invalid_argument, "certificate: lambda " + std::to_string(cert.lambda) +
                                       " is not reduced mod " + std::to_string(p));

  const std::size_t pairs = cert.product_pairs.size();
  const std::size_t terms = cert.factorial_terms.size();
  bool arity_ok = false;
  std::uint64_t min_index = 1;
  switch (cert.shape) {
    case RepShape::wilson_pair:
      arity_ok = pairs == 1 && terms == 0 && cert.c == 0;
      min_index = 0;  // the class 0 pairs 0! with p!
      break;
    case RepShape::two_product:
      arity_ok = pairs == 2 && terms == 0 && cert.c == 0;
      min_index = 0;
      break;
    case RepShape::k_term_product:
      arity_ok = pairs >= 1 && terms == 0 && cert.c == 0;
      break;
    case RepShape::product_plus_factorials:
      arity_ok = pairs == 1 && terms >= 1 && cert.c == 0;
      break;
    case RepShape::cp_form:
      arity_ok = pairs == 0 && terms == 4 && cert.c >= 1;
      break;
    default:
      fail(Status::invalid_argument, "certificate: unknown shape");
  }
  if (!arity_ok)
    fail(Status::invalid_argument,
         std::string("certificate: witness arity does not fit shape ") +
             shape_name(cert.shape));

  bool bounds_ok = true;
  auto check_index = [&](std::uint64_t n) {
    if (n < min_index)
      fail(Status::invalid_argument, "certificate: witness index " + std::to_string(n) +
                                         " below the minimum for this shape");
    if (n > cert.bound) bounds_ok = false;
  };
  for (const auto& [a, b] : cert.product_pairs) {
    check_index(a);
    check_index(b);
  }
  for (std::uint64_t t : cert.factorial_terms) check_index(t);

  // Recompute from scratch; factorials are memoized only within this call.
  std::unordered_map<std::uint64_t, std::uint64_t> memo;
  auto fact = [&](std::uint64_t n) {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    std::uint64_t v = factorial_mod(n, m);
    memo.emplace(n, v);
    return v;
  };

  std::uint64_t sum = 0;
  if (cert.shape == RepShape::cp_form) {
    const std::uint64_t cr = m.reduce(cert.c);
    sum = m.add(fact(cert.factorial_terms[0]), fact(cert.factorial_terms[1]));
    sum = m.add(sum, m.mul(cr, fact(cert.factorial_terms[2])));
    sum = m.add(sum, m.mul(cr, fact(cert.factorial_terms[3])));
  } else {
    for (const auto& [a, b] : cert.product_pairs) sum = m.add(sum, m.mul(fact(a), fact(b)));
    for (std::uint64_t t : cert.factorial_terms) sum = m.add(sum, fact(t));
  }

  Verification v;
  v.bounds_ok = bounds_ok;
  v.recomputed = sum;
  v.valid = bounds_ok && sum == cert.lambda;
  return v;
}

namespace {

void self_check(const RepresentationCertificate& cert, const char* who) {
  Verification v = verify_certificate(cert);
  if (!v.valid)
    fail(Status::internal, std::string(who) + ": produced a certificate that fails verification");
}

}  // namespace

RepresentationCertificate wilson_pair_rep(const PrimeModulus& m, std::uint64_t lambda) {
  const std::uint64_t p = m.value();
  lambda = m.reduce(lambda);
  if (lambda % 2 != 0)
    fail(Status::invalid_argument,
         "wilson_pair: residue class " + std::to_string(lambda) +
             " is odd; only even classes carry this pair");
  RepresentationCertificate cert;
  cert.shape = RepShape::wilson_pair;
  cert.p = p;
  cert.lambda = lambda;
  cert.bound = p;
  cert.product_pairs.emplace_back(lambda, p - lambda);
  self_check(cert, "wilson_pair_rep");
  return cert;
}

RepresentationCertificate two_product_rep(const PrimeModulus& m, std::uint64_t lambda) {
  const std::uint64_t p = m.value();
  if (p < 3)
    fail(Status::invalid_argument, "two_product: requires an odd prime modulus");
  lambda = m.reduce(lambda);
  // Even classes outnumber p/2, so lambda - W meets W; scan upward for the
  // first even w1 whose complement is also even.
  for (std::uint64_t w1 = 0; w1 < p; w1 += 2) {
    std::uint64_t w2 = m.sub(lambda, w1);
    if (w2 % 2 != 0) continue;
    RepresentationCertificate cert;
    cert.shape = RepShape::two_product;
    cert.p = p;
    cert.lambda = lambda;
    cert.bound = p;
    cert.product_pairs.emplace_back(w1, p - w1);
    cert.product_pairs.emplace_back(w2, p - w2);
    self_check(cert, "two_product_rep");
    return cert;
  }
  fail(Status::internal, "two_product_rep: no even split found; pigeonhole violated");
}

namespace {

// Distinct factorial values for indices 1..M with the smallest index
// attaining each, plus membership bits.
struct FactorialTable {
  std::vector<std::uint64_t> values;     // ascending distinct values
  std::vector<std::uint64_t> first_idx;  // aligned: smallest n with n! = value
  detail::Bitset bits;

  std::uint64_t index_of(std::uint64_t v) const {
    auto it = std::lower_bound(values.begin(), values.end(), v);
    return first_idx[static_cast<std::size_t>(it - values.begin())];
  }
};

FactorialTable build_factorial_table(const PrimeModulus& m, std::uint64_t M) {
  const std::uint64_t p = m.value();
  FactorialTable t;
  t.bits = detail::Bitset(p);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seen;  // (value, first n)
  std::uint64_t f = 1;
  for (std::uint64_t n = 1; n <= M; ++n) {
    f = m.mul(f, n % p);
    if (!t.bits.test(f)) {
      t.bits.set(f);
      seen.emplace_back(f, n);
    }
  }
  std::sort(seen.begin(), seen.end());
  t.values.reserve(seen.size());
  t.first_idx.reserve(seen.size());
  for (const auto& [v, n] : seen) {
    t.values.push_back(v);
    t.first_idx.push_back(n);
  }
  return t;
}

// Products f1 * f2 over the factorial table, with a deterministic witness
// decomposition (ascending scan over the smaller factor's value).
struct ProductTable {
  detail::Bitset bits;
  std::vector<std::uint64_t> values;  // ascending
};

ProductTable build_product_table(const PrimeModulus& m, const FactorialTable& f,
                                 const SolverLimits& lim, const char* who) {
  const std::uint64_t p = m.value();
  const unsigned __int128 pairs =
      static_cast<unsigned __int128>(f.values.size()) * f.values.size();
  if (pairs > lim.pair_budget)
    fail(Status::budget_exceeded,
         std::string(who) + ": " + std::to_string(f.values.size()) +
             "^2 factorial products exceed the pair budget of " +
             std::to_string(lim.pair_budget));
  ProductTable t;
  t.bits = detail::Bitset(p);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    for (std::size_t j = i; j < f.values.size(); ++j)
      t.bits.set(m.mul(f.values[i], f.values[j]));
  t.values = t.bits.values();
  return t;
}

std::pair<std::uint64_t, std::uint64_t> product_witness(const PrimeModulus& m,
                                                        const FactorialTable& f,
                                                        const std::vector<std::uint64_t>& finv,
                                                        std::uint64_t v) {
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    std::uint64_t other = m.mul(v, finv[i]);
    if (f.bits.test(other))
      return {f.first_idx[i], f.index_of(other)};
  }
  fail(Status::internal, "product witness lookup failed for a member value");
}

std::pair<std::uint64_t, std::uint64_t> sum_witness(const PrimeModulus& m,
                                                    const FactorialTable& f, std::uint64_t d) {
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    std::uint64_t other = m.sub(d, f.values[i]);
    if (f.bits.test(other))
      return {f.first_idx[i], f.index_of(other)};
  }
  fail(Status::internal, "sum witness lookup failed for a member value");
}

void check_search_params(const PrimeModulus& m, unsigned k, std::uint64_t M,
                         const SolverLimits& lim, const char* who, bool allow_index_p) {
  const std::uint64_t p = m.value();
  if (k == 0) fail(Status::invalid_argument, std::string(who) + ": term count must be >= 1");
  const std::uint64_t max_bound = allow_index_p ? p : p - 1;
  if (M == 0 || M > max_bound)
    fail(Status::invalid_argument, std::string(who) + ": witness bound " + std::to_string(M) +
                                       " must lie in [1, " + std::to_string(max_bound) + "]");
  if (p > lim.dense_cap)
    fail(Status::cap_exceeded, std::string(who) + ": p = " + std::to_string(p) +
                                   " exceeds the reachability cap " +
                                   std::to_string(lim.dense_cap));
}

// rounds[i] = classes reachable as a sum of exactly i+1 elements of the base
// list; full_from is the first (1-based) round that covers everything.
struct RoundLadder {
  std::vector<detail::Bitset> rounds;
  unsigned full_from = 0;

  void build(const PrimeModulus& m, const detail::Bitset& base,
             const std::vector<std::uint64_t>& base_vals, unsigned k,
             std::uint64_t work_budget, const char* who) {
    const std::uint64_t p = m.value();
    const unsigned __int128 work = static_cast<unsigned __int128>(k > 1 ? k - 1 : 0) *
                                   base_vals.size() * ((p + 63) / 64);
    if (work > work_budget)
      fail(Status::budget_exceeded,
           std::string(who) + ": closing " + std::to_string(base_vals.size()) +
               " values under " + std::to_string(k) +
               " rounds of addition exceeds the pair budget");
    rounds.clear();
    rounds.reserve(k);
    rounds.push_back(base);
    full_from = rounds[0].all() ? 1 : k + 1;
    for (unsigned i = 1; i < k; ++i) {
      if (full_from <= i) {
        rounds.emplace_back();  // placeholder; reach() consults full_from first
        continue;
      }
      detail::Bitset r(p);
      for (std::uint64_t v : base_vals) rounds[i - 1].rotate_or_into(r, v);
      rounds.push_back(std::move(r));
      if (rounds[i].all()) full_from = i + 1;
    }
  }

  bool reach(unsigned round, std::uint64_t x) const {
    if (round >= full_from) return true;
    return rounds[round - 1].test(x);
  }

  // Smallest base value v with reach(round - 1, x - v); round >= 2.
  std::uint64_t step_down(const PrimeModulus& m, const std::vector<std::uint64_t>& base_vals,
                          unsigned round, std::uint64_t x) const {
    if (round - 1 >= full_from) return base_vals.front();
    for (std::uint64_t v : base_vals)
      if (rounds[round - 2].test(m.sub(x, v))) return v;
    fail(Status::internal, "round ladder step-down found no predecessor");
  }
};

}  // namespace

struct KTermProductSearch::Impl {
  PrimeModulus m;
  unsigned k;
  std::uint64_t M;
  FactorialTable f;
  std::vector<std::uint64_t> finv;
  ProductTable prod;
  RoundLadder ladder;

  Impl(const PrimeModulus& mod, unsigned kk, std::uint64_t mm, const SolverLimits& lim)
      : m(mod), k(kk), M(mm) {
    check_search_params(m, k, M, lim, "k_term_product", false);
    f = build_factorial_table(m, M);
    finv = batch_inverse(f.values, m);
    prod = build_product_table(m, f, lim, "k_term_product");
    ladder.build(m, prod.bits, prod.values, k, lim.pair_budget, "k_term_product");
  }
};

KTermProductSearch::KTermProductSearch(const PrimeModulus& m, unsigned k, std::uint64_t M,
                                       const SolverLimits& lim)
    : impl_(std::make_unique<Impl>(m, k, M, lim)) {}
KTermProductSearch::~KTermProductSearch() = default;
KTermProductSearch::KTermProductSearch(KTermProductSearch&&) noexcept = default;
KTermProductSearch& KTermProductSearch::operator=(KTermProductSearch&&) noexcept = default;

SolveResult KTermProductSearch::solve(std::uint64_t lambda) const {
  const Impl& s = *impl_;
  lambda = s.m.reduce(lambda);
  if (!s.ladder.reach(s.k, lambda)) return {SearchStatus::exhausted, std::nullopt};

  RepresentationCertificate cert;
  cert.shape = RepShape::k_term_product;
  cert.p = s.m.value();
  cert.lambda = lambda;
  cert.bound = s.M;
  std::uint64_t r = lambda;
  for (unsigned round = s.k; round >= 2; --round) {
    std::uint64_t v = s.ladder.step_down(s.m, s.prod.values, round, r);
    cert.product_pairs.push_back(product_witness(s.m, s.f, s.finv, v));
    r = s.m.sub(r, v);
  }
  cert.product_pairs.push_back(product_witness(s.m, s.f, s.finv, r));
  self_check(cert, "k_term_product");
  return {SearchStatus::found, std::move(cert)};
}

namespace {

CoverageReport census(const PrimeModulus& m, const detail::Bitset* reached, bool full,
                      std::size_t miss_limit) {
  const std::uint64_t p = m.value();
  CoverageReport rep;
  rep.p = p;
  if (full) {
    rep.covered = p;
    rep.fraction = 1.0;
    return rep;
  }
  rep.covered = reached->count();
  rep.fraction = static_cast<double>(rep.covered) / static_cast<double>(p);
  for (std::uint64_t v = 0; v < p && !rep.missed_truncated; ++v)
    if (!reached->test(v)) {
      if (rep.missed.size() == miss_limit)
        rep.missed_truncated = true;
      else
        rep.missed.push_back(v);
    }
  return rep;
}

}  // namespace

CoverageReport KTermProductSearch::coverage(std::size_t miss_limit) const {
  const Impl& s = *impl_;
  bool full = s.ladder.full_from <= s.k;
  return census(s.m, full ? nullptr : &s.ladder.rounds[s.k - 1], full, miss_limit);
}

struct ProductPlusFactorialsSearch::Impl {
  PrimeModulus m;
  unsigned k;
  std::uint64_t M;
  FactorialTable f;
  std::vector<std::uint64_t> finv;
  ProductTable prod;
  RoundLadder sums;  // sums of exactly i single factorials

  Impl(const PrimeModulus& mod, unsigned kk, std::uint64_t mm, const SolverLimits& lim)
      : m(mod), k(kk), M(mm) {
    check_search_params(m, k, M, lim, "product_plus_factorials", false);
    f = build_factorial_table(m, M);
    finv = batch_inverse(f.values, m);
    prod = build_product_table(m, f, lim, "product_plus_factorials");
    sums.build(m, f.bits, f.values, k, lim.pair_budget, "product_plus_factorials");
  }
};

ProductPlusFactorialsSearch::ProductPlusFactorialsSearch(const PrimeModulus& m, unsigned k,
                                                         std::uint64_t M,
                                                         const SolverLimits& lim)
    : impl_(std::make_unique<Impl>(m, k, M, lim)) {}
ProductPlusFactorialsSearch::~ProductPlusFactorialsSearch() = default;
ProductPlusFactorialsSearch::ProductPlusFactorialsSearch(ProductPlusFactorialsSearch&&) noexcept =
    default;
ProductPlusFactorialsSearch& ProductPlusFactorialsSearch::operator=(
    ProductPlusFactorialsSearch&&) noexcept = default;

SolveResult ProductPlusFactorialsSearch::solve(std::uint64_t lambda) const {
  const Impl& s = *impl_;
  const std::uint64_t p = s.m.value();
  lambda = s.m.reduce(lambda);

  // First factorial-sum s (ascending) whose complement is a pair product.
  std::uint64_t chosen = p;  // sentinel
  auto try_s = [&](std::uint64_t sv) {
    if (s.prod.bits.test(s.m.sub(lambda, sv))) {
      chosen = sv;
      return true;
    }
    return false;
  };
  if (s.sums.full_from <= s.k) {
    for (std::uint64_t sv = 0; sv < p; ++sv)
      if (try_s(sv)) break;
  } else {
    s.sums.rounds[s.k - 1].for_each_until(try_s);
  }
  if (chosen == p) return {SearchStatus::exhausted, std::nullopt};

  RepresentationCertificate cert;
  cert.shape = RepShape::product_plus_factorials;
  cert.p = p;
  cert.lambda = lambda;
  cert.bound = s.M;
  cert.product_pairs.push_back(
      product_witness(s.m, s.f, s.finv, s.m.sub(lambda, chosen)));
  std::uint64_t r = chosen;
  for (unsigned round = s.k; round >= 2; --round) {
    std::uint64_t v = s.sums.step_down(s.m, s.f.values, round, r);
    cert.factorial_terms.push_back(s.f.index_of(v));
    r = s.m.sub(r, v);
  }
  cert.factorial_terms.push_back(s.f.index_of(r));
  self_check(cert, "product_plus_factorials");
  return {SearchStatus::found, std::move(cert)};
}

CoverageReport ProductPlusFactorialsSearch::coverage(std::size_t miss_limit) const {
  const Impl& s = *impl_;
  const std::uint64_t p = s.m.value();
  if (s.sums.full_from <= s.k) {
    // Everything is a valid factorial sum, and 1*1 is a pair product, so the
    // whole line is covered.
    return census(s.m, nullptr, true, miss_limit);
  }
  const detail::Bitset& sk = s.sums.rounds[s.k - 1];
  detail::Bitset reached(p);
  // reached = P + S_k; rotate the larger table by the smaller value list.
  std::uint64_t rotations = std::min<std::uint64_t>(s.prod.values.size(), sk.count());
  if (static_cast<unsigned __int128>(rotations) * ((p + 63) / 64) > (1ull << 34))
    fail(Status::budget_exceeded,
         "product_plus_factorials: coverage census exceeds the pair budget");
  if (s.prod.values.size() <= sk.count()) {
    for (std::uint64_t v : s.prod.values) sk.rotate_or_into(reached, v);
  } else {
    sk.for_each([&](std::uint64_t sv) { s.prod.bits.rotate_or_into(reached, sv); });
  }
  bool full = reached.all();
  return census(s.m, full ? nullptr : &reached, full, miss_limit);
}

namespace {

SolveResult run_guarded(const std::function<SolveResult()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.status() == Status::budget_exceeded || e.status() == Status::cap_exceeded)
      return {SearchStatus::budget_truncated, std::nullopt};
    throw;
  }
}

}  // namespace

SolveResult k_term_product_rep(const PrimeModulus& m, std::uint64_t lambda, unsigned k,
                               std::uint64_t M, const SolverLimits& lim) {
  return run_guarded([&] { return KTermProductSearch(m, k, M, lim).solve(lambda); });
}

SolveResult product_plus_factorials_rep(const PrimeModulus& m, std::uint64_t lambda, unsigned k,
                                        std::uint64_t M, const SolverLimits& lim) {
  return run_guarded([&] { return ProductPlusFactorialsSearch(m, k, M, lim).solve(lambda); });
}

namespace {

struct CpTables {
  FactorialTable f;
  detail::Bitset d;  // x! + y! sums
  std::vector<std::uint64_t> dvals;
};

CpTables build_cp_tables(const PrimeModulus& m, std::uint64_t M, const SolverLimits& lim,
                         const char* who) {
  const std::uint64_t p = m.value();
  if (M == 0 || M > p)
    fail(Status::invalid_argument, std::string(who) + ": witness bound " + std::to_string(M) +
                                       " must lie in [1, " + std::to_string(p) + "]");
  if (p > lim.dense_cap)
    fail(Status::cap_exceeded, std::string(who) + ": p = " + std::to_string(p) +
                                   " exceeds the reachability cap " +
                                   std::to_string(lim.dense_cap));
  CpTables t;
  t.f = build_factorial_table(m, M);
  const unsigned __int128 work =
      static_cast<unsigned __int128>(t.f.values.size()) * ((p + 63) / 64);
  if (work > lim.pair_budget)
    fail(Status::budget_exceeded,
         std::string(who) + ": building the 2-factorial sums exceeds the pair budget");
  t.d = detail::Bitset(p);
  for (std::uint64_t v : t.f.values) t.f.bits.rotate_or_into(t.d, v);
  t.dvals = t.d.values();
  return t;
}

}  // namespace

SolveResult cp_form_rep(const PrimeModulus& m, std::uint64_t lambda, std::uint64_t M,
                        std::uint64_t c, const SolverLimits& lim) {
  if (c == 0) fail(Status::invalid_argument, "cp_form: coefficient must be >= 1");
  return run_guarded([&]() -> SolveResult {
    CpTables t = build_cp_tables(m, M, lim, "cp_form");
    const std::uint64_t lam = m.reduce(lambda);
    const std::uint64_t cr = m.reduce(c);
    // First d2 (ascending) with lambda - c*d2 also a 2-factorial sum.
    for (std::uint64_t d2 : t.dvals) {
      std::uint64_t d1 = m.sub(lam, m.mul(cr, d2));
      if (!t.d.test(d1)) continue;
      auto [x, y] = sum_witness(m, t.f, d1);
      auto [z, w] = sum_witness(m, t.f, d2);
      RepresentationCertificate cert;
      cert.shape = RepShape::cp_form;
      cert.p = m.value();
      cert.lambda = lam;
      cert.bound = M;
      cert.c = c;
      cert.factorial_terms = {x, y, z, w};
      self_check(cert, "cp_form");
      return {SearchStatus::found, std::move(cert)};
    }
    return {SearchStatus::exhausted, std::nullopt};
  });
}

CpSearchResult cp_search(const PrimeModulus& m, std::uint64_t M, std::uint64_t c_limit,
                         const SolverLimits& lim) {
  const std::uint64_t p = m.value();
  CpTables t = build_cp_tables(m, M, lim, "cp_search");
  // Coefficients congruent mod p cover identically, and a coefficient in the
  // zero class covers only when D alone does, in which case c = 1 covers too.
  // Scanning [1, p-1] is therefore exhaustive.
  std::uint64_t limit = c_limit == 0 ? p - 1 : std::min(c_limit, p - 1);
  const std::uint64_t words = (p + 63) / 64;
  const unsigned __int128 work =
      static_cast<unsigned __int128>(limit) * t.dvals.size() * (words ? words : 1);
  if (work > lim.pair_budget)
    fail(Status::budget_exceeded, "cp_search: scanning " + std::to_string(limit) +
                                      " coefficients exceeds the pair budget");
  CpSearchResult out;
  detail::Bitset reached(p);
  for (std::uint64_t c = 1; c <= limit; ++c) {
    reached.clear();
    for (std::uint64_t d2 : t.dvals) t.d.rotate_or_into(reached, m.mul(c, d2));
    std::uint64_t missing = p - reached.count();
    out.scan.push_back({c, missing});
    if (missing == 0) {
      out.found = true;
      out.c = c;
      break;
    }
  }
  return out;
}

CoverageReport coverage_report(const PrimeModulus& m, RepShape shape, unsigned k,
                               std::uint64_t M, const SolverLimits& lim,
                               std::size_t miss_limit) {
  const std::uint64_t p = m.value();
  switch (shape) {
    case RepShape::wilson_pair: {
      // Exactly the even classes.
      detail::Bitset evens(p);
      for (std::uint64_t v = 0; v < p; v += 2) evens.set(v);
      bool full = evens.all();  // only at p = 2
      return census(m, full ? nullptr : &evens, full, miss_limit);
    }
    case RepShape::two_product: {
      detail::Bitset evens(p);
      for (std::uint64_t v = 0; v < p; v += 2) evens.set(v);
      detail::Bitset reached(p);
      for (std::uint64_t v = 0; v < p; v += 2) evens.rotate_or_into(reached, v);
      bool full = reached.all();
      return census(m, full ? nullptr : &reached, full, miss_limit);
    }
    case RepShape::k_term_product:
      return KTermProductSearch(m, k, M, lim).coverage(miss_limit);
    case RepShape::product_plus_factorials:
      return ProductPlusFactorialsSearch(m, k, M, lim).coverage(miss_limit);
    case RepShape::cp_form:
      fail(Status::invalid_argument,
           "coverage_report: cp_form coverage is per-coefficient; use cp_search");
  }
  fail(Status::invalid_argument, "coverage_report: unknown shape");
}

}  // namespace factlab
