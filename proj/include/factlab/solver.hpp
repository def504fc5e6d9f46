#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factlab/modular.hpp"

namespace factlab {

// Shapes of additive representations of a residue class by factorials.
//   wilson_pair:              m! * n!                     (n = p - m, m even)
//   two_product:              m1! n1! + m2! n2!           (complementary pairs)
//   k_term_product:           sum of k products m_i! n_i! (indices in [1, M])
//   product_plus_factorials:  m! n! + sum of k single factorials
//   cp_form:                  x! + y! + c z! + c t!       (indices in [1, M])
enum class RepShape {
  wilson_pair,
  two_product,
  k_term_product,
  product_plus_factorials,
  cp_form,
};

const char* shape_name(RepShape shape) noexcept;
std::optional<RepShape> shape_from_name(std::string_view name) noexcept;

struct RepresentationCertificate {
  RepShape shape = RepShape::wilson_pair;
  std::uint64_t p = 0;
  std::uint64_t lambda = 0;
  std::uint64_t bound = 0;  // largest admissible witness index
  std::uint64_t c = 0;      // cp_form coefficient, 0 elsewhere
  std::vector<std::pair<std::uint64_t, std::uint64_t>> product_pairs;
  std::vector<std::uint64_t> factorial_terms;
};

// Canonical "key: value" text form; from_text(to_text(c)) == c.
std::string certificate_to_text(const RepresentationCertificate& cert);

// Throws Error(corrupt_data) on anything unparseable.
RepresentationCertificate certificate_from_text(std::string_view text);

struct Verification {
  bool valid = false;      // recomputed == lambda and all bounds respected
  bool bounds_ok = false;  // every witness index within [min_index, bound]
  std::uint64_t recomputed = 0;
};

// Recomputes the certificate's sum from scratch. Structural defects (unknown
// shape, wrong witness arity, index 0 in a shape requiring positive indices)
// throw Error(invalid_argument); out-of-bound witnesses merely flag.
Verification verify_certificate(const RepresentationCertificate& cert);

// lambda even: the pair (lambda, p - lambda). Odd lambda is unsupported.
RepresentationCertificate wilson_pair_rep(const PrimeModulus& m, std::uint64_t lambda);

// Any lambda as a sum of two complementary-pair products; scans even classes
// upward, so the result is deterministic. Requires p >= 3.
RepresentationCertificate two_product_rep(const PrimeModulus& m, std::uint64_t lambda);

struct SolverLimits {
  std::uint64_t dense_cap = 1ull << 24;    // reachability tables refuse p above this
  std::uint64_t pair_budget = 1ull << 34;  // |F|^2 product enumeration bound
};

enum class SearchStatus {
  found,
  exhausted,         // search space fully enumerated; no representation at this M
  budget_truncated,  // gave up on cost grounds; absence not established
};

struct SolveResult {
  SearchStatus status = SearchStatus::exhausted;
  std::optional<RepresentationCertificate> certificate;
};

struct CoverageReport {
  std::uint64_t p = 0;
  std::uint64_t covered = 0;
  double fraction = 0.0;
  std::vector<std::uint64_t> missed;  // ascending, truncated at miss_limit
  bool missed_truncated = false;
};

// Reusable search state for sums of k factorial products with indices
// bounded by M (1 <= M < p). Construction enumerates the pairwise products
// once and closes them under k rounds of addition.
class KTermProductSearch {
public:
  KTermProductSearch(const PrimeModulus& m, unsigned k, std::uint64_t M,
                     const SolverLimits& lim = {});
  ~KTermProductSearch();
  KTermProductSearch(KTermProductSearch&&) noexcept;
  KTermProductSearch& operator=(KTermProductSearch&&) noexcept;

  // found + certificate, or exhausted. Certificates are re-verified before
  // being returned.
  SolveResult solve(std::uint64_t lambda) const;
  CoverageReport coverage(std::size_t miss_limit = 4096) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Same machinery for m! n! + (k single factorials).
class ProductPlusFactorialsSearch {
public:
  ProductPlusFactorialsSearch(const PrimeModulus& m, unsigned k, std::uint64_t M,
                              const SolverLimits& lim = {});
  ~ProductPlusFactorialsSearch();
  ProductPlusFactorialsSearch(ProductPlusFactorialsSearch&&) noexcept;
  ProductPlusFactorialsSearch& operator=(ProductPlusFactorialsSearch&&) noexcept;

  SolveResult solve(std::uint64_t lambda) const;
  CoverageReport coverage(std::size_t miss_limit = 4096) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot wrappers; budget and cap refusals surface as budget_truncated.
SolveResult k_term_product_rep(const PrimeModulus& m, std::uint64_t lambda, unsigned k,
                               std::uint64_t M, const SolverLimits& lim = {});
SolveResult product_plus_factorials_rep(const PrimeModulus& m, std::uint64_t lambda, unsigned k,
                                        std::uint64_t M, const SolverLimits& lim = {});

// x! + y! + c z! + c t! = lambda with indices in [1, M], M <= p, for a fixed
// coefficient c; exhausted when no witness tuple exists.
SolveResult cp_form_rep(const PrimeModulus& m, std::uint64_t lambda, std::uint64_t M,
                        std::uint64_t c, const SolverLimits& lim = {});

struct CpScanEntry {
  std::uint64_t c = 0;
  std::uint64_t missing = 0;  // residues not representable with this c
};

struct CpSearchResult {
  bool found = false;
  std::uint64_t c = 0;  // smallest covering coefficient when found
  std::vector<CpScanEntry> scan;
};

// Scans c = 1, 2, ... for the smallest coefficient whose cp_form covers every
// residue class. c_limit = 0 scans all p - 1 coefficient classes, which is
// exhaustive: coefficients congruent mod p cover identically, and c = 0 only
// ever covers when c = 1 already does.
CpSearchResult cp_search(const PrimeModulus& m, std::uint64_t M, std::uint64_t c_limit = 0,
                         const SolverLimits& lim = {});

// Reachable-class census for a shape at the given parameters. wilson_pair and
// two_product ignore k; cp_form is served by cp_search instead.
CoverageReport coverage_report(const PrimeModulus& m, RepShape shape, unsigned k,
                               std::uint64_t M, const SolverLimits& lim = {},
                               std::size_t miss_limit = 4096);

}  // namespace factlab
