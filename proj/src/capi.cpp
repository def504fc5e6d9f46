#include "factlab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "factlab/combinatorics.hpp"
#include "factlab/errors.hpp"
#include "factlab/experiment.hpp"
#include "factlab/exp_sums.hpp"
#include "factlab/factorial.hpp"
#include "factlab/residue_set.hpp"
#include "factlab/solver.hpp"
#include "factlab/version.hpp"

struct fl_prime {
  factlab::PrimeModulus m;
};

struct fl_set {
  factlab::ResidueSet s;
};

struct fl_cert {
  factlab::RepresentationCertificate c;
  std::string shape;  // stable storage for fl_cert_shape
};

namespace {

thread_local std::string t_last_error = "no error";

template <typename Fn>
fl_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return FL_OK;
  } catch (const factlab::Error& e) {
    t_last_error = e.what();
    return static_cast<fl_status>(static_cast<int>(e.status()));
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return FL_INTERNAL;
  } catch (...) {
    t_last_error = "unidentified failure";
    return FL_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) factlab::fail(factlab::Status::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) factlab::fail(factlab::Status::internal, "out of memory");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

factlab::OpLimits make_limits(uint64_t pair_budget, int threads) {
  factlab::OpLimits lim;
  if (pair_budget != 0) lim.pair_budget = pair_budget;
  if (threads > 0) lim.threads = threads;
  return lim;
}

factlab::SolverLimits make_solver_limits(uint64_t pair_budget) {
  factlab::SolverLimits lim;
  if (pair_budget != 0) lim.pair_budget = pair_budget;
  return lim;
}

fl_search_status to_c_search_status(factlab::SearchStatus s) {
  switch (s) {
    case factlab::SearchStatus::found:
      return FL_SEARCH_FOUND;
    case factlab::SearchStatus::exhausted:
      return FL_SEARCH_EXHAUSTED;
    case factlab::SearchStatus::budget_truncated:
      return FL_SEARCH_BUDGET_TRUNCATED;
  }
  return FL_SEARCH_BUDGET_TRUNCATED;
}

fl_cert* wrap_cert(factlab::RepresentationCertificate cert) {
  auto* out = new fl_cert{std::move(cert), {}};
  out->shape = factlab::shape_name(out->c.shape);
  return out;
}

fl_status solve_out(factlab::SolveResult r, fl_search_status* search_status, fl_cert** out) {
  if (search_status) *search_status = to_c_search_status(r.status);
  if (r.certificate) {
    require(out != nullptr, "certificate output pointer is null");
    *out = wrap_cert(std::move(*r.certificate));
  } else if (out) {
    *out = nullptr;
  }
  return FL_OK;
}

}  // namespace

extern "C" {

const char* fl_version(void) { return factlab::kVersion; }

const char* fl_last_error(void) { return t_last_error.c_str(); }

void fl_string_free(char* s) { std::free(s); }

int fl_is_prime(uint64_t n) { return factlab::is_prime(n) ? 1 : 0; }

fl_status fl_next_prime(uint64_t n, uint64_t* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = factlab::next_prime(n);
  });
}

fl_status fl_prime_new(uint64_t p, fl_prime** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = new fl_prime{factlab::PrimeModulus(p)};
  });
}

void fl_prime_free(fl_prime* m) { delete m; }

uint64_t fl_prime_value(const fl_prime* m) { return m ? m->m.value() : 0; }

fl_status fl_mul_mod(const fl_prime* m, uint64_t a, uint64_t b, uint64_t* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = m->m.mul(m->m.reduce(a), m->m.reduce(b));
  });
}

fl_status fl_pow_mod(const fl_prime* m, uint64_t base, uint64_t exp, uint64_t* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = m->m.pow(m->m.reduce(base), exp);
  });
}

fl_status fl_inv_mod(const fl_prime* m, uint64_t a, uint64_t* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = m->m.inv(m->m.reduce(a));
  });
}

fl_status fl_factorial_mod(const fl_prime* m, uint64_t n, uint64_t* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = factlab::factorial_mod(n, m->m);
  });
}

fl_status fl_set_new(const fl_prime* m, const uint64_t* values, size_t count, fl_set** out) {
  return guarded([&] {
    require(m && out, "null argument");
    require(values != nullptr || count == 0, "null values with nonzero count");
    std::vector<uint64_t> v(values, values + count);
    *out = new fl_set{factlab::ResidueSet(m->m, v)};
  });
}

fl_status fl_set_factorials(const fl_prime* m, uint64_t count, int allow_zero_tail,
                            fl_set** out) {
  return guarded([&] {
    require(m && out, "null argument");
    factlab::FactorialSetOptions opts;
    opts.allow_zero_tail = allow_zero_tail != 0;
    *out = new fl_set{factlab::ResidueSet::factorials(m->m, count, opts)};
  });
}

void fl_set_free(fl_set* s) { delete s; }

uint64_t fl_set_size(const fl_set* s) { return s ? s->s.cardinality() : 0; }

int fl_set_contains(const fl_set* s, uint64_t v) { return s && s->s.contains(v) ? 1 : 0; }

fl_status fl_set_values(const fl_set* s, uint64_t* buf, size_t buf_len, size_t* written) {
  return guarded([&] {
    require(s && buf && written, "null argument");
    require(buf_len >= s->s.cardinality(), "buffer smaller than the set");
    size_t i = 0;
    s->s.for_each([&](uint64_t v) { buf[i++] = v; });
    *written = i;
  });
}

fl_status fl_set_product(const fl_set* a, const fl_set* b, uint64_t pair_budget, int threads,
                         fl_set** out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    *out = new fl_set{factlab::product_set(a->s, b->s, make_limits(pair_budget, threads))};
  });
}

fl_status fl_set_quotient(const fl_set* a, const fl_set* b, uint64_t pair_budget, int threads,
                          fl_set** out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    *out = new fl_set{factlab::quotient_set(a->s, b->s, make_limits(pair_budget, threads))};
  });
}

fl_status fl_set_sum(const fl_set* a, const fl_set* b, uint64_t pair_budget, int threads,
                     fl_set** out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    *out = new fl_set{factlab::sumset(a->s, b->s, make_limits(pair_budget, threads))};
  });
}

fl_status fl_set_write(const fl_set* s, const char* path) {
  return guarded([&] {
    require(s && path, "null argument");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      factlab::fail(factlab::Status::io_error, std::string("cannot open ") + path);
    factlab::write_set(s->s, out);
    out.flush();
    if (!out) factlab::fail(factlab::Status::io_error, std::string("write to ") + path + " failed");
  });
}

fl_status fl_set_read(const char* path, fl_set** out) {
  return guarded([&] {
    require(path && out, "null argument");
    std::ifstream in(path, std::ios::binary);
    if (!in) factlab::fail(factlab::Status::io_error, std::string("cannot open ") + path);
    *out = new fl_set{factlab::read_set(in)};
  });
}

fl_status fl_energy_set(const fl_set* left, const fl_set* right, uint64_t pair_budget,
                        int threads, uint64_t* out) {
  return guarded([&] {
    require(left && right && out, "null argument");
    *out = factlab::multiplicative_energy(factlab::SetView::of_set(left->s), right->s,
                                          make_limits(pair_budget, threads))
               .count;
  });
}

fl_status fl_energy_interval(uint64_t n, const fl_set* right, uint64_t pair_budget,
                             int threads, uint64_t* out) {
  return guarded([&] {
    require(right && out, "null argument");
    *out = factlab::multiplicative_energy(
               factlab::SetView::interval(right->s.modulus(), n), right->s,
               make_limits(pair_budget, threads))
               .count;
  });
}

fl_status fl_energy_primes(uint64_t n, const fl_set* right, uint64_t pair_budget, int threads,
                           uint64_t* out) {
  return guarded([&] {
    require(right && out, "null argument");
    *out = factlab::multiplicative_energy(
               factlab::SetView::primes_up_to(right->s.modulus(), n), right->s,
               make_limits(pair_budget, threads))
               .count;
  });
}

fl_status fl_estimate_product(const fl_set* a, const fl_set* b, uint64_t samples,
                              uint64_t seed, double* value, double* ci_low, double* ci_high,
                              int* exact, uint64_t* samples_used) {
  return guarded([&] {
    require(a && b && value && ci_low && ci_high && exact && samples_used, "null argument");
    factlab::CardinalityEstimate est =
        factlab::estimate_product_cardinality(a->s, b->s, samples, seed);
    *value = est.value;
    *ci_low = est.ci_low;
    *ci_high = est.ci_high;
    *exact = est.exact ? 1 : 0;
    *samples_used = est.samples;
  });
}

fl_status fl_exp_sum(const fl_prime* m, uint64_t a, uint64_t l, uint64_t n_len, double* re,
                     double* im) {
  return guarded([&] {
    require(m && re && im, "null argument");
    factlab::SumValue s = factlab::single_sum(a, l, n_len, m->m);
    *re = s.value.real();
    *im = s.value.imag();
  });
}

fl_status fl_exp_sum_max(const fl_prime* m, uint64_t l, uint64_t n_len, int sampled,
                         uint64_t samples, uint64_t seed, uint64_t full_cap, int threads,
                         uint64_t* a, double* magnitude, int* exact) {
  return guarded([&] {
    require(m && a && magnitude && exact, "null argument");
    factlab::MaxSearch search;
    search.mode = sampled ? factlab::MaxSearch::Mode::sampled : factlab::MaxSearch::Mode::full;
    search.sample_count = samples;
    search.seed = seed;
    if (full_cap != 0) search.full_cap = full_cap;
    if (threads > 0) search.threads = threads;
    factlab::MaxResult r = factlab::max_single(l, n_len, m->m, search);
    *a = r.a;
    *magnitude = r.magnitude;
    *exact = r.exact ? 1 : 0;
  });
}

fl_status fl_moment_count(const fl_prime* m, uint64_t l, uint64_t n_len, unsigned ell,
                          uint64_t work_budget, uint64_t* out) {
  return guarded([&] {
    require(m && out, "null argument");
    factlab::MomentLimits lim;
    if (work_budget != 0) lim.work_budget = work_budget;
    *out = factlab::moment_count(l, n_len, m->m, ell, lim);
  });
}

fl_status fl_moment_identity_error(const fl_prime* m, uint64_t l, uint64_t n_len, unsigned ell,
                                   uint64_t full_cap, int threads, double* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = factlab::moment_identity_error(l, n_len, m->m, ell,
                                          full_cap != 0 ? full_cap : 1ull << 21,
                                          threads > 0 ? threads : 1);
  });
}

fl_status fl_cert_from_text(const char* text, fl_cert** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = wrap_cert(factlab::certificate_from_text(text));
  });
}

fl_status fl_cert_to_text(const fl_cert* cert, char** out) {
  return guarded([&] {
    require(cert && out, "null argument");
    *out = dup_string(factlab::certificate_to_text(cert->c));
  });
}

void fl_cert_free(fl_cert* cert) { delete cert; }

const char* fl_cert_shape(const fl_cert* cert) { return cert ? cert->shape.c_str() : ""; }

uint64_t fl_cert_lambda(const fl_cert* cert) { return cert ? cert->c.lambda : 0; }

uint64_t fl_cert_prime(const fl_cert* cert) { return cert ? cert->c.p : 0; }

fl_status fl_cert_verify(const fl_cert* cert, int* valid, int* bounds_ok,
                         uint64_t* recomputed) {
  return guarded([&] {
    require(cert && valid && bounds_ok && recomputed, "null argument");
    factlab::Verification v = factlab::verify_certificate(cert->c);
    *valid = v.valid ? 1 : 0;
    *bounds_ok = v.bounds_ok ? 1 : 0;
    *recomputed = v.recomputed;
  });
}

fl_status fl_wilson_pair(const fl_prime* m, uint64_t lambda, fl_cert** out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = wrap_cert(factlab::wilson_pair_rep(m->m, lambda));
  });
}

fl_status fl_two_product(const fl_prime* m, uint64_t lambda, fl_cert** out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = wrap_cert(factlab::two_product_rep(m->m, lambda));
  });
}

fl_status fl_k_term_product(const fl_prime* m, uint64_t lambda, unsigned k, uint64_t M,
                            uint64_t pair_budget, fl_search_status* search_status,
                            fl_cert** out) {
  return guarded([&] {
    require(m && search_status, "null argument");
    solve_out(factlab::k_term_product_rep(m->m, lambda, k, M, make_solver_limits(pair_budget)),
              search_status, out);
  });
}

fl_status fl_product_plus_factorials(const fl_prime* m, uint64_t lambda, unsigned k,
                                     uint64_t M, uint64_t pair_budget,
                                     fl_search_status* search_status, fl_cert** out) {
  return guarded([&] {
    require(m && search_status, "null argument");
    solve_out(factlab::product_plus_factorials_rep(m->m, lambda, k, M,
                                                   make_solver_limits(pair_budget)),
              search_status, out);
  });
}

fl_status fl_cp_form(const fl_prime* m, uint64_t lambda, uint64_t M, uint64_t c,
                     uint64_t pair_budget, fl_search_status* search_status, fl_cert** out) {
  return guarded([&] {
    require(m && search_status, "null argument");
    solve_out(factlab::cp_form_rep(m->m, lambda, M, c, make_solver_limits(pair_budget)),
              search_status, out);
  });
}

fl_status fl_cp_search(const fl_prime* m, uint64_t M, uint64_t c_limit, uint64_t pair_budget,
                       int* found, uint64_t* c) {
  return guarded([&] {
    require(m && found && c, "null argument");
    factlab::CpSearchResult r =
        factlab::cp_search(m->m, M, c_limit, make_solver_limits(pair_budget));
    *found = r.found ? 1 : 0;
    *c = r.c;
  });
}

fl_status fl_coverage(const fl_prime* m, const char* shape, unsigned k, uint64_t M,
                      uint64_t pair_budget, uint64_t* covered, double* fraction) {
  return guarded([&] {
    require(m && shape && covered && fraction, "null argument");
    auto parsed = factlab::shape_from_name(shape);
    require(parsed.has_value(), "unknown shape name");
    factlab::CoverageReport rep =
        factlab::coverage_report(m->m, *parsed, k, M, make_solver_limits(pair_budget));
    *covered = rep.covered;
    *fraction = rep.fraction;
  });
}

fl_status fl_ruzsa_check(const fl_set* x, const fl_set* y, const fl_set* z,
                         uint64_t pair_budget, uint64_t* quotient_size, uint64_t* xz_size,
                         uint64_t* zy_size, int* holds) {
  return guarded([&] {
    require(x && y && z && quotient_size && xz_size && zy_size && holds, "null argument");
    factlab::RuzsaCheck r = factlab::ruzsa_check(x->s, y->s, z->s, make_limits(pair_budget, 1));
    *quotient_size = r.quotient_size;
    *xz_size = r.xz_size;
    *zy_size = r.zy_size;
    *holds = r.holds ? 1 : 0;
  });
}

fl_status fl_katz_shen(const fl_set* x, const fl_set* const* factors, size_t k, int exhaustive,
                       uint64_t pair_budget, uint64_t* subset_size, uint64_t* iterated_size,
                       double* ratio) {
  return guarded([&] {
    require(x && factors && subset_size && iterated_size && ratio, "null argument");
    std::vector<factlab::ResidueSet> fs;
    fs.reserve(k);
    for (size_t i = 0; i < k; ++i) {
      require(factors[i] != nullptr, "null factor set");
      fs.push_back(factors[i]->s);
    }
    factlab::KatzShenResult r = factlab::katz_shen_ratio(
        x->s, fs,
        exhaustive ? factlab::SubsetStrategy::exhaustive : factlab::SubsetStrategy::greedy,
        make_limits(pair_budget, 1));
    *subset_size = r.subset.size();
    *iterated_size = r.iterated_size;
    *ratio = r.ratio;
  });
}

fl_status fl_coprime_solution_count(const fl_prime* m, uint64_t s0, uint64_t x_bound,
                                    uint64_t y_bound, uint64_t* count, double* ratio) {
  return guarded([&] {
    require(m && count && ratio, "null argument");
    factlab::CongruencePairCount r =
        factlab::coprime_solution_count(m->m, s0, x_bound, y_bound);
    *count = r.count;
    *ratio = r.ratio;
  });
}

fl_status fl_factorial_stats(const fl_prime* m, uint64_t scan_cap, uint64_t* distinct,
                             uint64_t* missing) {
  return guarded([&] {
    require(m && distinct && missing, "null argument");
    factlab::FactorialValueStats st =
        scan_cap != 0 ? factlab::factorial_value_stats(m->m, scan_cap)
                      : factlab::factorial_value_stats(m->m);
    *distinct = st.distinct;
    *missing = st.missing;
  });
}

fl_status fl_bound_curve(const char* family, uint64_t p, uint64_t n, uint64_t m,
                         double constant, double cutoff_constant, double* value,
                         int* placeholder, int* in_regime, char* label_buf,
                         size_t label_buf_len) {
  return guarded([&] {
    require(family && value && placeholder && in_regime, "null argument");
    require(label_buf != nullptr && label_buf_len > 0, "label buffer is empty");
    factlab::BoundProfile prof;
    bool known = false;
    for (factlab::BoundFamily f :
         {factlab::BoundFamily::quotient_set, factlab::BoundFamily::product_set,
          factlab::BoundFamily::product_set_small_n, factlab::BoundFamily::interval_product,
          factlab::BoundFamily::interval_product_large_n})
      if (std::strcmp(family, factlab::bound_family_name(f)) == 0) {
        prof.family = f;
        known = true;
      }
    require(known, "unknown bound family name");
    prof.p = p;
    prof.n = n;
    prof.m = m;
    prof.constant = constant;
    prof.cutoff_constant = cutoff_constant;
    factlab::BoundValue v = factlab::bound_curve(prof);
    require(label_buf_len > v.case_label.size(),
            "label buffer too small for the case name");
    *value = v.value;
    *placeholder = v.asymptotic_placeholder ? 1 : 0;
    *in_regime = v.in_regime ? 1 : 0;
    std::memcpy(label_buf, v.case_label.data(), v.case_label.size());
    label_buf[v.case_label.size()] = '\0';
  });
}

fl_status fl_run_experiment(const char* config_text, const char* const* override_keys,
                            const char* const* override_values, size_t override_count,
                            char** manifest_json) {
  return guarded([&] {
    require(manifest_json != nullptr, "null output pointer");
    require(override_count == 0 || (override_keys && override_values),
            "null override arrays with nonzero count");
    factlab::ConfigMap cfg = factlab::parse_config(config_text ? config_text : "");
    for (size_t i = 0; i < override_count; ++i) {
      require(override_keys[i] && override_values[i], "null override entry");
      cfg[override_keys[i]] = override_values[i];
    }
    factlab::RunResult res = factlab::run_experiment(cfg);
    *manifest_json = dup_string(res.manifest_json);
  });
}

const char* fl_cli_help(void) { return factlab::experiment_help().c_str(); }

}  // extern "C"
