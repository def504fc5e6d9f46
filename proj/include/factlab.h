/* C interface to the factorial-residue laboratory. All functions returning
 * fl_status leave their outputs untouched on failure and record a message
 * retrievable with fl_last_error() on the calling thread. Handles are opaque
 * and freed with their matching *_free function; strings returned through
 * char** outputs are freed with fl_string_free. */

#ifndef FACTLAB_H
#define FACTLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fl_status {
  FL_OK = 0,
  FL_INVALID_ARGUMENT = 1,
  FL_BUDGET_EXCEEDED = 2,
  FL_CAP_EXCEEDED = 3,
  FL_NOT_FOUND = 4,
  FL_CORRUPT_DATA = 5,
  FL_VERIFY_FAILED = 6,
  FL_IO_ERROR = 7,
  FL_INTERNAL = 8
} fl_status;

/* Outcome of a representation search. */
typedef enum fl_search_status {
  FL_SEARCH_FOUND = 0,
  FL_SEARCH_EXHAUSTED = 1,        /* space fully enumerated, no witness */
  FL_SEARCH_BUDGET_TRUNCATED = 2  /* gave up on cost grounds */
} fl_search_status;

typedef struct fl_prime fl_prime; /* validated prime modulus */
typedef struct fl_set fl_set;     /* set of residues mod p */
typedef struct fl_cert fl_cert;   /* representation certificate */

const char* fl_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* fl_last_error(void);

void fl_string_free(char* s);

/* ---- primality and modular arithmetic ---------------------------------- */

int fl_is_prime(uint64_t n);
fl_status fl_next_prime(uint64_t n, uint64_t* out);

/* p must be prime and below 2^63. */
fl_status fl_prime_new(uint64_t p, fl_prime** out);
void fl_prime_free(fl_prime* m);
uint64_t fl_prime_value(const fl_prime* m);

fl_status fl_mul_mod(const fl_prime* m, uint64_t a, uint64_t b, uint64_t* out);
fl_status fl_pow_mod(const fl_prime* m, uint64_t base, uint64_t exp, uint64_t* out);
fl_status fl_inv_mod(const fl_prime* m, uint64_t a, uint64_t* out);

/* n! mod p (0 once n >= p). */
fl_status fl_factorial_mod(const fl_prime* m, uint64_t n, uint64_t* out);

/* ---- residue sets ------------------------------------------------------- */

/* Values are reduced mod p and deduplicated. */
fl_status fl_set_new(const fl_prime* m, const uint64_t* values, size_t count, fl_set** out);

/* {n! mod p : 1 <= n <= count}. allow_zero_tail permits count >= p, which
 * adds the value 0 to the set. */
fl_status fl_set_factorials(const fl_prime* m, uint64_t count, int allow_zero_tail,
                            fl_set** out);

void fl_set_free(fl_set* s);
uint64_t fl_set_size(const fl_set* s);
int fl_set_contains(const fl_set* s, uint64_t v);

/* Copies the elements in ascending order; fails unless buf_len >= size. */
fl_status fl_set_values(const fl_set* s, uint64_t* buf, size_t buf_len, size_t* written);

/* A*B, A/B, A+B. pair_budget = 0 keeps the default (2^34 pair operations). */
fl_status fl_set_product(const fl_set* a, const fl_set* b, uint64_t pair_budget, int threads,
                         fl_set** out);
fl_status fl_set_quotient(const fl_set* a, const fl_set* b, uint64_t pair_budget, int threads,
                          fl_set** out);
fl_status fl_set_sum(const fl_set* a, const fl_set* b, uint64_t pair_budget, int threads,
                     fl_set** out);

fl_status fl_set_write(const fl_set* s, const char* path);
fl_status fl_set_read(const char* path, fl_set** out);

/* Multiplicative energy: ordered 4-tuples with s1*m1 = s2*m2. The left factor
 * is an explicit set, the interval {1..n}, or the primes up to n. */
fl_status fl_energy_set(const fl_set* left, const fl_set* right, uint64_t pair_budget,
                        int threads, uint64_t* out);
fl_status fl_energy_interval(uint64_t n, const fl_set* right, uint64_t pair_budget,
                             int threads, uint64_t* out);
fl_status fl_energy_primes(uint64_t n, const fl_set* right, uint64_t pair_budget, int threads,
                           uint64_t* out);

/* Sampled estimate of |A*B|, exact when samples covers every pair. */
fl_status fl_estimate_product(const fl_set* a, const fl_set* b, uint64_t samples,
                              uint64_t seed, double* value, double* ci_low, double* ci_high,
                              int* exact, uint64_t* samples_used);

/* ---- exponential sums ---------------------------------------------------- */

/* sum over n in [l+1, l+n_len] of exp(2 pi i a n! / p). */
fl_status fl_exp_sum(const fl_prime* m, uint64_t a, uint64_t l, uint64_t n_len, double* re,
                     double* im);

/* Maximum of the sum magnitude over a in [1, p-1]; full scan when sampled = 0
 * (p capped by full_cap; 0 keeps the default 2^21), otherwise `samples`
 * random frequencies from the given seed. */
fl_status fl_exp_sum_max(const fl_prime* m, uint64_t l, uint64_t n_len, int sampled,
                         uint64_t samples, uint64_t seed, uint64_t full_cap, int threads,
                         uint64_t* a, double* magnitude, int* exact);

/* Number of 2*ell index tuples whose factorial half-sums agree mod p.
 * work_budget = 0 keeps the default. */
fl_status fl_moment_count(const fl_prime* m, uint64_t l, uint64_t n_len, unsigned ell,
                          uint64_t work_budget, uint64_t* out);

/* Relative gap between the 2*ell-th power mean of the sum over all
 * frequencies and the exact tuple count. */
fl_status fl_moment_identity_error(const fl_prime* m, uint64_t l, uint64_t n_len, unsigned ell,
                                   uint64_t full_cap, int threads, double* out);

/* ---- representation certificates ---------------------------------------- */

fl_status fl_cert_from_text(const char* text, fl_cert** out);
fl_status fl_cert_to_text(const fl_cert* cert, char** out);
void fl_cert_free(fl_cert* cert);

const char* fl_cert_shape(const fl_cert* cert);
uint64_t fl_cert_lambda(const fl_cert* cert);
uint64_t fl_cert_prime(const fl_cert* cert);

/* Recomputes the certified sum from scratch. valid = the sum matches lambda
 * and every witness respects the bound. */
fl_status fl_cert_verify(const fl_cert* cert, int* valid, int* bounds_ok,
                         uint64_t* recomputed);

/* ---- representation searches --------------------------------------------- */

/* lambda! (p-lambda)! = lambda for even lambda. */
fl_status fl_wilson_pair(const fl_prime* m, uint64_t lambda, fl_cert** out);

/* Any lambda as a sum of two complementary-pair products, p >= 3. */
fl_status fl_two_product(const fl_prime* m, uint64_t lambda, fl_cert** out);

/* Sum of k products m_i! n_i! with indices in [1, M]. *out is set only when
 * *search_status == FL_SEARCH_FOUND. pair_budget = 0 keeps the default. */
fl_status fl_k_term_product(const fl_prime* m, uint64_t lambda, unsigned k, uint64_t M,
                            uint64_t pair_budget, fl_search_status* search_status,
                            fl_cert** out);

/* m! n! plus k single factorials, same conventions. */
fl_status fl_product_plus_factorials(const fl_prime* m, uint64_t lambda, unsigned k,
                                     uint64_t M, uint64_t pair_budget,
                                     fl_search_status* search_status, fl_cert** out);

/* x! + y! + c z! + c t! = lambda with indices in [1, M]. */
fl_status fl_cp_form(const fl_prime* m, uint64_t lambda, uint64_t M, uint64_t c,
                     uint64_t pair_budget, fl_search_status* search_status, fl_cert** out);

/* Smallest coefficient c in [1, c_limit] (c_limit = 0: all of [1, p-1])
 * whose cp form covers every residue class. */
fl_status fl_cp_search(const fl_prime* m, uint64_t M, uint64_t c_limit, uint64_t pair_budget,
                       int* found, uint64_t* c);

/* Reachable-class census for a shape ("wilson_pair", "two_product",
 * "k_term_product", "product_plus_factorials"). */
fl_status fl_coverage(const fl_prime* m, const char* shape, unsigned k, uint64_t M,
                      uint64_t pair_budget, uint64_t* covered, double* fraction);

/* ---- combinatorial checks ------------------------------------------------ */

/* |X/Y| * |Z| <= |XZ| * |ZY| for sets without 0. */
fl_status fl_ruzsa_check(const fl_set* x, const fl_set* y, const fl_set* z,
                         uint64_t pair_budget, uint64_t* quotient_size, uint64_t* xz_size,
                         uint64_t* zy_size, int* holds);

/* Subset X' of X, |X'| > |X|/2, minimizing |X' B_1 ... B_k| (exhaustive = 1
 * requires |X| <= 20; otherwise greedy descent). */
fl_status fl_katz_shen(const fl_set* x, const fl_set* const* factors, size_t k, int exhaustive,
                       uint64_t pair_budget, uint64_t* subset_size, uint64_t* iterated_size,
                       double* ratio);

/* Pairs 1 <= x <= X, 1 <= y <= Y with x = s0*y mod p and gcd(x, y) = 1;
 * ratio relates the count to 1 + X*Y/p. */
fl_status fl_coprime_solution_count(const fl_prime* m, uint64_t s0, uint64_t x_bound,
                                    uint64_t y_bound, uint64_t* count, double* ratio);

/* Distinct and missing values of n! mod p over n in [1, p]. scan_cap = 0
 * keeps the default refusal threshold. */
fl_status fl_factorial_stats(const fl_prime* m, uint64_t scan_cap, uint64_t* distinct,
                             uint64_t* missing);

/* Piecewise lower-bound curve for a family ("quotient_set", "product_set",
 * "product_set_small_n", "interval_product", "interval_product_large_n").
 * value is NaN when (p, n, m) falls outside every range of the family; the
 * active range's name is copied into label_buf, which must be large enough
 * to hold it (32 bytes always suffices). */
fl_status fl_bound_curve(const char* family, uint64_t p, uint64_t n, uint64_t m,
                         double constant, double cutoff_constant, double* value,
                         int* placeholder, int* in_regime, char* label_buf,
                         size_t label_buf_len);

/* ---- experiment runner --------------------------------------------------- */

/* Parses config_text (key=value lines), applies the override pairs in order,
 * runs the configured experiment, and returns the manifest JSON. Data files
 * and the manifest land on disk as described in fl_cli_help(). */
fl_status fl_run_experiment(const char* config_text, const char* const* override_keys,
                            const char* const* override_values, size_t override_count,
                            char** manifest_json);

/* Usage text: commands, config keys, CSV columns, exit codes. */
const char* fl_cli_help(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FACTLAB_H */
