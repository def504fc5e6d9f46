#include "factlab/experiment.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "detail/accum.hpp"
#include "detail/rng.hpp"
#include "factlab/combinatorics.hpp"
#include "factlab/exp_sums.hpp"
#include "factlab/factorial.hpp"
#include "factlab/residue_set.hpp"
#include "factlab/solver.hpp"
#include "factlab/version.hpp"

namespace factlab {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_u64_text(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 10);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_f64_text(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Typed access to one command's configuration with field-level errors.
// Unknown keys are rejected up front, before any computation or output.
class Params {
public:
  Params(const ConfigMap& cfg, std::string command, std::initializer_list<const char*> keys)
      : cfg_(cfg), cmd_(std::move(command)) {
    auto allowed = [&](const std::string& k) {
      if (k == "command" || k == "out" || k == "manifest" || k == "threads") return true;
      for (const char* a : keys)
        if (k == a) return true;
      return false;
    };
    for (const auto& [k, v] : cfg_)
      if (!allowed(k)) fail(Status::invalid_argument, cmd_ + ": unknown key '" + k + "'");
  }

  bool has(const std::string& key) const { return cfg_.count(key) != 0; }

  std::string str(const std::string& key) const {
    auto it = cfg_.find(key);
    if (it == cfg_.end()) missing(key);
    return it->second;
  }

  std::string str_or(const std::string& key, const std::string& def) const {
    auto it = cfg_.find(key);
    return it == cfg_.end() ? def : it->second;
  }

  std::uint64_t u64(const std::string& key) const {
    auto it = cfg_.find(key);
    if (it == cfg_.end()) missing(key);
    std::uint64_t v = 0;
    if (!parse_u64_text(it->second, v))
      bad(key, "'" + it->second + "' is not an unsigned integer");
    return v;
  }

  std::uint64_t u64_or(const std::string& key, std::uint64_t def) const {
    return has(key) ? u64(key) : def;
  }

  double f64_or(const std::string& key, double def) const {
    auto it = cfg_.find(key);
    if (it == cfg_.end()) return def;
    double v = 0.0;
    if (!parse_f64_text(it->second, v)) bad(key, "'" + it->second + "' is not a number");
    return v;
  }

  int threads() const {
    std::uint64_t t = u64_or("threads", 1);
    if (t < 1 || t > 1024) bad("threads", "must lie in [1, 1024]");
    return static_cast<int>(t);
  }

  void forbid(const std::string& key, const std::string& why) const {
    if (has(key)) bad(key, why);
  }

  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    fail(Status::invalid_argument, cmd_ + ": key '" + key + "': " + what);
  }

  [[noreturn]] void missing(const std::string& key) const {
    fail(Status::invalid_argument, cmd_ + ": missing required key '" + key + "'");
  }

  const std::string& command() const { return cmd_; }

private:
  const ConfigMap& cfg_;
  std::string cmd_;
};

// Files created by the running experiment, removed as a group on failure.
struct Tracker {
  std::vector<fs::path> files;

  void add(const fs::path& p) { files.push_back(p); }

  void cleanup() noexcept {
    for (const fs::path& f : files) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }
};

void ensure_parent_dir(const fs::path& p) {
  fs::path dir = p.parent_path();
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Status::io_error, "cannot create directory " + dir.string() + ": " + ec.message());
}

class CsvFile {
public:
  CsvFile(const std::string& path, std::initializer_list<const char*> columns, Tracker& tracker)
      : path_(path), ncols_(columns.size()) {
    ensure_parent_dir(path);
    tracker.add(path);
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) fail(Status::io_error, "cannot open " + path + " for writing");
    bool first = true;
    for (const char* c : columns) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<std::string> fields) {
    if (fields.size() != ncols_)
      fail(Status::internal, path_ + ": row width does not match the header");
    bool first = true;
    for (const std::string& f : fields) {
      if (!first) out_ << ',';
      out_ << f;
      first = false;
    }
    out_ << '\n';
  }

  void finish() {
    out_.flush();
    if (!out_) fail(Status::io_error, "write to " + path_ + " failed");
    out_.close();
  }

private:
  std::string path_;
  std::size_t ncols_;
  std::ofstream out_;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::io_error, "cannot reopen " + path + " for digesting");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(Status::internal, "message digest initialisation failed");
  }
  char buf[1 << 16];
  for (;;) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got)) != 1) {
      EVP_MD_CTX_free(ctx);
      fail(Status::internal, "message digest update failed");
    }
    if (got == 0 || !in) break;
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count() %
            1000;
  if (ms < 0) ms += 1000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms));
  return buf;
}

// Rate-limited progress lines on stderr; stdout stays clean for data.
class Progress {
public:
  Progress(std::string label, std::uint64_t total)
      : label_(std::move(label)),
        total_(total),
        next_(std::chrono::steady_clock::now() + kInterval) {}

  void tick(std::uint64_t done) {
    auto now = std::chrono::steady_clock::now();
    if (now < next_) return;
    next_ = now + kInterval;
    std::fprintf(stderr, "%s: %" PRIu64 "/%" PRIu64 "\n", label_.c_str(), done, total_);
    std::fflush(stderr);
  }

private:
  static constexpr std::chrono::milliseconds kInterval{500};
  std::string label_;
  std::uint64_t total_;
  std::chrono::steady_clock::time_point next_;
};

// "p" for a single prime, or "p_min"/"p_max" expanded by next-prime steps.
std::vector<std::uint64_t> prime_list(const Params& par) {
  bool single = par.has("p");
  bool ranged = par.has("p_min") || par.has("p_max");
  if (single == ranged)
    fail(Status::invalid_argument,
         par.command() + ": give either p or the pair p_min/p_max");
  if (single) {
    std::uint64_t p = par.u64("p");
    if (!is_prime(p)) par.bad("p", std::to_string(p) + " is not prime");
    return {p};
  }
  std::uint64_t lo = par.u64("p_min");
  std::uint64_t hi = par.u64("p_max");
  if (lo > hi) par.bad("p_min", "exceeds p_max");
  std::vector<std::uint64_t> out;
  for (std::uint64_t q = next_prime(lo); q <= hi; q = next_prime(q + 1)) {
    out.push_back(q);
    if (q == PrimeModulus::kMaxModulus) break;
  }
  if (out.empty()) par.bad("p_min", "no primes in [p_min, p_max]");
  return out;
}

std::uint64_t require_seed(const Params& par, const std::string& why) {
  if (!par.has("seed"))
    fail(Status::invalid_argument, par.command() + ": " + why + " requires a seed");
  return par.u64("seed");
}

// `size` distinct residues drawn uniformly from [1, p-1].
std::vector<std::uint64_t> sample_nonzero_distinct(std::mt19937_64& rng, const PrimeModulus& m,
                                                   std::uint64_t size) {
  const std::uint64_t p = m.value();
  size = std::min(size, p - 1);
  std::vector<std::uint64_t> out;
  out.reserve(size);
  if (size > (p - 1) / 2) {
    // Dense request: partial Fisher-Yates over the whole unit range.
    std::vector<std::uint64_t> pool(p - 1);
    for (std::uint64_t i = 0; i < p - 1; ++i) pool[i] = i + 1;
    for (std::uint64_t i = 0; i < size; ++i) {
      std::uint64_t j = i + detail::uniform_below(rng, p - 1 - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (out.size() < size) {
      std::uint64_t v = 1 + detail::uniform_below(rng, p - 1);
      if (seen.insert(v).second) out.push_back(v);
    }
  }
  return out;
}

const char* status_name(SearchStatus s) {
  switch (s) {
    case SearchStatus::found:
      return "found";
    case SearchStatus::exhausted:
      return "exhausted";
    case SearchStatus::budget_truncated:
      return "budget_truncated";
  }
  return "?";
}

ordered_json certificate_json(const RepresentationCertificate& cert) {
  ordered_json j;
  j["shape"] = shape_name(cert.shape);
  j["p"] = cert.p;
  j["lambda"] = cert.lambda;
  j["bound"] = cert.bound;
  if (cert.shape == RepShape::cp_form) j["c"] = cert.c;
  auto pairs = ordered_json::array();
  for (const auto& [a, b] : cert.product_pairs) pairs.push_back(ordered_json::array({a, b}));
  j["product_pairs"] = std::move(pairs);
  j["factorial_terms"] = cert.factorial_terms;
  return j;
}

// ---- commands -------------------------------------------------------------

void cmd_factorials(const Params& par, Tracker& tracker, ordered_json&) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::uint64_t L = par.u64_or("l", 0);
  std::uint64_t N = par.u64("n");
  FactorialRangeOptions opts;
  opts.threads = par.threads();
  opts.allow_zero_tail = N >= p || L >= p - N;
  FactorialWindow w = factorial_range(L, N, m, opts);
  CsvFile csv(par.str("out"), {"n", "value"}, tracker);
  for (std::uint64_t i = 0; i < w.length(); ++i)
    csv.row({std::to_string(w.start() + 1 + i), std::to_string(w.values()[i])});
  csv.finish();
}

void cmd_card(const Params& par, Tracker& tracker, ordered_json&) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::uint64_t n = par.u64("n");
  std::string strategy = par.str_or("strategy", "exact");
  if (strategy != "exact" && strategy != "estimate")
    par.bad("strategy", "must be exact or estimate");
  FactorialSetOptions fo;
  fo.allow_zero_tail = n >= p;
  ResidueSet a = ResidueSet::factorials(m, n, fo);
  CsvFile csv(par.str("out"),
              {"p", "n", "strategy", "set_size", "value", "ci_low", "ci_high", "exact",
               "samples"},
              tracker);
  if (strategy == "exact") {
    par.forbid("samples", "only used by strategy=estimate");
    par.forbid("seed", "only used by strategy=estimate");
    OpLimits lim;
    lim.pair_budget = par.u64_or("budget", lim.pair_budget);
    lim.threads = par.threads();
    std::uint64_t card = product_set(a, a, lim).cardinality();
    csv.row({std::to_string(p), std::to_string(n), strategy,
             std::to_string(a.cardinality()), std::to_string(card), std::to_string(card),
             std::to_string(card), "1", "0"});
  } else {
    std::uint64_t samples = par.u64("samples");
    std::uint64_t seed = require_seed(par, "strategy=estimate");
    par.forbid("budget", "only used by strategy=exact");
    CardinalityEstimate est = estimate_product_cardinality(a, a, samples, seed);
    csv.row({std::to_string(p), std::to_string(n), strategy,
             std::to_string(a.cardinality()), fmt_double(est.value), fmt_double(est.ci_low),
             fmt_double(est.ci_high), est.exact ? "1" : "0", std::to_string(est.samples)});
  }
  csv.finish();
}

BoundValue product_bound_for(std::uint64_t p, std::uint64_t n) {
  BoundProfile prof;
  prof.family = BoundFamily::product_set;
  prof.p = p;
  prof.n = n;
  BoundValue v = bound_curve(prof);
  if (v.in_regime) return v;
  prof.family = BoundFamily::product_set_small_n;
  BoundValue w = bound_curve(prof);
  return w.in_regime ? w : v;
}

void cmd_growth(const Params& par, Tracker& tracker, ordered_json&) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::uint64_t n_min = par.u64("n_min");
  std::uint64_t n_max = par.u64("n_max");
  std::uint64_t n_step = par.u64_or("n_step", 1);
  if (n_min < 1) par.bad("n_min", "must be at least 1");
  if (n_max < n_min) par.bad("n_max", "smaller than n_min");
  if (n_max >= p) par.bad("n_max", "must stay below p (the quotient set needs 0 outside A)");
  if (n_step < 1) par.bad("n_step", "must be at least 1");
  OpLimits lim;
  lim.pair_budget = par.u64_or("budget", lim.pair_budget);
  lim.threads = par.threads();
  CsvFile csv(par.str("out"),
              {"p", "n", "set_size", "product_size", "quotient_size", "product_bound",
               "product_case", "quotient_bound", "quotient_case"},
              tracker);
  Progress prog("growth", (n_max - n_min) / n_step + 1);
  std::uint64_t steps = 0;
  for (std::uint64_t n = n_min; n <= n_max;) {
    ResidueSet a = ResidueSet::factorials(m, n);
    std::uint64_t prod = product_set(a, a, lim).cardinality();
    std::uint64_t quot = quotient_set(a, a, lim).cardinality();
    BoundProfile qprof;
    qprof.family = BoundFamily::quotient_set;
    qprof.p = p;
    qprof.n = n;
    BoundValue qb = bound_curve(qprof);
    BoundValue pb = product_bound_for(p, n);
    csv.row({std::to_string(p), std::to_string(n), std::to_string(a.cardinality()),
             std::to_string(prod), std::to_string(quot), fmt_double(pb.value), pb.case_label,
             fmt_double(qb.value), qb.case_label});
    prog.tick(++steps);
    if (n_step > n_max || n > n_max - n_step) break;
    n += n_step;
  }
  csv.finish();
}

void cmd_energy(const Params& par, Tracker& tracker, ordered_json&) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::uint64_t n = par.u64("n");
  if (n >= p) par.bad("n", "must stay below p (energy needs 0 outside the factorial set)");
  std::string kind = par.str_or("m_kind", "interval");
  std::uint64_t msize = par.u64("m_size");
  if (msize < 1 || msize >= p) par.bad("m_size", "must lie in [1, p-1]");
  OpLimits lim;
  lim.pair_budget = par.u64_or("budget", lim.pair_budget);
  lim.threads = par.threads();
  ResidueSet a = ResidueSet::factorials(m, n);
  SetView view = [&] {
    if (kind == "interval") return SetView::interval(m, msize);
    if (kind == "primes") return SetView::primes_up_to(m, msize);
    par.bad("m_kind", "must be interval or primes");
  }();
  EnergyCount e = multiplicative_energy(view, a, lim);
  CsvFile csv(par.str("out"),
              {"p", "n", "m_kind", "m_size", "left_size", "right_size", "energy"}, tracker);
  csv.row({std::to_string(p), std::to_string(n), kind, std::to_string(msize),
           std::to_string(e.left_size), std::to_string(e.right_size),
           std::to_string(e.count)});
  csv.finish();
}

void cmd_expsum(const Params& par, Tracker& tracker, ordered_json&) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::uint64_t L = par.u64_or("l", 0);
  std::uint64_t N = par.u64("n");
  if (N == 0) par.bad("n", "must be at least 1");
  if (N >= p || L >= p - N) par.bad("n", "window [l+1, l+n] must stay below p");
  std::string strategy = par.str_or("strategy", "full");
  MaxSearch search;
  search.full_cap = par.u64_or("cap", search.full_cap);
  search.threads = par.threads();
  if (strategy == "sampled") {
    search.mode = MaxSearch::Mode::sampled;
    search.sample_count = par.u64("samples");
    search.seed = require_seed(par, "strategy=sampled");
  } else if (strategy == "full") {
    par.forbid("samples", "only used by strategy=sampled");
    par.forbid("seed", "only used by strategy=sampled");
  } else {
    par.bad("strategy", "must be full or sampled");
  }
  MaxResult r = max_single(L, N, m, search);
  CsvFile csv(par.str("out"), {"p", "l", "n", "strategy", "a", "magnitude", "exact"}, tracker);
  csv.row({std::to_string(p), std::to_string(L), std::to_string(N), strategy,
           std::to_string(r.a), fmt_double(r.magnitude), r.exact ? "1" : "0"});
  csv.finish();
}

void cmd_moments(const Params& par, Tracker& tracker, ordered_json& summary) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::uint64_t L = par.u64_or("l", 0);
  std::uint64_t N = par.u64("n");
  std::uint64_t ell = par.u64("ell");
  if (ell < 1 || ell > 62) par.bad("ell", "must lie in [1, 62]");
  if (N == 0) par.bad("n", "must be at least 1");
  if (N >= p || L >= p - N) par.bad("n", "window [l+1, l+n] must stay below p");
  MomentLimits ml;
  ml.work_budget = par.u64_or("budget", ml.work_budget);
  std::uint64_t cap = par.u64_or("cap", 1ull << 21);
  std::uint64_t count = moment_count(L, N, m, static_cast<unsigned>(ell), ml);
  double mean = frequency_power_mean(L, N, m, static_cast<unsigned>(2 * ell), cap,
                                     par.threads());
  double rel = std::abs(mean - static_cast<double>(count)) / static_cast<double>(count);
  CsvFile csv(par.str("out"), {"p", "l", "n", "ell", "moment", "power_mean", "rel_error"},
              tracker);
  csv.row({std::to_string(p), std::to_string(L), std::to_string(N), std::to_string(ell),
           std::to_string(count), fmt_double(mean), fmt_double(rel)});
  csv.finish();
  summary["rel_error"] = rel;
}

void cmd_solve(const Params& par, Tracker& tracker, ordered_json& summary) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::string shape_text = par.str("shape");
  std::optional<RepShape> shape = shape_from_name(shape_text);
  if (!shape)
    par.bad("shape",
            "'" + shape_text +
                "' is not one of wilson_pair, two_product, k_term_product, "
                "product_plus_factorials, cp_form");

  const bool needs_k = *shape == RepShape::k_term_product ||
                       *shape == RepShape::product_plus_factorials;
  const bool needs_m = needs_k || *shape == RepShape::cp_form;
  const bool needs_c = *shape == RepShape::cp_form;
  unsigned k = 0;
  std::uint64_t M = 0;
  std::uint64_t c = 0;
  if (needs_k) {
    std::uint64_t kv = par.u64("k");
    if (kv < 1 || kv > 64) par.bad("k", "must lie in [1, 64]");
    k = static_cast<unsigned>(kv);
  } else {
    par.forbid("k", "not used by shape '" + shape_text + "'");
  }
  if (needs_m) {
    M = par.u64("m");
  } else {
    par.forbid("m", "not used by shape '" + shape_text + "'");
  }
  if (needs_c) {
    c = par.u64("c");
    if (c < 1) par.bad("c", "must be at least 1");
  } else {
    par.forbid("c", "not used by shape '" + shape_text + "'");
  }

  std::string lambda_text = par.str("lambda");
  const bool all = lambda_text == "all";
  std::uint64_t lambda_single = 0;
  if (!all) {
    if (!parse_u64_text(lambda_text, lambda_single) || lambda_single >= p)
      par.bad("lambda", "must be an integer in [0, p-1] or the word all");
    if (*shape == RepShape::wilson_pair && lambda_single % 2 != 0)
      par.bad("lambda", "wilson_pair represents even classes only");
  }
  if (all && *shape == RepShape::cp_form)
    par.bad("lambda", "lambda=all is not supported for cp_form; use the cp-search command");

  SolverLimits sl;
  sl.pair_budget = par.u64_or("budget", sl.pair_budget);

  std::optional<KTermProductSearch> kterm;
  std::optional<ProductPlusFactorialsSearch> ppf;
  if (*shape == RepShape::k_term_product) kterm.emplace(m, k, M, sl);
  if (*shape == RepShape::product_plus_factorials) ppf.emplace(m, k, M, sl);

  auto solve_one = [&](std::uint64_t lambda) -> SolveResult {
    switch (*shape) {
      case RepShape::wilson_pair:
        if (lambda % 2 != 0) return {SearchStatus::exhausted, std::nullopt};
        return {SearchStatus::found, wilson_pair_rep(m, lambda)};
      case RepShape::two_product:
        return {SearchStatus::found, two_product_rep(m, lambda)};
      case RepShape::k_term_product:
        return kterm->solve(lambda);
      case RepShape::product_plus_factorials:
        return ppf->solve(lambda);
      case RepShape::cp_form:
        return cp_form_rep(m, lambda, M, c, sl);
    }
    fail(Status::internal, "solve: unhandled shape");
  };

  CsvFile csv(par.str("out"), {"p", "shape", "k", "m", "c", "lambda", "status"}, tracker);
  auto certs = ordered_json::array();
  const bool want_certs = par.has("certs");
  std::uint64_t found = 0, exhausted = 0, truncated = 0;
  Progress prog("solve", all ? p : 1);
  std::uint64_t done = 0;
  auto run_lambda = [&](std::uint64_t lambda) {
    SolveResult r = solve_one(lambda);
    switch (r.status) {
      case SearchStatus::found:
        ++found;
        break;
      case SearchStatus::exhausted:
        ++exhausted;
        break;
      case SearchStatus::budget_truncated:
        ++truncated;
        break;
    }
    csv.row({std::to_string(p), shape_text, std::to_string(k), std::to_string(M),
             std::to_string(c), std::to_string(lambda), status_name(r.status)});
    if (want_certs && r.certificate) certs.push_back(certificate_json(*r.certificate));
    prog.tick(++done);
  };
  if (all)
    for (std::uint64_t lambda = 0; lambda < p; ++lambda) run_lambda(lambda);
  else
    run_lambda(lambda_single);
  csv.finish();

  if (want_certs) {
    std::string cpath = par.str("certs");
    ensure_parent_dir(cpath);
    tracker.add(cpath);
    std::ofstream out(cpath, std::ios::binary | std::ios::trunc);
    if (!out) fail(Status::io_error, "cannot open " + cpath + " for writing");
    out << certs.dump(2) << '\n';
    out.flush();
    if (!out) fail(Status::io_error, "write to " + cpath + " failed");
  }

  summary["found"] = found;
  summary["exhausted"] = exhausted;
  summary["budget_truncated"] = truncated;
  if (all) {
    double fraction = static_cast<double>(found) / static_cast<double>(p);
    summary["coverage"] = fraction;
    CoverageReport rep = coverage_report(m, *shape, k, M, sl);
    summary["coverage_report_fraction"] = rep.fraction;
    if (rep.covered != found)
      fail(Status::verify_failed,
           "solve: all-lambda run represented " + std::to_string(found) +
               " classes but coverage_report counts " + std::to_string(rep.covered));
  }
}

void cmd_cp_search(const Params& par, Tracker& tracker, ordered_json& summary) {
  std::vector<std::uint64_t> primes = prime_list(par);
  std::uint64_t c_limit = par.u64_or("c_limit", 0);
  SolverLimits sl;
  sl.pair_budget = par.u64_or("budget", sl.pair_budget);
  CsvFile csv(par.str("out"), {"p", "m", "found", "c"}, tracker);
  Progress prog("cp-search", primes.size());
  bool all_found = true;
  std::uint64_t done = 0;
  for (std::uint64_t p : primes) {
    PrimeModulus m(p);
    std::uint64_t M = par.u64_or("m", p);  // default: the full index range
    if (M > p) par.bad("m", "exceeds p = " + std::to_string(p));
    CpSearchResult r = cp_search(m, M, c_limit, sl);
    all_found = all_found && r.found;
    csv.row({std::to_string(p), std::to_string(M), r.found ? "1" : "0", std::to_string(r.c)});
    prog.tick(++done);
  }
  csv.finish();
  summary["all_found"] = all_found ? 1 : 0;
}

void cmd_wilson_check(const Params& par, Tracker& tracker, ordered_json& summary) {
  std::vector<std::uint64_t> primes = prime_list(par);
  CsvFile csv(par.str("out"), {"p", "evens_checked", "failures"}, tracker);
  Progress prog("wilson-check", primes.size());
  std::uint64_t total_failures = 0;
  std::uint64_t done = 0;
  for (std::uint64_t p : primes) {
    PrimeModulus m(p);
    std::vector<std::uint64_t> f(p + 1);
    f[0] = 1;
    factorial_scan(
        0, p, m, [&](std::uint64_t n, std::uint64_t v) { f[n] = v; }, true);
    std::uint64_t evens = 0, failures = 0;
    for (std::uint64_t lambda = 0; lambda < p; lambda += 2) {
      ++evens;
      if (m.mul(f[lambda], f[p - lambda]) != lambda) ++failures;
    }
    total_failures += failures;
    csv.row({std::to_string(p), std::to_string(evens), std::to_string(failures)});
    prog.tick(++done);
  }
  csv.finish();
  summary["total_failures"] = total_failures;
}

void cmd_erdos_stats(const Params& par, Tracker& tracker, ordered_json& summary) {
  std::vector<std::uint64_t> primes = prime_list(par);
  std::uint64_t cap = par.u64_or("cap", 1ull << 26);
  CsvFile csv(par.str("out"), {"p", "distinct", "missing", "missing_fraction"}, tracker);
  Progress prog("erdos-stats", primes.size());
  detail::NeumaierSum mean;
  std::uint64_t done = 0;
  for (std::uint64_t p : primes) {
    FactorialValueStats st = factorial_value_stats(PrimeModulus(p), cap);
    csv.row({std::to_string(p), std::to_string(st.distinct), std::to_string(st.missing),
             fmt_double(st.missing_fraction())});
    mean.add(st.missing_fraction());
    prog.tick(++done);
  }
  csv.finish();
  summary["mean_missing_fraction"] = mean.value() / static_cast<double>(primes.size());
}

void cmd_ruzsa_check(const Params& par, Tracker& tracker, ordered_json& summary) {
  std::uint64_t p_max = par.u64("p_max");
  if (p_max < 5) par.bad("p_max", "must be at least 5");
  std::uint64_t count = par.u64("count");
  if (count < 1) par.bad("count", "must be at least 1");
  std::uint64_t max_size = par.u64("max_size");
  if (max_size < 1) par.bad("max_size", "must be at least 1");
  std::uint64_t seed = require_seed(par, "random triple generation");
  OpLimits lim;
  lim.pair_budget = par.u64_or("budget", lim.pair_budget);
  lim.threads = par.threads();
  std::mt19937_64 rng(seed);
  CsvFile csv(par.str("out"),
              {"trial", "p", "x_size", "y_size", "z_size", "quotient_size", "xz_size",
               "zy_size", "holds"},
              tracker);
  Progress prog("ruzsa-check", count);
  std::uint64_t violations = 0;
  for (std::uint64_t trial = 1; trial <= count; ++trial) {
    std::uint64_t p;
    do {
      p = 5 + detail::uniform_below(rng, p_max - 4);
    } while (!is_prime(p));
    PrimeModulus m(p);
    std::uint64_t cap = std::min(max_size, p - 1);
    auto draw = [&] {
      return sample_nonzero_distinct(rng, m, 1 + detail::uniform_below(rng, cap));
    };
    ResidueSet x(m, draw()), y(m, draw()), z(m, draw());
    RuzsaCheck rc = ruzsa_check(x, y, z, lim);
    if (!rc.holds) ++violations;
    csv.row({std::to_string(trial), std::to_string(p), std::to_string(x.cardinality()),
             std::to_string(y.cardinality()), std::to_string(z.cardinality()),
             std::to_string(rc.quotient_size), std::to_string(rc.xz_size),
             std::to_string(rc.zy_size), rc.holds ? "1" : "0"});
    prog.tick(trial);
  }
  csv.finish();
  summary["violations"] = violations;
}

void cmd_katz_shen(const Params& par, Tracker& tracker, ordered_json&) {
  PrimeModulus m(par.u64("p"));
  const std::uint64_t p = m.value();
  std::uint64_t x_size = par.u64("x_size");
  std::uint64_t k = par.u64("k");
  std::uint64_t b_size = par.u64("b_size");
  if (x_size < 1 || x_size >= p) par.bad("x_size", "must lie in [1, p-1]");
  if (k < 1 || k > 16) par.bad("k", "must lie in [1, 16]");
  if (b_size < 1 || b_size >= p) par.bad("b_size", "must lie in [1, p-1]");
  std::string strategy_text = par.str_or("strategy", "greedy");
  SubsetStrategy strategy;
  if (strategy_text == "greedy")
    strategy = SubsetStrategy::greedy;
  else if (strategy_text == "exhaustive")
    strategy = SubsetStrategy::exhaustive;
  else
    par.bad("strategy", "must be exhaustive or greedy");
  std::uint64_t seed = require_seed(par, "random set generation");
  OpLimits lim;
  lim.pair_budget = par.u64_or("budget", lim.pair_budget);
  lim.threads = par.threads();
  std::mt19937_64 rng(seed);
  ResidueSet x(m, sample_nonzero_distinct(rng, m, x_size));
  std::vector<ResidueSet> factors;
  factors.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i)
    factors.emplace_back(m, sample_nonzero_distinct(rng, m, b_size));
  KatzShenResult r = katz_shen_ratio(x, factors, strategy, lim);
  CsvFile csv(par.str("out"),
              {"p", "x_size", "k", "b_size", "strategy", "subset_size", "iterated_size",
               "ratio"},
              tracker);
  csv.row({std::to_string(p), std::to_string(x.cardinality()), std::to_string(k),
           std::to_string(b_size), strategy_text, std::to_string(r.subset.size()),
           std::to_string(r.iterated_size), fmt_double(r.ratio)});
  csv.finish();
}

void cmd_cg_count(const Params& par, Tracker& tracker, ordered_json& summary) {
  std::vector<std::uint64_t> primes = prime_list(par);
  std::string s0_text = par.str("s0");
  const bool all_s0 = s0_text == "all";
  std::uint64_t s0_single = 0;
  if (!all_s0 && !parse_u64_text(s0_text, s0_single))
    par.bad("s0", "must be an unsigned integer or the word all");
  std::uint64_t x_bound = par.u64("x_bound");
  std::uint64_t y_bound = par.u64("y_bound");
  CsvFile csv(par.str("out"), {"p", "s0", "x_bound", "y_bound", "count", "ratio"}, tracker);
  double max_ratio = 0.0;
  std::uint64_t done = 0;
  std::uint64_t total = 0;
  for (std::uint64_t p : primes) total += all_s0 ? p - 1 : 1;
  Progress prog("cg-count", total);
  for (std::uint64_t p : primes) {
    PrimeModulus m(p);
    std::uint64_t first = all_s0 ? 1 : s0_single;
    std::uint64_t last = all_s0 ? p - 1 : s0_single;
    for (std::uint64_t s0 = first; s0 <= last; ++s0) {
      CongruencePairCount r = coprime_solution_count(m, s0, x_bound, y_bound);
      max_ratio = std::max(max_ratio, r.ratio);
      csv.row({std::to_string(p), std::to_string(s0), std::to_string(x_bound),
               std::to_string(y_bound), std::to_string(r.count), fmt_double(r.ratio)});
      prog.tick(++done);
    }
  }
  csv.finish();
  summary["max_ratio"] = max_ratio;
}

void cmd_bounds(const Params& par, Tracker& tracker, ordered_json&) {
  std::string family_text = par.str("family");
  std::optional<BoundFamily> family;
  for (BoundFamily f :
       {BoundFamily::quotient_set, BoundFamily::product_set, BoundFamily::product_set_small_n,
        BoundFamily::interval_product, BoundFamily::interval_product_large_n})
    if (family_text == bound_family_name(f)) family = f;
  if (!family)
    par.bad("family",
            "'" + family_text +
                "' is not one of quotient_set, product_set, product_set_small_n, "
                "interval_product, interval_product_large_n");
  // The curve is a closed formula; p need not be prime here.
  std::uint64_t p = par.u64("p");
  if (p < 2) par.bad("p", "must be at least 2");

  const bool interval_family = *family == BoundFamily::interval_product ||
                               *family == BoundFamily::interval_product_large_n;
  std::uint64_t M = 0;
  if (interval_family) {
    M = par.u64("m");
    if (M < 1) par.bad("m", "must be at least 1");
  } else {
    par.forbid("m", "not used by family '" + family_text + "'");
  }

  bool single = par.has("n");
  bool swept = par.has("n_min") || par.has("n_max") || par.has("n_step");
  if (single == swept)
    fail(Status::invalid_argument, "bounds: give either n or the pair n_min/n_max");
  std::uint64_t n_min = single ? par.u64("n") : par.u64("n_min");
  std::uint64_t n_max = single ? n_min : par.u64("n_max");
  std::uint64_t n_step = single ? 1 : par.u64_or("n_step", 1);
  if (n_min < 1) par.bad(single ? "n" : "n_min", "must be at least 1");
  if (n_max < n_min) par.bad("n_max", "smaller than n_min");
  if (n_step < 1) par.bad("n_step", "must be at least 1");

  BoundProfile prof;
  prof.family = *family;
  prof.p = p;
  prof.m = M;
  prof.constant = par.f64_or("constant", 1.0);
  prof.cutoff_constant = par.f64_or("cutoff_constant", 1.0);
  if (prof.constant <= 0.0) par.bad("constant", "must be positive");
  if (prof.cutoff_constant <= 0.0) par.bad("cutoff_constant", "must be positive");

  CsvFile csv(par.str("out"),
              {"family", "p", "n", "m", "value", "case", "placeholder", "in_regime"}, tracker);
  for (std::uint64_t n = n_min; n <= n_max;) {
    prof.n = n;
    BoundValue v = bound_curve(prof);
    csv.row({family_text, std::to_string(p), std::to_string(n), std::to_string(M),
             fmt_double(v.value), v.case_label, v.asymptotic_placeholder ? "1" : "0",
             v.in_regime ? "1" : "0"});
    if (n_step > n_max || n > n_max - n_step) break;
    n += n_step;
  }
  csv.finish();
}

struct CommandEntry {
  const char* name;
  void (*fn)(const Params&, Tracker&, ordered_json&);
  std::initializer_list<const char*> keys;
};

constexpr CommandEntry kCommands[] = {
    {"factorials", cmd_factorials, {"p", "l", "n"}},
    {"card", cmd_card, {"p", "n", "strategy", "samples", "budget", "seed"}},
    {"growth", cmd_growth, {"p", "n_min", "n_max", "n_step", "budget"}},
    {"energy", cmd_energy, {"p", "n", "m_kind", "m_size", "budget"}},
    {"expsum", cmd_expsum, {"p", "l", "n", "strategy", "samples", "seed", "cap"}},
    {"moments", cmd_moments, {"p", "l", "n", "ell", "budget", "cap"}},
    {"solve", cmd_solve, {"p", "shape", "lambda", "k", "m", "c", "budget", "certs"}},
    {"cp-search", cmd_cp_search, {"p", "p_min", "p_max", "m", "c_limit", "budget"}},
    {"wilson-check", cmd_wilson_check, {"p", "p_min", "p_max"}},
    {"erdos-stats", cmd_erdos_stats, {"p", "p_min", "p_max", "cap"}},
    {"ruzsa-check", cmd_ruzsa_check, {"p_max", "count", "max_size", "seed", "budget"}},
    {"katz-shen", cmd_katz_shen, {"p", "x_size", "k", "b_size", "strategy", "seed", "budget"}},
    {"cg-count", cmd_cg_count, {"p", "p_min", "p_max", "s0", "x_bound", "y_bound"}},
    {"bounds", cmd_bounds,
     {"family", "p", "n", "n_min", "n_max", "n_step", "m", "constant", "cutoff_constant"}},
};

}  // namespace

ConfigMap parse_config(const std::string& text) {
  ConfigMap cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(Status::invalid_argument,
           "config line " + std::to_string(line_no) + ": expected key=value, got '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      fail(Status::invalid_argument, "config line " + std::to_string(line_no) + ": empty key");
    if (!cfg.emplace(key, value).second)
      fail(Status::invalid_argument,
           "config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return cfg;
}

std::string serialize_config(const ConfigMap& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

RunResult run_experiment(const ConfigMap& cfg) {
  const auto started_wall = std::chrono::system_clock::now();
  const auto started = std::chrono::steady_clock::now();

  auto it = cfg.find("command");
  if (it == cfg.end())
    fail(Status::invalid_argument, "config: missing required key 'command'");
  const CommandEntry* entry = nullptr;
  for (const CommandEntry& e : kCommands)
    if (it->second == e.name) entry = &e;
  if (!entry)
    fail(Status::invalid_argument, "config: unknown command '" + it->second + "'");

  Params par(cfg, entry->name, entry->keys);
  std::string out_path = par.str("out");
  if (out_path.empty()) par.bad("out", "must not be empty");
  std::string manifest_path = par.str_or("manifest", out_path + ".manifest.json");

  Tracker tracker;
  RunResult res;
  try {
    ordered_json summary = ordered_json::object();
    entry->fn(par, tracker, summary);

    ordered_json man;
    man["command"] = entry->name;
    man["config"] = ordered_json::object();
    for (const auto& [k, v] : cfg) man["config"][k] = v;
    man["version"] = kVersion;
    if (par.has("seed"))
      man["seed"] = par.u64("seed");
    else
      man["seed"] = nullptr;
    auto outs = ordered_json::array();
    for (const fs::path& f : tracker.files)
      outs.push_back(ordered_json{{"path", f.string()},
                                  {"digest", "sha256:" + sha256_file(f.string())}});
    man["outputs"] = std::move(outs);
    man["runtime_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
    man["started_at"] = iso_utc(started_wall);
    man["finished_at"] = iso_utc(std::chrono::system_clock::now());
    man["summary"] = std::move(summary);

    res.manifest_json = man.dump(2) + "\n";
    res.manifest_path = manifest_path;
    for (const fs::path& f : tracker.files) res.outputs.push_back(f.string());

    // The manifest lands last, via rename: its existence marks success.
    fs::path final_path(manifest_path);
    ensure_parent_dir(final_path);
    fs::path tmp_path = final_path;
    tmp_path += ".tmp";
    tracker.add(tmp_path);
    {
      std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
      if (!out) fail(Status::io_error, "cannot open " + tmp_path.string() + " for writing");
      out << res.manifest_json;
      out.flush();
      if (!out) fail(Status::io_error, "write to " + tmp_path.string() + " failed");
    }
    fs::rename(tmp_path, final_path);
  } catch (...) {
    tracker.cleanup();
    throw;
  }
  return res;
}

const std::string& experiment_help() {
  static const std::string text = R"(factlab <command> [--config <path>] [--key value]...

Runs one experiment and prints its manifest (JSON) to stdout. Progress goes
to stderr. Config files hold one key=value pair per line ('#' comments);
--key value flags override config entries; the command word fills the
"command" key. Every run writes its data files and then a manifest
(<out>.manifest.json unless overridden with manifest=) via an atomic rename;
a run that left no manifest failed, and partial outputs are removed.

Keys shared by all commands:
  out=PATH       data file to write (required)
  manifest=PATH  manifest location override
  threads=T      worker threads for the operations that parallelize (default 1)

Prime selection: commands marked [p-range] accept either p=P or a pair
p_min=A p_max=B covering every prime in [A, B].

Commands and CSV columns (stable order):
  factorials   p, l (default 0), n
               -> n,value                         (n! mod p for n in [l+1, l+n])
  card         p, n, strategy=exact|estimate, samples, seed, budget
               -> p,n,strategy,set_size,value,ci_low,ci_high,exact,samples
               set_size = |A_n|; value = |A_n A_n| (exact or estimated;
               estimate needs samples= and seed=)
  growth       p, n_min, n_max, n_step (default 1), budget
               -> p,n,set_size,product_size,quotient_size,product_bound,
                  product_case,quotient_bound,quotient_case
  energy       p, n, m_kind=interval|primes (default interval), m_size, budget
               -> p,n,m_kind,m_size,left_size,right_size,energy
  expsum       p, l (default 0), n, strategy=full|sampled, samples, seed, cap
               -> p,l,n,strategy,a,magnitude,exact
  moments      p, l (default 0), n, ell, budget, cap
               -> p,l,n,ell,moment,power_mean,rel_error
  solve        p, shape, lambda (integer or all), k, m, c, budget, certs=PATH
               -> p,shape,k,m,c,lambda,status
               shapes: wilson_pair, two_product, k_term_product (k=, m=),
               product_plus_factorials (k=, m=), cp_form (m=, c=, single
               lambda only). certs= writes found certificates as a JSON array.
               lambda=all cross-checks the census against coverage_report.
  cp-search    [p-range], m (default p), c_limit (default 0 = scan all), budget
               -> p,m,found,c
  wilson-check [p-range]
               -> p,evens_checked,failures       (lambda! (p-lambda)! = lambda)
  erdos-stats  [p-range], cap
               -> p,distinct,missing,missing_fraction
  ruzsa-check  p_max, count, max_size, seed, budget
               -> trial,p,x_size,y_size,z_size,quotient_size,xz_size,zy_size,holds
  katz-shen    p, x_size, k, b_size, strategy=exhaustive|greedy (default greedy),
               seed, budget
               -> p,x_size,k,b_size,strategy,subset_size,iterated_size,ratio
  cg-count     [p-range], s0 (integer or all), x_bound, y_bound
               -> p,s0,x_bound,y_bound,count,ratio
  bounds       family, p, n or (n_min, n_max, n_step), m, constant,
               cutoff_constant
               -> family,p,n,m,value,case,placeholder,in_regime
               families: quotient_set, product_set, product_set_small_n,
               interval_product, interval_product_large_n

Determinism: identical config plus seed reproduces byte-identical data files;
the manifest echoes the config and digests every output (sha256).

Exit codes: 0 success; 2 config error; 3 budget or cap refusal; 4 certificate
or cross-check verification failure; 1 anything else.
)";
  return text;
}

}  // namespace factlab
