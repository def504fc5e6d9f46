#include "factlab/factorial.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "detail/parallel.hpp"

namespace factlab {

namespace {

void check_window(std::uint64_t L, std::uint64_t N, std::uint64_t p, bool allow_zero_tail,
                  const char* who) {
  if (N == 0) fail(Status::invalid_argument, std::string(who) + ": empty window");
  if (L > PrimeModulus::kMaxModulus - N)
    fail(Status::invalid_argument, std::string(who) + ": window end overflows");
  if (!allow_zero_tail && L + N >= p)
    fail(Status::invalid_argument,
         std::string(who) + ": window reaches " + std::to_string(p) +
             "; factorials vanish there (set allow_zero_tail to permit)");
}

}  // namespace

std::uint64_t factorial_mod(std::uint64_t n, const PrimeModulus& m) {
  const std::uint64_t p = m.value();
  if (n >= p) return 0;
  std::uint64_t f = 1;
  for (std::uint64_t i = 2; i <= n; ++i) f = m.mul(f, i);
  return f;
}

std::uint64_t FactorialWindow::value_at(std::uint64_t n) const {
  if (n <= start_ || n > start_ + values_.size())
    fail(Status::invalid_argument, "value_at: index " + std::to_string(n) + " outside window (" +
                                       std::to_string(start_ + 1) + ", " +
                                       std::to_string(start_ + values_.size()) + ")");
  return values_[n - start_ - 1];
}

FactorialWindow factorial_range(std::uint64_t L, std::uint64_t N, const PrimeModulus& m,
                                const FactorialRangeOptions& opts) {
  const std::uint64_t p = m.value();
  check_window(L, N, p, opts.allow_zero_tail, "factorial_range");
  if (opts.checkpoint_stride == 0)
    fail(Status::invalid_argument, "factorial_range: checkpoint stride must be positive");

  std::uint64_t start_n = 0;
  std::uint64_t start_val = 1;
  if (opts.resume) {
    const FactorialCheckpoint& cp = *opts.resume;
    if (!cp.intact())
      fail(Status::corrupt_data, "resume checkpoint failed its integrity check");
    if (cp.p != p)
      fail(Status::invalid_argument, "resume checkpoint belongs to modulus " +
                                         std::to_string(cp.p) + ", not " + std::to_string(p));
    if (cp.n > L)
      fail(Status::invalid_argument, "resume checkpoint index " + std::to_string(cp.n) +
                                         " lies past the window start " + std::to_string(L));
    // Spot checks: cheap contradictions that catch a forged or stale value.
    if (cp.n >= p && cp.value != 0)
      fail(Status::corrupt_data, "resume checkpoint: factorial at index >= p must vanish");
    if (cp.n < p && cp.value == 0)
      fail(Status::corrupt_data, "resume checkpoint: factorial below p cannot vanish");
    if (cp.n < p && cp.value >= p)
      fail(Status::corrupt_data, "resume checkpoint: value not reduced mod p");
    if (cp.n <= 1 && cp.value != 1 % p)
      fail(Status::corrupt_data, "resume checkpoint: 0! and 1! are 1");
    if (cp.n == p - 1 && cp.value != p - 1)
      fail(Status::corrupt_data, "resume checkpoint: (p-1)! must be p-1");
    start_n = cp.n;
    start_val = cp.value;
  }

  // Prefix product up to L.
  std::uint64_t f = start_val;
  for (std::uint64_t n = start_n + 1; n <= L; ++n) {
    f = m.mul(f, n % p);
    if (f == 0) break;  // absorbed by the factor p; stays 0
  }

  const std::uint64_t stride = opts.checkpoint_stride;
  std::vector<std::uint64_t> values(N);
  std::vector<FactorialCheckpoint> cps;

  int threads = opts.threads < 1 ? 1 : opts.threads;
  if (threads == 1 || N < 4096) {
    std::uint64_t g = f;
    for (std::uint64_t i = 0; i < N; ++i) {
      std::uint64_t n = L + 1 + i;
      g = m.mul(g, n % p);
      values[i] = g;
      if (n % stride == 0) cps.push_back(FactorialCheckpoint::make(p, n, g));
    }
  } else {
    // Two-phase scan: raw per-chunk products, sequential boundary combine,
    // then parallel fill. Modular arithmetic is exact, so the result is
    // bit-identical to the sequential loop for any thread count.
    int chunk_count = threads;
    std::vector<std::uint64_t> raw(chunk_count, 1);
    detail::parallel_chunks(N, threads, [&](int ci, std::uint64_t b, std::uint64_t e) {
      std::uint64_t prod = 1;
      for (std::uint64_t i = b; i < e; ++i) prod = m.mul(prod, (L + 1 + i) % p);
      raw[ci] = prod;
    });
    std::vector<std::uint64_t> boundary(chunk_count, f);
    for (int ci = 1; ci < chunk_count; ++ci)
      boundary[ci] = m.mul(boundary[ci - 1], raw[ci - 1]);
    std::vector<std::vector<FactorialCheckpoint>> chunk_cps(chunk_count);
    detail::parallel_chunks(N, threads, [&](int ci, std::uint64_t b, std::uint64_t e) {
      std::uint64_t g = boundary[ci];
      for (std::uint64_t i = b; i < e; ++i) {
        std::uint64_t n = L + 1 + i;
        g = m.mul(g, n % p);
        values[i] = g;
        if (n % stride == 0) chunk_cps[ci].push_back(FactorialCheckpoint::make(p, n, g));
      }
    });
    for (auto& part : chunk_cps) cps.insert(cps.end(), part.begin(), part.end());
  }

  // Any window covering p-1 must exhibit (p-1)! = p-1; a miss means the scan
  // itself is broken, not the input.
  if (L < p - 1 && p - 1 <= L + N && values[p - 1 - L - 1] != p - 1)
    fail(Status::internal, "factorial_range: (p-1)! self-check failed");

  return FactorialWindow(m, L, std::move(values), std::move(cps));
}

void write_checkpoints(const std::vector<FactorialCheckpoint>& checkpoints, std::ostream& out) {
  for (const FactorialCheckpoint& cp : checkpoints)
    out << cp.p << ' ' << cp.n << ' ' << cp.value << ' ' << cp.check << '\n';
}

std::vector<FactorialCheckpoint> read_checkpoints(std::istream& in) {
  std::vector<FactorialCheckpoint> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    FactorialCheckpoint cp;
    std::string extra;
    if (!(fields >> cp.p >> cp.n >> cp.value >> cp.check) || (fields >> extra))
      fail(Status::corrupt_data,
           "checkpoint line " + std::to_string(lineno) + " is malformed: " + line);
    if (!cp.intact())
      fail(Status::corrupt_data,
           "checkpoint line " + std::to_string(lineno) + " failed its integrity check");
    out.push_back(cp);
  }
  return out;
}

}  // namespace factlab
