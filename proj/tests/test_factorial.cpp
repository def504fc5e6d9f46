#include <doctest.h>

#include <cstdint>
#include <sstream>
#include <vector>

#include "factlab/factorial.hpp"

using namespace factlab;

TEST_CASE("single factorials match the recurrence") {
  PrimeModulus m(13);
  std::uint64_t f = 1;
  CHECK(factorial_mod(0, m) == 1);
  for (std::uint64_t n = 1; n < 13; ++n) {
    f = m.mul(f, n);
    CHECK(factorial_mod(n, m) == f);
  }
  CHECK(factorial_mod(13, m) == 0);
  CHECK(factorial_mod(1'000'000, m) == 0);
  // Wilson: (p-1)! = p-1 mod p
  for (std::uint64_t p : {3ull, 7ull, 101ull, 10'007ull}) {
    PrimeModulus q(p);
    CHECK(factorial_mod(p - 1, q) == p - 1);
  }
}

TEST_CASE("windows agree with scans and direct evaluation") {
  PrimeModulus m(101);
  FactorialWindow w = factorial_range(10, 30, m);
  CHECK(w.start() == 10);
  CHECK(w.length() == 30);
  for (std::uint64_t n = 11; n <= 40; ++n) CHECK(w.value_at(n) == factorial_mod(n, m));
  CHECK_THROWS_AS((void)w.value_at(10), Error);
  CHECK_THROWS_AS((void)w.value_at(41), Error);

  std::vector<std::uint64_t> scanned;
  factorial_scan(10, 30, m, [&](std::uint64_t, std::uint64_t v) { scanned.push_back(v); });
  CHECK(scanned == std::vector<std::uint64_t>(w.values().begin(), w.values().end()));
}

TEST_CASE("window preconditions") {
  PrimeModulus m(97);
  CHECK_THROWS_AS((void)factorial_range(0, 0, m), Error);
  CHECK_THROWS_AS((void)factorial_range(50, 47, m), Error);  // reaches p
  CHECK(factorial_range(50, 46, m).length() == 46);
  FactorialRangeOptions tail;
  tail.allow_zero_tail = true;
  FactorialWindow w = factorial_range(90, 20, m, tail);
  CHECK(w.value_at(96) == 96);  // Wilson again
  for (std::uint64_t n = 97; n <= 110; ++n) CHECK(w.value_at(n) == 0);
  CHECK_THROWS_AS((void)factorial_range(PrimeModulus::kMaxModulus, 2, m), Error);
}

TEST_CASE("threaded computation is bit-identical to serial") {
  PrimeModulus m(1'000'003);
  FactorialRangeOptions serial;
  serial.checkpoint_stride = 1 << 12;
  FactorialRangeOptions par = serial;
  par.threads = 4;
  FactorialWindow a = factorial_range(5'000, 60'000, m, serial);
  FactorialWindow b = factorial_range(5'000, 60'000, m, par);
  REQUIRE(a.length() == b.length());
  CHECK(std::vector<std::uint64_t>(a.values().begin(), a.values().end()) ==
        std::vector<std::uint64_t>(b.values().begin(), b.values().end()));
  REQUIRE(a.checkpoints().size() == b.checkpoints().size());
  for (std::size_t i = 0; i < a.checkpoints().size(); ++i) {
    CHECK(a.checkpoints()[i].n == b.checkpoints()[i].n);
    CHECK(a.checkpoints()[i].value == b.checkpoints()[i].value);
    CHECK(a.checkpoints()[i].check == b.checkpoints()[i].check);
  }
}

TEST_CASE("checkpoint integrity word is pinned") {
  // The serialized format must stay stable across releases.
  CHECK(mix64(1) == 6238072747940578789ull);
  CHECK(checkpoint_check(13, 10, 6) == 5377019274245735306ull);
  FactorialCheckpoint c = FactorialCheckpoint::make(13, 10, 6);
  CHECK(c.intact());
  c.value ^= 1;
  CHECK_FALSE(c.intact());
}

TEST_CASE("checkpoints round-trip through text") {
  PrimeModulus m(10'007);
  FactorialRangeOptions opts;
  opts.checkpoint_stride = 1000;
  FactorialWindow w = factorial_range(0, 9'000, m, opts);
  REQUIRE(w.checkpoints().size() >= 9);
  for (const FactorialCheckpoint& c : w.checkpoints()) {
    CHECK(c.n % 1000 == 0);
    CHECK(c.value == factorial_mod(c.n, m));
    CHECK(c.intact());
  }

  std::stringstream buf;
  write_checkpoints(w.checkpoints(), buf);
  std::vector<FactorialCheckpoint> back = read_checkpoints(buf);
  REQUIRE(back.size() == w.checkpoints().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].p == w.checkpoints()[i].p);
    CHECK(back[i].n == w.checkpoints()[i].n);
    CHECK(back[i].value == w.checkpoints()[i].value);
    CHECK(back[i].check == w.checkpoints()[i].check);
  }

  SUBCASE("malformed line") {
    std::stringstream bad("13 10 6\n");
    CHECK_THROWS_AS((void)read_checkpoints(bad), Error);
  }
  SUBCASE("integrity failure") {
    std::stringstream bad("13 10 7 5377019274245735306\n");
    try {
      (void)read_checkpoints(bad);
      FAIL("expected corrupt_data");
    } catch (const Error& e) {
      CHECK(e.status() == Status::corrupt_data);
    }
  }
}

TEST_CASE("resume reproduces a fresh run") {
  PrimeModulus m(100'003);
  FactorialRangeOptions opts;
  opts.checkpoint_stride = 1 << 10;
  FactorialWindow full = factorial_range(0, 50'000, m, opts);
  REQUIRE_FALSE(full.checkpoints().empty());
  FactorialCheckpoint mid = full.checkpoints()[full.checkpoints().size() / 2];

  FactorialRangeOptions res = opts;
  res.resume = mid;
  FactorialWindow resumed = factorial_range(mid.n, 1'000, m, res);
  for (std::uint64_t n = mid.n + 1; n <= mid.n + 1'000; ++n)
    CHECK(resumed.value_at(n) == full.value_at(n));

  SUBCASE("tampered resume value is rejected") {
    FactorialCheckpoint bad = mid;
    bad.value = m.add(bad.value, 1);
    FactorialRangeOptions broken = opts;
    broken.resume = bad;
    CHECK_THROWS_AS((void)factorial_range(bad.n, 10, m, broken), Error);
  }
  SUBCASE("resume past the window start is rejected") {
    FactorialRangeOptions late = opts;
    late.resume = FactorialCheckpoint::make(m.value(), mid.n + 2'000,
                                            factorial_mod(mid.n + 2'000, m));
    CHECK_THROWS_AS((void)factorial_range(mid.n, 1'000, m, late), Error);
  }
  SUBCASE("resume for a different modulus is rejected") {
    FactorialRangeOptions other = opts;
    other.resume = FactorialCheckpoint::make(97, 10, factorial_mod(10, PrimeModulus(97)));
    CHECK_THROWS_AS((void)factorial_range(10, 10, m, other), Error);
  }
}
