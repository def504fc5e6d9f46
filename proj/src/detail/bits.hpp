#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace factlab::detail {

// Bitset over a fixed universe [0, n), with the cyclic shift-or used to
// accumulate sumsets over Z/p one word at a time.
class Bitset {
public:
  Bitset() = default;
  explicit Bitset(std::uint64_t n) : n_(n), words_((n + 63) / 64, 0) {}

  std::uint64_t universe() const noexcept { return n_; }

  void set(std::uint64_t i) noexcept { words_[i >> 6] |= 1ull << (i & 63); }

  bool test(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1; }

  std::uint64_t count() const noexcept {
    std::uint64_t c = 0;
    for (std::uint64_t w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  bool all() const noexcept { return count() == n_; }
  bool none() const noexcept { return count() == 0; }

  void fill() noexcept {
    if (n_ == 0) return;
    for (auto& w : words_) w = ~0ull;
    trim();
  }

  void clear() noexcept {
    for (auto& w : words_) w = 0;
  }

  void or_with(const Bitset& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  }

  // Ascending iteration over set bits.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w) {
        int b = std::countr_zero(w);
        fn(static_cast<std::uint64_t>(wi) * 64 + static_cast<std::uint64_t>(b));
        w &= w - 1;
      }
    }
  }

  std::vector<std::uint64_t> values() const {
    std::vector<std::uint64_t> out;
    out.reserve(count());
    for_each([&](std::uint64_t v) { out.push_back(v); });
    return out;
  }

  // Ascending iteration; fn returns true to stop early. Returns whether the
  // scan was stopped.
  template <typename Fn>
  bool for_each_until(Fn&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w) {
        int b = std::countr_zero(w);
        if (fn(static_cast<std::uint64_t>(wi) * 64 + static_cast<std::uint64_t>(b)))
          return true;
        w &= w - 1;
      }
    }
    return false;
  }

  // For every set bit i of *this, sets (i + s) mod n in `out`. Word-level:
  // the rotation splits into two straight shifted ranges.
  void rotate_or_into(Bitset& out, std::uint64_t s) const {
    s %= n_;
    if (s == 0) {
      out.or_with(*this);
      return;
    }
    or_bit_range(out, 0, n_ - s, s);
    or_bit_range(out, n_ - s, s, 0);
  }

  friend bool operator==(const Bitset&, const Bitset&) = default;

private:
  void trim() noexcept {
    if (std::uint64_t tail = n_ & 63) words_.back() &= (1ull << tail) - 1;
  }

  // Reads count (1..64) bits starting at bit q; bits beyond the storage read 0.
  std::uint64_t read_bits(std::uint64_t q, std::uint64_t count) const noexcept {
    std::size_t wi = q >> 6;
    int off = static_cast<int>(q & 63);
    std::uint64_t v = words_[wi] >> off;
    if (off != 0 && wi + 1 < words_.size()) v |= words_[wi + 1] << (64 - off);
    if (count < 64) v &= (1ull << count) - 1;
    return v;
  }

  // OR bits [src_begin, src_begin + len) of *this into `out` at dst_begin.
  // Both ranges stay inside the respective universes.
  void or_bit_range(Bitset& out, std::uint64_t src_begin, std::uint64_t len,
                    std::uint64_t dst_begin) const noexcept {
    std::uint64_t done = 0;
    while (done < len) {
      std::uint64_t d = dst_begin + done;
      int doff = static_cast<int>(d & 63);
      std::uint64_t chunk = std::min<std::uint64_t>(64 - doff, len - done);
      std::uint64_t bits = read_bits(src_begin + done, chunk);
      out.words_[d >> 6] |= bits << doff;
      done += chunk;
    }
  }

  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace factlab::detail
