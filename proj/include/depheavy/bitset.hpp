#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace depheavy {

// Fixed-width bit vector over a node index space. Rows of the reachability
// index are stored as these; 22k nodes cost ~2.8 KB per row.
class Bitset {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Bitset() = default;
  explicit Bitset(std::size_t bits)
      : words_((bits + kWordBits - 1) / kWordBits, 0), bits_(bits) {}

  std::size_t size() const noexcept { return bits_; }

  bool test(std::size_t i) const noexcept {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
  }
  void set(std::size_t i) noexcept { words_[i / kWordBits] |= Word{1} << (i % kWordBits); }
  void reset(std::size_t i) noexcept { words_[i / kWordBits] &= ~(Word{1} << (i % kWordBits)); }
  void clear() noexcept {
    for (auto& w : words_) w = 0;
  }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  bool none() const noexcept {
    for (Word w : words_)
      if (w) return false;
    return true;
  }

  Bitset& operator|=(const Bitset& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  Bitset& operator&=(const Bitset& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  /// Removes every bit set in `o`.
  Bitset& subtract(const Bitset& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }

  bool intersects(const Bitset& o) const noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }
  std::size_t intersection_count(const Bitset& o) const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      n += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
    return n;
  }

  /// Calls f(index) for every set bit in ascending order.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      Word w = words_[wi];
      while (w) {
        const int b = std::countr_zero(w);
        f(wi * kWordBits + static_cast<std::size_t>(b));
        w &= w - 1;
      }
    }
  }

  template <class Index = std::size_t>
  std::vector<Index> to_vector() const {
    std::vector<Index> out;
    out.reserve(count());
    for_each([&](std::size_t i) { out.push_back(static_cast<Index>(i)); });
    return out;
  }

  bool operator==(const Bitset&) const = default;

 private:
  std::vector<Word> words_;
  std::size_t bits_ = 0;
};

inline Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
inline Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }

}  // namespace depheavy
