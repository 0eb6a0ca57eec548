#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bnsl {

/// Fixed-length packed bit vector. Bit i lives in word i / 64 at position i % 64;
/// padding bits past size() are always zero.
class BitRow {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  BitRow() = default;
  explicit BitRow(std::size_t size, bool value = false) : size_(size), words_((size + 63) / 64, 0) {
    if (value) {
      for (auto& w : words_) w = ~std::uint64_t{0};
      clear_padding();
    }
  }

  std::size_t size() const { return size_; }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }

  bool none() const {
    for (auto w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// Index of the lowest set bit, or npos.
  std::size_t find_first() const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k] != 0) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
    }
    return npos;
  }

  /// this &= ~other; rows must have equal length.
  BitRow& and_not(const BitRow& other) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= ~other.words_[k];
    return *this;
  }

  /// Bits rendered in index order, e.g. "1010".
  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) {
      if (test(i)) s[i] = '1';
    }
    return s;
  }

  friend bool operator==(const BitRow&, const BitRow&) = default;

 private:
  void clear_padding() {
    if (size_ % 64 != 0) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace bnsl
