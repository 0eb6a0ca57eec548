#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <string>

namespace bnsl {

/// Hard cap on the number of variables; keeps a VariableSet in one machine word.
inline constexpr std::size_t kMaxVariables = 64;

/// A set of variable indices in [0, 64), stored as a bitmask.
///
/// Used both for order-graph nodes (the variables already placed) and for
/// candidate or chosen parent sets. Iteration visits members in ascending
/// index order.
class VariableSet {
 public:
  constexpr VariableSet() = default;
  constexpr explicit VariableSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr VariableSet single(std::size_t v) { return VariableSet{std::uint64_t{1} << v}; }

  /// {0, ..., n-1}
  static constexpr VariableSet full(std::size_t n) {
    return VariableSet{n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1};
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool contains(std::size_t v) const { return (bits_ >> v) & 1U; }
  constexpr bool subset_of(VariableSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(VariableSet other) const { return (bits_ & other.bits_) != 0; }

  constexpr VariableSet with(std::size_t v) const { return VariableSet{bits_ | (std::uint64_t{1} << v)}; }
  constexpr VariableSet without(std::size_t v) const { return VariableSet{bits_ & ~(std::uint64_t{1} << v)}; }

  /// Lowest member; undefined on the empty set.
  constexpr std::size_t front() const { return static_cast<std::size_t>(std::countr_zero(bits_)); }

  friend constexpr VariableSet operator|(VariableSet a, VariableSet b) { return VariableSet{a.bits_ | b.bits_}; }
  friend constexpr VariableSet operator&(VariableSet a, VariableSet b) { return VariableSet{a.bits_ & b.bits_}; }
  /// Set difference.
  friend constexpr VariableSet operator-(VariableSet a, VariableSet b) { return VariableSet{a.bits_ & ~b.bits_}; }
  friend constexpr bool operator==(VariableSet a, VariableSet b) = default;
  friend constexpr auto operator<=>(VariableSet a, VariableSet b) { return a.bits_ <=> b.bits_; }

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = std::size_t;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = std::size_t;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}
    constexpr std::size_t operator*() const { return static_cast<std::size_t>(std::countr_zero(rest_)); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    friend constexpr bool operator==(iterator a, iterator b) = default;

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr iterator begin() const { return iterator{bits_}; }
  constexpr iterator end() const { return iterator{}; }

 private:
  std::uint64_t bits_ = 0;
};

/// Calls fn(subset) for every subset of `set`, including the empty set and `set` itself.
template <typename Fn>
void for_each_subset(VariableSet set, Fn&& fn) {
  const std::uint64_t mask = set.bits();
  std::uint64_t sub = 0;
  while (true) {
    fn(VariableSet{sub});
    if (sub == mask) break;
    sub = (sub - mask) & mask;
  }
}

/// "{0,2,5}" style rendering using 0-based indices.
inline std::string to_string(VariableSet s) {
  std::string out = "{";
  bool first = true;
  for (std::size_t v : s) {
    if (!first) out += ',';
    out += std::to_string(v);
    first = false;
  }
  out += '}';
  return out;
}

}  // namespace bnsl

template <>
struct std::hash<bnsl::VariableSet> {
  std::size_t operator()(bnsl::VariableSet s) const noexcept {
    // splitmix64 finalizer; raw masks cluster in the low bits.
    std::uint64_t z = s.bits() + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};
