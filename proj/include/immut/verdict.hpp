#pragma once

// The four-point immutability lattice and the attribute keys that explain
// why a template misses a stronger property.

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace immut {

/// Ordered bottom to top: Mutable < ShallowImmutable < ConditionallyDeep <
/// DeepImmutable. The enumerator values encode the order.
enum class Verdict : std::uint8_t {
  Mutable = 0,
  ShallowImmutable = 1,
  ConditionallyDeep = 2,
  DeepImmutable = 3,
};

inline constexpr std::array<Verdict, 4> kAllVerdicts = {
    Verdict::Mutable, Verdict::ShallowImmutable, Verdict::ConditionallyDeep,
    Verdict::DeepImmutable};

constexpr Verdict meet(Verdict a, Verdict b) noexcept {
  return static_cast<std::uint8_t>(a) < static_cast<std::uint8_t>(b) ? a : b;
}

constexpr Verdict join(Verdict a, Verdict b) noexcept {
  return static_cast<std::uint8_t>(a) < static_cast<std::uint8_t>(b) ? b : a;
}

/// Token used by the assumptions file and JSON documents.
constexpr std::string_view to_token(Verdict v) noexcept {
  switch (v) {
    case Verdict::Mutable: return "mutable";
    case Verdict::ShallowImmutable: return "shallow";
    case Verdict::ConditionallyDeep: return "conditionally_deep";
    case Verdict::DeepImmutable: return "deep";
  }
  return "?";
}

inline std::optional<Verdict> verdict_from_token(std::string_view s) {
  for (Verdict v : kAllVerdicts) {
    if (to_token(v) == s) return v;
  }
  return std::nullopt;
}

/// Human-readable form used by explanations.
constexpr std::string_view describe(Verdict v) noexcept {
  switch (v) {
    case Verdict::Mutable: return "mutable";
    case Verdict::ShallowImmutable: return "shallow immutable";
    case Verdict::ConditionallyDeep: return "conditionally deep immutable";
    case Verdict::DeepImmutable: return "deep immutable";
  }
  return "?";
}

// A..E force Mutable, F..J prevent (conditional) deep immutability.
enum class AttributeKey : std::uint8_t { A, B, C, D, E, F, G, H, I, J };

inline constexpr std::size_t kAttributeCount = 10;

constexpr char letter(AttributeKey k) noexcept {
  return static_cast<char>('A' + static_cast<int>(k));
}

inline std::optional<AttributeKey> attribute_from_letter(char c) {
  if (c < 'A' || c > 'J') return std::nullopt;
  return static_cast<AttributeKey>(c - 'A');
}

constexpr bool forces_mutable(AttributeKey k) noexcept {
  return k <= AttributeKey::E;
}

/// Small ordered set of attribute keys backed by a bit mask.
class AttributeSet {
 public:
  constexpr AttributeSet() = default;
  constexpr AttributeSet(std::initializer_list<AttributeKey> keys) {
    for (auto k : keys) insert(k);
  }

  constexpr void insert(AttributeKey k) noexcept { bits_ |= bit(k); }
  constexpr bool contains(AttributeKey k) const noexcept {
    return (bits_ & bit(k)) != 0;
  }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::size_t size() const noexcept {
    return static_cast<std::size_t>(std::popcount(bits_));
  }

  /// Adds every key of `other`; returns true if the set grew.
  constexpr bool merge(AttributeSet other) noexcept {
    auto before = bits_;
    bits_ |= other.bits_;
    return bits_ != before;
  }

  constexpr bool includes(AttributeSet other) const noexcept {
    return (bits_ & other.bits_) == other.bits_;
  }

  constexpr AttributeSet intersect(AttributeSet other) const noexcept {
    AttributeSet out;
    out.bits_ = bits_ & other.bits_;
    return out;
  }

  static constexpr AttributeSet mutable_keys() noexcept {
    return from_bits(0b00000'11111);
  }
  static constexpr AttributeSet shallow_keys() noexcept {
    return from_bits(0b11111'00000);
  }

  std::vector<AttributeKey> keys() const {
    std::vector<AttributeKey> out;
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
      auto k = static_cast<AttributeKey>(i);
      if (contains(k)) out.push_back(k);
    }
    return out;
  }

  /// Alphabetical, space separated: {C, B} -> "B C".
  std::string combo_key() const {
    std::string out;
    for (auto k : keys()) {
      if (!out.empty()) out.push_back(' ');
      out.push_back(letter(k));
    }
    return out;
  }

  static std::optional<AttributeSet> from_combo_key(std::string_view s) {
    AttributeSet out;
    for (char c : s) {
      if (c == ' ') continue;
      auto k = attribute_from_letter(c);
      if (!k) return std::nullopt;
      out.insert(*k);
    }
    return out;
  }

  constexpr std::uint16_t bits() const noexcept { return bits_; }

  friend constexpr bool operator==(AttributeSet, AttributeSet) = default;

 private:
  static constexpr std::uint16_t bit(AttributeKey k) noexcept {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(k));
  }
  static constexpr AttributeSet from_bits(std::uint16_t b) noexcept {
    AttributeSet out;
    out.bits_ = b;
    return out;
  }

  std::uint16_t bits_ = 0;
};

}  // namespace immut
