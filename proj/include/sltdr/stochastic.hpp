#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sltdr/lfsr.hpp"

namespace sltdr {

/// A q-bit two's-complement word together with its stochastic views.
///
/// For code z the ones-probability is (z + 2^(q-1)) / (2^q - 1) and the
/// bipolar value is twice that minus one. Representable bipolar values are
/// the odd multiples of 1 / (2^q - 1), so 0 itself is not representable.
class BipolarValue {
 public:
  BipolarValue() = default;

  static BipolarValue from_code(std::int32_t code, int width) {
    check_width(width);
    if (code < min_code(width) || code > max_code(width)) {
      throw std::out_of_range("code " + std::to_string(code) + " not representable in " +
                              std::to_string(width) + " bits");
    }
    return BipolarValue(code, width);
  }

  /// Nearest representable value to a bipolar real in [-1, 1].
  static BipolarValue from_real(double x, int width) {
    check_width(width);
    if (!std::isfinite(x) || x < -1.0 || x > 1.0) {
      throw std::out_of_range("bipolar value " + std::to_string(x) + " outside [-1, 1]");
    }
    const double n = state_count(width);
    auto code = static_cast<std::int32_t>(std::lround((x * n - 1.0) / 2.0));
    if (code < min_code(width)) code = min_code(width);
    if (code > max_code(width)) code = max_code(width);
    return BipolarValue(code, width);
  }

  /// Nearest representable value to c / len (c in [-len, len]); ties go toward zero.
  static BipolarValue from_ratio(std::int64_t c, std::int64_t len, int width) {
    check_width(width);
    const std::int64_t n = state_count(width);
    const std::int64_t target = c * n;  // compare against (2z + 1) * len
    std::int64_t lo = target - len;
    // floor division of (c*n - len) by 2*len
    std::int64_t z0 = lo >= 0 ? lo / (2 * len) : -((-lo + 2 * len - 1) / (2 * len));
    std::int64_t best = z0;
    std::int64_t best_dist = std::llabs(target - (2 * z0 + 1) * len);
    const std::int64_t alt = z0 + 1;
    const std::int64_t alt_dist = std::llabs(target - (2 * alt + 1) * len);
    if (alt_dist < best_dist ||
        (alt_dist == best_dist && std::llabs(2 * alt + 1) < std::llabs(2 * best + 1))) {
      best = alt;
    }
    best = std::clamp<std::int64_t>(best, min_code(width), max_code(width));
    return BipolarValue(static_cast<std::int32_t>(best), width);
  }

  [[nodiscard]] static constexpr std::int32_t min_code(int width) noexcept {
    return -(std::int32_t{1} << (width - 1));
  }
  [[nodiscard]] static constexpr std::int32_t max_code(int width) noexcept {
    return (std::int32_t{1} << (width - 1)) - 1;
  }

  [[nodiscard]] std::int32_t code() const noexcept { return code_; }
  [[nodiscard]] int width() const noexcept { return width_; }

  /// Unsigned comparator word z + 2^(q-1), in [0, 2^q - 1].
  [[nodiscard]] Word offset() const noexcept {
    return static_cast<Word>(code_ + (std::int32_t{1} << (width_ - 1)));
  }
  [[nodiscard]] double unipolar() const noexcept {
    return static_cast<double>(offset()) / static_cast<double>(state_count(width_));
  }
  [[nodiscard]] double bipolar() const noexcept {
    return static_cast<double>(2 * code_ + 1) / static_cast<double>(state_count(width_));
  }

  friend bool operator==(const BipolarValue&, const BipolarValue&) = default;

 private:
  BipolarValue(std::int32_t code, int width) : code_(code), width_(width) {}

  std::int32_t code_ = 0;
  int width_ = 8;
};

/// Whether x equals a width-q representable bipolar value.
[[nodiscard]] inline bool is_representable(double x, int width) {
  if (!std::isfinite(x) || x < -1.0 || x > 1.0) return false;
  return std::abs(BipolarValue::from_real(x, width).bipolar() - x) <= 1e-12;
}

/// A length-L Bernoulli bit stream. Bits are stored one per byte.
class BitStream {
 public:
  BitStream() = default;
  explicit BitStream(std::size_t length) : bits_(length, 0) {}
  explicit BitStream(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) {
      if (b > 1) throw std::invalid_argument("bit stream entries must be 0 or 1");
    }
  }

  static BitStream constant(std::size_t length, bool bit) {
    BitStream s(length);
    std::fill(s.bits_.begin(), s.bits_.end(), bit ? 1 : 0);
    return s;
  }

  [[nodiscard]] std::size_t length() const noexcept { return bits_.size(); }
  [[nodiscard]] bool operator[](std::size_t r) const noexcept { return bits_[r] != 0; }
  void set(std::size_t r, bool bit) noexcept { bits_[r] = bit ? 1 : 0; }

  [[nodiscard]] std::size_t ones() const noexcept {
    return static_cast<std::size_t>(std::accumulate(bits_.begin(), bits_.end(), std::size_t{0}));
  }
  [[nodiscard]] double unipolar_estimate() const noexcept {
    return static_cast<double>(ones()) / static_cast<double>(bits_.size());
  }
  [[nodiscard]] double bipolar_estimate() const noexcept { return 2.0 * unipolar_estimate() - 1.0; }

  [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  [[nodiscard]] std::span<std::uint8_t> bits() noexcept { return bits_; }

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw std::invalid_argument(std::string(op) + ": stream lengths differ (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

// Span kernels shared by the public operations and the reservoir's node loop.

inline void xnor_into(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                      std::span<std::uint8_t> out) noexcept {
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = static_cast<std::uint8_t>(1 ^ a[r] ^ b[r]);
}

inline void mux_into(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                     std::span<const std::uint8_t> select, std::span<std::uint8_t> out) noexcept {
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = static_cast<std::uint8_t>((select[r] & a[r]) | ((1 ^ select[r]) & b[r]));
  }
}

[[nodiscard]] inline std::int64_t updown_count(std::span<const std::uint8_t> bits) noexcept {
  std::int64_t ones = 0;
  for (auto b : bits) ones += b;
  return 2 * ones - static_cast<std::int64_t>(bits.size());
}

}  // namespace detail

/// Comparator threshold for a unipolar probability: round(p * (2^q - 1)).
///
/// Against words in {1, ..., 2^q - 1} this fires with probability exactly
/// threshold / (2^q - 1) over a full period.
[[nodiscard]] inline Word probability_threshold(double p, int width) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::out_of_range("probability " + std::to_string(p) + " outside [0, 1]");
  }
  return static_cast<Word>(std::lround(p * static_cast<double>(state_count(width))));
}

/// The q-bit quantization of a probability that a select stream actually realizes.
[[nodiscard]] inline double quantized_probability(double p, int width) {
  return static_cast<double>(probability_threshold(p, width)) /
         static_cast<double>(state_count(width));
}

/// Binary-to-stochastic conversion: bit r is 1 iff LFSR word r <= unsigned(z + 2^(q-1)).
inline BitStream b2s(const BipolarValue& v, LfsrGenerator& gen, std::size_t length) {
  if (length == 0) throw std::invalid_argument("b2s: stream length must be positive");
  if (gen.width() != v.width()) throw std::invalid_argument("b2s: LFSR width differs from value width");
  BitStream s(length);
  gen.compare_into(v.offset(), s.bits());
  return s;
}

/// Stochastic-to-binary conversion with an up/down counter.
inline BipolarValue s2b(const BitStream& s, int width) {
  if (s.length() == 0) throw std::invalid_argument("s2b: empty stream");
  return BipolarValue::from_ratio(detail::updown_count(s.bits()),
                                  static_cast<std::int64_t>(s.length()), width);
}

/// Bipolar multiplication (XNOR gate).
inline BitStream stoch_mult(const BitStream& a, const BitStream& b) {
  detail::require_same_length(a.length(), b.length(), "stoch_mult");
  BitStream out(a.length());
  detail::xnor_into(a.bits(), b.bits(), out.bits());
  return out;
}

/// Bipolar negation (inverter).
inline BitStream stoch_negate(const BitStream& s) {
  BitStream out(s.length());
  auto src = s.bits();
  auto dst = out.bits();
  for (std::size_t r = 0; r < dst.size(); ++r) dst[r] = static_cast<std::uint8_t>(1 ^ src[r]);
  return out;
}

/// Weighted average (2:1 multiplexer): takes a where select is 1, b elsewhere.
inline BitStream stoch_mux_average(const BitStream& a, const BitStream& b, const BitStream& select) {
  detail::require_same_length(a.length(), b.length(), "stoch_mux_average");
  detail::require_same_length(a.length(), select.length(), "stoch_mux_average");
  BitStream out(a.length());
  detail::mux_into(a.bits(), b.bits(), select.bits(), out.bits());
  return out;
}

/// A stream whose ones-probability is the q-bit quantization of p (no bipolar offset).
inline BitStream unipolar_select_stream(double p, LfsrGenerator& gen, std::size_t length) {
  if (length == 0) throw std::invalid_argument("select stream length must be positive");
  BitStream s(length);
  gen.compare_into(probability_threshold(p, gen.width()), s.bits());
  return s;
}

}  // namespace sltdr
