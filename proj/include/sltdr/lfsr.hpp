#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sltdr {

using Word = std::uint32_t;

inline constexpr int kMinWidth = 2;
inline constexpr int kMaxWidth = 16;

/// Number of nonzero states of a width-q register, 2^q - 1.
[[nodiscard]] constexpr Word state_count(int width) noexcept {
  return (Word{1} << width) - 1U;
}

inline void check_width(int width) {
  if (width < kMinWidth || width > kMaxWidth) {
    throw std::invalid_argument("word width " + std::to_string(width) + " outside [" +
                                std::to_string(kMinWidth) + ", " +
                                std::to_string(kMaxWidth) + "]");
  }
}

namespace detail {

// Maximal-length feedback taps, 1-based register positions (Xilinx XAPP052 table).
inline constexpr std::array<std::array<int, 4>, kMaxWidth + 1> kPublishedTaps{{
    {0, 0, 0, 0},     {0, 0, 0, 0},     {2, 1, 0, 0},    {3, 2, 0, 0},
    {4, 3, 0, 0},     {5, 3, 0, 0},     {6, 5, 0, 0},    {7, 6, 0, 0},
    {8, 6, 5, 4},     {9, 5, 0, 0},     {10, 7, 0, 0},   {11, 9, 0, 0},
    {12, 6, 4, 1},    {13, 4, 3, 1},    {14, 5, 3, 1},   {15, 14, 0, 0},
    {16, 15, 13, 4},
}};

// Register bit i holds sequence element a[t+i]; a tap at position p reads bit (q - p).
[[nodiscard]] inline Word taps_to_mask(int width, std::span<const int> positions) {
  Word mask = 0;
  for (int p : positions) {
    if (p > 0) mask |= Word{1} << (width - p);
  }
  return mask;
}

/// One raw Fibonacci shift: a[t+q] = XOR of the tapped bits, shifted in at the top.
[[nodiscard]] constexpr Word lfsr_shift(Word state, Word mask, int width) noexcept {
  const Word feedback = static_cast<Word>(std::popcount(state & mask) & 1);
  return (state >> 1) | (feedback << (width - 1));
}

[[nodiscard]] inline bool has_full_period(Word mask, int width) {
  const Word period = state_count(width);
  Word state = 1;
  for (Word i = 1; i <= period; ++i) {
    state = lfsr_shift(state, mask, width);
    if (state == 1) return i == period;
  }
  return false;
}

// Per-role polynomials beyond this count wrap around.
inline constexpr std::size_t kPolynomialPoolSize = 24;

}  // namespace detail

/// Smallest number of raw shifts k >= q with gcd(k, 2^q - 1) = 1.
///
/// Emitting one word every k shifts means consecutive words share no register
/// bits, and the word sequence still visits every nonzero state once per period.
[[nodiscard]] inline int leap_stride(int width) {
  check_width(width);
  const Word period = state_count(width);
  int k = width;
  while (std::gcd(static_cast<Word>(k), period) != 1) ++k;
  return k;
}

/// Published maximal-length tap mask for a width.
[[nodiscard]] inline Word published_tap_mask(int width) {
  check_width(width);
  return detail::taps_to_mask(width, detail::kPublishedTaps[static_cast<std::size_t>(width)]);
}

/// Maximal-length tap masks for a width: the published one first, then further
/// primitive feedback polynomials in increasing mask order.
[[nodiscard]] inline const std::vector<Word>& primitive_tap_masks(int width) {
  check_width(width);
  static std::array<std::vector<Word>, kMaxWidth + 1> pools;
  static std::array<std::once_flag, kMaxWidth + 1> once;
  const auto w = static_cast<std::size_t>(width);
  std::call_once(once[w], [width, w] {
    std::vector<Word> pool{published_tap_mask(width)};
    const Word top = Word{1} << width;
    // Bit 0 must be tapped for the shift map to be invertible.
    for (Word mask = 1; mask < top && pool.size() < detail::kPolynomialPoolSize; mask += 2) {
      if (mask == pool.front()) continue;
      if (detail::has_full_period(mask, width)) pool.push_back(mask);
    }
    pools[w] = std::move(pool);
  });
  return pools[w];
}

/// Output word order of one (width, polynomial) pair, precomputed once.
class LfsrSequence {
 public:
  LfsrSequence(int width, Word mask) : width_(width), mask_(mask) {
    const Word period = state_count(width);
    const int stride = leap_stride(width);
    words_.resize(period);
    position_.assign(std::size_t{period} + 1, 0);
    Word state = 1;
    for (Word j = 0; j < period; ++j) {
      words_[j] = static_cast<std::uint16_t>(state);
      position_[state] = j;
      for (int s = 0; s < stride; ++s) state = detail::lfsr_shift(state, mask, width);
    }
    if (state != 1) throw std::logic_error("tap mask is not maximal-length");
  }

  /// Shared instance for polynomial `index` of a width's pool (wraps around).
  static const LfsrSequence& get(int width, std::size_t index) {
    const auto& pool = primitive_tap_masks(width);
    const std::size_t slot = index % pool.size();
    static std::mutex mutex;
    static std::array<std::vector<std::unique_ptr<LfsrSequence>>, kMaxWidth + 1> cache;
    std::lock_guard lock(mutex);
    auto& row = cache[static_cast<std::size_t>(width)];
    if (row.size() < pool.size()) row.resize(pool.size());
    if (!row[slot]) row[slot] = std::make_unique<LfsrSequence>(width, pool[slot]);
    return *row[slot];
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] Word mask() const noexcept { return mask_; }
  [[nodiscard]] Word period() const noexcept { return static_cast<Word>(words_.size()); }
  [[nodiscard]] Word word_at(Word pos) const noexcept { return words_[pos]; }
  [[nodiscard]] Word position_of(Word state) const noexcept { return position_[state]; }
  [[nodiscard]] std::span<const std::uint16_t> words() const noexcept { return words_; }

 private:
  int width_;
  Word mask_;
  std::vector<std::uint16_t> words_;
  std::vector<Word> position_;
};

/// Maximal-length LFSR emitting q-bit words in {1, ..., 2^q - 1}.
///
/// The state never reaches zero and returns to the seed after exactly 2^q - 1
/// calls to next(). Copies are independent values.
class LfsrGenerator {
 public:
  LfsrGenerator(int width, Word seed, std::size_t polynomial = 0)
      : seq_(nullptr), pos_(0), seed_(seed) {
    check_width(width);
    if (seed == 0) throw std::invalid_argument("LFSR seed must be nonzero");
    if (seed > state_count(width)) {
      throw std::invalid_argument("LFSR seed " + std::to_string(seed) + " exceeds " +
                                  std::to_string(width) + " bits");
    }
    seq_ = &LfsrSequence::get(width, polynomial);
    pos_ = seq_->position_of(seed);
  }

  /// Restarts from a new nonzero seed on the same polynomial.
  void reseed(Word seed) {
    if (seed == 0 || seed > seq_->period()) throw std::invalid_argument("invalid LFSR seed");
    seed_ = seed;
    pos_ = seq_->position_of(seed);
  }

  /// Returns the current word and advances.
  Word next() noexcept {
    const Word w = seq_->word_at(pos_);
    if (++pos_ == seq_->period()) pos_ = 0;
    return w;
  }

  /// Writes out[r] = (word_r <= threshold) for the next out.size() words.
  void compare_into(Word threshold, std::span<std::uint8_t> out) noexcept {
    const auto words = seq_->words();
    const std::size_t period = words.size();
    std::size_t r = 0;
    std::size_t pos = pos_;
    while (r < out.size()) {
      const std::size_t run = std::min(out.size() - r, period - pos);
      const std::uint16_t* src = words.data() + pos;
      std::uint8_t* dst = out.data() + r;
      for (std::size_t j = 0; j < run; ++j) dst[j] = src[j] <= threshold ? 1 : 0;
      r += run;
      pos += run;
      if (pos == period) pos = 0;
    }
    pos_ = static_cast<Word>(pos);
  }

  [[nodiscard]] Word state() const noexcept { return seq_->word_at(pos_); }
  [[nodiscard]] Word seed() const noexcept { return seed_; }
  [[nodiscard]] int width() const noexcept { return seq_->width(); }
  [[nodiscard]] Word tap_mask() const noexcept { return seq_->mask(); }
  [[nodiscard]] Word period() const noexcept { return seq_->period(); }

 private:
  const LfsrSequence* seq_;
  Word pos_;
  Word seed_;
};

}  // namespace sltdr
