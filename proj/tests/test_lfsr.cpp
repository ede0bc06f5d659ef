#include <gtest/gtest.h>

#include <numeric>
#include <set>
#include <vector>

#include "sltdr/lfsr.hpp"

using namespace sltdr;

namespace {

// Sequence-level reference: a[t + q] = XOR over taps p of a[t + q - p], the
// word at time t packs a[t .. t + q - 1] little-endian, and one word is kept
// every `stride` steps.
std::vector<Word> reference_words(int q, const std::vector<int>& taps, Word seed, int stride, std::size_t count) {
  std::vector<int> a;
  for (int i = 0; i < q; ++i) a.push_back(static_cast<int>((seed >> i) & 1U));
  std::vector<Word> words;
  for (std::size_t t = 0; words.size() < count; t += static_cast<std::size_t>(stride)) {
    while (a.size() < t + static_cast<std::size_t>(q)) {
      const std::size_t n = a.size();  // n = t' + q
      int bit = 0;
      for (int p : taps) bit ^= a[n - static_cast<std::size_t>(p)];
      a.push_back(bit);
    }
    Word w = 0;
    for (int i = 0; i < q; ++i) w |= static_cast<Word>(a[t + static_cast<std::size_t>(i)]) << i;
    words.push_back(w);
  }
  return words;
}

std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t result = n;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

}  // namespace

TEST(Lfsr, StrideIsSmallestCoprimeAtLeastWidth) {
  EXPECT_EQ(leap_stride(2), 2);
  EXPECT_EQ(leap_stride(4), 4);
  EXPECT_EQ(leap_stride(6), 8);  // 63 = 3^2 * 7 rules out 6 and 7
  EXPECT_EQ(leap_stride(8), 8);
  EXPECT_EQ(leap_stride(16), 16);
  for (int q = kMinWidth; q <= kMaxWidth; ++q) {
    const int k = leap_stride(q);
    EXPECT_GE(k, q);
    EXPECT_EQ(std::gcd(static_cast<Word>(k), state_count(q)), 1U);
  }
}

TEST(Lfsr, MatchesSequenceRecurrence) {
  const std::vector<int> taps{8, 6, 5, 4};
  for (Word seed : {1U, 77U, 255U}) {
    LfsrGenerator gen(8, seed);
    const auto expected = reference_words(8, taps, seed, leap_stride(8), 600);
    for (std::size_t i = 0; i < expected.size(); ++i) ASSERT_EQ(gen.next(), expected[i]) << "word " << i;
  }
  const std::vector<int> taps6{6, 5};
  LfsrGenerator gen6(6, 9);
  const auto expected6 = reference_words(6, taps6, 9, leap_stride(6), 200);
  for (std::size_t i = 0; i < expected6.size(); ++i) ASSERT_EQ(gen6.next(), expected6[i]);
}

TEST(Lfsr, FullCycleVisitsEveryNonzeroStateOnceAtWidth8) {
  LfsrGenerator gen(8, 0x5A);
  std::set<Word> seen;
  for (int i = 0; i < 255; ++i) {
    const Word w = gen.next();
    EXPECT_NE(w, 0U);
    EXPECT_LE(w, 255U);
    seen.insert(w);
  }
  EXPECT_EQ(seen.size(), 255U);
  EXPECT_EQ(gen.state(), 0x5AU);
}

TEST(Lfsr, EveryPolynomialInEveryPoolIsMaximal) {
  for (int q = kMinWidth; q <= kMaxWidth; ++q) {
    const auto& pool = primitive_tap_masks(q);
    const auto primitive = euler_phi(state_count(q)) / static_cast<std::uint64_t>(q);
    EXPECT_EQ(pool.size(), std::min<std::uint64_t>(primitive, detail::kPolynomialPoolSize)) << "q=" << q;
    EXPECT_EQ(pool.front(), published_tap_mask(q));
    EXPECT_EQ(std::set<Word>(pool.begin(), pool.end()).size(), pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      LfsrGenerator gen(q, 1, i);
      Word steps = 0;
      do {
        gen.next();
        ++steps;
      } while (gen.state() != 1 && steps <= state_count(q));
      EXPECT_EQ(steps, state_count(q)) << "q=" << q << " polynomial " << i;
    }
  }
}

TEST(Lfsr, ReturnsToSeedAfterPeriod) {
  for (int q : {3, 8, 11, 16}) {
    LfsrGenerator gen(q, 3, 2);
    for (Word i = 0; i < state_count(q); ++i) gen.next();
    EXPECT_EQ(gen.state(), 3U);
  }
}

TEST(Lfsr, RejectsBadSeedsAndWidths) {
  EXPECT_THROW(LfsrGenerator(8, 0), std::invalid_argument);
  EXPECT_THROW(LfsrGenerator(8, 256), std::invalid_argument);
  EXPECT_THROW(LfsrGenerator(1, 1), std::invalid_argument);
  EXPECT_THROW(LfsrGenerator(17, 1), std::invalid_argument);
  LfsrGenerator gen(8, 1);
  EXPECT_THROW(gen.reseed(0), std::invalid_argument);
}

TEST(Lfsr, CompareIntoMatchesNext) {
  LfsrGenerator a(8, 42, 3), b(8, 42, 3);
  std::vector<std::uint8_t> bits(700);
  a.compare_into(100, bits);
  for (std::size_t r = 0; r < bits.size(); ++r) ASSERT_EQ(bits[r], b.next() <= 100 ? 1 : 0);
  EXPECT_EQ(a.state(), b.state());
}

TEST(Lfsr, ReseedRestartsTheSequence) {
  LfsrGenerator gen(10, 5);
  std::vector<Word> first;
  for (int i = 0; i < 20; ++i) first.push_back(gen.next());
  gen.reseed(5);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(gen.next(), first[static_cast<std::size_t>(i)]);
}

TEST(Lfsr, CopiesAdvanceIndependently) {
  LfsrGenerator a(8, 7);
  LfsrGenerator b = a;
  a.next();
  a.next();
  EXPECT_EQ(b.state(), 7U);
}
