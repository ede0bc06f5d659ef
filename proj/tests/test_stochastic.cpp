#include <gtest/gtest.h>

#include <cmath>

#include "sltdr/random.hpp"
#include "sltdr/stochastic.hpp"

using namespace sltdr;

TEST(BipolarValue, EncodingOfZeroCode) {
  const auto v = BipolarValue::from_code(0, 8);
  EXPECT_DOUBLE_EQ(v.unipolar(), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(v.bipolar(), 1.0 / 255.0);
  EXPECT_EQ(v.offset(), 128U);
}

TEST(BipolarValue, ExtremesAndRange) {
  EXPECT_DOUBLE_EQ(BipolarValue::from_code(-128, 8).bipolar(), -1.0);
  EXPECT_DOUBLE_EQ(BipolarValue::from_code(127, 8).bipolar(), 1.0);
  EXPECT_THROW(BipolarValue::from_code(128, 8), std::out_of_range);
  EXPECT_THROW(BipolarValue::from_real(1.5, 8), std::out_of_range);
  EXPECT_THROW(BipolarValue::from_real(std::nan(""), 8), std::out_of_range);
}

TEST(BipolarValue, RealRoundTripForEveryCode) {
  for (int q : {2, 5, 8, 12}) {
    for (int z = BipolarValue::min_code(q); z <= BipolarValue::max_code(q); ++z) {
      const auto v = BipolarValue::from_code(z, q);
      EXPECT_EQ(BipolarValue::from_real(v.bipolar(), q), v);
      EXPECT_TRUE(is_representable(v.bipolar(), q));
    }
  }
  EXPECT_FALSE(is_representable(0.0, 8));
}

TEST(BipolarValue, NearestRepresentableIsNearest) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double v = BipolarValue::from_real(x, 8).bipolar();
    // Representable values are spaced 2/255 apart.
    EXPECT_LE(std::abs(v - x), 1.0 / 255.0 + 1e-15);
  }
}

TEST(S2b, CounterExampleTiesTowardZero) {
  // Seven ones in ten bits: counter 4, ratio 0.4 = 102 / 255, halfway between codes 50 and 51.
  BitStream s(std::vector<std::uint8_t>{1, 1, 1, 1, 1, 1, 1, 0, 0, 0});
  EXPECT_EQ(detail::updown_count(s.bits()), 4);
  const auto v = s2b(s, 8);
  EXPECT_EQ(v.code(), 50);
  // Mirror image rounds toward zero as well.
  BitStream m(std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0, 1, 1, 1});
  EXPECT_EQ(s2b(m, 8).code(), -51);
}

TEST(S2b, ExactRatiosDecodeExactly) {
  for (std::int64_t len : {1, 3, 255, 1000}) {
    for (std::int64_t ones = 0; ones <= len; ++ones) {
      const std::int64_t c = 2 * ones - len;
      const auto v = BipolarValue::from_ratio(c, len, 8);
      const double target = static_cast<double>(c) / static_cast<double>(len);
      // Nearest: no other code is strictly closer.
      for (int dz : {-1, 1}) {
        const int z = v.code() + dz;
        if (z < BipolarValue::min_code(8) || z > BipolarValue::max_code(8)) continue;
        EXPECT_GE(std::abs(BipolarValue::from_code(z, 8).bipolar() - target) + 1e-12, std::abs(v.bipolar() - target));
      }
    }
  }
}

TEST(B2s, WholePeriodRoundTripAllValues) {
  for (int z = -128; z <= 127; ++z) {
    LfsrGenerator gen(8, 1 + static_cast<Word>(z + 128) % 255);
    const auto v = BipolarValue::from_code(z, 8);
    EXPECT_EQ(s2b(b2s(v, gen, 255), 8), v);
    EXPECT_EQ(s2b(b2s(v, gen, 510), 8), v);
  }
}

TEST(B2s, OnesFractionWithinBernoulliBound) {
  LfsrGenerator gen(8, 11);
  const auto v = BipolarValue::from_code(0, 8);
  const std::size_t len = 100000;
  const auto s = b2s(v, gen, len);
  const double p = 128.0 / 255.0;
  EXPECT_LE(std::abs(s.unipolar_estimate() - p), 3.0 * std::sqrt(p * (1 - p) / len));
}

TEST(B2s, WidthMismatchRejected) {
  LfsrGenerator gen(6, 1);
  EXPECT_THROW((void)b2s(BipolarValue::from_code(0, 8), gen, 10), std::invalid_argument);
  LfsrGenerator g8(8, 1);
  EXPECT_THROW((void)b2s(BipolarValue::from_code(0, 8), g8, 0), std::invalid_argument);
}

// Exact expectations over independent, uniformly distributed comparator words.
TEST(Gates, XnorMultiplyExpectationExhaustive) {
  const int q = 4;
  const Word n = state_count(q);
  for (int za = -8; za <= 7; ++za) {
    for (int zb = -8; zb <= 7; ++zb) {
      const auto a = BipolarValue::from_code(za, q);
      const auto b = BipolarValue::from_code(zb, q);
      std::uint64_t ones = 0;
      for (Word wa = 1; wa <= n; ++wa) {
        for (Word wb = 1; wb <= n; ++wb) {
          const bool ba = wa <= a.offset();
          const bool bb = wb <= b.offset();
          ones += ba == bb ? 1 : 0;
        }
      }
      const double p = static_cast<double>(ones) / static_cast<double>(n * n);
      EXPECT_NEAR(2 * p - 1, a.bipolar() * b.bipolar(), 1e-12);
    }
  }
}

TEST(Gates, MuxAverageExpectationExhaustive) {
  const int q = 4;
  const Word n = state_count(q);
  for (int za = -8; za <= 7; ++za) {
    for (int zb = -8; zb <= 7; ++zb) {
      for (Word t = 0; t <= n; ++t) {
        const auto a = BipolarValue::from_code(za, q);
        const auto b = BipolarValue::from_code(zb, q);
        std::uint64_t ones = 0;
        for (Word wa = 1; wa <= n; ++wa)
          for (Word wb = 1; wb <= n; ++wb)
            for (Word ws = 1; ws <= n; ++ws) {
              const bool bit = ws <= t ? wa <= a.offset() : wb <= b.offset();
              ones += bit ? 1 : 0;
            }
        const double p = static_cast<double>(ones) / static_cast<double>(n * n * n);
        const double s = static_cast<double>(t) / static_cast<double>(n);
        ASSERT_NEAR(2 * p - 1, s * a.bipolar() + (1 - s) * b.bipolar(), 1e-12);
      }
    }
  }
}

TEST(Gates, EmpiricalLawsOnLongStreams) {
  const std::size_t len = 100000;
  const int q = 16;
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = BipolarValue::from_real(rng.uniform(-1, 1), q);
    const auto b = BipolarValue::from_real(rng.uniform(-1, 1), q);
    const double sel = rng.uniform();
    LfsrGenerator ga(q, 1 + static_cast<Word>(rng.below(65535)), 0);
    LfsrGenerator gb(q, 1 + static_cast<Word>(rng.below(65535)), 1);
    LfsrGenerator gs(q, 1 + static_cast<Word>(rng.below(65535)), 2);
    const auto sa = b2s(a, ga, len);
    const auto sb = b2s(b, gb, len);
    const auto ss = unipolar_select_stream(sel, gs, len);

    const double prod = a.bipolar() * b.bipolar();
    const double p_prod = (prod + 1) / 2;
    EXPECT_LE(std::abs(stoch_mult(sa, sb).unipolar_estimate() - p_prod), 3 * std::sqrt(p_prod * (1 - p_prod) / len));

    const double s = quantized_probability(sel, q);
    const double avg = s * a.bipolar() + (1 - s) * b.bipolar();
    const double p_avg = (avg + 1) / 2;
    EXPECT_LE(std::abs(stoch_mux_average(sa, sb, ss).unipolar_estimate() - p_avg),
              3 * std::sqrt(p_avg * (1 - p_avg) / len));
  }
}

TEST(Gates, NegateIsExact) {
  LfsrGenerator gen(8, 17);
  const auto s = b2s(BipolarValue::from_code(40, 8), gen, 1000);
  EXPECT_DOUBLE_EQ(stoch_negate(s).bipolar_estimate(), -s.bipolar_estimate());
  EXPECT_EQ(stoch_negate(stoch_negate(s)), s);
}

TEST(Gates, LengthMismatchRejected) {
  BitStream a(10), b(11);
  EXPECT_THROW((void)stoch_mult(a, b), std::invalid_argument);
  EXPECT_THROW((void)stoch_mux_average(a, a, b), std::invalid_argument);
}

TEST(Select, ThresholdQuantization) {
  EXPECT_EQ(probability_threshold(0.0, 8), 0U);
  EXPECT_EQ(probability_threshold(1.0, 8), 255U);
  EXPECT_EQ(probability_threshold(0.5, 8), 128U);  // round(127.5)
  EXPECT_THROW((void)probability_threshold(1.1, 8), std::out_of_range);
  LfsrGenerator gen(8, 1);
  EXPECT_EQ(unipolar_select_stream(1.0, gen, 300).ones(), 300U);
  EXPECT_EQ(unipolar_select_stream(0.0, gen, 300).ones(), 0U);
}
