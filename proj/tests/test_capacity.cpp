#include <gtest/gtest.h>

#include "sltdr/capacity.hpp"

using namespace sltdr;

namespace {

ReservoirParams ideal_params(std::size_t h, double alpha, double gamma) {
  ReservoirParams p;
  p.nodes = h;
  p.alpha = alpha;
  p.gamma = gamma;
  p.backend = Backend::ideal_exact;
  return p;
}

}  // namespace

TEST(NumericalRank, TrivialMatrices) {
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Zero(5, 5)), 0);
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Identity(5, 5)), 5);
  EXPECT_EQ(numerical_rank(Eigen::MatrixXd(0, 0)), 0);
}

TEST(NumericalRank, OuterProductConstruction) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(5), b(5), c(5), d(5);
    for (auto* v : {&a, &b, &c, &d})
      for (Eigen::Index i = 0; i < 5; ++i) (*v)(i) = rng.uniform(-1, 1);
    const Eigen::MatrixXd m = a * b.transpose() + c * d.transpose();
    EXPECT_EQ(numerical_rank(m, 1e-6), 2);
  }
}

TEST(NumericalRank, RejectsNonFinite) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(0, 1) = std::nan("");
  EXPECT_THROW((void)numerical_rank(m), std::invalid_argument);
}

TEST(KernelQuality, ZeroWithoutInputCoupling) {
  const auto cfg = make_tdr_config(ideal_params(20, 0.0, 2.0));
  EXPECT_EQ(kernel_quality(cfg, 30, 1), 0);
  EXPECT_EQ(generalization_rank(cfg, 30, 0.05, 2), 0);
}

TEST(KernelQuality, FullRankForStrongNonlinearity) {
  const auto cfg = make_tdr_config(ideal_params(20, 0.5, 8.0));
  EXPECT_EQ(kernel_quality(cfg, 50, 3), 20);
}

TEST(KernelQuality, DuplicateProbesLoseRank) {
  const auto cfg = make_tdr_config(ideal_params(3, 0.5, 4.0));
  auto probes = kernel_quality_probes(3, 20, cfg.width, 4);
  probes[2] = probes[0];
  EXPECT_LT(numerical_rank(detail::final_state_matrix(cfg, probes)), 3);
  EXPECT_EQ(numerical_rank(detail::final_state_matrix(cfg, kernel_quality_probes(3, 20, cfg.width, 4))), 3);
}

TEST(GeneralizationRank, VanishingNoiseGivesRankOne) {
  const auto cfg = make_tdr_config(ideal_params(20, 0.5, 2.0));
  EXPECT_EQ(generalization_rank(cfg, 30, 1e-12, 5), 1);
}

TEST(GeneralizationRank, RequiresPositiveNoise) {
  const auto cfg = make_tdr_config(ideal_params(5, 0.5, 2.0));
  EXPECT_THROW((void)generalization_rank(cfg, 10, 0.0, 1), std::invalid_argument);
  EXPECT_THROW((void)kernel_quality(cfg, 0, 1), std::invalid_argument);
}

TEST(Probes, ShapesAndRange) {
  const auto kq = kernel_quality_probes(4, 7, 8, 1);
  ASSERT_EQ(kq.size(), 4U);
  for (const auto& p : kq) {
    ASSERT_EQ(p.size(), 7U);
    for (double u : p) EXPECT_TRUE(is_representable(u, 8));
  }
  const auto gr = generalization_probes(4, 7, 0.05, 8, 1);
  for (std::size_t t = 0; t < 7; ++t) {
    for (const auto& p : gr) EXPECT_LE(std::abs(p[t] - gr[0][t]), 0.1 + 2.0 / 255.0);
  }
}

// Averaged over runs, near-identical inputs span no more than distinct ones.
TEST(Capacity, GeneralizationRankBelowKernelQualityOnAverage) {
  for (double alpha : {0.2, 0.5}) {
    const auto run = measure_capacity(ideal_params(20, alpha, 2.0), 30, 10, 17);
    ASSERT_EQ(run.results.size(), 10U);
    for (const auto& r : run.results) {
      EXPECT_GE(r.kq, 0);
      EXPECT_LE(r.kq, 20);
      EXPECT_GE(r.gr, 0);
      EXPECT_LE(r.gr, 20);
    }
    EXPECT_LE(run.mean_gr(), run.mean_kq());
    EXPECT_NEAR(run.mean_difference(), run.mean_kq() - run.mean_gr(), 1e-12);
  }
}

TEST(Capacity, Deterministic) {
  auto p = ideal_params(10, 0.3, 2.0);
  p.backend = Backend::stochastic;
  p.stream_length = 30;
  const auto a = measure_capacity(p, 20, 3, 99);
  const auto b = measure_capacity(p, 20, 3, 99);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.results[i].kq, b.results[i].kq);
    EXPECT_EQ(a.results[i].gr, b.results[i].gr);
  }
}
