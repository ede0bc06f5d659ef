#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sltdr/random.hpp"
#include "sltdr/stochastic.hpp"
#include "sltdr/tdr.hpp"

namespace sltdr {

inline constexpr double kDefaultRankTolerance = 1e-6;
inline constexpr double kDefaultGrNoise = 0.05;
// Node outputs live in [-1, 1]; singular values below this are roundoff.
inline constexpr double kRankAbsoluteFloor = 1e-9;

/// Number of singular values above max(rel_tol * sigma_max, kRankAbsoluteFloor).
[[nodiscard]] inline int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTolerance) {
  if (m.size() == 0) return 0;
  if (!m.allFinite()) throw std::invalid_argument("numerical_rank: non-finite entries");
  const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  const double largest = sigma.size() > 0 ? sigma(0) : 0.0;
  const double cutoff = std::max(rel_tol * largest, kRankAbsoluteFloor);
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  return rank;
}

namespace detail {

// Column j is the final state after probe j. The reservoir's delay line is
// cleared between probes; free-running LFSRs keep their phase across them.
[[nodiscard]] inline Eigen::MatrixXd final_state_matrix(const TdrConfig& cfg,
                                                        const std::vector<std::vector<double>>& probes) {
  Reservoir reservoir(cfg);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(cfg.nodes), static_cast<Eigen::Index>(probes.size()));
  for (std::size_t j = 0; j < probes.size(); ++j) {
    reservoir.reset_state();
    std::span<const double> last;
    for (double u : probes[j]) last = reservoir.step(u);
    for (std::size_t i = 0; i < last.size(); ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = last[i];
    }
  }
  return x;
}

[[nodiscard]] inline double quantized_uniform(Rng& rng, int width) {
  return BipolarValue::from_real(rng.uniform(-1.0, 1.0), width).bipolar();
}

}  // namespace detail

/// H i.i.d. uniform, quantized probe streams of length m.
[[nodiscard]] inline std::vector<std::vector<double>> kernel_quality_probes(std::size_t count, std::size_t m,
                                                                            int width, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> probes(count, std::vector<double>(m));
  for (auto& p : probes) {
    for (auto& u : p) u = detail::quantized_uniform(rng, width);
  }
  return probes;
}

/// One shared base stream plus i.i.d. uniform noise in [-eps, eps] per probe, clipped to [-1, 1].
[[nodiscard]] inline std::vector<std::vector<double>> generalization_probes(std::size_t count, std::size_t m,
                                                                            double noise, int width,
                                                                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> base(m);
  for (auto& u : base) u = rng.uniform(-1.0, 1.0);
  std::vector<std::vector<double>> probes(count, std::vector<double>(m));
  for (auto& p : probes) {
    for (std::size_t t = 0; t < m; ++t) {
      const double v = std::clamp(base[t] + rng.uniform(-noise, noise), -1.0, 1.0);
      p[t] = BipolarValue::from_real(v, width).bipolar();
    }
  }
  return probes;
}

/// Kernel quality: rank of the H x H final-state matrix under H random probe streams.
[[nodiscard]] inline int kernel_quality(const TdrConfig& cfg, std::size_t m, std::uint64_t seed,
                                        double rel_tol = kDefaultRankTolerance) {
  if (m == 0) throw std::invalid_argument("kernel_quality: probe length must be positive");
  return numerical_rank(detail::final_state_matrix(cfg, kernel_quality_probes(cfg.nodes, m, cfg.width, seed)),
                        rel_tol);
}

/// Generalization rank: the same rank when all probes are one stream plus small noise.
[[nodiscard]] inline int generalization_rank(const TdrConfig& cfg, std::size_t m, double noise_amplitude,
                                             std::uint64_t seed, double rel_tol = kDefaultRankTolerance) {
  if (m == 0) throw std::invalid_argument("generalization_rank: probe length must be positive");
  if (!(noise_amplitude > 0.0)) throw std::invalid_argument("generalization_rank: noise amplitude must be positive");
  return numerical_rank(
      detail::final_state_matrix(cfg, generalization_probes(cfg.nodes, m, noise_amplitude, cfg.width, seed)),
      rel_tol);
}

struct MetricRunResult {
  int kq = 0;
  int gr = 0;
};

/// A KQ/GR study at one parameter point, repeated over independent reservoirs.
struct MetricRun {
  std::size_t nodes = 50;
  std::size_t m = 50;
  std::size_t runs = 10;
  double rank_tolerance = kDefaultRankTolerance;
  double noise_amplitude = kDefaultGrNoise;
  std::vector<MetricRunResult> results;

  [[nodiscard]] double mean_kq() const { return mean([](const MetricRunResult& r) { return r.kq; }); }
  [[nodiscard]] double mean_gr() const { return mean([](const MetricRunResult& r) { return r.gr; }); }
  [[nodiscard]] double mean_difference() const {
    return mean([](const MetricRunResult& r) { return r.kq - r.gr; });
  }

 private:
  template <typename F>
  [[nodiscard]] double mean(F&& f) const {
    if (results.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : results) s += f(r);
    return s / static_cast<double>(results.size());
  }
};

/// Seeds for run r: reservoir weights come from run_seed, probes from probe_seed.
[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t master, std::size_t run) {
  return derive_seed(master, 0x72756eULL, run);
}
[[nodiscard]] inline std::uint64_t probe_seed(std::uint64_t master, std::size_t run) {
  return derive_seed(master, 0x70726f6265ULL, run);
}

/// KQ and GR for one run of a parameter point.
[[nodiscard]] inline MetricRunResult measure_capacity_run(ReservoirParams params, std::size_t m, double noise,
                                                          double rel_tol, std::uint64_t master, std::size_t run) {
  params.master_seed = run_seed(master, run);
  const TdrConfig cfg = make_tdr_config(params);
  const std::uint64_t seed = probe_seed(master, run);
  return MetricRunResult{kernel_quality(cfg, m, seed, rel_tol),
                         generalization_rank(cfg, m, noise, derive_seed(seed, 1), rel_tol)};
}

[[nodiscard]] inline MetricRun measure_capacity(const ReservoirParams& params, std::size_t m, std::size_t runs,
                                                std::uint64_t master, double noise = kDefaultGrNoise,
                                                double rel_tol = kDefaultRankTolerance) {
  MetricRun out;
  out.nodes = params.nodes;
  out.m = m;
  out.runs = runs;
  out.rank_tolerance = rel_tol;
  out.noise_amplitude = noise;
  for (std::size_t r = 0; r < runs; ++r) out.results.push_back(measure_capacity_run(params, m, noise, rel_tol, master, r));
  return out;
}

}  // namespace sltdr
