#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sltdr/stochastic.hpp"

namespace sltdr {

[[nodiscard]] inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

[[nodiscard]] inline double int_power(double base, int exponent) noexcept {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

/// b_{k,n}(u) = C(n,k) u^k (1-u)^(n-k).
[[nodiscard]] inline double bernstein_basis(int k, int n, double u) {
  if (n < 0 || k < 0 || k > n) {
    throw std::invalid_argument("bernstein_basis: index " + std::to_string(k) +
                                " invalid for degree " + std::to_string(n));
  }
  if (!(u >= 0.0 && u <= 1.0)) throw std::out_of_range("bernstein_basis: u outside [0, 1]");
  return binomial(n, k) * int_power(u, k) * int_power(1.0 - u, n - k);
}

/// Sine activation sin(gamma * s) shifted and scaled onto the unit square.
///
/// f_bar(s_bar) = (sin(gamma * delta_s * (s_bar - 0.5)) - f_min) / (f_max - f_min),
/// with the extrema taken over [-delta_s / 2, delta_s / 2].
struct TransformedActivation {
  double gamma = 2.0;
  double delta_s = 2.0;
  double f_min = -1.0;
  double f_max = 1.0;

  /// Untransformed activation f(s) = sin(gamma * s).
  [[nodiscard]] double raw(double s) const noexcept { return std::sin(gamma * s); }

  /// A constant activation (gamma = 0) maps to the midpoint 0.5.
  [[nodiscard]] double operator()(double s_bar) const noexcept {
    if (f_max == f_min) return 0.5;
    return (raw(delta_s * (s_bar - 0.5)) - f_min) / (f_max - f_min);
  }

  /// The same map in bipolar terms: node input s in [-1, 1] to 2 f_bar((s + 1) / 2) - 1.
  [[nodiscard]] double bipolar(double s) const noexcept { return 2.0 * (*this)((s + 1.0) / 2.0) - 1.0; }
};

[[nodiscard]] inline TransformedActivation transform_activation(double gamma, double delta_s) {
  if (!std::isfinite(gamma)) throw std::invalid_argument("transform_activation: gamma must be finite");
  if (!(delta_s > 0.0) || !std::isfinite(delta_s)) {
    throw std::invalid_argument("transform_activation: delta_s must be positive");
  }
  // sin is odd, so its range over a symmetric interval is [-m, m].
  const double reach = std::abs(gamma) * delta_s / 2.0;
  const double peak = reach >= std::numbers::pi / 2.0 ? 1.0 : std::sin(reach);
  return TransformedActivation{gamma, delta_s, -peak, peak};
}

/// Degree-n Bernstein polynomial sum_k beta_k b_{k,n}.
///
/// Only coefficients in [0, 1] can be realized as stochastic streams; see
/// in_unit_interval().
struct BernsteinSpec {
  int degree = 0;
  std::vector<double> beta;
  // Describes the fitted sine when the spec came from fit_bernstein_coeffs().
  double source_gamma = 0.0;
  double source_delta_s = 0.0;

  [[nodiscard]] double operator()(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::out_of_range("Bernstein evaluation outside [0, 1]");
    double sum = 0.0;
    for (int k = 0; k <= degree; ++k) sum += beta[static_cast<std::size_t>(k)] * bernstein_basis(k, degree, u);
    return sum;
  }

  [[nodiscard]] bool in_unit_interval() const noexcept {
    return std::all_of(beta.begin(), beta.end(), [](double b) { return b >= 0.0 && b <= 1.0; });
  }
};

/// Power-form value sum_i a_i u^i (Horner).
[[nodiscard]] inline double power_eval(std::span<const double> a, double u) noexcept {
  double acc = 0.0;
  for (std::size_t i = a.size(); i-- > 0;) acc = acc * u + a[i];
  return acc;
}

enum class Representability { report_only, required };

/// Degree-n Bernstein coefficients of a power-form polynomial:
/// beta_k = sum_{i<=k} C(k,i) / C(n,i) * a_i.
///
/// With Representability::required, coefficients outside [0, 1] raise
/// std::domain_error naming the first offending index instead of being clipped.
[[nodiscard]] inline BernsteinSpec power_to_bernstein(std::span<const double> a, int degree,
                                                      Representability mode = Representability::report_only) {
  if (degree < 0) throw std::invalid_argument("power_to_bernstein: negative degree");
  if (a.size() > static_cast<std::size_t>(degree) + 1) {
    throw std::invalid_argument("power_to_bernstein: polynomial degree exceeds target degree");
  }
  BernsteinSpec spec;
  spec.degree = degree;
  spec.beta.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  for (int k = 0; k <= degree; ++k) {
    double sum = 0.0;
    for (int i = 0; i <= k && static_cast<std::size_t>(i) < a.size(); ++i) {
      sum += binomial(k, i) / binomial(degree, i) * a[static_cast<std::size_t>(i)];
    }
    spec.beta[static_cast<std::size_t>(k)] = sum;
  }
  if (mode == Representability::required) {
    for (std::size_t k = 0; k < spec.beta.size(); ++k) {
      if (spec.beta[k] < 0.0 || spec.beta[k] > 1.0) {
        throw std::domain_error("power_to_bernstein: beta_" + std::to_string(k) + " = " +
                                std::to_string(spec.beta[k]) + " lies outside [0, 1]");
      }
    }
  }
  return spec;
}

[[nodiscard]] inline BernsteinSpec power_to_bernstein(std::span<const double> a) {
  if (a.empty()) throw std::invalid_argument("power_to_bernstein: empty polynomial");
  return power_to_bernstein(a, static_cast<int>(a.size()) - 1);
}

struct FitReport {
  double objective = 0.0;            // grid mean of the squared error at the solution
  double clipped_unconstrained = 0.0;  // same objective at the clipped least-squares start
  int iterations = 0;
};

namespace detail {

[[nodiscard]] inline double fit_objective(const Eigen::MatrixXd& basis, const Eigen::VectorXd& target,
                                          const Eigen::VectorXd& beta) {
  return (basis * beta - target).squaredNorm() / static_cast<double>(target.size());
}

}  // namespace detail

/// Box-constrained least-squares fit of a degree-n Bernstein polynomial.
///
/// Minimizes the uniform-grid discretization of the integrated squared error
/// subject to every beta_k in [0, 1]. Starts from the clipped unconstrained
/// solution and runs projected gradient descent (step 1/Lipschitz) until the
/// objective changes by less than 1e-10, then re-solves exactly on the free
/// coordinates of the final active set when that improves the objective.
template <typename F>
[[nodiscard]] BernsteinSpec fit_bernstein_coeffs(F&& target, int degree, std::size_t grid_size,
                                                 FitReport* report = nullptr) {
  if (degree < 1) throw std::invalid_argument("fit_bernstein_coeffs: degree must be >= 1");
  if (grid_size < 10 * (static_cast<std::size_t>(degree) + 1)) {
    throw std::invalid_argument("fit_bernstein_coeffs: grid_size must be at least 10 (n + 1)");
  }
  const auto g = static_cast<Eigen::Index>(grid_size);
  const Eigen::Index m = degree + 1;
  Eigen::MatrixXd basis(g, m);
  Eigen::VectorXd y(g);
  for (Eigen::Index i = 0; i < g; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(g - 1);
    y(i) = target(u);
    for (Eigen::Index k = 0; k < m; ++k) basis(i, k) = bernstein_basis(static_cast<int>(k), degree, u);
  }

  const auto clip = [](Eigen::VectorXd v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = std::clamp(v(k), 0.0, 1.0);
    return v;
  };

  Eigen::VectorXd beta = clip(basis.colPivHouseholderQr().solve(y));
  const double start_objective = detail::fit_objective(basis, y, beta);

  const Eigen::MatrixXd gram = basis.transpose() * basis;
  const Eigen::VectorXd rhs = basis.transpose() * y;
  const double lipschitz =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / lipschitz;

  double objective = start_objective;
  int iterations = 0;
  constexpr int kMaxIterations = 200000;
  constexpr double kTolerance = 1e-10;
  while (iterations < kMaxIterations) {
    ++iterations;
    const Eigen::VectorXd grad = gram * beta - rhs;
    Eigen::VectorXd next = clip(beta - step * grad);
    const double next_objective = detail::fit_objective(basis, y, next);
    beta = std::move(next);
    const double change = objective - next_objective;
    objective = next_objective;
    if (std::abs(change) < kTolerance) break;
  }

  // Exact solve on the coordinates not pinned at a bound.
  {
    const Eigen::VectorXd grad = gram * beta - rhs;
    std::vector<Eigen::Index> free;
    Eigen::VectorXd fixed = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const bool at_low = beta(k) <= 0.0 && grad(k) > 0.0;
      const bool at_high = beta(k) >= 1.0 && grad(k) < 0.0;
      if (at_low || at_high) {
        fixed(k) = beta(k);
      } else {
        free.push_back(k);
      }
    }
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd sub(g, nf);
      for (Eigen::Index j = 0; j < nf; ++j) sub.col(j) = basis.col(free[static_cast<std::size_t>(j)]);
      const Eigen::VectorXd residual_target = y - basis * fixed;
      const Eigen::VectorXd solved = sub.colPivHouseholderQr().solve(residual_target);
      Eigen::VectorXd candidate = fixed;
      bool feasible = true;
      for (Eigen::Index j = 0; j < nf; ++j) {
        const double v = solved(j);
        if (v < 0.0 || v > 1.0) feasible = false;
        candidate(free[static_cast<std::size_t>(j)]) = v;
      }
      if (feasible) {
        const double candidate_objective = detail::fit_objective(basis, y, candidate);
        if (candidate_objective <= objective) {
          beta = candidate;
          objective = candidate_objective;
        }
      }
    }
  }

  if (report != nullptr) *report = FitReport{objective, start_objective, iterations};
  BernsteinSpec spec;
  spec.degree = degree;
  spec.beta.assign(beta.data(), beta.data() + beta.size());
  return spec;
}

/// Fit to the transformed sine; records gamma and delta_s on the result.
[[nodiscard]] inline BernsteinSpec fit_bernstein_coeffs(const TransformedActivation& f, int degree,
                                                        std::size_t grid_size, FitReport* report = nullptr) {
  auto spec = fit_bernstein_coeffs([&f](double u) { return f(u); }, degree, grid_size, report);
  spec.source_gamma = f.gamma;
  spec.source_delta_s = f.delta_s;
  return spec;
}

/// Copy j is s delayed (cyclically rotated) by j bits: copy_j[r] = s[(r - j) mod L].
///
/// Rotations are taken modulo L, so with L <= n some copies coincide.
[[nodiscard]] inline std::vector<BitStream> make_independent_copies(const BitStream& s, int count) {
  if (count < 1) throw std::invalid_argument("make_independent_copies: count must be >= 1");
  if (s.length() == 0) throw std::invalid_argument("make_independent_copies: empty stream");
  const std::size_t len = s.length();
  std::vector<BitStream> copies;
  copies.reserve(static_cast<std::size_t>(count));
  auto src = s.bits();
  for (int j = 0; j < count; ++j) {
    BitStream c(len);
    auto dst = c.bits();
    const std::size_t shift = static_cast<std::size_t>(j) % len;
    std::copy(src.begin(), src.end() - static_cast<std::ptrdiff_t>(shift),
              dst.begin() + static_cast<std::ptrdiff_t>(shift));
    std::copy(src.end() - static_cast<std::ptrdiff_t>(shift), src.end(), dst.begin());
    copies.push_back(std::move(c));
  }
  return copies;
}

namespace detail {

// sum[r] = number of ones at position r across the rotations 0..count-1 of s.
inline void rotation_sum_into(std::span<const std::uint8_t> s, int count, std::span<std::uint8_t> sum) noexcept {
  const std::size_t len = s.size();
  std::copy(s.begin(), s.end(), sum.begin());
  for (int j = 1; j < count; ++j) {
    const std::size_t shift = static_cast<std::size_t>(j) % len;
    for (std::size_t r = shift; r < len; ++r) sum[r] = static_cast<std::uint8_t>(sum[r] + s[r - shift]);
    for (std::size_t r = 0; r < shift; ++r) sum[r] = static_cast<std::uint8_t>(sum[r] + s[r + len - shift]);
  }
}

// out[r] = bit V[r] of coefficient_bits[r], where bit k of coefficient_bits[r]
// is bit r of the beta_k stream.
inline void select_into(std::span<const std::uint8_t> sum, std::span<const std::uint32_t> coefficient_bits,
                        std::span<std::uint8_t> out) noexcept {
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = static_cast<std::uint8_t>((coefficient_bits[r] >> sum[r]) & 1U);
  }
}

}  // namespace detail

/// Adder + multiplexer Bernstein evaluator.
///
/// At each position r the adder counts the ones across the n copies, and the
/// count selects which coefficient stream supplies output bit r.
[[nodiscard]] inline BitStream stochastic_bernstein_eval(std::span<const BitStream> copies,
                                                         std::span<const BitStream> beta_streams) {
  if (copies.empty()) throw std::invalid_argument("stochastic_bernstein_eval: no input copies");
  if (beta_streams.size() != copies.size() + 1) {
    throw std::invalid_argument("stochastic_bernstein_eval: need n + 1 coefficient streams for n copies");
  }
  if (copies.size() > 31) throw std::invalid_argument("stochastic_bernstein_eval: degree above 31");
  const std::size_t len = copies.front().length();
  for (const auto& c : copies) detail::require_same_length(len, c.length(), "stochastic_bernstein_eval");
  for (const auto& b : beta_streams) detail::require_same_length(len, b.length(), "stochastic_bernstein_eval");

  BitStream out(len);
  auto dst = out.bits();
  for (std::size_t r = 0; r < len; ++r) {
    std::size_t v = 0;
    for (const auto& c : copies) v += c.bits()[r];
    dst[r] = beta_streams[v].bits()[r];
  }
  return out;
}

}  // namespace sltdr
