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

#include "sltdr/random.hpp"
#include "sltdr/readout.hpp"
#include "sltdr/tdr.hpp"

namespace sltdr {

/// NARMA10 inputs and targets. y[p] is the target after consuming u[p]:
/// y[p] = 0.3 y[p-1] + 0.05 y[p-1] sum_{k=0..9} y[p-1-k] + 1.5 u[p] u[p-9] + 0.1,
/// with y = 0 over the first ten steps.
struct NarmaSequence {
  std::vector<double> u;
  std::vector<double> y;
  int regenerations = 0;
};

inline constexpr std::size_t kNarmaOrder = 10;
inline constexpr double kNarmaDivergence = 10.0;

/// Runs the recurrence on given inputs. Returns false if |y| exceeds the divergence bound.
inline bool narma10_targets(std::span<const double> u, std::vector<double>& y) {
  y.assign(u.size(), 0.0);
  for (std::size_t p = kNarmaOrder; p < u.size(); ++p) {
    const double prev = y[p - 1];
    double window = 0.0;
    for (std::size_t k = 0; k < kNarmaOrder; ++k) window += y[p - 1 - k];
    y[p] = 0.3 * prev + 0.05 * prev * window + 1.5 * u[p] * u[p - 9] + 0.1;
    if (!std::isfinite(y[p]) || std::abs(y[p]) > kNarmaDivergence) return false;
  }
  return true;
}

[[nodiscard]] inline NarmaSequence narma10_generate(std::size_t m, std::uint64_t seed) {
  if (m < 20) throw std::invalid_argument("narma10_generate: length must be at least 20");
  NarmaSequence seq;
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, 0x6e61726d61ULL, attempt));
    seq.u.resize(m);
    for (auto& v : seq.u) v = rng.uniform(0.0, 0.5);
    if (narma10_targets(seq.u, seq.y)) break;
    ++seq.regenerations;
    if (attempt > 1000) throw std::runtime_error("narma10_generate: every draw diverged");
  }
  return seq;
}

/// Sine segments interposed into a square wave, one period per segment.
struct SineSquareSequence {
  std::vector<double> signal;
  std::vector<double> labels;  // 0 = sine, 1 = square
  std::vector<std::size_t> segment_starts;
};

struct SineSquareParams {
  std::size_t period = 10;
  double square_probability = 0.5;
};

[[nodiscard]] inline SineSquareSequence sine_square_generate(std::size_t m, std::uint64_t seed,
                                                             SineSquareParams params = {}) {
  if (m == 0) throw std::invalid_argument("sine_square_generate: length must be positive");
  if (params.period < 2) throw std::invalid_argument("sine_square_generate: period must be at least 2");
  Rng rng(derive_seed(seed, 0x73717561ULL));
  SineSquareSequence seq;
  seq.signal.reserve(m);
  seq.labels.reserve(m);
  const auto period = static_cast<double>(params.period);
  while (seq.signal.size() < m) {
    seq.segment_starts.push_back(seq.signal.size());
    const bool square = rng.bernoulli(params.square_probability);
    for (std::size_t t = 0; t < params.period && seq.signal.size() < m; ++t) {
      double v = 0.0;
      if (square) {
        v = 2 * t < params.period ? 1.0 : -1.0;
      } else {
        v = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
      }
      seq.signal.push_back(v);
      seq.labels.push_back(square ? 1.0 : 0.0);
    }
  }
  return seq;
}

struct TaskParams {
  std::size_t train = 1000;
  std::size_t test = 1000;
  std::size_t washout = 50;
  double lambda = kDefaultRidgeLambda;
  std::uint64_t seed = 1;
  bool bias_column = true;
};

struct EvaluationResult {
  double value = 0.0;  // NMSE or accuracy
  double train_mean = 0.0;
  int regenerations = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::string input_scaling;
};

/// Splits a state matrix and targets contiguously into train and test, dropping
/// the first `washout` rows of each split.
struct SplitData {
  Eigen::MatrixXd x_train, x_test;
  Eigen::VectorXd y_train, y_test;
  double train_mean = 0.0;  // over the whole training split
};

[[nodiscard]] inline SplitData split_train_test(const StateMatrix& x, std::span<const double> y,
                                                const TaskParams& task) {
  if (task.train <= task.washout || task.test <= task.washout) {
    throw std::invalid_argument("train and test lengths must exceed the washout");
  }
  if (static_cast<std::size_t>(x.rows()) != task.train + task.test || y.size() != task.train + task.test) {
    throw std::invalid_argument("state matrix does not cover train + test");
  }
  SplitData d;
  const auto w = static_cast<Eigen::Index>(task.washout);
  const auto tr = static_cast<Eigen::Index>(task.train);
  const auto te = static_cast<Eigen::Index>(task.test);
  d.x_train = x.middleRows(w, tr - w);
  d.x_test = x.middleRows(tr + w, te - w);
  const Eigen::Map<const Eigen::VectorXd> all(y.data(), static_cast<Eigen::Index>(y.size()));
  d.y_train = all.segment(w, tr - w);
  d.y_test = all.segment(tr + w, te - w);
  d.train_mean = all.head(tr).mean();
  return d;
}

/// NARMA10 regression: one continuous sequence, rescaled u' = 4u - 1 for the reservoir.
[[nodiscard]] inline EvaluationResult evaluate_regression(const TdrConfig& cfg, const TaskParams& task) {
  const NarmaSequence seq = narma10_generate(task.train + task.test, task.seed);
  std::vector<double> inputs(seq.u.size());
  for (std::size_t p = 0; p < inputs.size(); ++p) inputs[p] = std::clamp(4.0 * seq.u[p] - 1.0, -1.0, 1.0);
  const StateMatrix x = run_reservoir(inputs, cfg);
  const SplitData d = split_train_test(x, seq.y, task);
  const ReadoutModel model = ridge_train(d.x_train, d.y_train, task.lambda, task.bias_column);
  EvaluationResult r;
  r.value = nmse(d.y_test, predict(model, d.x_test), d.train_mean);
  r.train_mean = d.train_mean;
  r.regenerations = seq.regenerations;
  r.train_rows = static_cast<std::size_t>(d.x_train.rows());
  r.test_rows = static_cast<std::size_t>(d.x_test.rows());
  r.input_scaling = "u' = 4u - 1";
  return r;
}

/// Sine/square discrimination with 0/1 targets and a 0.5 decision threshold.
[[nodiscard]] inline EvaluationResult evaluate_classification(const TdrConfig& cfg, const TaskParams& task,
                                                              SineSquareParams wave = {}) {
  const SineSquareSequence seq = sine_square_generate(task.train + task.test, task.seed, wave);
  const StateMatrix x = run_reservoir(seq.signal, cfg);
  const SplitData d = split_train_test(x, seq.labels, task);
  const ReadoutModel model = ridge_train(d.x_train, d.y_train, task.lambda, task.bias_column);
  EvaluationResult r;
  r.value = classification_accuracy(d.y_test, predict(model, d.x_test), 0.5);
  r.train_mean = d.train_mean;
  r.train_rows = static_cast<std::size_t>(d.x_train.rows());
  r.test_rows = static_cast<std::size_t>(d.x_test.rows());
  r.input_scaling = "identity";
  return r;
}

}  // namespace sltdr
