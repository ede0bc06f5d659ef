#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sltdr {

/// Linear readout y_hat = X w with identity output function.
struct ReadoutModel {
  Eigen::VectorXd weights;  // length H, or H + 1 with the bias column last
  double lambda = 1e-6;
  bool uses_bias_column = true;

  [[nodiscard]] Eigen::Index input_dimension() const noexcept {
    return weights.size() - (uses_bias_column ? 1 : 0);
  }
};

inline constexpr double kDefaultRidgeLambda = 1e-6;

namespace detail {

[[nodiscard]] inline Eigen::MatrixXd with_bias_column(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

}  // namespace detail

/// Regularized least squares: w = (X^T X + lambda I)^{-1} X^T Y, by factorization.
///
/// With lambda = 0 a rank-deficient X^T X raises std::domain_error.
[[nodiscard]] inline ReadoutModel ridge_train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                              double lambda = kDefaultRidgeLambda, bool bias_column = true) {
  if (x.rows() == 0) throw std::invalid_argument("ridge_train: no training rows");
  if (x.rows() != y.size()) throw std::invalid_argument("ridge_train: X and Y row counts differ");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("ridge_train: lambda must be >= 0");
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("ridge_train: non-finite entries");

  const Eigen::MatrixXd design = bias_column ? detail::with_bias_column(x) : x;
  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = design.transpose() * y;

  ReadoutModel model;
  model.lambda = lambda;
  model.uses_bias_column = bias_column;
  if (lambda > 0.0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("ridge_train: factorization failed");
    model.weights = ldlt.solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
    if (qr.rank() < normal.rows()) {
      throw std::domain_error("ridge_train: X^T X has rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(normal.rows()) + " and lambda = 0");
    }
    model.weights = qr.solve(rhs);
  }
  return model;
}

[[nodiscard]] inline Eigen::VectorXd predict(const ReadoutModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.input_dimension()) {
    throw std::invalid_argument("predict: state dimension " + std::to_string(x.cols()) +
                                " does not match readout dimension " + std::to_string(model.input_dimension()));
  }
  Eigen::VectorXd y = x * model.weights.head(x.cols());
  if (model.uses_bias_column) y.array() += model.weights(x.cols());
  return y;
}

/// sum (y - y_hat)^2 / sum (y - mean_train)^2.
[[nodiscard]] inline double nmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, double train_mean) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("nmse: length mismatch");
  if (y.size() == 0) throw std::invalid_argument("nmse: empty targets");
  const double denom = (y.array() - train_mean).square().sum();
  if (!(denom > 0.0)) throw std::domain_error("nmse: targets have zero variance about the training mean");
  return (y - y_hat).squaredNorm() / denom;
}

/// Fraction of steps where (y_hat >= threshold) agrees with the 0/1 label.
[[nodiscard]] inline double classification_accuracy(const Eigen::VectorXd& labels, const Eigen::VectorXd& y_hat,
                                                     double threshold = 0.5) {
  if (labels.size() != y_hat.size()) throw std::invalid_argument("classification_accuracy: length mismatch");
  if (labels.size() == 0) throw std::invalid_argument("classification_accuracy: empty input");
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) throw std::invalid_argument("classification_accuracy: labels must be 0 or 1");
    const bool predicted = y_hat(i) >= threshold;
    if (predicted == (labels(i) == 1.0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace sltdr
