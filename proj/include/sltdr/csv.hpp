#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sltdr/bernstein.hpp"
#include "sltdr/tdr.hpp"

namespace sltdr::csv {

/// Twelve significant digits, the precision of every number we emit.
[[nodiscard]] inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Shortest decimal that reads back as the same double.
[[nodiscard]] inline std::string format_exact(double x) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// Stream length column: "inf" for the ideal backends.
[[nodiscard]] inline std::string stream_length_label(Backend b, std::size_t length) {
  return b == Backend::stochastic ? std::to_string(length) : std::string("inf");
}

inline void write_row(std::ostream& os, std::span<const std::string> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

inline void write_states(std::ostream& os, const StateMatrix& x) {
  os << "step";
  for (Eigen::Index i = 0; i < x.cols(); ++i) os << ",x" << (i + 1);
  os << '\n';
  for (Eigen::Index p = 0; p < x.rows(); ++p) {
    os << p;
    for (Eigen::Index i = 0; i < x.cols(); ++i) os << ',' << format_double(x(p, i));
    os << '\n';
  }
}

inline void write_indexed(std::ostream& os, std::string_view index_name, std::string_view value_name,
                          std::span<const double> values) {
  os << index_name << ',' << value_name << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) os << i << ',' << format_double(values[i]) << '\n';
}

inline void write_weights(std::ostream& os, std::span<const double> w) { write_indexed(os, "index", "weight", w); }
inline void write_biases(std::ostream& os, std::span<const double> b) { write_indexed(os, "index", "bias", b); }
inline void write_coefficients(std::ostream& os, const BernsteinSpec& spec) {
  write_indexed(os, "k", "beta", spec.beta);
}

/// `step,u,y`; y may be empty for input-only sequences.
inline void write_sequence(std::ostream& os, std::span<const double> u, std::span<const double> y) {
  os << "step,u,y\n";
  for (std::size_t p = 0; p < u.size(); ++p) {
    os << p << ',' << format_double(u[p]) << ',' << (p < y.size() ? format_double(y[p]) : std::string()) << '\n';
  }
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};

/// Summed in index order so the result does not depend on scheduling.
[[nodiscard]] inline MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

inline constexpr std::string_view kMetricsHeader = "alpha,gamma,L,policy,run,kq,gr";
inline constexpr std::string_view kBenchmarkHeader = "task,backend,H,alpha,gamma,L,n,run,metric,value";

}  // namespace sltdr::csv
