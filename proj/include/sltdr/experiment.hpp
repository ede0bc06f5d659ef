#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sltdr/benchmarks.hpp"
#include "sltdr/capacity.hpp"
#include "sltdr/csv.hpp"
#include "sltdr/parallel.hpp"
#include "sltdr/tdr.hpp"

#ifndef SLTDR_VERSION
#define SLTDR_VERSION "unknown"
#endif

namespace sltdr {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Bad flag, bad file key or bad value; the message names the offending token.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string command;  // fit-activation | metrics | bench | simulate
  std::string task;     // bench only: narma10 | sinesquare

  std::vector<std::size_t> H{50};
  std::vector<double> alpha{0.2};
  std::vector<double> gamma{2.0};
  std::vector<std::size_t> L{100};
  std::size_t tau = 0;  // 0 selects H + 1
  double delta_s = 2.0;
  int degree = 5;
  int q = 8;
  std::uint64_t seed = 1;
  std::size_t runs = 10;
  Backend backend = Backend::stochastic;
  ReseedPolicy reseed = ReseedPolicy::per_node;
  bool random_bias = false;

  double lambda = kDefaultRidgeLambda;
  std::size_t washout = 50;
  std::size_t train = 1000;
  std::size_t test = 1000;
  std::size_t period = 10;
  double p_square = 0.5;

  std::size_t m = 50;
  double noise = kDefaultGrNoise;
  double rank_tol = kDefaultRankTolerance;

  std::size_t grid_size = 1001;
  std::size_t steps = 100;
  std::string input;

  std::string out = "out";
  std::size_t jobs = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Expands "v", "a,b,c" or "start:step:stop" (inclusive) into values.
[[nodiscard]] inline std::vector<double> parse_grid(const std::string& token, const std::string& key) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw ConfigError("--" + key + ": malformed value '" + s + "'");
    }
    return v;
  };
  std::vector<double> out;
  std::stringstream list(token);
  std::string item;
  while (std::getline(list, item, ',')) {
    if (item.empty()) throw ConfigError("--" + key + ": empty entry in '" + token + "'");
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(number(item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos || item.find(':', c2 + 1) != std::string::npos) {
      throw ConfigError("--" + key + ": range '" + item + "' must be start:step:stop");
    }
    const double start = number(item.substr(0, c1));
    const double step = number(item.substr(c1 + 1, c2 - c1 - 1));
    const double stop = number(item.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) throw ConfigError("--" + key + ": empty or unbounded range '" + item + "'");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1000000) throw ConfigError("--" + key + ": range '" + item + "' is too long");
    for (std::size_t k = 0; k < count; ++k) {
      // Round through 12 digits so 0:0.1:1 yields 0.3 rather than 0.30000000000000004.
      out.push_back(std::strtod(csv::format_double(start + static_cast<double>(k) * step).c_str(), nullptr));
    }
  }
  if (out.empty()) throw ConfigError("--" + key + ": empty grid");
  return out;
}

namespace detail {

[[nodiscard]] inline std::vector<double> expand_all(const std::vector<std::string>& tokens, const std::string& key) {
  std::vector<double> out;
  for (const auto& t : tokens) {
    for (double v : parse_grid(t, key)) out.push_back(v);
  }
  return out;
}

[[nodiscard]] inline std::vector<std::size_t> expand_counts(const std::vector<std::string>& tokens,
                                                            const std::string& key) {
  std::vector<std::size_t> out;
  for (double v : expand_all(tokens, key)) {
    if (v < 1.0 || v != std::floor(v) || v > 1e12) {
      throw ConfigError("--" + key + ": '" + csv::format_double(v) + "' is not a positive integer");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

template <typename T>
[[nodiscard]] std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += csv::format_exact(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

struct RawGrids {
  std::vector<std::string> H, alpha, gamma, L;
  std::string backend, reseed;
};

inline void add_options(CLI::App& app, ExperimentConfig& c, RawGrids& raw) {
  app.add_option("--H,--H-grid", raw.H, "Virtual node counts")->delimiter(',');
  app.add_option("--alpha,--alpha-grid", raw.alpha, "Input mixing probabilities")->delimiter(',');
  app.add_option("--gamma,--gamma-grid", raw.gamma, "Activation frequencies")->delimiter(',');
  app.add_option("--L,--L-grid", raw.L, "Stream lengths")->delimiter(',');
  app.add_option("--tau", c.tau, "Delay in node slots (0 = H + 1)");
  app.add_option("--delta-s", c.delta_s, "Activation domain width");
  app.add_option("--degree", c.degree, "Bernstein degree");
  app.add_option("--q", c.q, "Word width in bits");
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--runs", c.runs, "Independent runs per grid point");
  app.add_option("--backend", raw.backend, "ideal-exact | ideal-bernstein | stochastic");
  app.add_option("--reseed", raw.reseed, "none | per-node");
  app.add_flag("--random-bias", c.random_bias, "Draw node biases uniformly instead of zero");
  app.add_option("--lambda", c.lambda, "Ridge regularization");
  app.add_option("--washout", c.washout, "Steps discarded from each split");
  app.add_option("--train", c.train, "Training length");
  app.add_option("--test", c.test, "Test length");
  app.add_option("--period", c.period, "Sine/square samples per period");
  app.add_option("--p-square", c.p_square, "Probability that a segment is square");
  app.add_option("--m", c.m, "Probe length for KQ/GR");
  app.add_option("--noise", c.noise, "GR noise amplitude");
  app.add_option("--rank-tol", c.rank_tol, "Relative singular-value threshold");
  app.add_option("--grid-size", c.grid_size, "Activation fit grid points");
  app.add_option("--steps", c.steps, "Simulate: number of random inputs");
  app.add_option("--input", c.input, "Simulate: file of inputs, one per line");
  app.add_option("--out", c.out, "Output directory");
  app.add_option("--jobs", c.jobs, "Worker threads");
}

inline void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

inline void validate(const ExperimentConfig& c) {
  for (double a : c.alpha) check(a >= 0.0 && a <= 1.0, "--alpha: " + csv::format_double(a) + " outside [0, 1]");
  check(c.q >= kMinWidth && c.q <= kMaxWidth, "--q: " + std::to_string(c.q) + " outside [2, 16]");
  check(c.degree >= 1 && c.degree <= 24, "--degree: " + std::to_string(c.degree) + " outside [1, 24]");
  check(c.delta_s > 0.0, "--delta-s: must be positive");
  check(c.runs >= 1, "--runs: must be at least 1");
  check(c.jobs >= 1, "--jobs: must be at least 1");
  for (std::size_t h : c.H) check(c.tau == 0 || c.tau >= h, "--tau: " + std::to_string(c.tau) + " < H");
  check(c.lambda >= 0.0 && std::isfinite(c.lambda), "--lambda: must be >= 0");
  check(c.p_square >= 0.0 && c.p_square <= 1.0, "--p-square: outside [0, 1]");
  check(c.period >= 2, "--period: must be at least 2");
  check(c.m >= 1, "--m: must be at least 1");
  check(c.noise > 0.0, "--noise: must be positive");
  check(c.rank_tol >= 0.0 && c.rank_tol < 1.0, "--rank-tol: outside [0, 1)");
  check(c.grid_size >= 10 * static_cast<std::size_t>(c.degree + 1),
        "--grid-size: needs at least 10 (degree + 1) points");
  check(c.steps >= 1, "--steps: must be at least 1");
  check(!c.out.empty(), "--out: missing output directory");
  if (c.command == "bench") {
    check(c.task == "narma10" || c.task == "sinesquare", "bench: unknown task '" + c.task + "'");
    check(c.train > c.washout && c.test > c.washout, "--washout: must be smaller than --train and --test");
    if (c.task == "narma10") check(c.train + c.test >= 20, "--train/--test: NARMA10 needs at least 20 steps");
  }
  if (c.command == "metrics") check(c.H.size() == 1, "metrics: --H takes a single value");
  if (c.command == "fit-activation") check(c.gamma.size() == 1, "fit-activation: --gamma takes a single value");
  if (c.command == "simulate") {
    check(c.H.size() == 1 && c.alpha.size() == 1 && c.gamma.size() == 1 && c.L.size() == 1,
          "simulate: grids must hold a single value each");
  }
}

}  // namespace detail

/// Parses arguments (without the program name) with an optional `--config FILE`
/// of `key = value` lines. Flags override file values; unknown keys are errors.
/// Throws CLI::CallForHelp for --help and ConfigError otherwise.
[[nodiscard]] inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  ExperimentConfig c;
  detail::RawGrids raw;
  CLI::App app{"Stochastic-logic time delay reservoir simulator", "sltdr"};
  detail::add_options(app, c, raw);
  app.set_config("--config", "", "Read options from a key = value file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  auto* fit = app.add_subcommand("fit-activation", "Fit Bernstein coefficients to the transformed activation");
  auto* metrics = app.add_subcommand("metrics", "Kernel quality and generalization rank over a grid");
  auto* bench = app.add_subcommand("bench", "Run the narma10 or sinesquare benchmark over a grid");
  auto* simulate = app.add_subcommand("simulate", "Drive one reservoir and dump its states");
  bench->add_option("task", c.task, "narma10 | sinesquare")->required();
  for (auto* s : {fit, metrics, bench, simulate}) s->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  c.command = app.get_subcommands().front()->get_name();

  if (!raw.H.empty()) c.H = detail::expand_counts(raw.H, "H");
  if (!raw.alpha.empty()) c.alpha = detail::expand_all(raw.alpha, "alpha");
  if (!raw.gamma.empty()) c.gamma = detail::expand_all(raw.gamma, "gamma");
  if (!raw.L.empty()) c.L = detail::expand_counts(raw.L, "L");
  if (!raw.backend.empty()) {
    const auto b = parse_backend(raw.backend);
    if (!b) throw ConfigError("--backend: unknown backend '" + raw.backend + "'");
    c.backend = *b;
  }
  if (!raw.reseed.empty()) {
    const auto p = parse_reseed_policy(raw.reseed);
    if (!p) throw ConfigError("--reseed: unknown policy '" + raw.reseed + "'");
    c.reseed = *p;
  }
  detail::validate(c);
  return c;
}

[[nodiscard]] inline std::string usage_text() {
  return "usage: sltdr <fit-activation | metrics | bench {narma10|sinesquare} | simulate> [options]\n"
         "       sltdr --help for the option list\n";
}

/// The fully resolved configuration as a `--config` file. Reading it back with
/// the same command yields an equal ExperimentConfig.
[[nodiscard]] inline std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "# command: " << c.command << (c.task.empty() ? "" : " " + c.task) << '\n';
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  kv("H", detail::join(c.H));
  kv("alpha", detail::join(c.alpha));
  kv("gamma", detail::join(c.gamma));
  kv("L", detail::join(c.L));
  kv("tau", std::to_string(c.tau));
  kv("delta-s", csv::format_exact(c.delta_s));
  kv("degree", std::to_string(c.degree));
  kv("q", std::to_string(c.q));
  kv("seed", std::to_string(c.seed));
  kv("runs", std::to_string(c.runs));
  kv("backend", std::string(to_string(c.backend)));
  kv("reseed", std::string(to_string(c.reseed)));
  kv("random-bias", c.random_bias ? "true" : "false");
  kv("lambda", csv::format_exact(c.lambda));
  kv("washout", std::to_string(c.washout));
  kv("train", std::to_string(c.train));
  kv("test", std::to_string(c.test));
  kv("period", std::to_string(c.period));
  kv("p-square", csv::format_exact(c.p_square));
  kv("m", std::to_string(c.m));
  kv("noise", csv::format_exact(c.noise));
  kv("rank-tol", csv::format_exact(c.rank_tol));
  kv("grid-size", std::to_string(c.grid_size));
  kv("steps", std::to_string(c.steps));
  if (!c.input.empty()) kv("input", c.input);
  kv("out", c.out);
  kv("jobs", std::to_string(c.jobs));
  return os.str();
}

/// One reservoir configuration of a sweep.
struct GridPoint {
  std::size_t H = 50;
  double alpha = 0.2;
  double gamma = 2.0;
  std::size_t L = 100;

  [[nodiscard]] std::string describe() const {
    return "H=" + std::to_string(H) + " alpha=" + csv::format_double(alpha) + " gamma=" + csv::format_double(gamma) +
           " L=" + std::to_string(L);
  }
};

/// Grid points in H, alpha, gamma, L order; L collapses for the ideal backends.
[[nodiscard]] inline std::vector<GridPoint> grid_points(const ExperimentConfig& c) {
  const std::vector<std::size_t> lengths =
      c.backend == Backend::stochastic ? c.L : std::vector<std::size_t>{c.L.front()};
  std::vector<GridPoint> out;
  for (std::size_t h : c.H)
    for (double a : c.alpha)
      for (double g : c.gamma)
        for (std::size_t l : lengths) out.push_back({h, a, g, l});
  return out;
}

[[nodiscard]] inline ReservoirParams reservoir_params(const ExperimentConfig& c, const GridPoint& g) {
  ReservoirParams p;
  p.nodes = g.H;
  p.tau = c.tau;
  p.alpha = g.alpha;
  p.gamma = g.gamma;
  p.delta_s = c.delta_s;
  p.stream_length = g.L;
  p.degree = c.degree;
  p.width = c.q;
  p.master_seed = c.seed;
  p.reseed = c.reseed;
  p.backend = c.backend;
  p.random_bias = c.random_bias;
  return p;
}

[[nodiscard]] inline std::uint64_t task_seed(std::uint64_t master, std::size_t run) {
  return derive_seed(master, 0x7461736bULL, run);
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return f;
}

template <typename F>
auto with_context(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

struct Work {
  std::size_t point = 0;
  std::size_t run = 0;
};

[[nodiscard]] inline std::vector<Work> work_items(std::size_t points, std::size_t runs) {
  std::vector<Work> items;
  for (std::size_t p = 0; p < points; ++p)
    for (std::size_t r = 0; r < runs; ++r) items.push_back({p, r});
  return items;
}

inline std::vector<std::string> run_fit_activation(const ExperimentConfig& c, const std::filesystem::path& dir,
                                                   std::ostream& log) {
  const TransformedActivation f = transform_activation(c.gamma.front(), c.delta_s);
  FitReport report;
  const BernsteinSpec spec = fit_bernstein_coeffs(f, c.degree, c.grid_size, &report);
  {
    auto out = open_output(dir / "coefficients.csv");
    csv::write_coefficients(out, spec);
  }
  double max_error = 0.0;
  {
    auto out = open_output(dir / "activation.csv");
    out << "u,target,bernstein,error\n";
    for (std::size_t j = 0; j < c.grid_size; ++j) {
      const double u = static_cast<double>(j) / static_cast<double>(c.grid_size - 1);
      const double t = f(u);
      const double b = spec(u);
      max_error = std::max(max_error, std::abs(t - b));
      out << csv::format_double(u) << ',' << csv::format_double(t) << ',' << csv::format_double(b) << ','
          << csv::format_double(b - t) << '\n';
    }
  }
  log << "degree " << c.degree << " gamma " << csv::format_double(c.gamma.front()) << " max |error| "
      << csv::format_double(max_error) << " objective " << csv::format_double(report.objective) << '\n';
  return {"coefficients.csv", "activation.csv"};
}

inline std::vector<std::string> run_metrics(const ExperimentConfig& c, const std::filesystem::path& dir) {
  const auto points = grid_points(c);
  const auto items = work_items(points.size(), c.runs);
  const auto results = parallel_map<MetricRunResult>(items.size(), c.jobs, [&](std::size_t i) {
    const auto& g = points[items[i].point];
    return with_context(g.describe() + " run=" + std::to_string(items[i].run) + " seed=" + std::to_string(c.seed),
                        [&] {
                          return measure_capacity_run(reservoir_params(c, g), c.m, c.noise, c.rank_tol, c.seed,
                                                      items[i].run);
                        });
  });
  auto out = open_output(dir / "metrics.csv");
  out << csv::kMetricsHeader << '\n';
  const double h = static_cast<double>(c.H.front());
  auto prefix = [&](const GridPoint& g) {
    return csv::format_double(g.alpha) + ',' + csv::format_double(g.gamma) + ',' +
           csv::stream_length_label(c.backend, g.L) + ',' + std::string(to_string(c.reseed));
  };
  for (std::size_t i = 0; i < items.size(); ++i) {
    out << prefix(points[items[i].point]) << ',' << items[i].run << ',' << csv::format_double(results[i].kq / h)
        << ',' << csv::format_double(results[i].gr / h) << '\n';
  }
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> kq, gr;
    for (std::size_t r = 0; r < c.runs; ++r) {
      kq.push_back(results[p * c.runs + r].kq / h);
      gr.push_back(results[p * c.runs + r].gr / h);
    }
    const auto k = csv::mean_std(kq);
    const auto g = csv::mean_std(gr);
    out << prefix(points[p]) << ",mean," << csv::format_double(k.mean) << ',' << csv::format_double(g.mean) << '\n';
    out << prefix(points[p]) << ",std," << csv::format_double(k.stddev) << ',' << csv::format_double(g.stddev)
        << '\n';
  }
  return {"metrics.csv"};
}

inline std::vector<std::string> run_bench(const ExperimentConfig& c, const std::filesystem::path& dir,
                                          std::ostream& log) {
  const bool regression = c.task == "narma10";
  const auto points = grid_points(c);
  const auto items = work_items(points.size(), c.runs);
  const auto results = parallel_map<EvaluationResult>(items.size(), c.jobs, [&](std::size_t i) {
    const auto& g = points[items[i].point];
    const std::size_t run = items[i].run;
    return with_context(g.describe() + " run=" + std::to_string(run) + " seed=" + std::to_string(c.seed), [&] {
      ReservoirParams p = reservoir_params(c, g);
      p.master_seed = run_seed(c.seed, run);
      const TdrConfig cfg = make_tdr_config(p);
      TaskParams task;
      task.train = c.train;
      task.test = c.test;
      task.washout = c.washout;
      task.lambda = c.lambda;
      task.seed = task_seed(c.seed, run);
      return regression ? evaluate_regression(cfg, task)
                        : evaluate_classification(cfg, task, SineSquareParams{c.period, c.p_square});
    });
  });

  const std::string metric = regression ? "nmse" : "accuracy";
  auto prefix = [&](const GridPoint& g) {
    return c.task + ',' + std::string(to_string(c.backend)) + ',' + std::to_string(g.H) + ',' +
           csv::format_double(g.alpha) + ',' + csv::format_double(g.gamma) + ',' +
           csv::stream_length_label(c.backend, g.L) + ',' + std::to_string(c.degree);
  };
  auto out = open_output(dir / "benchmarks.csv");
  out << csv::kBenchmarkHeader << '\n';
  int regenerations = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out << prefix(points[items[i].point]) << ',' << items[i].run << ',' << metric << ','
        << csv::format_double(results[i].value) << '\n';
    regenerations += results[i].regenerations;
  }
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> v;
    for (std::size_t r = 0; r < c.runs; ++r) v.push_back(results[p * c.runs + r].value);
    const auto s = csv::mean_std(v);
    out << prefix(points[p]) << ",mean," << metric << ',' << csv::format_double(s.mean) << '\n';
    out << prefix(points[p]) << ",std," << metric << ',' << csv::format_double(s.stddev) << '\n';
  }

  // Run 0's data, for inspection and plotting.
  auto seq_out = open_output(dir / "sequence.csv");
  if (regression) {
    const auto seq = narma10_generate(c.train + c.test, task_seed(c.seed, 0));
    csv::write_sequence(seq_out, seq.u, seq.y);
  } else {
    const auto seq = sine_square_generate(c.train + c.test, task_seed(c.seed, 0), {c.period, c.p_square});
    csv::write_sequence(seq_out, seq.signal, seq.labels);
  }
  log << "task " << c.task << " input scaling " << (results.empty() ? "" : results.front().input_scaling)
      << " regenerations " << regenerations << '\n';
  return {"benchmarks.csv", "sequence.csv"};
}

[[nodiscard]] inline std::vector<double> read_inputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read input file " + path);
  std::vector<double> u;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line.substr(first), &used);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number");
    }
    u.push_back(v);
  }
  if (u.empty()) throw std::runtime_error(path + ": no inputs");
  return u;
}

inline std::vector<std::string> run_simulate(const ExperimentConfig& c, const std::filesystem::path& dir) {
  const GridPoint g{c.H.front(), c.alpha.front(), c.gamma.front(), c.L.front()};
  ReservoirParams p = reservoir_params(c, g);
  p.master_seed = run_seed(c.seed, 0);
  const TdrConfig cfg = make_tdr_config(p);
  std::vector<double> u;
  if (!c.input.empty()) {
    u = read_inputs(c.input);
  } else {
    Rng rng(task_seed(c.seed, 0));
    u.resize(c.steps);
    for (auto& v : u) v = BipolarValue::from_real(rng.uniform(-1.0, 1.0), c.q).bipolar();
  }
  Reservoir reservoir(cfg);
  StateMatrix x(static_cast<Eigen::Index>(u.size()), static_cast<Eigen::Index>(cfg.nodes));
  for (std::size_t t = 0; t < u.size(); ++t) {
    const auto row = with_context("step " + std::to_string(t), [&] { return reservoir.step(u[t]); });
    for (std::size_t i = 0; i < row.size(); ++i) x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = row[i];
  }
  std::vector<std::string> files{"states.csv", "inputs.csv", "weights.csv", "biases.csv"};
  {
    auto out = open_output(dir / "states.csv");
    csv::write_states(out, x);
  }
  {
    auto out = open_output(dir / "inputs.csv");
    csv::write_sequence(out, u, {});
  }
  {
    auto out = open_output(dir / "weights.csv");
    csv::write_weights(out, cfg.input_weights);
  }
  {
    auto out = open_output(dir / "biases.csv");
    csv::write_biases(out, cfg.biases);
  }
  if (cfg.backend != Backend::ideal_exact) {
    auto out = open_output(dir / "coefficients.csv");
    csv::write_coefficients(out, reservoir.polynomial());
    files.push_back("coefficients.csv");
  }
  return files;
}

}  // namespace detail

/// Executes the configured command and writes its CSV files, the resolved
/// config (config.txt) and a manifest into cfg.out. Returns the written CSV names.
inline std::vector<std::string> run_experiment(const ExperimentConfig& c, std::ostream& log = std::clog) {
  namespace fs = std::filesystem;
  const auto started = std::chrono::steady_clock::now();
  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("--out: cannot create directory '" + c.out + "'");
  {
    auto out = detail::open_output(dir / "config.txt");
    out << to_config_text(c);
  }
  std::vector<std::string> files;
  if (c.command == "fit-activation") {
    files = detail::run_fit_activation(c, dir, log);
  } else if (c.command == "metrics") {
    files = detail::run_metrics(c, dir);
  } else if (c.command == "bench") {
    files = detail::run_bench(c, dir, log);
  } else if (c.command == "simulate") {
    files = detail::run_simulate(c, dir);
  } else {
    throw ConfigError("unknown command '" + c.command + "'");
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  auto manifest = detail::open_output(dir / "manifest.txt");
  manifest << "command = " << c.command << (c.task.empty() ? "" : " " + c.task) << '\n'
           << "seed = " << c.seed << '\n'
           << "version = " << SLTDR_VERSION << '\n'
           << "jobs = " << c.jobs << '\n'
           << "wall_time_s = " << csv::format_double(wall) << '\n'
           << "config = config.txt\n";
  for (const auto& f : files) manifest << "output = " << f << '\n';
  return files;
}

/// Full command-line entry point; returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage_text();
    return kExitConfigError;
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const CLI::CallForHelp&) {
    CLI::App app{"Stochastic-logic time delay reservoir simulator", "sltdr"};
    ExperimentConfig scratch;
    detail::RawGrids raw;
    detail::add_options(app, scratch, raw);
    out << usage_text() << '\n' << app.help();
    return kExitSuccess;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  try {
    run_experiment(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitSuccess;
}

}  // namespace sltdr
