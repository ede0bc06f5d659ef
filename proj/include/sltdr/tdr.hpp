#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sltdr/bernstein.hpp"
#include "sltdr/lfsr.hpp"
#include "sltdr/random.hpp"
#include "sltdr/stochastic.hpp"

namespace sltdr {

enum class Backend { ideal_exact, ideal_bernstein, stochastic };
enum class ReseedPolicy { none, per_node };

[[nodiscard]] inline std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::ideal_exact: return "ideal-exact";
    case Backend::ideal_bernstein: return "ideal-bernstein";
    case Backend::stochastic: return "stochastic";
  }
  return "?";
}

[[nodiscard]] inline std::string_view to_string(ReseedPolicy p) noexcept {
  return p == ReseedPolicy::none ? "none" : "per-node";
}

[[nodiscard]] inline std::optional<Backend> parse_backend(std::string_view s) noexcept {
  if (s == "ideal-exact") return Backend::ideal_exact;
  if (s == "ideal-bernstein") return Backend::ideal_bernstein;
  if (s == "stochastic") return Backend::stochastic;
  return std::nullopt;
}

[[nodiscard]] inline std::optional<ReseedPolicy> parse_reseed_policy(std::string_view s) noexcept {
  if (s == "none") return ReseedPolicy::none;
  if (s == "per-node") return ReseedPolicy::per_node;
  return std::nullopt;
}

/// One LFSR per stochastic source. Coefficient k uses role `coefficient + k`.
enum class LfsrRole : std::uint32_t {
  input = 0,
  weight = 1,
  feedback = 2,
  bias = 3,
  select_mix = 4,
  select_bias = 5,
  coefficient = 6,
};

[[nodiscard]] constexpr std::uint32_t role_index(LfsrRole role, int k = 0) noexcept {
  return static_cast<std::uint32_t>(role) + static_cast<std::uint32_t>(k);
}

[[nodiscard]] constexpr std::size_t lfsr_role_count(int degree) noexcept {
  return static_cast<std::size_t>(role_index(LfsrRole::coefficient)) + static_cast<std::size_t>(degree) + 1;
}

/// Deterministic nonzero q-bit seed for one node's LFSR of a given role.
///
/// Depends only on (master_seed, node, role), so a node sees the same bit
/// patterns at every macro timestep.
[[nodiscard]] inline Word reseed_for_node(std::uint64_t master_seed, std::uint64_t node, std::uint32_t role,
                                          int width) {
  check_width(width);
  const std::uint64_t h = derive_seed(master_seed, node + 1, role);
  return static_cast<Word>(h % state_count(width)) + 1U;
}

/// Seed used for a free-running (never re-seeded) LFSR of a role.
[[nodiscard]] inline Word free_running_seed(std::uint64_t master_seed, std::uint32_t role, int width) {
  check_width(width);
  const std::uint64_t h = derive_seed(master_seed, 0, role);
  return static_cast<Word>(h % state_count(width)) + 1U;
}

/// Fully resolved reservoir configuration.
///
/// Input weights are q-bit representable. Biases are representable or exactly
/// zero; zero has no q-bit code, so the stochastic backend rounds it at its
/// B2S converter while the ideal backends keep it exact.
struct TdrConfig {
  std::size_t nodes = 50;
  std::size_t tau = 51;
  double alpha = 0.2;
  double gamma = 2.0;
  double delta_s = 2.0;
  std::size_t stream_length = 100;
  int degree = 5;
  int width = 8;
  std::uint64_t master_seed = 1;
  std::vector<double> input_weights;
  std::vector<double> biases;
  ReseedPolicy reseed = ReseedPolicy::per_node;
  Backend backend = Backend::ideal_exact;

  void validate() const {
    check_width(width);
    if (nodes == 0) throw std::invalid_argument("reservoir needs at least one node");
    if (tau < nodes) throw std::invalid_argument("delay tau must be >= H");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha outside [0, 1]");
    if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
    if (!(delta_s > 0.0)) throw std::invalid_argument("delta_s must be positive");
    if (degree < 1 || degree > 24) throw std::invalid_argument("Bernstein degree outside [1, 24]");
    if (backend == Backend::stochastic && stream_length == 0) {
      throw std::invalid_argument("stream length must be positive");
    }
    if (input_weights.size() != nodes || biases.size() != nodes) {
      throw std::invalid_argument("need one input weight and one bias per node");
    }
    for (double w : input_weights) {
      if (!is_representable(w, width)) throw std::invalid_argument("input weight not representable at width q");
    }
    for (double b : biases) {
      if (b != 0.0 && !is_representable(b, width)) {
        throw std::invalid_argument("bias not representable at width q");
      }
    }
  }
};

/// Scalar hyperparameters; make_tdr_config() draws the per-node values.
struct ReservoirParams {
  std::size_t nodes = 50;
  std::size_t tau = 0;  // 0 selects H + 1
  double alpha = 0.2;
  double gamma = 2.0;
  double delta_s = 2.0;
  std::size_t stream_length = 100;
  int degree = 5;
  int width = 8;
  std::uint64_t master_seed = 1;
  ReseedPolicy reseed = ReseedPolicy::per_node;
  Backend backend = Backend::ideal_exact;
  bool random_bias = false;
};

/// Input weights are i.i.d. uniform on [-1, 1] and quantized, drawn from the
/// master seed; biases are zero unless random_bias is set.
[[nodiscard]] inline TdrConfig make_tdr_config(const ReservoirParams& p) {
  TdrConfig cfg;
  cfg.nodes = p.nodes;
  cfg.tau = p.tau == 0 ? p.nodes + 1 : p.tau;
  cfg.alpha = p.alpha;
  cfg.gamma = p.gamma;
  cfg.delta_s = p.delta_s;
  cfg.stream_length = p.stream_length;
  cfg.degree = p.degree;
  cfg.width = p.width;
  cfg.master_seed = p.master_seed;
  cfg.reseed = p.reseed;
  cfg.backend = p.backend;
  check_width(p.width);
  Rng weights(derive_seed(p.master_seed, 0x77656967ULL));
  Rng biases(derive_seed(p.master_seed, 0x62696173ULL));
  cfg.input_weights.resize(p.nodes);
  cfg.biases.assign(p.nodes, 0.0);
  for (std::size_t i = 0; i < p.nodes; ++i) {
    cfg.input_weights[i] = BipolarValue::from_real(weights.uniform(-1.0, 1.0), p.width).bipolar();
    if (p.random_bias) cfg.biases[i] = BipolarValue::from_real(biases.uniform(-1.0, 1.0), p.width).bipolar();
  }
  cfg.validate();
  return cfg;
}

/// s = 0.5 [alpha w_i u + (1 - alpha) x_fb] + 0.5 theta_i.
///
/// The first multiplexer (select alpha) mixes the weighted input with the
/// delayed state; the second (select 1/2) averages in the bias.
[[nodiscard]] inline double node_preactivation_ideal(double u, std::size_t node, double feedback,
                                                     const TdrConfig& cfg) {
  const double weighted = cfg.input_weights.at(node) * u;
  return 0.5 * (cfg.alpha * weighted + (1.0 - cfg.alpha) * feedback) + 0.5 * cfg.biases.at(node);
}

/// Bipolar output 2 f_bar(s_bar) - 1 of the transformed sine.
[[nodiscard]] inline double activation_ideal(double s, const TdrConfig& cfg) {
  return transform_activation(cfg.gamma, cfg.delta_s).bipolar(std::clamp(s, -1.0, 1.0));
}

/// Delay-line contents. Slot g = p H + i lives at delay_line[g mod tau].
struct TdrState {
  std::vector<double> delay_line;
  std::uint64_t step = 0;

  [[nodiscard]] std::size_t tau() const noexcept { return delay_line.size(); }

  /// Value written at global slot g, valid for the tau most recent slots.
  [[nodiscard]] double slot(std::uint64_t g) const { return delay_line.at(static_cast<std::size_t>(g % tau())); }
};

namespace detail {

/// Bit-level node pipeline:
/// B2S(u) XNOR B2S(w) -> MUX(alpha) with B2S(feedback) -> MUX(1/2) with B2S(bias)
/// -> Bernstein adder/MUX over rotated copies -> S2B.
class StochasticNodeEngine {
 public:
  StochasticNodeEngine(const TdrConfig& cfg, const BernsteinSpec& poly)
      : nodes_(cfg.nodes),
        len_(cfg.stream_length),
        degree_(cfg.degree),
        width_(cfg.width),
        master_seed_(cfg.master_seed),
        reseed_(cfg.reseed) {
    if (!poly.in_unit_interval()) throw std::invalid_argument("activation coefficients must lie in [0, 1]");
    mix_threshold_ = probability_threshold(cfg.alpha, width_);
    half_threshold_ = probability_threshold(0.5, width_);
    for (double b : poly.beta) coefficient_thresholds_.push_back(probability_threshold(b, width_));
    for (double w : cfg.input_weights) weight_offsets_.push_back(BipolarValue::from_real(w, width_).offset());
    for (double b : cfg.biases) bias_offsets_.push_back(BipolarValue::from_real(b, width_).offset());

    const std::size_t roles = lfsr_role_count(degree_);
    for (std::uint32_t r = 0; r < roles; ++r) {
      generators_.emplace_back(width_, free_running_seed(master_seed_, r, width_), r);
    }
    for (auto* buf : {&u_, &w_, &product_, &feedback_, &select_mix_, &select_half_, &bias_, &preact_, &sum_, &out_}) {
      buf->resize(len_);
    }
    coefficient_bits_.resize(len_);
    coefficient_scratch_.resize(len_);

    if (reseed_ == ReseedPolicy::per_node) build_node_cache();
  }

  /// Restarts every free-running LFSR from its initial seed.
  void restart() {
    for (std::uint32_t r = 0; r < generators_.size(); ++r) {
      generators_[r].reseed(free_running_seed(master_seed_, r, width_));
    }
  }

  [[nodiscard]] BipolarValue evaluate(std::size_t node, double u, double feedback) {
    const Word u_offset = BipolarValue::from_real(u, width_).offset();
    const Word fb_offset = BipolarValue::from_real(std::clamp(feedback, -1.0, 1.0), width_).offset();
    auto& gu = generators_[role_index(LfsrRole::input)];
    auto& gf = generators_[role_index(LfsrRole::feedback)];
    if (reseed_ == ReseedPolicy::per_node) {
      gu.reseed(reseed_for_node(master_seed_, node, role_index(LfsrRole::input), width_));
      gf.reseed(reseed_for_node(master_seed_, node, role_index(LfsrRole::feedback), width_));
    }
    gu.compare_into(u_offset, u_);
    gf.compare_into(fb_offset, feedback_);

    std::span<const std::uint8_t> w, select_mix, bias, select_half;
    std::span<const std::uint32_t> coefficients;
    if (reseed_ == ReseedPolicy::per_node) {
      const NodeCache& c = cache_[node];
      w = c.weight;
      select_mix = c.select_mix;
      bias = c.bias;
      select_half = c.select_bias;
      coefficients = c.coefficients;
    } else {
      generators_[role_index(LfsrRole::weight)].compare_into(weight_offsets_[node], w_);
      generators_[role_index(LfsrRole::select_mix)].compare_into(mix_threshold_, select_mix_);
      generators_[role_index(LfsrRole::bias)].compare_into(bias_offsets_[node], bias_);
      generators_[role_index(LfsrRole::select_bias)].compare_into(half_threshold_, select_half_);
      fill_coefficients(coefficient_bits_);
      w = w_;
      select_mix = select_mix_;
      bias = bias_;
      select_half = select_half_;
      coefficients = coefficient_bits_;
    }

    xnor_into(u_, w, product_);
    // out_ is free scratch until the final select.
    mux_into(product_, feedback_, select_mix, out_);
    mux_into(out_, bias, select_half, preact_);
    rotation_sum_into(preact_, degree_, sum_);
    select_into(sum_, coefficients, out_);
    return BipolarValue::from_ratio(updown_count(out_), static_cast<std::int64_t>(len_), width_);
  }

 private:
  struct NodeCache {
    std::vector<std::uint8_t> weight, select_mix, bias, select_bias;
    std::vector<std::uint32_t> coefficients;
  };

  void fill_coefficients(std::vector<std::uint32_t>& bits) {
    std::fill(bits.begin(), bits.end(), 0U);
    for (int k = 0; k <= degree_; ++k) {
      generators_[role_index(LfsrRole::coefficient, k)].compare_into(
          coefficient_thresholds_[static_cast<std::size_t>(k)], coefficient_scratch_);
      for (std::size_t r = 0; r < len_; ++r) bits[r] |= static_cast<std::uint32_t>(coefficient_scratch_[r]) << k;
    }
  }

  // Under per-node re-seeding these streams repeat at every timestep.
  void build_node_cache() {
    cache_.resize(nodes_);
    for (std::size_t i = 0; i < nodes_; ++i) {
      for (std::uint32_t r = 0; r < generators_.size(); ++r) {
        if (r == role_index(LfsrRole::input) || r == role_index(LfsrRole::feedback)) continue;
        generators_[r].reseed(reseed_for_node(master_seed_, i, r, width_));
      }
      NodeCache& c = cache_[i];
      for (auto* buf : {&c.weight, &c.select_mix, &c.bias, &c.select_bias}) buf->resize(len_);
      generators_[role_index(LfsrRole::weight)].compare_into(weight_offsets_[i], c.weight);
      generators_[role_index(LfsrRole::select_mix)].compare_into(mix_threshold_, c.select_mix);
      generators_[role_index(LfsrRole::bias)].compare_into(bias_offsets_[i], c.bias);
      generators_[role_index(LfsrRole::select_bias)].compare_into(half_threshold_, c.select_bias);
      c.coefficients.resize(len_);
      fill_coefficients(c.coefficients);
    }
  }

  std::size_t nodes_;
  std::size_t len_;
  int degree_;
  int width_;
  std::uint64_t master_seed_;
  ReseedPolicy reseed_;
  Word mix_threshold_ = 0;
  Word half_threshold_ = 0;
  std::vector<Word> coefficient_thresholds_;
  std::vector<Word> weight_offsets_;
  std::vector<Word> bias_offsets_;
  std::vector<LfsrGenerator> generators_;
  std::vector<NodeCache> cache_;
  std::vector<std::uint8_t> u_, w_, product_, feedback_, select_mix_, select_half_, bias_, preact_, sum_, out_;
  std::vector<std::uint8_t> coefficient_scratch_;
  std::vector<std::uint32_t> coefficient_bits_;
};

}  // namespace detail

/// Grid size used when synthesizing the reservoir's Bernstein activation.
inline constexpr std::size_t kActivationFitGrid = 1001;

/// A time delay reservoir: one nonlinear node time-multiplexed over H virtual
/// nodes, with a delay line of tau slots.
///
/// Single-threaded; distinct instances share no mutable state.
class Reservoir {
 public:
  explicit Reservoir(TdrConfig cfg)
      : cfg_(std::move(cfg)), activation_(transform_activation(cfg_.gamma, cfg_.delta_s)) {
    cfg_.validate();
    if (cfg_.backend != Backend::ideal_exact) {
      polynomial_ = fit_bernstein_coeffs(activation_, cfg_.degree, kActivationFitGrid);
    }
    if (cfg_.backend == Backend::stochastic) engine_.emplace(cfg_, polynomial_);
    state_.delay_line.assign(cfg_.tau, 0.0);
    outputs_.resize(cfg_.nodes);
  }

  /// Consumes one held input sample; returns the H node outputs of this step.
  std::span<const double> step(double u) {
    if (!std::isfinite(u) || u < -1.0 || u > 1.0) {
      throw std::invalid_argument("reservoir input " + std::to_string(u) + " cannot be quantized to [-1, 1]");
    }
    const double held = BipolarValue::from_real(u, cfg_.width).bipolar();
    const std::uint64_t base = state_.step * cfg_.nodes;
    for (std::size_t i = 0; i < cfg_.nodes; ++i) {
      // The slot about to be overwritten holds g - tau (0 before time zero).
      double& cell = state_.delay_line[static_cast<std::size_t>((base + i) % cfg_.tau)];
      const double x = node_output(i, held, cell);
      cell = x;
      outputs_[i] = x;
    }
    ++state_.step;
    return outputs_;
  }

  /// Zeroes the delay line. Free-running LFSRs keep their phase.
  void reset_state() {
    std::fill(state_.delay_line.begin(), state_.delay_line.end(), 0.0);
    state_.step = 0;
  }

  /// Zeroes the delay line and restarts every LFSR from its seed.
  void reset() {
    reset_state();
    if (engine_) engine_->restart();
  }

  [[nodiscard]] const TdrConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const TdrState& state() const noexcept { return state_; }
  [[nodiscard]] const TransformedActivation& activation() const noexcept { return activation_; }
  /// Synthesized activation (empty for the ideal-exact backend).
  [[nodiscard]] const BernsteinSpec& polynomial() const noexcept { return polynomial_; }

 private:
  double node_output(std::size_t i, double u, double feedback) {
    switch (cfg_.backend) {
      case Backend::ideal_exact: {
        const double s = node_preactivation_ideal(u, i, feedback, cfg_);
        return activation_.bipolar(std::clamp(s, -1.0, 1.0));
      }
      case Backend::ideal_bernstein: {
        const double s = std::clamp(node_preactivation_ideal(u, i, feedback, cfg_), -1.0, 1.0);
        return 2.0 * polynomial_((s + 1.0) / 2.0) - 1.0;
      }
      case Backend::stochastic:
        return engine_->evaluate(i, u, feedback).bipolar();
    }
    return 0.0;
  }

  TdrConfig cfg_;
  TransformedActivation activation_;
  BernsteinSpec polynomial_;
  TdrState state_;
  std::optional<detail::StochasticNodeEngine> engine_;
  std::vector<double> outputs_;
};

using StateMatrix = Eigen::MatrixXd;

/// Drives a fresh reservoir over the inputs; row p holds the node outputs after input p.
[[nodiscard]] inline StateMatrix run_reservoir(std::span<const double> inputs, const TdrConfig& cfg) {
  if (inputs.empty()) throw std::invalid_argument("run_reservoir: empty input sequence");
  Reservoir reservoir(cfg);
  StateMatrix x(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(cfg.nodes));
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    const auto out = reservoir.step(inputs[p]);
    for (std::size_t i = 0; i < out.size(); ++i) {
      x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) = out[i];
    }
  }
  return x;
}

}  // namespace sltdr
