// Copyright 2026 The ssolab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace ssolab::ctrl {

// Constants of the supplementary controller. p_v, p_v_eta, p_v_i come from
// the synthesized P matrix; k is the supplementary gain; psi and beta mirror
// the outer voltage loop (psi = k_iv / k_pv, beta = 1 / tau_f).
struct AdaptiveGains {
  double p_v = 0.0;
  double p_v_eta = 0.0;
  double p_v_i = 0.0;
  double k = 0.0;
  double k_pv = 0.0;
  double psi = 0.0;
  double beta = 0.0;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;

  void validate() const {
    if (!(k > 0.0)) throw std::invalid_argument("AdaptiveGains.k must be positive");
    if (!(sigma_lo > 0.0 && sigma_lo <= sigma_hi))
      throw std::invalid_argument("AdaptiveGains.sigma bounds must satisfy 0 < lo <= hi");
    if (!(psi > 0.0 && beta > 0.0))
      throw std::invalid_argument("AdaptiveGains.psi and beta must be positive");
  }
};

// Live controller state: the parameter estimate and its own error integral.
struct AdaptiveState {
  double sigma_hat = 0.0;
  double v_fi_tilde = 0.0;
  double v_n0 = 0.0;
};

struct ErrorSignals {
  double v_n_tilde = 0.0;
  double v_f_tilde = 0.0;
  double eta = 0.0;
};

inline ErrorSignals error_signals(double v_n, double v_f, const AdaptiveGains& g,
                                  const AdaptiveState& s) {
  ErrorSignals e;
  e.v_n_tilde = v_n - s.v_n0;
  e.v_f_tilde = v_f - s.v_n0;
  e.eta = e.v_f_tilde + g.psi * s.v_fi_tilde;
  return e;
}

// Active power modulation; the reactive channel stays at zero (its exact
// inversion divides by v_q, which vanishes once the PLL tracks).
struct SupplementaryOutput {
  double p_tilde = 0.0;
  double q_tilde = 0.0;
};

inline SupplementaryOutput adaptive_control(double v_n_tilde, double /*eta*/, double v_n,
                                            const AdaptiveState& s, const AdaptiveGains& g) {
  if (!(s.sigma_hat > 0.0))
    throw std::logic_error("sigma_hat must be positive (projection missing?)");
  return {-1.5 * g.k * v_n * v_n_tilde / s.sigma_hat, 0.0};
}

inline double sigma_hat_rate(double v_n_tilde, double eta, double v_fi_tilde,
                             double sigma_hat, const AdaptiveGains& g) {
  return -g.k * (g.p_v * v_n_tilde + g.p_v_eta * eta + g.p_v_i * v_fi_tilde) * v_n_tilde /
         sigma_hat;
}

// Explicit Euler on the adaptation law, then projection onto the bounds.
inline double adaptation_step(double v_n_tilde, double eta, double v_fi_tilde,
                              const AdaptiveState& s, const AdaptiveGains& g, double dt) {
  const double next = s.sigma_hat + dt * sigma_hat_rate(v_n_tilde, eta, v_fi_tilde,
                                                        s.sigma_hat, g);
  return std::clamp(next, g.sigma_lo, g.sigma_hi);
}

inline double state_feedback_control(double v_n_tilde, double k_sf, double c_g0,
                                     double v_n0) {
  return 1.5 * c_g0 * v_n0 * k_sf * v_n_tilde;
}

enum class ControllerMode { kNone, kStateFeedback, kAdaptive };

// Discrete supplementary controller driven by plant measurements once per
// simulation step. Owns its error integral and the parameter estimate so it
// can run against any plant exposing only (v_n, v_f).
class SupplementaryController {
 public:
  struct Options {
    ControllerMode mode = ControllerMode::kNone;
    AdaptiveGains gains;
    double sigma_hat_init = 0.0;  // 0 = midpoint of the interval
    double k_sf = -22.0;
    double c_g0 = 0.0963;
    double v_n_filter_window = 0.0;  // seconds of moving average, 0 = off
  };

  explicit SupplementaryController(const Options& opt) : opt_(opt) {
    if (opt_.mode == ControllerMode::kAdaptive) {
      opt_.gains.validate();
      state_.sigma_hat = opt_.sigma_hat_init > 0.0
                             ? opt_.sigma_hat_init
                             : 0.5 * (opt_.gains.sigma_lo + opt_.gains.sigma_hi);
      state_.sigma_hat = std::clamp(state_.sigma_hat, opt_.gains.sigma_lo,
                                    opt_.gains.sigma_hi);
    }
  }

  void arm(double v_n0) {
    state_.v_n0 = v_n0;
    state_.v_fi_tilde = 0.0;
    prev_v_f_tilde_ = 0.0;
    armed_ = true;
    ma_.clear();
    ma_sum_ = 0.0;
  }

  SupplementaryOutput update(double v_n_raw, double v_f, double dt) {
    if (!armed_ || opt_.mode == ControllerMode::kNone) return {};
    const double v_n = filtered(v_n_raw, dt);
    const double v_f_tilde = v_f - state_.v_n0;
    state_.v_fi_tilde += 0.5 * dt * (v_f_tilde + prev_v_f_tilde_);
    prev_v_f_tilde_ = v_f_tilde;
    const double v_n_tilde = v_n - state_.v_n0;
    const double eta = v_f_tilde + opt_.gains.psi * state_.v_fi_tilde;
    last_ = {v_n_tilde, v_f_tilde, eta};

    if (opt_.mode == ControllerMode::kStateFeedback)
      return {state_feedback_control(v_n_tilde, opt_.k_sf, opt_.c_g0, state_.v_n0), 0.0};

    state_.sigma_hat =
        adaptation_step(v_n_tilde, eta, state_.v_fi_tilde, state_, opt_.gains, dt);
    return adaptive_control(v_n_tilde, eta, v_n, state_, opt_.gains);
  }

  const AdaptiveState& state() const { return state_; }
  const ErrorSignals& last_signals() const { return last_; }
  ControllerMode mode() const { return opt_.mode; }

 private:
  double filtered(double v_n, double dt) {
    if (opt_.v_n_filter_window <= 0.0) return v_n;
    const size_t win = std::max<size_t>(1, static_cast<size_t>(
                                               std::llround(opt_.v_n_filter_window / dt)));
    ma_.push_back(v_n);
    ma_sum_ += v_n;
    while (ma_.size() > win) {
      ma_sum_ -= ma_.front();
      ma_.pop_front();
    }
    return ma_sum_ / static_cast<double>(ma_.size());
  }

  Options opt_;
  AdaptiveState state_;
  ErrorSignals last_;
  double prev_v_f_tilde_ = 0.0;
  bool armed_ = false;
  std::deque<double> ma_;
  double ma_sum_ = 0.0;
};

}  // namespace ssolab::ctrl
