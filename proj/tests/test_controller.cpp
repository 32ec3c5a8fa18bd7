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

#include <cmath>
#include <random>

#include "doctest.h"
#include "ssolab/controller.hpp"

using namespace ssolab::ctrl;

namespace {
AdaptiveGains paper_gains() {
  AdaptiveGains g;
  g.p_v = 0.0534;
  g.p_v_eta = 3.7221;
  g.p_v_i = -0.0034;
  g.k = 1440.8;
  g.k_pv = 2.0;
  g.psi = 10.0;
  g.beta = 20.0;
  g.sigma_lo = 8.1487;
  g.sigma_hi = 10.3896;
  return g;
}
}  // namespace

TEST_CASE("error signals at the operating point are zero") {
  AdaptiveGains g = paper_gains();
  AdaptiveState s;
  s.v_n0 = 1.0;
  s.v_fi_tilde = 0.0;
  const ErrorSignals e = error_signals(1.0, 1.0, g, s);
  CHECK(e.v_n_tilde == 0.0);
  CHECK(e.v_f_tilde == 0.0);
  CHECK(e.eta == 0.0);
}

TEST_CASE("eta combines the filtered error and its integral") {
  AdaptiveGains g = paper_gains();
  g.psi = 10.0;
  AdaptiveState s;
  s.v_n0 = 1.0;
  s.v_fi_tilde = 0.002;
  const ErrorSignals e = error_signals(1.0, 1.01, g, s);
  CHECK(e.eta == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("controller integrates a constant filtered error") {
  SupplementaryController::Options opt;
  opt.mode = ControllerMode::kAdaptive;
  opt.gains = paper_gains();
  SupplementaryController c(opt);
  c.arm(1.0);
  const double dt = 1e-3, T = 2.0, cval = 0.004;
  const size_t n = static_cast<size_t>(T / dt);
  for (size_t i = 0; i < n; ++i) c.update(1.0, 1.0 + cval, dt);
  CHECK(c.state().v_fi_tilde == doctest::Approx(cval * T).epsilon(1e-3));
}

TEST_CASE("active power modulation formula") {
  AdaptiveGains g = paper_gains();
  AdaptiveState s;
  s.sigma_hat = 10.3896;
  const SupplementaryOutput out = adaptive_control(1e-4, 0.0, 1.0, s, g);
  CHECK(out.p_tilde == doctest::Approx(-3.0 * 1440.8 * 1e-4 / (2.0 * 10.3896)).epsilon(1e-12));
  CHECK(out.p_tilde == doctest::Approx(-0.020802).epsilon(1e-4));
  CHECK(out.q_tilde == 0.0);
}

TEST_CASE("modulation vanishes at equilibrium and scales linearly") {
  AdaptiveGains g = paper_gains();
  AdaptiveState s;
  s.sigma_hat = 9.0;
  CHECK(adaptive_control(0.0, 0.0, 1.0, s, g).p_tilde == 0.0);
  const double one = adaptive_control(2e-4, 0.0, 1.0, s, g).p_tilde;
  const double two = adaptive_control(4e-4, 0.0, 1.0, s, g).p_tilde;
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
  CHECK(one < 0.0);  // positive voltage error pulls power down
}

TEST_CASE("adaptation rate matches the closed form") {
  AdaptiveGains g = paper_gains();
  const double rate = sigma_hat_rate(1e-3, 0.01, 0.0, 9.0, g);
  CHECK(rate ==
        doctest::Approx(-1440.8 * (0.0534 * 1e-3 + 3.7221 * 0.01) * 1e-3 / 9.0).epsilon(1e-12));
  CHECK(rate == doctest::Approx(-5.967e-3).epsilon(1e-3));
}

TEST_CASE("adaptation is frozen when the voltage error vanishes") {
  AdaptiveGains g = paper_gains();
  AdaptiveState s;
  s.sigma_hat = 9.0;
  CHECK(adaptation_step(0.0, 0.42, -1.3, s, g, 1e-3) == 9.0);
}

TEST_CASE("projection pins the estimate at the bounds") {
  AdaptiveGains g = paper_gains();
  AdaptiveState s;
  s.sigma_hat = g.sigma_lo;
  const double next = adaptation_step(0.1, 0.5, 0.0, s, g, 1e-2);
  CHECK(next == g.sigma_lo);
}

TEST_CASE("projection invariant under random input sequences") {
  AdaptiveGains g = paper_gains();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  AdaptiveState s;
  s.sigma_hat = 9.0;
  for (int i = 0; i < 5000; ++i) {
    s.sigma_hat = adaptation_step(u(rng), u(rng), u(rng), s, g, 1e-3);
    CHECK(s.sigma_hat >= g.sigma_lo);
    CHECK(s.sigma_hat <= g.sigma_hi);
  }
}

TEST_CASE("state feedback baseline") {
  CHECK(state_feedback_control(0.0, -22.0, 0.0963, 1.0) == 0.0);
  CHECK(state_feedback_control(0.01, -22.0, 0.0963, 1.0) ==
        doctest::Approx(-0.031779).epsilon(1e-12));
  const double one = state_feedback_control(0.003, -22.0, 0.0963, 1.0);
  const double two = state_feedback_control(0.006, -22.0, 0.0963, 1.0);
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
}

TEST_CASE("equilibrium neutrality of the full update") {
  for (ControllerMode mode : {ControllerMode::kStateFeedback, ControllerMode::kAdaptive}) {
    SupplementaryController::Options opt;
    opt.mode = mode;
    opt.gains = paper_gains();
    SupplementaryController c(opt);
    c.arm(1.0);
    const double sigma_before = c.state().sigma_hat;
    for (int i = 0; i < 1000; ++i) {
      const SupplementaryOutput out = c.update(1.0, 1.0, 1e-4);
      CHECK(out.p_tilde == 0.0);
      CHECK(out.q_tilde == 0.0);
    }
    CHECK(c.state().sigma_hat == sigma_before);
    CHECK(c.state().v_fi_tilde == 0.0);
  }
}

TEST_CASE("reactive modulation stays identically zero on trajectories") {
  SupplementaryController::Options opt;
  opt.mode = ControllerMode::kAdaptive;
  opt.gains = paper_gains();
  SupplementaryController c(opt);
  c.arm(1.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int i = 0; i < 2000; ++i)
    CHECK(c.update(1.0 + u(rng), 1.0 + u(rng), 1e-4).q_tilde == 0.0);
}

TEST_CASE("moving average filter delays the response") {
  SupplementaryController::Options opt;
  opt.mode = ControllerMode::kAdaptive;
  opt.gains = paper_gains();
  opt.v_n_filter_window = 5e-3;
  SupplementaryController c(opt);
  c.arm(1.0);
  const double dt = 1e-3;
  for (int i = 0; i < 10; ++i) c.update(1.0, 1.0, dt);  // history at nominal
  const double p1 = c.update(1.001, 1.0, dt).p_tilde;
  double p_last = p1;
  for (int i = 0; i < 10; ++i) p_last = c.update(1.001, 1.0, dt).p_tilde;
  CHECK(std::abs(p1) < std::abs(p_last));
  CHECK(std::abs(p1) == doctest::Approx(std::abs(p_last) / 5.0).epsilon(0.05));
}
