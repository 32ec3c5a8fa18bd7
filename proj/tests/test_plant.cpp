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
#include "ssolab/plant.hpp"
#include "ssolab/rk4.hpp"

using namespace ssolab;
using namespace ssolab::plant;

namespace {
PlantParams nominal() { return PlantParams{}; }
}  // namespace

TEST_CASE("nominal steady state converges below 1e-8") {
  const PlantParams p = nominal();
  const StateVec x = steady_state_init(p);
  CHECK(residual_inf_norm(x, p) < 1e-8);
}

TEST_CASE("steady state tracks the voltage reference and the PLL locks") {
  const PlantParams p = nominal();
  const StateVec x = steady_state_init(p);
  const Measurements m = measure(x, p);
  CHECK(std::abs(m.v_n - p.outer.v_ref) < 1e-6);
  CHECK(std::abs(m.v_q) < 1e-8);
  CHECK(std::abs(m.omega_pll - p.grid.omega_s) < 1e-8);
  CHECK(std::abs(m.p_out - p.outer.p_ref) < 1e-6);
}

TEST_CASE("no-load equilibrium has zero converter current") {
  PlantParams p = nominal();
  p.outer.p_ref = 0.0;
  p.outer.v_ref = no_load_voltage(p);
  const StateVec x = steady_state_init(p);
  CHECK(residual_inf_norm(x, p) < 1e-8);
  CHECK(std::abs(x[kId]) < 1e-8);
  CHECK(std::abs(x[kIq]) < 1e-8);
  CHECK(std::abs(measure(x, p).v_n - p.outer.v_ref) < 1e-8);
}

TEST_CASE("random feasible power references all initialize") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pr(0.0, 7.0);
  for (int i = 0; i < 12; ++i) {
    PlantParams p = nominal();
    p.outer.p_ref = pr(rng);
    const StateVec x = steady_state_init(p);
    CHECK(residual_inf_norm(x, p) < 1e-8);
  }
}

TEST_CASE("infeasible power flow reports an error") {
  PlantParams p = nominal();
  p.outer.p_ref = 50.0;
  CHECK_THROWS_AS(steady_state_init(p), InitError);
}

TEST_CASE("one integration step leaves the steady state unchanged") {
  const PlantParams p = nominal();
  StateVec x = steady_state_init(p);
  const StateVec x0 = x;
  auto rhs = [&](const StateVec& s, double, StateVec& ds) {
    return derivatives(s, Inputs{}, p, ds) == DerivStatus::kOk;
  };
  REQUIRE(rk4_step(x, 0.0, 5e-5, rhs));
  for (int i = 0; i < kNumStates; ++i) CHECK(std::abs(x[i] - x0[i]) < 1e-9);
}

TEST_CASE("POI node charge balance is the pinned form") {
  for (bool physical : {true, false}) {
    PlantParams p = nominal();
    p.opts.physical_node_time = physical;
    const double rate = physical ? p.base.omega_base() : 1.0;
    StateVec x = steady_state_init(p);
    // Push the node off balance and recompute the voltage derivative from
    // the currents alone: c_g dv_d/dtau = c_g w v_q + i_d - i_gd.
    x[kId] += 0.37;
    x[kVq] = 0.0;
    StateVec dx{};
    REQUIRE(derivatives(x, Inputs{}, p, dx) == DerivStatus::kOk);
    const double sigma = p.sigma_eff();
    CHECK(dx[kVd] / rate == doctest::Approx(sigma * (x[kId] - x[kIgd])).epsilon(1e-12));
  }

  // Doubling c_g halves the voltage slope when the rotation term is absent.
  PlantParams p2 = nominal();
  StateVec x2 = steady_state_init(p2);
  x2[kId] += 0.37;
  x2[kVq] = 0.0;
  StateVec dxa{}, dxb{};
  REQUIRE(derivatives(x2, Inputs{}, p2, dxa) == DerivStatus::kOk);
  p2.grid.c_g *= 2.0;
  p2.grid.c_g_hi = 1.0;
  REQUIRE(derivatives(x2, Inputs{}, p2, dxb) == DerivStatus::kOk);
  CHECK(dxb[kVd] == doctest::Approx(0.5 * dxa[kVd]).epsilon(1e-12));
}

TEST_CASE("current reference and modulation limits hold everywhere") {
  const PlantParams p = nominal();
  const double i_lim = p.conv.i_limit_effective(p.base.s_base_mva);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StateVec base = steady_state_init(p);
  for (int i = 0; i < 200; ++i) {
    StateVec x = base;
    for (int k = 0; k < kNumStates; ++k) x[k] += 0.3 * u(rng) * (1.0 + std::abs(x[k]));
    if (std::abs(x[kVd]) < 0.1) x[kVd] = 0.5;
    Inputs in;
    in.p_tilde = 40.0 * u(rng);  // deliberately excessive
    in.q_tilde = 40.0 * u(rng);
    StateVec dx{};
    Algebraics alg;
    if (derivatives(x, in, p, dx, &alg) != DerivStatus::kOk) continue;
    CHECK(std::hypot(alg.i_ref.d, alg.i_ref.q) <= i_lim * (1.0 + 1e-12));
    CHECK(std::hypot(alg.modulation.d, alg.modulation.q) <= 1.0 + 1e-12);
  }
}

TEST_CASE("degenerate voltage and non-finite states are flagged") {
  const PlantParams p = nominal();
  StateVec x = steady_state_init(p);
  StateVec dx{};
  x[kVd] = 0.01;
  CHECK(derivatives(x, Inputs{}, p, dx) == DerivStatus::kDegenerateVoltage);
  x[kVd] = std::nan("");
  CHECK(derivatives(x, Inputs{}, p, dx) == DerivStatus::kNonFinite);
}

TEST_CASE("measure reflects the power convention") {
  const PlantParams p = nominal();
  StateVec x{};
  x[kVd] = 1.0;
  x[kVq] = 0.0;
  x[kId] = 2.0;
  x[kIq] = 0.0;
  CHECK(measure(x, p).p_out == doctest::Approx(3.0));
  x[kVd] = 3.0;
  x[kVq] = 4.0;
  CHECK(measure(x, p).v_n == doctest::Approx(5.0));
}

TEST_CASE("p_ref step event") {
  PlantParams p = nominal();
  Event e;
  e.kind = EventKind::kStepPRef;
  e.time = 1.0;
  e.value = 0.005 * 7.00;
  apply_event(p, e, 1.0);
  CHECK(p.outer.p_ref == doctest::Approx(7.035));
}

TEST_CASE("c_g ramp interpolates linearly") {
  PlantParams p = nominal();
  p.grid.c_g_hi = 0.40;
  Event e;
  e.kind = EventKind::kRampCg;
  e.time = 1.0;
  e.value = 0.2454;
  e.t_start = 1.0;
  e.t_end = 11.0;
  apply_event(p, e, 1.0);
  CHECK(p.grid.c_g == doctest::Approx(0.0963));
  apply_event(p, e, 6.0);
  CHECK(p.grid.c_g == doctest::Approx(0.17085));
  apply_event(p, e, 42.0);
  CHECK(p.grid.c_g == doctest::Approx(0.2454));
}

TEST_CASE("fault shunt applies and clears") {
  PlantParams p = nominal();
  Event e;
  e.kind = EventKind::kFault;
  e.time = 2.0;
  e.value = 15.0;
  e.duration = 1.0 / 60.0;
  apply_event(p, e, 2.0);
  CHECK(p.grid.fault_admittance == 15.0);
  Event clear = e;
  clear.kind = EventKind::kFaultClear;
  apply_event(p, clear, 2.0 + e.duration);
  CHECK(p.grid.fault_admittance == 0.0);
}

TEST_CASE("set_grid event swaps the Thevenin branch") {
  PlantParams p = nominal();
  Event e;
  e.kind = EventKind::kSetGrid;
  e.r_g = 0.02;
  e.l_g = 0.2;
  apply_event(p, e, 0.0);
  CHECK(p.grid.r_g == 0.02);
  CHECK(p.grid.l_g == 0.2);
}
