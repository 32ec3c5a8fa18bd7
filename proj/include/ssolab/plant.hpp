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

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssolab/phasor.hpp"

namespace ssolab::plant {

// Thevenin grid seen from the POI: series r_g-l_g behind v_g plus the
// uncertain shunt capacitance c_g. fault_admittance is a temporary extra
// shunt conductance (0 when no fault is applied). The branch follows its
// quasistationary phasor solution with the short lag tau_g. z_base_scale
// converts quoted impedances onto the model's current/power base (3/2 when
// the quotes are on the standard V_ll^2/S base, 1 when they already match).
struct GridParams {
  double r_g = 0.0140;
  double l_g = 0.1402;
  double c_g = 0.0963;
  double c_g_lo = 0.02;
  double c_g_hi = 0.40;
  Phasor2 v_g{1.0, 0.0};
  double omega_s = 1.0;
  double fault_admittance = 0.0;
  double tau_g = 2e-3;
  double z_base_scale = 1.5;

  double r_eff() const { return z_base_scale * r_g; }
  double l_eff() const { return z_base_scale * l_g; }
  double c_eff() const { return c_g / z_base_scale; }
  double fault_eff() const { return fault_admittance / z_base_scale; }
};

// Converter circuit constants. Impedances are given on the converter rating
// s_rated_mva and converted to the system base internally.
struct ConverterParams {
  double s_rated_mva = 900.0;  // carries the reactive duty of the weak grid
  double tau_c = 0.05;
  double c_c = 1.7370;
  double r = 0.0033;
  double r_on = 0.0023;
  double l = 0.2454;
  double r_tf = 0.0;
  double l_tf = 0.15;
  double i_limit = 0.0;  // system-base peak current; 0 = derive 1.15 x rated
  double m_limit = 1.0;
  double k_mod = 1.5;    // terminal voltage per (modulation x v_dc), from the bases
  double k_vdc = 5.0;    // dc voltage-support droop, pu current per pu error
  double v_dc_ref = 1.0;

  double z_base_scale = 1.5;
  double rating_ratio(double s_base_mva) const { return s_rated_mva / s_base_mva; }
  double r_total(double s_base_mva) const {
    return z_base_scale * (r + r_on + r_tf) / rating_ratio(s_base_mva);
  }
  double l_total(double s_base_mva) const {
    return z_base_scale * (l + l_tf) / rating_ratio(s_base_mva);
  }
  double i_limit_effective(double s_base_mva) const {
    return i_limit > 0.0 ? i_limit : 1.15 * (2.0 / 3.0) * rating_ratio(s_base_mva);
  }
};

struct PllParams {
  double k_p = 101.0;
  double k_i = 2562.0;
  double tau_m = 1e-3;
};

struct OuterLoopParams {
  double p_ref = 7.00;
  double v_ref = 1.04;
  double k_pv = 11.5;
  double k_iv = 20.0;
  double tau_f = 0.05;

  double psi() const { return k_iv / k_pv; }
  double beta() const { return 1.0 / tau_f; }
};

struct InnerLoopParams {
  // Closed-loop current bandwidth in rad/s; PI gains derive from it and the
  // filter impedance so the loop is first order at omega_cc.
  double omega_cc = 400.0;
  // PI zero at omega_cc / zero_ratio.
  double zero_ratio = 5.0;
  // First-order lag on the POI voltage feedforward; keeps the converter
  // passive around the filter/grid LC resonance while preserving the
  // low-frequency operating behavior.
  double tau_ff = 2e-3;
  // Cross-coupling decoupling terms use the live PLL speed when true, the
  // synchronous speed otherwise.
  bool decouple_with_pll_speed = true;

  double k_p(double l_total, double omega_base) const { return omega_cc * l_total / omega_base; }
  double k_i(double l_total, double omega_base) const {
    return k_p(l_total, omega_base) * omega_cc / zero_ratio;
  }
};

struct ModelOptions {
  double v_d_floor = 0.05;
  bool ideal_current_tracking = false;
  // Test-only: realize a commanded q-axis input u_q through the exact design
  // conversion i_q = (v_n / v_q) u_q instead of the voltage-PI reactive path.
  bool q_channel_design = false;
  // The POI node satisfies c_g dv_d/dtau = c_g w v_q + i_d - i_gd (and its
  // q-axis twin) on a normalized time axis. Physically tau advances at the
  // base angular speed; the reduced design model reads the same equation on
  // a unit time axis (used by the design-consistency tests).
  bool physical_node_time = true;
};

struct PlantParams {
  PerUnitBase base;
  GridParams grid;
  ConverterParams conv;
  PllParams pll;
  OuterLoopParams outer;
  InnerLoopParams inner;
  ModelOptions opts;

  // Reciprocal grid capacitance in the quoted (standard-base) units; this is
  // the quantity the adaptive controller estimates.
  double sigma_g() const { return 1.0 / grid.c_g; }
  // Node-equation coefficient in internal units.
  double sigma_eff() const { return 1.0 / grid.c_eff(); }
};

// State vector layout. Names follow the signals they hold.
enum StateIndex : int {
  kId = 0,     // converter current d (system base, peak convention)
  kIq,         // converter current q
  kVdc,        // dc-link voltage (converter base)
  kIsrc,       // dc source lag state (converter base)
  kXpll,       // PLL integrator, integral of measured v_q
  kDelta,      // PLL angle relative to the synchronous frame, rad (unwrapped)
  kVqm,        // measurement-lag state of v_q feeding the PLL
  kGammaD,     // inner current PI integrator, d axis
  kGammaQ,     // inner current PI integrator, q axis
  kXv,         // outer voltage PI integrator
  kVf,         // filtered POI voltage magnitude
  kVffd,       // feedforward lag state, d axis
  kVffq,       // feedforward lag state, q axis
  kVd,         // POI voltage d
  kVq,         // POI voltage q
  kIgd,        // grid branch current d
  kIgq,        // grid branch current q
  kNumStates
};

using StateVec = std::array<double, kNumStates>;

const std::array<std::string, kNumStates>& state_names();

// Supplementary/exogenous inputs to the plant. d_igd/d_igq are additive grid
// current disturbances at the POI node (linearization input channels).
struct Inputs {
  double p_tilde = 0.0;
  double q_tilde = 0.0;
  double u_q_design = 0.0;  // used only with ModelOptions::q_channel_design
  double d_igd = 0.0;
  double d_igq = 0.0;
};

enum class DerivStatus { kOk, kDegenerateVoltage, kNonFinite };

// Algebraic signals of one derivative evaluation, for logging and tests.
struct Algebraics {
  double omega_pu = 1.0;
  double v_n = 0.0;
  double q_ref = 0.0;
  double p_cmd = 0.0;
  double q_cmd = 0.0;
  Phasor2 i_ref{};           // after the magnitude clamp
  Phasor2 modulation{};      // after the magnitude clamp
  double p_poi = 0.0;
  double q_poi = 0.0;
  bool current_clamped = false;
  bool modulation_clamped = false;
};

// Time derivative of every state. Pure function of (state, inputs, params).
DerivStatus derivatives(const StateVec& x, const Inputs& u, const PlantParams& p,
                        StateVec& dx, Algebraics* alg = nullptr);

struct Measurements {
  double v_d = 0.0;
  double v_q = 0.0;
  double v_n = 0.0;
  double v_f = 0.0;
  double omega_pll = 1.0;  // pu
  double p_out = 0.0;
  double q_out = 0.0;
};

Measurements measure(const StateVec& x, const PlantParams& p);

struct InitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Steady state with all limits inactive and derivative norm below tol.
// Closed-form power-flow seed followed by a damped Newton polish.
StateVec steady_state_init(const PlantParams& p, double tol = 1e-10, int max_iter = 40);

// Largest residual component of the derivative at x with zero inputs.
double residual_inf_norm(const StateVec& x, const PlantParams& p);

// POI voltage magnitude of the analytic no-load equilibrium (p_ref = 0,
// converter current identically zero); useful as a consistent v_ref.
double no_load_voltage(const PlantParams& p);

enum class EventKind { kStepPRef, kRampCg, kFault, kFaultClear, kSetGrid };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kStepPRef;
  double value = 0.0;     // step delta / ramp target / fault admittance
  double t_start = 0.0;   // ramp window
  double t_end = 0.0;
  double duration = 0.0;  // fault duration
  double r_g = 0.0;       // set_grid payload
  double l_g = 0.0;
  double ramp_from = std::nan("");  // captured at first application
};

// Applies (or, for ramps, advances) an event at time `now`. Ramps interpolate
// linearly between t_start and t_end starting from the c_g seen first.
void apply_event(PlantParams& p, Event& e, double now);

}  // namespace ssolab::plant
