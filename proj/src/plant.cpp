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

#include "ssolab/plant.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <complex>

namespace ssolab::plant {

const std::array<std::string, kNumStates>& state_names() {
  static const std::array<std::string, kNumStates> names = {
      "i_d",     "i_q", "v_dc", "i_src", "x_pll", "delta_pll", "v_qm", "gamma_d",
      "gamma_q", "x_v", "v_f",  "v_ff_d", "v_ff_q", "v_d",     "v_q",  "i_gd",
      "i_gq"};
  return names;
}

namespace {

// Clamp a dq pair to a magnitude limit, preserving its direction.
bool clamp_magnitude(double& d, double& q, double limit) {
  const double n = std::hypot(d, q);
  if (n <= limit || n == 0.0) return false;
  const double s = limit / n;
  d *= s;
  q *= s;
  return true;
}

}  // namespace

DerivStatus derivatives(const StateVec& x, const Inputs& u, const PlantParams& p,
                        StateVec& dx, Algebraics* alg) {
  for (double v : x)
    if (!std::isfinite(v)) return DerivStatus::kNonFinite;

  const double omega_b = p.base.omega_base();
  const double s_base = p.base.s_base_mva;
  const double v_d = x[kVd], v_q = x[kVq];
  if (std::abs(v_d) < p.opts.v_d_floor) return DerivStatus::kDegenerateVoltage;

  const double v_n = std::hypot(v_d, v_q);
  const double sigma = p.sigma_eff();

  // PLL and frame speed. Gains act on the measured (lagged) v_q in rad/s.
  const double domega_pll = p.pll.k_p * x[kVqm] + p.pll.k_i * x[kXpll];
  const double omega = p.grid.omega_s + domega_pll / omega_b;

  // Outer voltage loop: first-order filter on v_n, then PI to q_ref.
  const double beta = p.outer.beta();
  const double q_ref = p.outer.k_pv * (p.outer.v_ref - x[kVf]) + p.outer.k_iv * x[kXv];
  const double p_cmd = p.outer.p_ref + u.p_tilde;
  const double q_cmd = q_ref + u.q_tilde;

  // Power commands to current references (amplitude-invariant convention).
  double i_d_ref = 2.0 * p_cmd / (3.0 * v_d);
  double i_q_ref;
  if (p.opts.q_channel_design) {
    // Exact design-model reactive channel; requires v_q away from zero.
    if (std::abs(v_q) < 1e-9) return DerivStatus::kDegenerateVoltage;
    i_q_ref = (v_n / v_q) * u.u_q_design;
  } else {
    i_q_ref = -2.0 * q_cmd / (3.0 * v_d);
  }
  const double i_limit = p.conv.i_limit_effective(s_base);
  const bool i_clamped = clamp_magnitude(i_d_ref, i_q_ref, i_limit);

  const double r_t = p.conv.r_total(s_base);
  const double l_t = p.conv.l_total(s_base);
  const double k_pi = p.inner.k_p(l_t, omega_b);
  const double k_ii = p.inner.k_i(l_t, omega_b);

  // Inner current control with decoupling and terminal-voltage feedforward.
  const double e_d = i_d_ref - x[kId];
  const double e_q = i_q_ref - x[kIq];
  const double omega_dec = p.inner.decouple_with_pll_speed ? omega : p.grid.omega_s;
  const double v_td_ref = x[kVffd] + k_pi * e_d + k_ii * x[kGammaD] - omega_dec * l_t * x[kIq];
  const double v_tq_ref = x[kVffq] + k_pi * e_q + k_ii * x[kGammaQ] + omega_dec * l_t * x[kId];

  double m_d = v_td_ref / (p.conv.k_mod * std::max(x[kVdc], 0.2));
  double m_q = v_tq_ref / (p.conv.k_mod * std::max(x[kVdc], 0.2));
  const bool m_clamped = clamp_magnitude(m_d, m_q, p.conv.m_limit);
  const double v_td = p.conv.k_mod * x[kVdc] * m_d;
  const double v_tq = p.conv.k_mod * x[kVdc] * m_q;

  // Effective converter current injected at the POI.
  double i_d_eff = x[kId], i_q_eff = x[kIq];
  if (p.opts.ideal_current_tracking) {
    i_d_eff = i_d_ref;
    i_q_eff = i_q_ref;
  }

  // POI node: c_g v'_d = c_g w v_q + i_d - i_gd, c_g v'_q = -c_g w v_d + i_q - i_gq,
  // with the fault shunt and the exogenous current disturbances drawn from it.
  const double g_f = p.grid.fault_eff();
  const double node_rate = p.opts.physical_node_time ? omega_b : 1.0;
  dx[kVd] = node_rate * (omega * v_q + sigma * (i_d_eff - x[kIgd] - u.d_igd - g_f * v_d));
  dx[kVq] = node_rate * (-omega * v_d + sigma * (i_q_eff - x[kIgq] - u.d_igq - g_f * v_q));

  // Grid branch; the Thevenin source rotates with -delta in the PLL frame.
  // Electromagnetic form alongside the physical node; quasistationary phasor
  // tracking (lag tau_g) alongside the normalized design node.
  {
    const double cd = std::cos(x[kDelta]), sd = std::sin(x[kDelta]);
    const double v_gd = p.grid.v_g.d * cd + p.grid.v_g.q * sd;
    const double v_gq = -p.grid.v_g.d * sd + p.grid.v_g.q * cd;
    if (p.opts.physical_node_time) {
      dx[kIgd] = (omega_b / p.grid.l_eff()) * (v_d - v_gd - p.grid.r_eff() * x[kIgd]) +
                 omega * omega_b * x[kIgq];
      dx[kIgq] = (omega_b / p.grid.l_eff()) * (v_q - v_gq - p.grid.r_eff() * x[kIgq]) -
                 omega * omega_b * x[kIgd];
    } else {
      const std::complex<double> z(p.grid.r_eff(), omega * p.grid.l_eff());
      const std::complex<double> ig_qs =
          (std::complex<double>(v_d - v_gd, v_q - v_gq)) / z;
      dx[kIgd] = (ig_qs.real() - x[kIgd]) / p.grid.tau_g;
      dx[kIgq] = (ig_qs.imag() - x[kIgq]) / p.grid.tau_g;
    }
  }

  // Converter filter branch.
  if (p.opts.ideal_current_tracking) {
    dx[kId] = (i_d_ref - x[kId]) / 1e-4;
    dx[kIq] = (i_q_ref - x[kIq]) / 1e-4;
    dx[kGammaD] = 0.0;
    dx[kGammaQ] = 0.0;
  } else {
    dx[kId] = (omega_b / l_t) * (v_td - v_d - r_t * x[kId]) + omega * omega_b * x[kIq];
    dx[kIq] = (omega_b / l_t) * (v_tq - v_q - r_t * x[kIq]) - omega * omega_b * x[kId];
    dx[kGammaD] = e_d;
    dx[kGammaQ] = e_q;
  }

  // PLL states.
  dx[kVqm] = (v_q - x[kVqm]) / p.pll.tau_m;
  dx[kXpll] = x[kVqm];
  dx[kDelta] = domega_pll;

  // Outer loop states.
  dx[kVf] = beta * (v_n - x[kVf]);
  dx[kXv] = p.outer.v_ref - x[kVf];
  dx[kVffd] = (v_d - x[kVffd]) / p.inner.tau_ff;
  dx[kVffq] = (v_q - x[kVffq]) / p.inner.tau_ff;

  // DC link on the converter base: lagged source current into the capacitor,
  // averaged bridge drawing p_ac / v_dc.
  const double ratio = p.conv.rating_ratio(s_base);
  const double p_ac_cb = 1.5 * (v_td * x[kId] + v_tq * x[kIq]) / ratio;
  const double p_ref_cb = p.outer.p_ref / ratio;
  const double v_dc_safe = std::max(x[kVdc], 0.2);
  dx[kVdc] = (omega_b / p.conv.c_c) *
             (x[kIsrc] + p.conv.k_vdc * (p.conv.v_dc_ref - x[kVdc]) - p_ac_cb / v_dc_safe);
  dx[kIsrc] = (p_ref_cb / v_dc_safe - x[kIsrc]) / p.conv.tau_c;

  if (alg) {
    alg->omega_pu = omega;
    alg->v_n = v_n;
    alg->q_ref = q_ref;
    alg->p_cmd = p_cmd;
    alg->q_cmd = q_cmd;
    alg->i_ref = {i_d_ref, i_q_ref};
    alg->modulation = {m_d, m_q};
    alg->p_poi = 1.5 * (v_d * i_d_eff + v_q * i_q_eff);
    alg->q_poi = 1.5 * (v_q * i_d_eff - v_d * i_q_eff);
    alg->current_clamped = i_clamped;
    alg->modulation_clamped = m_clamped;
  }
  return DerivStatus::kOk;
}

Measurements measure(const StateVec& x, const PlantParams& p) {
  Measurements m;
  m.v_d = x[kVd];
  m.v_q = x[kVq];
  m.v_n = std::hypot(x[kVd], x[kVq]);
  m.v_f = x[kVf];
  m.omega_pll =
      p.grid.omega_s + (p.pll.k_p * x[kVqm] + p.pll.k_i * x[kXpll]) / p.base.omega_base();
  m.p_out = 1.5 * (x[kVd] * x[kId] + x[kVq] * x[kIq]);
  m.q_out = 1.5 * (x[kVq] * x[kId] - x[kVd] * x[kIq]);
  return m;
}

double residual_inf_norm(const StateVec& x, const PlantParams& p) {
  StateVec dx{};
  if (derivatives(x, Inputs{}, p, dx) != DerivStatus::kOk)
    return std::numeric_limits<double>::infinity();
  double r = 0.0;
  for (double v : dx) r = std::max(r, std::abs(v));
  return r;
}

double no_load_voltage(const PlantParams& p) {
  const std::complex<double> j(0.0, 1.0);
  const std::complex<double> z(p.grid.r_eff(), p.grid.omega_s * p.grid.l_eff());
  const std::complex<double> vg(p.grid.v_g.d, p.grid.v_g.q);
  return std::abs(vg / (1.0 + j * p.grid.omega_s * p.grid.c_eff() * z));
}

namespace {

// Active power injected into the grid branch for a POI voltage v_ref at
// angle theta against the Thevenin source.
double branch_power(double theta, double v_ref, const GridParams& g) {
  const std::complex<double> v = std::polar(v_ref, theta);
  const std::complex<double> vg(g.v_g.d, g.v_g.q);
  const std::complex<double> z(g.r_eff(), g.omega_s * g.l_eff());
  const std::complex<double> ig = (v - vg) / z;
  return 1.5 * (v * std::conj(ig)).real();
}

StateVec analytic_seed(const PlantParams& p) {
  const GridParams& g = p.grid;
  const double v_ref = p.outer.v_ref;
  const double phi_g = std::atan2(g.v_g.q, g.v_g.d);

  // Find the rising-branch angle where the branch carries p_ref.
  const int scan = 400;
  const double span = 0.5 * 3.14159265358979323846 + std::atan2(g.r_eff(), g.omega_s * g.l_eff());
  double theta_peak = phi_g;
  double p_peak = branch_power(phi_g, v_ref, g);
  for (int i = 1; i <= scan; ++i) {
    const double th = phi_g + span * i / scan;
    const double pw = branch_power(th, v_ref, g);
    if (pw > p_peak) {
      p_peak = pw;
      theta_peak = th;
    }
  }
  if (p.outer.p_ref > p_peak)
    throw InitError("power flow infeasible: p_ref exceeds the transfer limit " +
                    std::to_string(p_peak));
  double lo = phi_g, hi = theta_peak;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (branch_power(mid, v_ref, g) < p.outer.p_ref ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);

  // Phasors in the PLL frame (d axis on the POI voltage).
  const std::complex<double> j(0.0, 1.0);
  const std::complex<double> v = std::polar(v_ref, theta);
  const std::complex<double> vg(g.v_g.d, g.v_g.q);
  const std::complex<double> z(g.r_eff(), g.omega_s * g.l_eff());
  const std::complex<double> ig_sys = (v - vg) / z;
  const std::complex<double> ig = ig_sys * std::exp(-j * theta);

  StateVec x{};
  x[kDelta] = theta;
  x[kVd] = v_ref;
  x[kVq] = 0.0;
  x[kIgd] = ig.real();
  x[kIgq] = ig.imag();
  // Slow-node steady state: the shunt current rides on the rotation terms.
  x[kId] = x[kIgd] - g.c_eff() * g.omega_s * x[kVq];
  x[kIq] = x[kIgq] + g.c_eff() * g.omega_s * x[kVd];
  x[kVf] = v_ref;
  const double q_ref = -1.5 * x[kVd] * x[kIq];
  x[kXv] = q_ref / p.outer.k_iv;
  const double s_base = p.base.s_base_mva;
  const double r_t = p.conv.r_total(s_base);
  const double l_t = p.conv.l_total(s_base);
  const double k_ii = p.inner.k_i(l_t, p.base.omega_base());
  x[kVffd] = x[kVd];
  x[kVffq] = x[kVq];
  x[kGammaD] = r_t * x[kId] / k_ii;
  x[kGammaQ] = r_t * x[kIq] / k_ii;
  x[kXpll] = 0.0;
  x[kVqm] = 0.0;

  const double v_td = x[kVd] + r_t * x[kId] - g.omega_s * l_t * x[kIq];
  const double v_tq = x[kVq] + r_t * x[kIq] + g.omega_s * l_t * x[kId];
  const double ratio = p.conv.rating_ratio(s_base);
  const double p_ac_cb = 1.5 * (v_td * x[kId] + v_tq * x[kIq]) / ratio;
  const double p_ref_cb = p.outer.p_ref / ratio;
  // Droop equilibrium: k_vdc v (v_ref - v) = p_ac - p_ref with the source at
  // p_ref / v.
  const double loss = p_ac_cb - p_ref_cb;
  const double disc = std::max(0.0, p.conv.v_dc_ref * p.conv.v_dc_ref -
                                        4.0 * loss / p.conv.k_vdc);
  x[kVdc] = 0.5 * (p.conv.v_dc_ref + std::sqrt(disc));
  x[kIsrc] = p_ref_cb / x[kVdc];
  return x;
}

}  // namespace

StateVec steady_state_init(const PlantParams& p, double tol, int max_iter) {
  StateVec x = analytic_seed(p);

  using Vec = Eigen::Matrix<double, kNumStates, 1>;
  using Mat = Eigen::Matrix<double, kNumStates, kNumStates>;

  auto eval = [&](const StateVec& s, StateVec& f) {
    if (derivatives(s, Inputs{}, p, f) != DerivStatus::kOk)
      throw InitError("derivative evaluation failed during Newton polish");
  };

  StateVec f{};
  eval(x, f);
  for (int iter = 0; iter < max_iter; ++iter) {
    double rnorm = 0.0;
    for (double v : f) rnorm = std::max(rnorm, std::abs(v));
    if (rnorm < tol) break;
    if (iter == max_iter - 1)
      throw InitError("Newton initialization did not converge; residual " +
                      std::to_string(rnorm));

    Mat J;
    StateVec fp{}, fm{};
    for (int c = 0; c < kNumStates; ++c) {
      const double h = 1e-7 * (1.0 + std::abs(x[c]));
      StateVec xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      eval(xp, fp);
      eval(xm, fm);
      for (int r = 0; r < kNumStates; ++r) J(r, c) = (fp[r] - fm[r]) / (2.0 * h);
    }
    Vec rhs;
    for (int i = 0; i < kNumStates; ++i) rhs(i) = -f[i];
    const Vec step = J.fullPivLu().solve(rhs);

    double lambda = 1.0;
    StateVec best = x;
    double best_norm = rnorm;
    for (int ls = 0; ls < 25; ++ls) {
      StateVec trial = x;
      for (int i = 0; i < kNumStates; ++i) trial[i] += lambda * step(i);
      StateVec ft{};
      bool ok = true;
      try {
        eval(trial, ft);
      } catch (const InitError&) {
        ok = false;
      }
      if (ok) {
        double tn = 0.0;
        for (double v : ft) tn = std::max(tn, std::abs(v));
        if (tn < best_norm) {
          best = trial;
          best_norm = tn;
          f = ft;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (best_norm >= rnorm) {
      if (rnorm < 1e-8) break;  // at numerical precision already
      throw InitError("Newton initialization stalled; residual " + std::to_string(rnorm));
    }
    x = best;
  }

  // The certificate of a valid operating point: no active limit.
  Algebraics alg;
  StateVec dx{};
  derivatives(x, Inputs{}, p, dx, &alg);
  if (alg.current_clamped || alg.modulation_clamped)
    throw InitError("steady state has an active converter limit");
  return x;
}

void apply_event(PlantParams& p, Event& e, double now) {
  switch (e.kind) {
    case EventKind::kStepPRef:
      p.outer.p_ref += e.value;
      break;
    case EventKind::kRampCg: {
      if (std::isnan(e.ramp_from)) e.ramp_from = p.grid.c_g;
      const double span = e.t_end - e.t_start;
      double s = span > 0.0 ? (now - e.t_start) / span : 1.0;
      s = std::clamp(s, 0.0, 1.0);
      p.grid.c_g = e.ramp_from + s * (e.value - e.ramp_from);
      break;
    }
    case EventKind::kFault:
      p.grid.fault_admittance = e.value;
      break;
    case EventKind::kFaultClear:
      p.grid.fault_admittance = 0.0;
      break;
    case EventKind::kSetGrid:
      p.grid.r_g = e.r_g;
      p.grid.l_g = e.l_g;
      break;
  }
}

}  // namespace ssolab::plant
