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

#include "ssolab/synthesis.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ssolab/config.hpp"
#include "ssolab/sdp.hpp"

namespace ssolab::synth {

namespace {

// Decision variable order used by the fixed-k subproblem.
enum VarIndex : int {
  kPv = 0, kPvEta, kPvI, kPEta, kPEtaI, kPI, kXv, kXEta, kXi, kXlo, kNumVars
};

DecisionVars from_vector(const Eigen::VectorXd& y, double k) {
  DecisionVars v;
  v.p_v = y(kPv);
  v.p_v_eta = y(kPvEta);
  v.p_v_i = y(kPvI);
  v.p_eta = y(kPEta);
  v.p_eta_i = y(kPEtaI);
  v.p_i = y(kPI);
  v.x_v = y(kXv);
  v.x_eta = y(kXEta);
  v.x_i = y(kXi);
  v.x_lo = y(kXlo);
  v.k = k;
  return v;
}

Eigen::VectorXd to_vector(const DecisionVars& v) {
  Eigen::VectorXd y(kNumVars);
  y << v.p_v, v.p_v_eta, v.p_v_i, v.p_eta, v.p_eta_i, v.p_i, v.x_v, v.x_eta, v.x_i, v.x_lo;
  return y;
}

double min_eig_sym(const Eigen::Matrix3d& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw std::logic_error("matrix expected symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Affine expansion of a 3x3 constraint in the decision variables, built by
// probing assemble_* at unit vectors (exact, the entries are affine).
sdp::LmiBlock affine_block(const std::function<Eigen::Matrix3d(const DecisionVars&)>& f,
                           double k) {
  sdp::LmiBlock b;
  b.F0 = f(from_vector(Eigen::VectorXd::Zero(kNumVars), k));
  b.F.resize(kNumVars);
  for (int i = 0; i < kNumVars; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(kNumVars);
    e(i) = 1.0;
    b.F[i] = f(from_vector(e, k)) - b.F0;
  }
  return b;
}

sdp::LmiBlock scalar_block(const Eigen::VectorXd& coeffs, double constant) {
  sdp::LmiBlock b;
  b.F0 = Eigen::MatrixXd::Constant(1, 1, constant);
  b.F.resize(coeffs.size());
  for (int i = 0; i < coeffs.size(); ++i)
    b.F[i] = Eigen::MatrixXd::Constant(1, 1, coeffs(i));
  return b;
}

sdp::LmiProblem build_problem(double k, const DesignSpec& spec) {
  sdp::LmiProblem pb;
  pb.c = Eigen::VectorXd::Zero(kNumVars);
  pb.c(kXlo) = -1.0;  // maximize x_lo

  pb.blocks.push_back(affine_block([](const DecisionVars& v) { return assemble_P(v); }, k));
  pb.blocks.push_back(affine_block(
      [&](const DecisionVars& v) {
        return (assemble_Q(v, spec.sigma_lo, spec) - spec.alpha * assemble_P(v)).eval();
      },
      k));
  pb.blocks.push_back(affine_block(
      [&](const DecisionVars& v) {
        return (assemble_Q(v, spec.sigma_hi, spec) - spec.alpha * assemble_P(v)).eval();
      },
      k));

  auto unit = [&](int i, double s) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(kNumVars);
    c(i) = s;
    return c;
  };
  // x_lo >= 1 and x_. >= x_lo.
  pb.blocks.push_back(scalar_block(unit(kXlo, 1.0), -1.0));
  for (int i : {kXv, kXEta, kXi}) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(kNumVars);
    c(i) = 1.0;
    c(kXlo) = -1.0;
    pb.blocks.push_back(scalar_block(c, 0.0));
  }
  // Compactness boxes.
  for (int i : {kPv, kPvEta, kPvI, kPEta, kPEtaI, kPI}) {
    pb.blocks.push_back(scalar_block(unit(i, 1.0), spec.p_box));
    pb.blocks.push_back(scalar_block(unit(i, -1.0), spec.p_box));
  }
  for (int i : {kXv, kXEta, kXi, kXlo})
    pb.blocks.push_back(scalar_block(unit(i, -1.0), spec.x_box));
  return pb;
}

}  // namespace

void DesignSpec::validate() const {
  if (!(sigma_lo > 0.0 && sigma_lo <= sigma_hi))
    throw std::invalid_argument("DesignSpec.sigma bounds must satisfy 0 < lo <= hi");
  if (!(alpha > 0.0)) throw std::invalid_argument("DesignSpec.alpha must be positive");
  if (!(mu >= 0.0)) throw std::invalid_argument("DesignSpec.mu must be non-negative");
  if (!(psd_tol > 0.0)) throw std::invalid_argument("DesignSpec.psd_tol must be positive");
  if (!(psi > 0.0 && beta > 0.0 && k_pv > 0.0))
    throw std::invalid_argument("DesignSpec.psi, beta, k_pv must be positive");
}

std::vector<double> DesignSpec::k_grid_or_default() const {
  if (!k_grid.empty()) return k_grid;
  // Log-spaced candidates whose closed-loop supplementary bandwidth sits
  // between the SSO band and the inner current loop.
  return {6.0, 10.0, 16.0, 25.0, 40.0, 63.0, 100.0};
}

Eigen::Matrix3d assemble_P(const DecisionVars& v) {
  Eigen::Matrix3d p;
  p << v.p_v, v.p_v_eta, v.p_v_i,
       v.p_v_eta, v.p_eta, v.p_eta_i,
       v.p_v_i, v.p_eta_i, v.p_i;
  return p;
}

Eigen::Matrix3d assemble_Q(const DecisionVars& v, double sigma, const DesignSpec& spec) {
  const double psi = spec.psi, beta = spec.beta, kpv = spec.k_pv, k = v.k;
  const double q_v = v.p_v * k - v.p_v_eta * beta - 1.0 - v.x_v / 4.0;
  const double q_eta = -v.p_eta * (psi - beta) + v.p_v_eta * kpv * sigma - v.p_eta_i -
                       1.0 - v.x_eta / 4.0;
  const double q_i =
      v.p_i * psi + v.p_eta_i * psi * (psi - beta) - 1.0 - v.x_i / 4.0;
  const double q_veta = 0.5 * (v.p_v * kpv * sigma - v.p_eta * beta -
                               v.p_v_eta * (psi - beta) - v.p_v_i + v.p_v_eta * k);
  // The eta/integral cross entry carries beta, matching the expansion of
  // V-dot against the eta dynamics (the published closed form shows psi
  // here, which drops one cross term of the expansion).
  const double q_etai = 0.5 * (v.p_eta * psi * (psi - beta) + v.p_v_i * kpv * sigma -
                               v.p_i + v.p_eta_i * beta);
  const double q_vi = 0.5 * (v.p_v_eta * psi * (psi - beta) + v.p_v_i * (psi + k) -
                             v.p_eta_i * beta);
  Eigen::Matrix3d q;
  q << q_v, q_veta, q_vi,
       q_veta, q_eta, q_etai,
       q_vi, q_etai, q_i;
  return q;
}

std::array<double, 3> feasibility_margins(const Eigen::Matrix3d& P,
                                          const Eigen::Matrix3d& Q_lo,
                                          const Eigen::Matrix3d& Q_hi, double alpha) {
  return {min_eig_sym(P), min_eig_sym(Q_lo - alpha * P), min_eig_sym(Q_hi - alpha * P)};
}

Certificate check_feasible(const DecisionVars& vars, const DesignSpec& spec) {
  spec.validate();
  Certificate c;
  c.vars = vars;
  c.P = assemble_P(vars);
  c.Q_lo = assemble_Q(vars, spec.sigma_lo, spec);
  c.Q_hi = assemble_Q(vars, spec.sigma_hi, spec);
  c.min_eigs = feasibility_margins(c.P, c.Q_lo, c.Q_hi, spec.alpha);

  double scale = std::max({c.P.cwiseAbs().maxCoeff(), c.Q_lo.cwiseAbs().maxCoeff(),
                           c.Q_hi.cwiseAbs().maxCoeff()});
  c.psd_tol_effective = spec.psd_tol * (1.0 + scale);

  const bool scalars_ok = vars.k > 0.0 && vars.x_lo >= 1.0 && vars.x_v >= vars.x_lo &&
                          vars.x_eta >= vars.x_lo && vars.x_i >= vars.x_lo;
  const bool eigs_ok = c.min_eigs[0] > c.psd_tol_effective &&
                       c.min_eigs[1] > c.psd_tol_effective &&
                       c.min_eigs[2] > c.psd_tol_effective;
  c.feasible = scalars_ok && eigs_ok;
  c.gamma_bar = vars.x_lo > 0.0 ? 1.0 / std::sqrt(vars.x_lo) : 0.0;
  c.objective = -vars.x_lo + spec.mu * vars.k;
  c.sigma_lo = spec.sigma_lo;
  c.sigma_hi = spec.sigma_hi;
  c.alpha = spec.alpha;
  c.mu = spec.mu;
  c.psi = spec.psi;
  c.beta = spec.beta;
  c.k_pv = spec.k_pv;
  if (!c.feasible) {
    std::ostringstream os;
    os << "infeasible: min eigs (" << c.min_eigs[0] << ", " << c.min_eigs[1] << ", "
       << c.min_eigs[2] << ")";
    if (!scalars_ok) os << ", scalar constraint violated";
    c.message = os.str();
  } else {
    c.message = "feasible";
  }
  return c;
}

FixedKResult solve_fixed_k(double k, const DesignSpec& spec) {
  spec.validate();
  FixedKResult out;
  out.k = k;
  if (!(k > 0.0)) {
    out.message = "k must be positive";
    return out;
  }

  sdp::LmiProblem pb = build_problem(k, spec);
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(kNumVars);
  y0(kPv) = y0(kPEta) = y0(kPI) = 1.0;
  y0(kXv) = y0(kXEta) = y0(kXi) = 2.0;
  y0(kXlo) = 1.5;

  sdp::LmiResult r = sdp::solve(pb, y0);
  if (!r.feasible) {
    out.feasible = false;
    out.infeasibility_margin = std::max(0.0, r.phase1_margin);
    out.message = r.message;
    return out;
  }

  // Back off from the maximizer and recenter so every eigenvalue margin is
  // strictly interior. Within the 1e-4 relative optimality contract.
  const double x_star = r.y(kXlo);
  for (double backoff : {1e-4 * (1.0 + std::abs(x_star)), 1e-3 * (1.0 + std::abs(x_star))}) {
    sdp::LmiProblem centered = pb;
    centered.c.setZero();
    Eigen::VectorXd floor_c = Eigen::VectorXd::Zero(kNumVars);
    floor_c(kXlo) = 1.0;
    centered.blocks.push_back(scalar_block(floor_c, -(x_star - backoff)));
    sdp::LmiResult rc = sdp::solve(centered, r.y);
    if (!rc.feasible) continue;
    DecisionVars vars = from_vector(rc.y, k);
    Certificate cert = check_feasible(vars, spec);
    if (cert.feasible) {
      out.feasible = true;
      out.vars = vars;
      out.x_lo = vars.x_lo;
      out.message = "ok";
      return out;
    }
  }

  // Fall back to the raw maximizer; the caller revalidates.
  out.vars = from_vector(r.y, k);
  out.x_lo = out.vars.x_lo;
  Certificate cert = check_feasible(out.vars, spec);
  out.feasible = cert.feasible;
  out.message = cert.feasible ? "ok (no backoff)" : "solver point failed revalidation";
  return out;
}

SynthesisResult synthesize(const DesignSpec& spec) {
  spec.validate();
  SynthesisResult res;
  const std::vector<double> grid = spec.k_grid_or_default();
  if (grid.empty()) throw std::invalid_argument("k_grid must not be empty");

  double best_objective = std::numeric_limits<double>::infinity();
  std::optional<DecisionVars> best;
  for (double k : grid) {
    FixedKResult r = solve_fixed_k(k, spec);
    res.per_k.push_back(r);
    if (!r.feasible) continue;
    const double obj = -r.x_lo + spec.mu * k;
    if (obj < best_objective) {
      best_objective = obj;
      best = r.vars;
    }
  }
  if (!best) {
    res.found = false;
    res.message = "no feasible k in the grid";
    return res;
  }
  res.certificate = check_feasible(*best, spec);
  res.found = res.certificate.feasible;
  res.message = res.found ? "ok" : "selected point failed revalidation";
  return res;
}

AlphaSearchResult alpha_search(const DesignSpec& spec, double alpha_lo, double alpha_hi,
                               double tol) {
  if (!(alpha_lo > 0.0 && alpha_lo < alpha_hi))
    throw std::invalid_argument("alpha_search requires 0 < alpha_lo < alpha_hi");
  AlphaSearchResult out;
  auto try_alpha = [&](double a) {
    DesignSpec s = spec;
    s.alpha = a;
    return synthesize(s);
  };

  SynthesisResult at_lo = try_alpha(alpha_lo);
  if (!at_lo.found) {
    out.message = "infeasible at the lower end of the range";
    return out;
  }
  SynthesisResult at_hi = try_alpha(alpha_hi);
  if (at_hi.found) {
    out.found = true;
    out.alpha = alpha_hi;
    out.certificate = at_hi.certificate;
    out.message = "feasible over the whole range";
    return out;
  }

  double lo = alpha_lo, hi = alpha_hi;
  Certificate best = at_lo.certificate;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    SynthesisResult r = try_alpha(mid);
    if (r.found) {
      lo = mid;
      best = r.certificate;
    } else {
      hi = mid;
    }
  }
  out.found = true;
  out.alpha = lo;
  out.certificate = best;
  out.message = "ok";
  return out;
}

std::string certificate_to_text(const Certificate& c) {
  std::ostringstream os;
  os.precision(17);
  os << "[certificate]\n";
  auto kv = [&](const char* key, double v) { os << key << " = " << v << "\n"; };
  kv("k", c.vars.k);
  kv("p_v", c.vars.p_v);
  kv("p_v_eta", c.vars.p_v_eta);
  kv("p_v_i", c.vars.p_v_i);
  kv("p_eta", c.vars.p_eta);
  kv("p_eta_i", c.vars.p_eta_i);
  kv("p_i", c.vars.p_i);
  kv("x_v", c.vars.x_v);
  kv("x_eta", c.vars.x_eta);
  kv("x_i", c.vars.x_i);
  kv("x_lo", c.vars.x_lo);
  kv("gamma_bar", c.gamma_bar);
  kv("objective", c.objective);
  kv("sigma_lo", c.sigma_lo);
  kv("sigma_hi", c.sigma_hi);
  kv("alpha", c.alpha);
  kv("mu", c.mu);
  kv("psi", c.psi);
  kv("beta", c.beta);
  kv("k_pv", c.k_pv);
  kv("min_eig_p", c.min_eigs[0]);
  kv("min_eig_q_lo", c.min_eigs[1]);
  kv("min_eig_q_hi", c.min_eigs[2]);
  return os.str();
}

Certificate certificate_from_file(const std::string& path) {
  config::Config cfg = config::Config::parse_file(path);
  const config::Section& s = cfg.require("certificate");
  DecisionVars v;
  v.k = s.get_number("k");
  v.p_v = s.get_number("p_v");
  v.p_v_eta = s.get_number("p_v_eta");
  v.p_v_i = s.get_number("p_v_i");
  v.p_eta = s.get_number("p_eta");
  v.p_eta_i = s.get_number("p_eta_i");
  v.p_i = s.get_number("p_i");
  v.x_v = s.get_number("x_v");
  v.x_eta = s.get_number("x_eta");
  v.x_i = s.get_number("x_i");
  v.x_lo = s.get_number("x_lo");
  DesignSpec spec;
  spec.sigma_lo = s.get_number("sigma_lo");
  spec.sigma_hi = s.get_number("sigma_hi");
  spec.alpha = s.get_number("alpha");
  spec.mu = s.get_number("mu");
  spec.psi = s.get_number("psi");
  spec.beta = s.get_number("beta");
  spec.k_pv = s.get_number("k_pv");
  // Stored derived values are recomputed, not trusted.
  s.get_number("gamma_bar", 0.0);
  s.get_number("objective", 0.0);
  s.get_number("min_eig_p", 0.0);
  s.get_number("min_eig_q_lo", 0.0);
  s.get_number("min_eig_q_hi", 0.0);
  cfg.reject_unknown_keys();
  return check_feasible(v, spec);
}

}  // namespace ssolab::synth
