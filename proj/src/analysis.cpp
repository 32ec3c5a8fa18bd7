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

#include "ssolab/analysis.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "ssolab/rk4.hpp"

namespace ssolab::analysis {

namespace {

constexpr int kNumInputs = 3;  // p_tilde, d_igd, d_igq

Eigen::MatrixXd jacobian_states(const plant::PlantParams& p, const plant::StateVec& x0,
                                double h_rel) {
  const int n = plant::kNumStates;
  Eigen::MatrixXd J(n, n);
  plant::StateVec fp{}, fm{};
  for (int c = 0; c < n; ++c) {
    const double h = h_rel * (1.0 + std::abs(x0[c]));
    plant::StateVec xp = x0, xm = x0;
    xp[c] += h;
    xm[c] -= h;
    if (plant::derivatives(xp, plant::Inputs{}, p, fp) != plant::DerivStatus::kOk ||
        plant::derivatives(xm, plant::Inputs{}, p, fm) != plant::DerivStatus::kOk)
      throw std::runtime_error("derivative evaluation failed while linearizing");
    for (int r = 0; r < n; ++r) J(r, c) = (fp[r] - fm[r]) / (2.0 * h);
  }
  return J;
}

Eigen::MatrixXd jacobian_inputs(const plant::PlantParams& p, const plant::StateVec& x0,
                                double h) {
  const int n = plant::kNumStates;
  Eigen::MatrixXd B(n, kNumInputs);
  plant::StateVec fp{}, fm{};
  for (int c = 0; c < kNumInputs; ++c) {
    plant::Inputs up{}, um{};
    double* fields_p[kNumInputs] = {&up.p_tilde, &up.d_igd, &up.d_igq};
    double* fields_m[kNumInputs] = {&um.p_tilde, &um.d_igd, &um.d_igq};
    *fields_p[c] = h;
    *fields_m[c] = -h;
    if (plant::derivatives(x0, up, p, fp) != plant::DerivStatus::kOk ||
        plant::derivatives(x0, um, p, fm) != plant::DerivStatus::kOk)
      throw std::runtime_error("derivative evaluation failed while linearizing");
    for (int r = 0; r < n; ++r) B(r, c) = (fp[r] - fm[r]) / (2.0 * h);
  }
  return B;
}

}  // namespace

LinearModel linearize(const plant::PlantParams& p, const plant::StateVec& x0, double h_rel) {
  const double resid = plant::residual_inf_norm(x0, p);
  if (!(resid < 1e-8))
    throw std::runtime_error("linearize requires an equilibrium; residual " +
                             std::to_string(resid));

  LinearModel m;
  const Eigen::MatrixXd a_h = jacobian_states(p, x0, h_rel);
  const Eigen::MatrixXd a_h2 = jacobian_states(p, x0, 0.5 * h_rel);
  m.A = (4.0 * a_h2 - a_h) / 3.0;  // Richardson extrapolation of the central stencil
  const double scale = 1.0 + a_h2.cwiseAbs().maxCoeff();
  m.fd_consistency = (a_h2 - a_h).cwiseAbs().maxCoeff() / scale;

  m.B = jacobian_inputs(p, x0, 1e-6);
  // Output: POI voltage magnitude deviation.
  m.C = Eigen::MatrixXd::Zero(1, plant::kNumStates);
  const double v_n = std::hypot(x0[plant::kVd], x0[plant::kVq]);
  m.C(0, plant::kVd) = x0[plant::kVd] / v_n;
  m.C(0, plant::kVq) = x0[plant::kVq] / v_n;
  const auto& names = plant::state_names();
  m.labels.assign(names.begin(), names.end());
  m.x0 = x0;
  return m;
}

std::vector<Mode> modal_analysis(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("modal_analysis needs a square A");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd W = V.inverse();  // rows: left eigenvectors, w_i v_i = 1
  const int n = static_cast<int>(A.rows());

  std::vector<Mode> modes(n);
  for (int i = 0; i < n; ++i) {
    Mode& mo = modes[i];
    mo.eigenvalue = es.eigenvalues()(i);
    mo.freq_hz = std::abs(mo.eigenvalue.imag()) / (2.0 * 3.14159265358979323846);
    const double mag = std::abs(mo.eigenvalue);
    mo.damping_ratio = mag > 0.0 ? -mo.eigenvalue.real() / mag : 1.0;
    mo.participation.resize(n);
    mo.modeshape_angle.resize(n);
    double pmax = 0.0;
    for (int k = 0; k < n; ++k) {
      mo.participation[k] = std::abs(W(i, k) * V(k, i));
      mo.modeshape_angle[k] = std::arg(V(k, i));
      pmax = std::max(pmax, mo.participation[k]);
    }
    if (pmax > 0.0)
      for (double& v : mo.participation) v /= pmax;
  }
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    return a.damping_ratio < b.damping_ratio;
  });
  return modes;
}

std::complex<double> residue(const LinearModel& model, const Mode& mode, int input_idx,
                             int output_idx) {
  if (input_idx < 0 || input_idx >= model.B.cols() || output_idx < 0 ||
      output_idx >= model.C.rows())
    throw std::invalid_argument("residue: input/output index out of range");

  Eigen::EigenSolver<Eigen::MatrixXd> es(model.A);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
  // Match the mode by eigenvalue.
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.A.rows(); ++i) {
    const double d = std::abs(es.eigenvalues()(i) - mode.eigenvalue);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best_d > 1e-6 * (1.0 + std::abs(mode.eigenvalue)))
    throw std::invalid_argument("residue: mode does not belong to this model");
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd W = V.inverse();
  const std::complex<double> cr = (model.C.row(output_idx).cast<std::complex<double>>() *
                                   V.col(best))(0, 0);
  const std::complex<double> lb =
      (W.row(best) * model.B.col(input_idx).cast<std::complex<double>>())(0, 0);
  return cr * lb;
}

ErrorState error_dynamics_rhs(const ErrorState& e, double w_sigma_tilde, double sigma,
                              const ctrl::AdaptiveGains& g) {
  const double sigma_hat = sigma - e.sigma_tilde;
  if (!(sigma_hat > 0.0))
    throw std::logic_error("error_dynamics_rhs: sigma_hat must stay positive");
  ErrorState d;
  d.v_n_tilde = -g.k * (e.sigma_tilde + sigma_hat) / sigma_hat * e.v_n_tilde -
                sigma * g.k_pv * e.eta - w_sigma_tilde;
  d.eta = (g.psi - g.beta) * (e.eta - g.psi * e.v_fi_tilde) + g.beta * e.v_n_tilde;
  d.v_fi_tilde = e.eta - g.psi * e.v_fi_tilde;
  d.sigma_tilde =
      -ctrl::sigma_hat_rate(e.v_n_tilde, e.eta, e.v_fi_tilde, sigma_hat, g);
  return d;
}

ErrorTrajectory simulate_error_dynamics(const ErrorState& e0, const ctrl::AdaptiveGains& g,
                                        const std::function<double(double)>& sigma_of_t,
                                        const std::function<double(double)>& w_sigma_of_t,
                                        const ErrorSimOptions& opt) {
  g.validate();
  ErrorTrajectory traj;
  const size_t steps = static_cast<size_t>(std::llround(opt.duration / opt.dt));
  traj.t.reserve(steps + 1);
  traj.e.reserve(steps + 1);
  traj.w_sigma.reserve(steps + 1);
  traj.sigma.reserve(steps + 1);

  // Integrate (v_n_tilde, eta, v_fi_tilde, sigma_hat); sigma_tilde follows.
  std::array<double, 4> x{e0.v_n_tilde, e0.eta, e0.v_fi_tilde, 0.0};
  const double sigma0 = sigma_of_t(0.0);
  x[3] = opt.sigma_hat0 > 0.0 ? opt.sigma_hat0 : sigma0 - e0.sigma_tilde;
  if (opt.project_sigma_hat) x[3] = std::clamp(x[3], g.sigma_lo, g.sigma_hi);

  auto record = [&](double t) {
    ErrorState e;
    e.v_n_tilde = x[0];
    e.eta = x[1];
    e.v_fi_tilde = x[2];
    e.sigma_tilde = sigma_of_t(t) - x[3];
    traj.t.push_back(t);
    traj.e.push_back(e);
    traj.w_sigma.push_back(w_sigma_of_t(t));
    traj.sigma.push_back(sigma_of_t(t));
  };
  record(0.0);

  auto rhs = [&](const std::array<double, 4>& s, double t, std::array<double, 4>& ds) {
    const double sigma = sigma_of_t(t);
    const double sigma_hat = s[3];
    if (!(sigma_hat > 0.0) || !std::isfinite(s[0])) return false;
    const double w = w_sigma_of_t(t);
    ds[0] = -g.k * sigma / sigma_hat * s[0] - sigma * g.k_pv * s[1] - w;
    ds[1] = (g.psi - g.beta) * (s[1] - g.psi * s[2]) + g.beta * s[0];
    ds[2] = s[1] - g.psi * s[2];
    ds[3] = opt.freeze_adaptation ? 0.0
                                  : ctrl::sigma_hat_rate(s[0], s[1], s[2], sigma_hat, g);
    return true;
  };

  for (size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * opt.dt;
    if (!rk4_step(x, t, opt.dt, rhs))
      throw std::runtime_error("error-dynamics integration failed at t=" +
                               std::to_string(t));
    if (opt.project_sigma_hat) x[3] = std::clamp(x[3], g.sigma_lo, g.sigma_hi);
    record(static_cast<double>(i + 1) * opt.dt);
  }
  return traj;
}

double lyapunov_value(const ErrorState& e, const Eigen::Matrix3d& P) {
  Eigen::Vector3d er(e.v_n_tilde, e.eta, e.v_fi_tilde);
  return 0.5 * (er.dot(P * er) + e.sigma_tilde * e.sigma_tilde);
}

MonitorReport dissipativity_monitor(const ErrorTrajectory& traj, const Eigen::Matrix3d& P,
                                    double gamma_bar, const ctrl::AdaptiveGains& g) {
  if (traj.t.size() < 2) throw std::invalid_argument("monitor needs at least two samples");
  if (traj.w_sigma.size() != traj.t.size() || traj.e.size() != traj.t.size())
    throw std::invalid_argument("monitor: trajectory channels have mismatched lengths");

  MonitorReport rep;
  rep.samples = traj.t.size();
  const double g2 = gamma_bar * gamma_bar;
  const double pw2 = g.p_v * g.p_v + g.p_v_eta * g.p_v_eta + g.p_v_i * g.p_v_i;

  auto supply = [&](size_t i) {
    const ErrorState& e = traj.e[i];
    const double w2 = pw2 * traj.w_sigma[i] * traj.w_sigma[i];
    const double er2 = e.v_n_tilde * e.v_n_tilde + e.eta * e.eta +
                       e.v_fi_tilde * e.v_fi_tilde;
    return g2 * w2 - er2;
  };

  const double v0 = lyapunov_value(traj.e[0], P);
  double integral = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  double worst_t = traj.t[0];
  double max_v = v0;
  double max_abs_supply = 0.0;
  double prev_supply = supply(0);
  for (size_t i = 1; i < traj.t.size(); ++i) {
    const double s = supply(i);
    integral += 0.5 * (s + prev_supply) * (traj.t[i] - traj.t[i - 1]);
    prev_supply = s;
    const double v = lyapunov_value(traj.e[i], P);
    max_v = std::max(max_v, v);
    max_abs_supply = std::max(max_abs_supply, std::abs(integral));
    const double margin = v0 + integral - v;
    if (margin < worst) {
      worst = margin;
      worst_t = traj.t[i];
    }
  }
  rep.worst_margin = worst;
  rep.worst_time = worst_t;
  rep.max_V = max_v;
  const double scale = std::max({max_v, max_abs_supply, 1e-30});
  rep.eps_int = scale * (1e-9 + 1e-12 * static_cast<double>(traj.t.size()));
  rep.pass = worst >= -rep.eps_int;
  return rep;
}

std::function<double(double)> band_limited_disturbance(double amplitude, double band_hz,
                                                       unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ufreq(0.05 * band_hz, band_hz);
  std::uniform_real_distribution<double> uphase(0.0, 2.0 * 3.14159265358979323846);
  std::uniform_real_distribution<double> uamp(0.3, 1.0);
  const int n = 8;
  std::vector<double> w(n), ph(n), a(n);
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = 2.0 * 3.14159265358979323846 * ufreq(rng);
    ph[i] = uphase(rng);
    a[i] = uamp(rng);
    peak += a[i];
  }
  const double scale = amplitude / peak;
  for (double& v : a) v *= scale;
  return [w, ph, a, n](double t) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * std::sin(w[i] * t + ph[i]);
    return s;
  };
}

}  // namespace ssolab::analysis
