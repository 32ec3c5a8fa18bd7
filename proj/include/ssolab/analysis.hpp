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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ssolab/controller.hpp"
#include "ssolab/plant.hpp"

namespace ssolab::analysis {

// Small-signal model around an operating point. Inputs are the active power
// modulation and the two POI grid-current disturbance channels; the default
// output is the POI voltage magnitude deviation.
struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  std::vector<std::string> labels;
  plant::StateVec x0{};
  double fd_consistency = 0.0;  // relative change of A when halving the step
};

LinearModel linearize(const plant::PlantParams& p, const plant::StateVec& x0,
                      double h_rel = 1e-5);

// Central-difference Jacobian of a generic vector field; exact on linear
// maps up to rounding.
template <typename F>
Eigen::MatrixXd fd_jacobian(F&& f, const Eigen::VectorXd& x, double h_rel = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int c = 0; c < x.size(); ++c) {
    const double h = h_rel * (1.0 + std::abs(x(c)));
    Eigen::VectorXd xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    J.col(c) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

struct Mode {
  std::complex<double> eigenvalue;
  double freq_hz = 0.0;
  double damping_ratio = 0.0;
  std::vector<double> participation;   // normalized to max 1 per mode
  std::vector<double> modeshape_angle; // rad, from the right eigenvector
};

std::vector<Mode> modal_analysis(const Eigen::MatrixXd& A);
inline std::vector<Mode> modal_analysis(const LinearModel& m) { return modal_analysis(m.A); }

// Mode-wise input/output sensitivity (C r)(l B) for the matched eigenpair.
std::complex<double> residue(const LinearModel& model, const Mode& mode, int input_idx,
                             int output_idx);

// Closed-loop error coordinates (v_n error, normalized PI output, its
// integral, parameter estimation error).
struct ErrorState {
  double v_n_tilde = 0.0;
  double eta = 0.0;
  double v_fi_tilde = 0.0;
  double sigma_tilde = 0.0;
};

ErrorState error_dynamics_rhs(const ErrorState& e, double w_sigma_tilde, double sigma,
                              const ctrl::AdaptiveGains& g);

struct ErrorTrajectory {
  std::vector<double> t;
  std::vector<ErrorState> e;
  std::vector<double> w_sigma;   // lumped disturbance samples
  std::vector<double> sigma;     // true parameter at each sample
};

struct ErrorSimOptions {
  double dt = 2e-4;
  double duration = 30.0;
  bool freeze_adaptation = false;
  bool project_sigma_hat = true;
  double sigma_hat0 = 0.0;  // 0 = equals sigma(0)
};

ErrorTrajectory simulate_error_dynamics(const ErrorState& e0, const ctrl::AdaptiveGains& g,
                                        const std::function<double(double)>& sigma_of_t,
                                        const std::function<double(double)>& w_sigma_of_t,
                                        const ErrorSimOptions& opt);

// V = 1/2 e_F' blockdiag(P, 1) e_F.
double lyapunov_value(const ErrorState& e, const Eigen::Matrix3d& P);

struct MonitorReport {
  bool pass = false;
  double worst_margin = 0.0;  // min over samples of RHS - LHS of the inequality
  double worst_time = 0.0;
  double max_V = 0.0;
  double eps_int = 0.0;
  size_t samples = 0;
};

// Cumulative dissipation check V(t) - V(0) <= int gamma^2 |w|^2 - |e_R|^2
// with w = (p_v, p_v_eta, p_v_i) w_sigma. The disturbance channels are
// consumed as recorded.
MonitorReport dissipativity_monitor(const ErrorTrajectory& traj, const Eigen::Matrix3d& P,
                                    double gamma_bar, const ctrl::AdaptiveGains& g);

// Band-limited random disturbance generator: a fixed sum of sinusoids below
// band_hz with peak magnitude amplitude. Deterministic per seed.
std::function<double(double)> band_limited_disturbance(double amplitude, double band_hz,
                                                       unsigned seed);

}  // namespace ssolab::analysis
