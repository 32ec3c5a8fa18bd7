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
#include <optional>
#include <string>
#include <vector>

namespace ssolab::synth {

// Inputs of the gain synthesis: the sigma_g interval, the decay rate alpha
// (1 / settling time), the gain/attenuation trade-off weight mu, the outer
// voltage loop constants, and the candidate grid for the frozen gain k.
struct DesignSpec {
  double sigma_lo = 8.1487;
  double sigma_hi = 10.3896;
  double alpha = 0.066;
  double mu = 2.0;
  double psi = 15.0;
  double beta = 20.0;
  double k_pv = 2.0;
  std::vector<double> k_grid;
  double psd_tol = 1e-8;  // relative to the largest matrix entry
  // Compactness boxes for the decision variables; the published problem is
  // scale-free along a feasible ray, so the maximization needs a ceiling.
  double p_box = 2000.0;
  double x_box = 400.0;

  void validate() const;
  std::vector<double> k_grid_or_default() const;
};

struct DecisionVars {
  double p_v = 0.0;
  double p_v_eta = 0.0;
  double p_v_i = 0.0;
  double p_eta = 0.0;
  double p_eta_i = 0.0;
  double p_i = 0.0;
  double k = 0.0;
  double x_v = 0.0;
  double x_eta = 0.0;
  double x_i = 0.0;
  double x_lo = 0.0;
};

Eigen::Matrix3d assemble_P(const DecisionVars& v);

// The six closed-form Q entries; affine in sigma and in every decision
// variable once k is fixed.
Eigen::Matrix3d assemble_Q(const DecisionVars& v, double sigma, const DesignSpec& spec);

struct Certificate {
  DecisionVars vars;
  Eigen::Matrix3d P;
  Eigen::Matrix3d Q_lo;
  Eigen::Matrix3d Q_hi;
  std::array<double, 3> min_eigs{};  // P, Q_lo - alpha P, Q_hi - alpha P
  double gamma_bar = 0.0;
  double objective = 0.0;
  bool feasible = false;
  double psd_tol_effective = 0.0;
  std::string message;
  // Echo of the spec the certificate was computed against.
  double sigma_lo = 0.0, sigma_hi = 0.0, alpha = 0.0, mu = 0.0;
  double psi = 0.0, beta = 0.0, k_pv = 0.0;
};

// Smallest eigenvalues of (P, Q_lo - alpha P, Q_hi - alpha P); throws
// std::logic_error on a non-symmetric input.
std::array<double, 3> feasibility_margins(const Eigen::Matrix3d& P,
                                          const Eigen::Matrix3d& Q_lo,
                                          const Eigen::Matrix3d& Q_hi, double alpha);

// Eigenvalue-based feasibility verdict. Independent of the barrier solver's
// internals; non-symmetric assembled matrices indicate an internal bug.
Certificate check_feasible(const DecisionVars& vars, const DesignSpec& spec);

struct FixedKResult {
  bool feasible = false;
  double k = 0.0;
  DecisionVars vars;
  double x_lo = 0.0;
  double infeasibility_margin = 0.0;  // phase-1 slack when infeasible
  std::string message;
};

// Maximizes x_lo with k frozen (all constraints affine), then backs off to
// an interior point so the certificate margins are strict.
FixedKResult solve_fixed_k(double k, const DesignSpec& spec);

struct SynthesisResult {
  bool found = false;
  Certificate certificate;
  std::vector<FixedKResult> per_k;
  std::string message;
};

// Grid search over k; selects the feasible point minimizing -x_lo + mu k.
SynthesisResult synthesize(const DesignSpec& spec);

struct AlphaSearchResult {
  bool found = false;
  double alpha = 0.0;
  Certificate certificate;
  std::string message;
};

// Bisection for the largest alpha keeping the synthesis feasible.
AlphaSearchResult alpha_search(const DesignSpec& spec, double alpha_lo, double alpha_hi,
                               double tol = 1e-3);

// Certificate (de)serialization in the key-value config format.
std::string certificate_to_text(const Certificate& c);
Certificate certificate_from_file(const std::string& path);

}  // namespace ssolab::synth
