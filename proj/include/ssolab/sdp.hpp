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
#include <string>
#include <vector>

namespace ssolab::sdp {

// One affine matrix constraint S(y) = F0 + sum_i y_i F[i], required S(y) > 0.
// Scalar inequalities are 1x1 blocks.
struct LmiBlock {
  Eigen::MatrixXd F0;
  std::vector<Eigen::MatrixXd> F;
};

// minimize c'y subject to every block being positive definite.
struct LmiProblem {
  Eigen::VectorXd c;
  std::vector<LmiBlock> blocks;
};

struct LmiResult {
  bool feasible = false;
  Eigen::VectorXd y;
  double objective = 0.0;
  // Feasible: strictness achieved (positive). Infeasible: slack that would
  // still be needed (positive).
  double phase1_margin = 0.0;
  int newton_iterations = 0;
  std::string message;
};

struct SolverOptions {
  double gap_tol = 1e-7;        // target duality-gap proxy m/t
  double t_init = 1.0;
  double t_scale = 8.0;
  int max_newton = 4000;
  double feasibility_slack = 1e-6;  // required strict margin out of phase 1
};

// Log-det barrier path following with an auxiliary-slack phase 1.
LmiResult solve(const LmiProblem& problem, const Eigen::VectorXd& y0,
                const SolverOptions& opt = {});

}  // namespace ssolab::sdp
