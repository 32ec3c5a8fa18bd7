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

#include "ssolab/sdp.hpp"

#include <cmath>
#include <limits>

namespace ssolab::sdp {

namespace {

Eigen::MatrixXd assemble(const LmiBlock& b, const Eigen::VectorXd& y) {
  Eigen::MatrixXd s = b.F0;
  for (int i = 0; i < y.size(); ++i)
    if (y(i) != 0.0) s += y(i) * b.F[i];
  return s;
}

// Cholesky of every block; returns false if any block is not PD.
bool factor_all(const std::vector<LmiBlock>& blocks, const Eigen::VectorXd& y,
                std::vector<Eigen::LLT<Eigen::MatrixXd>>& llts, double& logdet_sum) {
  logdet_sum = 0.0;
  llts.clear();
  llts.reserve(blocks.size());
  for (const auto& b : blocks) {
    Eigen::MatrixXd s = assemble(b, y);
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return false;
    const auto& L = llt.matrixLLT();
    for (int i = 0; i < L.rows(); ++i) {
      if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) return false;
      logdet_sum += 2.0 * std::log(L(i, i));
    }
    llts.push_back(std::move(llt));
  }
  return true;
}

struct BarrierState {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Gradient and Hessian of -sum_j log det S_j(y).
void barrier_derivatives(const std::vector<LmiBlock>& blocks,
                         const std::vector<Eigen::LLT<Eigen::MatrixXd>>& llts, int n,
                         BarrierState& out) {
  out.grad = Eigen::VectorXd::Zero(n);
  out.hess = Eigen::MatrixXd::Zero(n, n);
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];
    const int m = static_cast<int>(b.F0.rows());
    const Eigen::MatrixXd sinv =
        llts[j].solve(Eigen::MatrixXd::Identity(m, m));
    std::vector<Eigen::MatrixXd> sf(n);
    for (int i = 0; i < n; ++i) sf[i] = sinv * b.F[i];
    for (int i = 0; i < n; ++i) {
      out.grad(i) -= sf[i].trace();
      for (int k = i; k < n; ++k) {
        const double h = (sf[i].transpose().cwiseProduct(sf[k])).sum();
        out.hess(i, k) += h;
        if (k != i) out.hess(k, i) += h;
      }
    }
  }
}

// Centering: minimize t*c'y - sum log det S_j(y) from a strictly feasible y.
bool center(const LmiProblem& pb, double t, Eigen::VectorXd& y, int& newton_used,
            int max_newton) {
  const int n = static_cast<int>(pb.c.size());
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts;
  double logdet = 0.0;
  if (!factor_all(pb.blocks, y, llts, logdet)) return false;

  BarrierState bs;
  for (int it = 0; it < 200; ++it) {
    if (newton_used >= max_newton) return true;
    barrier_derivatives(pb.blocks, llts, n, bs);
    Eigen::VectorXd g = t * pb.c + bs.grad;
    Eigen::MatrixXd H = bs.hess;
    // Levenberg regularization keeps the step well defined near flat spots.
    H.diagonal().array() += 1e-12 * (1.0 + H.diagonal().array().abs());
    Eigen::VectorXd step = H.ldlt().solve(-g);
    const double decrement2 = -g.dot(step);
    ++newton_used;
    if (!std::isfinite(decrement2)) return false;
    if (decrement2 * 0.5 < 1e-10) return true;

    const double phi0 = t * pb.c.dot(y) - logdet;
    double s = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = y + s * step;
      std::vector<Eigen::LLT<Eigen::MatrixXd>> llts_t;
      double logdet_t = 0.0;
      if (factor_all(pb.blocks, trial, llts_t, logdet_t)) {
        const double phi = t * pb.c.dot(trial) - logdet_t;
        if (phi <= phi0 - 1e-4 * s * decrement2) {
          y = trial;
          llts = std::move(llts_t);
          logdet = logdet_t;
          accepted = true;
          break;
        }
      }
      s *= 0.5;
    }
    if (!accepted) return true;  // stalled at numerical precision
  }
  return true;
}

double total_dimension(const LmiProblem& pb) {
  double m = 0.0;
  for (const auto& b : pb.blocks) m += static_cast<double>(b.F0.rows());
  return m;
}

double min_eig_over_blocks(const LmiProblem& pb, const Eigen::VectorXd& y) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& b : pb.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble(b, y),
                                                      Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

}  // namespace

LmiResult solve(const LmiProblem& pb, const Eigen::VectorXd& y0, const SolverOptions& opt) {
  LmiResult res;
  const int n = static_cast<int>(pb.c.size());

  // Phase 1: minimize s subject to S_j(y) + s I > 0.
  LmiProblem aux;
  aux.c = Eigen::VectorXd::Zero(n + 1);
  aux.c(n) = 1.0;
  for (const auto& b : pb.blocks) {
    LmiBlock nb;
    nb.F0 = b.F0;
    nb.F = b.F;
    nb.F.push_back(Eigen::MatrixXd::Identity(b.F0.rows(), b.F0.cols()));
    aux.blocks.push_back(std::move(nb));
  }

  Eigen::VectorXd z(n + 1);
  z.head(n) = y0;
  z(n) = std::max(1.0, -min_eig_over_blocks(pb, y0) * 1.5 + 1.0);

  int newton_used = 0;
  double t = opt.t_init;
  const double m_aux = total_dimension(aux);
  while (m_aux / t > 1e-9 && newton_used < opt.max_newton) {
    if (!center(aux, t, z, newton_used, opt.max_newton)) break;
    if (z(n) < -2.0 * opt.feasibility_slack) break;  // strictly feasible already
    t *= opt.t_scale;
  }
  if (!(z(n) < -opt.feasibility_slack)) {
    res.feasible = false;
    res.phase1_margin = z(n);  // positive: slack still required
    res.newton_iterations = newton_used;
    res.message = "phase 1 found no strictly feasible point (slack " +
                  std::to_string(z(n)) + ")";
    return res;
  }
  res.phase1_margin = -z(n);  // positive: strictness achieved

  // Phase 2: path following on the true objective.
  Eigen::VectorXd y = z.head(n);
  const double m = total_dimension(pb);
  t = opt.t_init;
  while (m / t > opt.gap_tol && newton_used < opt.max_newton) {
    if (!center(pb, t, y, newton_used, opt.max_newton)) {
      res.message = "centering lost feasibility";
      break;
    }
    t *= opt.t_scale;
  }

  res.feasible = true;
  res.y = y;
  res.objective = pb.c.dot(y);
  res.newton_iterations = newton_used;
  if (res.message.empty()) res.message = "ok";
  return res;
}

}  // namespace ssolab::sdp
