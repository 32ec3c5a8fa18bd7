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
#include "ssolab/analysis.hpp"
#include "ssolab/controller.hpp"
#include "ssolab/plant.hpp"
#include "ssolab/rk4.hpp"
#include "ssolab/synthesis.hpp"

using namespace ssolab;
using analysis::ErrorState;

namespace {

ctrl::AdaptiveGains test_gains() {
  ctrl::AdaptiveGains g;
  g.k = 6.0;
  g.p_v = 0.0534;
  g.p_v_eta = 3.7221;
  g.p_v_i = -0.0034;
  g.k_pv = 11.5;
  g.psi = 20.0 / 11.5;
  g.beta = 20.0;
  g.sigma_lo = 8.1487;
  g.sigma_hi = 10.3896;
  return g;
}

const synth::Certificate& certified() {
  static const synth::Certificate cert = [] {
    synth::DesignSpec spec;
    spec.sigma_lo = 8.1487;
    spec.sigma_hi = 10.3896;
    spec.alpha = 0.066;
    spec.mu = 2.0;
    spec.psi = 20.0 / 11.5;
    spec.beta = 20.0;
    spec.k_pv = 11.5;
    spec.k_grid = {6.0};
    const synth::SynthesisResult r = synth::synthesize(spec);
    REQUIRE(r.found);
    return r.certificate;
  }();
  return cert;
}

ctrl::AdaptiveGains certified_gains() {
  ctrl::AdaptiveGains g = test_gains();
  const auto& c = certified();
  g.k = c.vars.k;
  g.p_v = c.vars.p_v;
  g.p_v_eta = c.vars.p_v_eta;
  g.p_v_i = c.vars.p_v_i;
  return g;
}

}  // namespace

TEST_CASE("fd jacobian is exact on a linear map") {
  Eigen::MatrixXd M(3, 3);
  M << -1.0, 2.0, 0.5, 0.0, -3.0, 1.0, 4.0, 0.0, -2.0;
  auto f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return M * x; };
  Eigen::VectorXd x0(3);
  x0 << 0.3, -1.2, 2.0;
  CHECK((analysis::fd_jacobian(f, x0) - M).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("plant linearization is consistent and finite") {
  plant::PlantParams p;
  p.outer.p_ref = 0.0;
  p.outer.v_ref = plant::no_load_voltage(p);
  const plant::StateVec x0 = plant::steady_state_init(p);
  const analysis::LinearModel m = analysis::linearize(p, x0);
  CHECK(m.A.allFinite());
  CHECK(m.fd_consistency < 1e-6);
  CHECK(m.labels.size() == plant::kNumStates);

  // Refusing a non-equilibrium point.
  plant::StateVec off = x0;
  off[plant::kVd] += 0.05;
  CHECK_THROWS(analysis::linearize(p, off));
}

TEST_CASE("modal analysis reproduces the reference 2x2 oscillator") {
  Eigen::MatrixXd A(2, 2);
  A << -0.0953, 33.6562, -33.6562, -0.0953;
  const auto modes = analysis::modal_analysis(A);
  REQUIRE(modes.size() == 2);
  CHECK(modes[0].freq_hz == doctest::Approx(5.36).epsilon(0.002));
  CHECK(100.0 * modes[0].damping_ratio == doctest::Approx(0.28).epsilon(0.05));
}

TEST_CASE("real modes have zero frequency and unit damping") {
  Eigen::MatrixXd A = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
  const auto modes = analysis::modal_analysis(A);
  for (const auto& mo : modes) {
    CHECK(mo.freq_hz == 0.0);
    CHECK(mo.damping_ratio == doctest::Approx(1.0));
  }
}

TEST_CASE("participation concentrates on decoupled blocks") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  A.topLeftCorner(2, 2) << -0.1, 5.0, -5.0, -0.1;
  A.bottomRightCorner(2, 2) << -2.0, 1.0, 0.0, -3.0;
  for (const auto& mo : analysis::modal_analysis(A)) {
    const bool osc = mo.freq_hz > 0.1;
    for (int k = 0; k < 4; ++k) {
      const bool in_first = k < 2;
      if (osc != in_first) CHECK(mo.participation[k] < 1e-10);
    }
  }
}

TEST_CASE("eigen residual and stored fields are self-consistent") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd A(6, 6);
    for (int i = 0; i < 36; ++i) A(i / 6, i % 6) = n(rng);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    const auto modes = analysis::modal_analysis(A);
    for (const auto& mo : modes) {
      const double mag = std::abs(mo.eigenvalue);
      if (mag > 0.0) {
        CHECK(std::abs(mo.damping_ratio + mo.eigenvalue.real() / mag) < 1e-12);
        CHECK(std::abs(mo.freq_hz -
                       std::abs(mo.eigenvalue.imag()) / (2.0 * 3.14159265358979323846)) <
              1e-12);
      }
    }
    // Residual of every eigenpair of the solver itself.
    for (int i = 0; i < 6; ++i) {
      const auto lam = es.eigenvalues()(i);
      const Eigen::VectorXcd r = es.eigenvectors().col(i);
      CHECK((A.cast<std::complex<double>>() * r - lam * r).norm() <=
            1e-8 * A.norm() * r.norm() + 1e-12);
    }
  }
}

TEST_CASE("residue of a first-order lag is one") {
  analysis::LinearModel m;
  m.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  m.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
  m.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const auto modes = analysis::modal_analysis(m);
  const auto r = analysis::residue(m, modes[0], 0, 0);
  CHECK(r.real() == doctest::Approx(1.0));
  CHECK(std::abs(r.imag()) < 1e-12);

  analysis::LinearModel m2 = m;
  m2.B *= 2.0;
  CHECK(analysis::residue(m2, analysis::modal_analysis(m2)[0], 0, 0).real() ==
        doctest::Approx(2.0));
}

TEST_CASE("residues sum to the direct coupling C B") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    analysis::LinearModel m;
    m.A = Eigen::MatrixXd::NullaryExpr(5, 5, [&]() { return n(rng); });
    m.A -= 6.0 * Eigen::MatrixXd::Identity(5, 5);  // comfortably stable
    m.B = Eigen::MatrixXd::NullaryExpr(5, 1, [&]() { return n(rng); });
    m.C = Eigen::MatrixXd::NullaryExpr(1, 5, [&]() { return n(rng); });
    const auto modes = analysis::modal_analysis(m);
    std::complex<double> sum = 0.0;
    for (const auto& mo : modes) sum += analysis::residue(m, mo, 0, 0);
    const double direct = (m.C * m.B)(0, 0);
    CHECK(std::abs(sum.real() - direct) < 1e-8 * (1.0 + std::abs(direct)));
    CHECK(std::abs(sum.imag()) < 1e-8);
  }
}

TEST_CASE("error dynamics vanish at the origin and decay cleanly") {
  const ctrl::AdaptiveGains g = test_gains();
  ErrorState zero;
  const ErrorState dz = analysis::error_dynamics_rhs(zero, 0.0, 9.0, g);
  CHECK(dz.v_n_tilde == 0.0);
  CHECK(dz.eta == 0.0);
  CHECK(dz.v_fi_tilde == 0.0);
  CHECK(dz.sigma_tilde == 0.0);

  ErrorState e;
  e.v_n_tilde = 0.01;
  const ErrorState de = analysis::error_dynamics_rhs(e, 0.0, 9.0, g);
  CHECK(de.v_n_tilde == doctest::Approx(-g.k * 0.01));  // pure decay
}

TEST_CASE("reduced model matches the plant under the design assumptions") {
  plant::PlantParams p;
  p.opts.physical_node_time = false;
  p.opts.ideal_current_tracking = true;
  p.outer.p_ref = 0.0;
  p.grid.c_g = p.grid.z_base_scale / 9.0;  // effective sigma of 9
  p.outer.v_ref = plant::no_load_voltage(p);
  const double sigma = p.sigma_eff();
  REQUIRE(sigma == doctest::Approx(9.0));
  const plant::StateVec x0 = plant::steady_state_init(p);
  p.opts.q_channel_design = true;  // exact reactive conversion for the probes
  const double v_n0 = plant::measure(x0, p).v_n;
  const double w0 =
      (x0[plant::kVd] * x0[plant::kIgd] + x0[plant::kVq] * x0[plant::kIgq]) / v_n0;

  const ctrl::AdaptiveGains g = test_gains();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    ErrorState e;
    e.v_n_tilde = 0.02 * u(rng);
    e.eta = 0.01 * u(rng);
    e.v_fi_tilde = 0.005 * u(rng);
    e.sigma_tilde = 0.4 * u(rng);
    const double w_sigma = 0.05 * u(rng);
    const double sigma_hat = sigma - e.sigma_tilde;

    // Embed the error state into the plant.
    plant::StateVec x = x0;
    const double phi = 0.1;  // nonzero v_q for the exact reactive conversion
    const double v_n = v_n0 + e.v_n_tilde;
    x[plant::kVd] = v_n * std::cos(phi);
    x[plant::kVq] = v_n * std::sin(phi);
    const double v_f_tilde = e.eta - g.psi * e.v_fi_tilde;
    x[plant::kVf] = v_n0 + v_f_tilde;
    const double w = w0 + w_sigma / sigma;
    x[plant::kIgq] = x0[plant::kIgq];
    x[plant::kIgd] = (w * v_n - x[plant::kVq] * x[plant::kIgq]) / x[plant::kVd];

    plant::Inputs in;
    in.p_tilde = -1.5 * g.k * v_n * e.v_n_tilde / sigma_hat;
    in.u_q_design = -g.k_pv * e.eta;

    plant::StateVec dx{};
    REQUIRE(plant::derivatives(x, in, p, dx) == plant::DerivStatus::kOk);

    const ErrorState rhs = analysis::error_dynamics_rhs(e, w_sigma, sigma, g);
    // v_n-rate from the plant states.
    const double vn_dot = (x[plant::kVd] * dx[plant::kVd] + x[plant::kVq] * dx[plant::kVq]) / v_n;
    CHECK(vn_dot == doctest::Approx(rhs.v_n_tilde).epsilon(1e-9));
    // eta-rate from the filter state.
    const double eta_dot = dx[plant::kVf] + g.psi * v_f_tilde;
    CHECK(eta_dot == doctest::Approx(rhs.eta).epsilon(1e-9));
    // The filtered-error integral moves at v_f_tilde by definition.
    CHECK(v_f_tilde == doctest::Approx(rhs.v_fi_tilde).epsilon(1e-12));
  }
}

TEST_CASE("lyapunov value basics and positivity") {
  Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
  CHECK(analysis::lyapunov_value(ErrorState{}, P) == 0.0);
  ErrorState e;
  e.v_n_tilde = 1.0;
  e.sigma_tilde = 2.0;
  CHECK(analysis::lyapunov_value(e, P) == doctest::Approx(2.5));

  const Eigen::Matrix3d Pc = certified().P;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    ErrorState r;
    r.v_n_tilde = u(rng);
    r.eta = u(rng);
    r.v_fi_tilde = u(rng);
    r.sigma_tilde = u(rng);
    if (std::abs(r.v_n_tilde) + std::abs(r.eta) + std::abs(r.v_fi_tilde) +
            std::abs(r.sigma_tilde) <
        1e-12)
      continue;
    CHECK(analysis::lyapunov_value(r, Pc) > 0.0);
  }
}

TEST_CASE("dissipation identity bounds the certified decay") {
  const auto& cert = certified();
  const ctrl::AdaptiveGains g = certified_gains();
  const double alpha = cert.alpha;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> us(cert.sigma_lo, cert.sigma_hi);
  for (int run = 0; run < 200; ++run) {
    const double sigma = us(rng);
    ErrorState e0;
    e0.v_n_tilde = 0.05 * u(rng);
    e0.eta = 0.05 * u(rng);
    e0.v_fi_tilde = 0.05 * u(rng);
    analysis::ErrorSimOptions opt;
    opt.dt = 5e-4;
    opt.duration = 2.0;
    opt.freeze_adaptation = true;  // sigma_hat pinned at the true value
    const auto traj = analysis::simulate_error_dynamics(
        e0, g, [&](double) { return sigma; }, [](double) { return 0.0; }, opt);
    const Eigen::Matrix3d Q = synth::assemble_Q(cert.vars, sigma, [&] {
      synth::DesignSpec s;
      s.sigma_lo = cert.sigma_lo;
      s.sigma_hi = cert.sigma_hi;
      s.alpha = cert.alpha;
      s.mu = cert.mu;
      s.psi = cert.psi;
      s.beta = cert.beta;
      s.k_pv = cert.k_pv;
      return s;
    }());
    double v_scale = analysis::lyapunov_value(traj.e[0], cert.P);
    for (size_t i = 0; i < traj.e.size(); ++i) {
      const ErrorState& e = traj.e[i];
      const ErrorState d = analysis::error_dynamics_rhs(e, 0.0, sigma, g);
      Eigen::Vector3d er(e.v_n_tilde, e.eta, e.v_fi_tilde);
      Eigen::Vector3d der(d.v_n_tilde, d.eta, d.v_fi_tilde);
      const double vdot = er.dot(cert.P * der);  // sigma_tilde stays zero
      const double bound = -er.dot((Q - alpha * cert.P) * er) - er.squaredNorm();
      CHECK(vdot <= bound + 1e-9 * (1.0 + v_scale));
    }
  }
}

TEST_CASE("certified trajectories decay exponentially and pass the monitor") {
  const auto& cert = certified();
  const ctrl::AdaptiveGains g = certified_gains();
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double sigma : {cert.sigma_lo, 0.5 * (cert.sigma_lo + cert.sigma_hi), cert.sigma_hi}) {
    for (int run = 0; run < 20; ++run) {
      ErrorState e0;
      e0.v_n_tilde = 0.05 * u(rng);
      e0.eta = 0.05 * u(rng);
      e0.v_fi_tilde = 0.05 * u(rng);
      analysis::ErrorSimOptions opt;
      opt.dt = 5e-4;
      opt.duration = 10.0;
      opt.freeze_adaptation = true;
      const auto traj = analysis::simulate_error_dynamics(
          e0, g, [&](double) { return sigma; }, [](double) { return 0.0; }, opt);
      const double v0 = analysis::lyapunov_value(traj.e[0], cert.P);
      for (size_t i = 0; i < traj.e.size(); ++i) {
        const double v = analysis::lyapunov_value(traj.e[i], cert.P);
        CHECK(v <= v0 * std::exp(-cert.alpha * traj.t[i]) * (1.0 + 1e-3) + 1e-300);
      }
      const auto rep = analysis::dissipativity_monitor(traj, cert.P, cert.gamma_bar, g);
      CHECK(rep.pass);
      CHECK(rep.worst_margin >= -1e-9 * std::max(rep.max_V, 1.0));
    }
  }
}

TEST_CASE("monitor passes a zero trajectory with zero margin") {
  analysis::ErrorTrajectory traj;
  for (int i = 0; i <= 10; ++i) {
    traj.t.push_back(0.1 * i);
    traj.e.push_back(ErrorState{});
    traj.w_sigma.push_back(0.0);
    traj.sigma.push_back(9.0);
  }
  const auto rep = analysis::dissipativity_monitor(traj, Eigen::Matrix3d::Identity(), 1.0,
                                                   test_gains());
  CHECK(rep.pass);
  CHECK(rep.worst_margin == 0.0);
}

TEST_CASE("monitor flags a sign-flipped gain") {
  const auto& cert = certified();
  ctrl::AdaptiveGains bad = certified_gains();
  bad.k = -bad.k;  // corrupt the controller
  ErrorState e0;
  e0.v_n_tilde = 0.01;
  analysis::ErrorSimOptions opt;
  opt.dt = 2e-4;
  opt.duration = 0.5;
  opt.freeze_adaptation = true;
  // Integrate the corrupted closed loop directly.
  std::array<double, 3> x{e0.v_n_tilde, 0.0, 0.0};
  analysis::ErrorTrajectory traj;
  const double sigma = 9.0;
  auto push = [&](double t) {
    traj.t.push_back(t);
    traj.e.push_back({x[0], x[1], x[2], 0.0});
    traj.w_sigma.push_back(0.0);
    traj.sigma.push_back(sigma);
  };
  push(0.0);
  auto rhs = [&](const std::array<double, 3>& s, double, std::array<double, 3>& ds) {
    ds[0] = -bad.k * s[0] - sigma * bad.k_pv * s[1];
    ds[1] = (bad.psi - bad.beta) * (s[1] - bad.psi * s[2]) + bad.beta * s[0];
    ds[2] = s[1] - bad.psi * s[2];
    return true;
  };
  const size_t steps = static_cast<size_t>(opt.duration / opt.dt);
  for (size_t i = 0; i < steps; ++i) {
    rk4_step(x, i * opt.dt, opt.dt, rhs);
    push((i + 1) * opt.dt);
  }
  const auto rep = analysis::dissipativity_monitor(traj, cert.P, cert.gamma_bar, bad);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("band-limited disturbance respects its amplitude bound") {
  const auto w = analysis::band_limited_disturbance(0.1, 5.0, 42);
  double peak = 0.0;
  for (int i = 0; i < 20000; ++i) peak = std::max(peak, std::abs(w(i * 1e-3)));
  CHECK(peak <= 0.1 + 1e-12);
  CHECK(peak > 0.01);
}
