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

#include "ssolab/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssolab/rk4.hpp"

namespace ssolab::sim {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kSettled: return "settled";
    case Verdict::kOscillating: return "oscillating";
    case Verdict::kDiverged: return "diverged";
  }
  return "unknown";
}

namespace {

const std::vector<std::string> kChannels = {
    "t",       "v_d",     "v_q",        "v_n",       "v_f",        "omega_pll",
    "p_out",   "q_out",   "p_tilde",    "q_ref",     "sigma_hat",  "v_n_tilde",
    "eta",     "v_fi_tilde", "sigma_tilde", "w_sigma_tilde", "i_d", "i_q",
    "v_dc",    "delta_pll", "c_g"};

}  // namespace

std::optional<double> settling_time(const std::vector<double>& t,
                                    const std::vector<double>& y, double t_disturb) {
  if (t.empty()) return std::nullopt;
  double peak = 0.0;
  size_t first = t.size();
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_disturb) continue;
    first = std::min(first, i);
    peak = std::max(peak, std::abs(y[i]));
  }
  if (first == t.size()) return std::nullopt;
  const double band = 0.02 * peak;
  // Last sample outside the band decides the settle point.
  size_t last_out = first;
  bool any_out = false;
  for (size_t i = first; i < t.size(); ++i) {
    if (std::abs(y[i]) > band) {
      last_out = i;
      any_out = true;
    }
  }
  const double t_settle = any_out ? (last_out + 1 < t.size() ? t[last_out + 1] : t.back())
                                  : t_disturb;
  if (!any_out) return t_settle;
  if (last_out + 1 >= t.size()) return std::nullopt;
  if (t.back() - t_settle < 2.0) return std::nullopt;  // needs a 2 s quiet stretch
  return t_settle;
}

std::vector<double> envelope_ratios(const std::vector<double>& t,
                                    const std::vector<double>& y, double t_disturb) {
  std::vector<double> envelopes;
  double win_end = t_disturb + 1.0;
  double env = 0.0;
  bool any = false;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_disturb) continue;
    if (t[i] >= win_end) {
      envelopes.push_back(env);
      env = 0.0;
      win_end += 1.0;
    }
    env = std::max(env, std::abs(y[i]));
    any = true;
  }
  (void)any;
  std::vector<double> ratios;
  for (size_t i = 1; i < envelopes.size(); ++i) {
    if (envelopes[i - 1] > 1e-12) ratios.push_back(envelopes[i] / envelopes[i - 1]);
  }
  return ratios;
}

RunResult run_scenario(const Scenario& sc) {
  plant::PlantParams params = sc.plant;
  std::vector<plant::Event> events = sc.events;
  // Faults expand into an apply/clear pair; ties keep file order.
  std::vector<plant::Event> expanded;
  for (const auto& e : events) {
    expanded.push_back(e);
    if (e.kind == plant::EventKind::kFault) {
      plant::Event clear = e;
      clear.kind = plant::EventKind::kFaultClear;
      clear.time = e.time + e.duration;
      expanded.push_back(clear);
    }
  }
  std::stable_sort(expanded.begin(), expanded.end(),
                   [](const plant::Event& a, const plant::Event& b) { return a.time < b.time; });

  plant::StateVec x = plant::steady_state_init(params);
  ctrl::SupplementaryController controller(sc.controller);
  const plant::Measurements m0 = plant::measure(x, params);
  controller.arm(m0.v_n);
  const double v_n0 = m0.v_n;
  const double w0 = (x[plant::kVd] * x[plant::kIgd] + x[plant::kVq] * x[plant::kIgq]) / m0.v_n;

  const size_t steps = static_cast<size_t>(std::llround(sc.duration / sc.dt));
  const size_t dec = std::max<size_t>(1, static_cast<size_t>(std::llround(sc.decimation / sc.dt)));

  csvio::Table full;  // decimated output channels
  full.columns = kChannels;
  full.data.assign(kChannels.size(), {});

  // Full-resolution traces for the report and the inline monitor.
  std::vector<double> tt, vnt, ptl;
  analysis::ErrorTrajectory etraj;
  const bool adaptive = sc.controller.mode == ctrl::ControllerMode::kAdaptive;
  tt.reserve(steps + 1);
  vnt.reserve(steps + 1);
  ptl.reserve(steps + 1);

  RunReport rep;
  rep.name = sc.name;
  rep.sigma_hat_min = std::numeric_limits<double>::infinity();
  rep.sigma_hat_max = -std::numeric_limits<double>::infinity();
  Verdict verdict = Verdict::kOscillating;

  size_t next_event = 0;
  std::vector<plant::Event*> active_ramps;
  double t_end = sc.duration;
  bool failed = false;

  for (size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * sc.dt;

    // Events snap to the step boundary at or after their timestamp.
    while (next_event < expanded.size() && expanded[next_event].time <= t + 0.5 * sc.dt) {
      plant::Event& e = expanded[next_event];
      plant::apply_event(params, e, t);
      if (e.kind == plant::EventKind::kRampCg && e.t_end > t) active_ramps.push_back(&e);
      ++next_event;
    }
    for (auto it = active_ramps.begin(); it != active_ramps.end();) {
      plant::apply_event(params, **it, t);
      it = ((*it)->t_end <= t) ? active_ramps.erase(it) : it + 1;
    }

    const plant::Measurements meas = plant::measure(x, params);
    const ctrl::SupplementaryOutput out = controller.update(meas.v_n, meas.v_f, sc.dt);
    plant::Inputs u;
    u.p_tilde = out.p_tilde;
    u.q_tilde = out.q_tilde;

    const double w_now =
        (x[plant::kVd] * x[plant::kIgd] + x[plant::kVq] * x[plant::kIgq]) / meas.v_n;
    const double w_sigma_tilde = params.sigma_g() * (w_now - w0);
    const auto& cs = controller.state();
    const auto& sig = controller.last_signals();
    const double sigma_tilde = params.sigma_g() - cs.sigma_hat;

    tt.push_back(t);
    vnt.push_back(meas.v_n - v_n0);
    ptl.push_back(out.p_tilde);
    if (adaptive) {
      rep.sigma_hat_min = std::min(rep.sigma_hat_min, cs.sigma_hat);
      rep.sigma_hat_max = std::max(rep.sigma_hat_max, cs.sigma_hat);
      etraj.t.push_back(t);
      etraj.e.push_back({sig.v_n_tilde, sig.eta, cs.v_fi_tilde, sigma_tilde});
      etraj.w_sigma.push_back(w_sigma_tilde);
      etraj.sigma.push_back(params.sigma_g());
    }

    if (i % dec == 0) {
      plant::Algebraics alg;
      plant::StateVec dx{};
      plant::derivatives(x, u, params, dx, &alg);
      const double row[] = {t,
                            x[plant::kVd],
                            x[plant::kVq],
                            meas.v_n,
                            meas.v_f,
                            meas.omega_pll,
                            meas.p_out,
                            meas.q_out,
                            out.p_tilde,
                            alg.q_ref,
                            cs.sigma_hat,
                            meas.v_n - v_n0,
                            sig.eta,
                            cs.v_fi_tilde,
                            sigma_tilde,
                            w_sigma_tilde,
                            x[plant::kId],
                            x[plant::kIq],
                            x[plant::kVdc],
                            x[plant::kDelta],
                            params.grid.c_g};
      for (size_t c = 0; c < full.columns.size(); ++c) full.data[c].push_back(row[c]);
    }

    if (i == steps) break;
    auto rhs = [&](const plant::StateVec& s, double, plant::StateVec& ds) {
      return plant::derivatives(s, u, params, ds) == plant::DerivStatus::kOk;
    };
    if (!rk4_step(x, t, sc.dt, rhs)) {
      failed = true;
      t_end = t;
      rep.note = "integration stopped (degenerate voltage or non-finite state)";
      break;
    }
    const double vmag = std::hypot(x[plant::kVd], x[plant::kVq]);
    if (!std::isfinite(vmag) || vmag > 10.0 || std::abs(x[plant::kId]) > 1e6) {
      failed = true;
      t_end = t + sc.dt;
      rep.note = "state left the physical range";
      break;
    }
  }

  rep.end_time = t_end;
  const double t_disturb = sc.events.empty() ? 0.0 : sc.events.front().time;
  for (double v : vnt) rep.peak_v_n_tilde = std::max(rep.peak_v_n_tilde, std::abs(v));
  for (double v : ptl) rep.max_p_tilde = std::max(rep.max_p_tilde, std::abs(v));

  const auto ratios = envelope_ratios(tt, vnt, t_disturb);
  rep.min_envelope_ratio = ratios.empty() ? 0.0 : *std::min_element(ratios.begin(), ratios.end());
  rep.max_envelope_ratio = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());

  if (failed) {
    verdict = Verdict::kDiverged;
  } else {
    rep.settling_time = settling_time(tt, vnt, t_disturb);
    verdict = rep.settling_time ? Verdict::kSettled : Verdict::kOscillating;
  }
  rep.verdict = verdict;

  if (adaptive) {
    rep.sigma_hat_final = controller.state().sigma_hat;
    if (sc.certificate && etraj.t.size() >= 2) {
      const auto mon = analysis::dissipativity_monitor(
          etraj, sc.certificate->P, sc.certificate->gamma_bar, sc.controller.gains);
      rep.dissipativity_margin = mon.worst_margin;
    }
  } else {
    rep.sigma_hat_min = rep.sigma_hat_max = rep.sigma_hat_final = 0.0;
  }

  RunResult res;
  res.report = rep;
  if (sc.outputs.empty()) {
    res.series = std::move(full);
  } else {
    res.series.columns.push_back("t");
    res.series.data.push_back(full.column("t"));
    for (const auto& name : sc.outputs) {
      if (name == "t") continue;
      res.series.columns.push_back(name);
      res.series.data.push_back(full.column(name));
    }
  }
  return res;
}

std::string report_to_text(const RunReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "[report]\n";
  os << "scenario = \"" << r.name << "\"\n";
  os << "verdict = \"" << to_string(r.verdict) << "\"\n";
  if (r.settling_time) os << "settling_time = " << *r.settling_time << "\n";
  os << "max_p_tilde = " << r.max_p_tilde << "\n";
  os << "peak_v_n_tilde = " << r.peak_v_n_tilde << "\n";
  if (r.dissipativity_margin)
    os << "dissipativity_margin = " << *r.dissipativity_margin << "\n";
  os << "sigma_hat_min = " << r.sigma_hat_min << "\n";
  os << "sigma_hat_max = " << r.sigma_hat_max << "\n";
  os << "sigma_hat_final = " << r.sigma_hat_final << "\n";
  os << "end_time = " << r.end_time << "\n";
  os << "min_envelope_ratio = " << r.min_envelope_ratio << "\n";
  os << "max_envelope_ratio = " << r.max_envelope_ratio << "\n";
  if (!r.note.empty()) os << "note = \"" << r.note << "\"\n";
  return os.str();
}

std::string gnuplot_script(const std::string& csv_name, const csvio::Table& t) {
  std::ostringstream os;
  os << "set datafile separator ','\n";
  os << "set key autotitle columnhead\n";
  os << "set xlabel 'time [s]'\n";
  auto col = [&](const std::string& name) {
    for (size_t i = 0; i < t.columns.size(); ++i)
      if (t.columns[i] == name) return static_cast<int>(i) + 1;
    return 0;
  };
  os << "plot";
  bool first = true;
  for (const char* name : {"v_n", "p_tilde", "sigma_hat"}) {
    const int c = col(name);
    if (c == 0) continue;
    os << (first ? " " : ", ") << "'" << csv_name << "' using 1:" << c << " with lines";
    first = false;
  }
  os << "\npause -1\n";
  return os.str();
}

}  // namespace ssolab::sim
