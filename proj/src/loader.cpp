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

#include "ssolab/loader.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ssolab::loader {

using config::Config;
using config::Section;
using config::ValidationError;

namespace {

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ValidationError(path, "must be strictly positive");
}

void load_plant(const Config& cfg, plant::PlantParams& p) {
  const Section& base = cfg.require("base");
  p.base.s_base_mva = base.get_number("s_base_mva");
  p.base.v_ac_base_kv = base.get_number("v_ac_base_kv");
  p.base.v_dc_base_kv = base.get_number("v_dc_base_kv");
  p.base.f_base_hz = base.get_number("f_base_hz");
  require_positive(p.base.s_base_mva, base.path("s_base_mva"));
  require_positive(p.base.v_ac_base_kv, base.path("v_ac_base_kv"));
  require_positive(p.base.v_dc_base_kv, base.path("v_dc_base_kv"));
  require_positive(p.base.f_base_hz, base.path("f_base_hz"));

  const Section& grid = cfg.require("grid");
  p.grid.r_g = grid.get_number("r_g");
  p.grid.l_g = grid.get_number("l_g");
  p.grid.c_g = grid.get_number("c_g");
  if (!grid.has("c_g_lo") || !grid.has("c_g_hi"))
    throw ValidationError("GridParams.c_g", "bounds c_g_lo and c_g_hi are required");
  p.grid.c_g_lo = grid.get_number("c_g_lo");
  p.grid.c_g_hi = grid.get_number("c_g_hi");
  p.grid.v_g = {grid.get_number("v_g_d", 1.0), grid.get_number("v_g_q", 0.0)};
  p.grid.omega_s = grid.get_number("omega_s", 1.0);
  require_positive(p.grid.r_g, grid.path("r_g"));
  require_positive(p.grid.l_g, grid.path("l_g"));
  if (!(p.grid.c_g_lo > 0.0 && p.grid.c_g_lo <= p.grid.c_g_hi))
    throw ValidationError("GridParams.c_g", "bounds must satisfy 0 < c_g_lo <= c_g_hi");
  if (p.grid.c_g < p.grid.c_g_lo || p.grid.c_g > p.grid.c_g_hi)
    throw ValidationError("GridParams.c_g", "c_g must lie within [c_g_lo, c_g_hi]");

  const Section& conv = cfg.require("converter");
  p.conv.s_rated_mva = conv.get_number("s_rated_mva", 700.0);
  p.conv.tau_c = conv.get_number("tau_c");
  p.conv.c_c = conv.get_number("c_c");
  p.conv.r = conv.get_number("r");
  p.conv.r_on = conv.get_number("r_on");
  p.conv.l = conv.get_number("l");
  p.conv.r_tf = conv.get_number("r_tf", 0.0);
  p.conv.l_tf = conv.get_number("l_tf");
  p.conv.i_limit = conv.get_number("i_limit", 0.0);
  p.conv.m_limit = conv.get_number("m_limit", 1.0);
  p.conv.k_mod = conv.get_number("k_mod", 1.5);
  p.conv.k_vdc = conv.get_number("k_vdc", 2.0);
  p.conv.v_dc_ref = conv.get_number("v_dc_ref", 1.0);
  require_positive(p.conv.s_rated_mva, conv.path("s_rated_mva"));
  require_positive(p.conv.tau_c, conv.path("tau_c"));
  require_positive(p.conv.c_c, conv.path("c_c"));
  require_positive(p.conv.l, conv.path("l"));
  if (p.conv.m_limit != 1.0)
    throw ValidationError(conv.path("m_limit"), "the modulation limit is fixed at 1");

  const Section& pll = cfg.require("pll");
  p.pll.k_p = pll.get_number("k_p");
  p.pll.k_i = pll.get_number("k_i");
  p.pll.tau_m = pll.get_number("tau_m");
  require_positive(p.pll.k_p, pll.path("k_p"));
  require_positive(p.pll.k_i, pll.path("k_i"));
  require_positive(p.pll.tau_m, pll.path("tau_m"));

  const Section& outer = cfg.require("outer");
  p.outer.p_ref = outer.get_number("p_ref");
  p.outer.v_ref = outer.get_number("v_ref", 1.0);
  p.outer.k_pv = outer.get_number("k_pv");
  p.outer.k_iv = outer.get_number("k_iv");
  p.outer.tau_f = outer.get_number("tau_f");
  require_positive(p.outer.k_pv, outer.path("k_pv"));
  require_positive(p.outer.k_iv, outer.path("k_iv"));
  require_positive(p.outer.tau_f, outer.path("tau_f"));

  if (const Section* inner = cfg.find("inner")) {
    p.inner.omega_cc = inner->get_number("omega_cc", p.inner.omega_cc);
    require_positive(p.inner.omega_cc, inner->path("omega_cc"));
  }
  if (const Section* model = cfg.find("model")) {
    p.opts.v_d_floor = model->get_number("v_d_floor", 0.05);
    p.opts.ideal_current_tracking = model->get_bool("ideal_current_tracking", false);
  }
}

plant::Event load_event(const Section& s) {
  plant::Event e;
  e.time = s.get_number("time");
  if (e.time < 0.0) throw ValidationError(s.path("time"), "must be non-negative");
  const std::string kind = s.get_string("kind");
  if (kind == "step_p_ref") {
    e.kind = plant::EventKind::kStepPRef;
    e.value = s.get_number("delta");
  } else if (kind == "ramp_c_g") {
    e.kind = plant::EventKind::kRampCg;
    e.value = s.get_number("target");
    e.t_start = s.get_number("t_start");
    e.t_end = s.get_number("t_end");
    if (!(e.t_end > e.t_start))
      throw ValidationError(s.path("t_end"), "ramp needs t_end > t_start");
  } else if (kind == "fault") {
    e.kind = plant::EventKind::kFault;
    e.value = s.get_number("admittance");
    e.duration = s.get_number("duration");
    require_positive(e.duration, s.path("duration"));
  } else if (kind == "set_grid") {
    e.kind = plant::EventKind::kSetGrid;
    e.r_g = s.get_number("r_g");
    e.l_g = s.get_number("l_g");
  } else {
    throw ValidationError(s.path("kind"), "unknown event kind '" + kind + "'");
  }
  return e;
}

void load_controller(const Config& cfg, const plant::PlantParams& p, sim::Scenario& sc,
                     const std::string& cert_dir) {
  const Section* s = cfg.find("controller");
  auto& opt = sc.controller;
  opt.gains.k_pv = p.outer.k_pv;
  opt.gains.psi = p.outer.psi();
  opt.gains.beta = p.outer.beta();
  opt.c_g0 = p.grid.c_g;
  if (!s) {
    opt.mode = ctrl::ControllerMode::kNone;
    return;
  }
  const std::string mode = s->get_string("mode", "nc");
  if (mode == "nc") {
    opt.mode = ctrl::ControllerMode::kNone;
  } else if (mode == "sf") {
    opt.mode = ctrl::ControllerMode::kStateFeedback;
  } else if (mode == "adaptive") {
    opt.mode = ctrl::ControllerMode::kAdaptive;
  } else {
    throw ValidationError(s->path("mode"), "must be one of nc, sf, adaptive");
  }
  opt.k_sf = s->get_number("k_sf", -22.0);
  opt.c_g0 = s->get_number("c_g0", p.grid.c_g);
  opt.v_n_filter_window = s->get_number("v_n_filter_ms", 0.0) * 1e-3;
  opt.sigma_hat_init = s->get_number("sigma_hat_init", 0.0);

  if (s->has("certificate")) {
    std::filesystem::path cp = s->get_string("certificate");
    if (cp.is_relative() && !cert_dir.empty()) cp = std::filesystem::path(cert_dir) / cp;
    const synth::Certificate cert = synth::certificate_from_file(cp.string());
    sc.certificate = cert;
    opt.gains.k = cert.vars.k;
    opt.gains.p_v = cert.vars.p_v;
    opt.gains.p_v_eta = cert.vars.p_v_eta;
    opt.gains.p_v_i = cert.vars.p_v_i;
    opt.gains.sigma_lo = cert.sigma_lo;
    opt.gains.sigma_hi = cert.sigma_hi;
    opt.gains.psi = cert.psi;
    opt.gains.beta = cert.beta;
    opt.gains.k_pv = cert.k_pv;
  }
  // Inline values override certificate-provided ones.
  opt.gains.k = s->get_number("k", opt.gains.k);
  opt.gains.p_v = s->get_number("p_v", opt.gains.p_v);
  opt.gains.p_v_eta = s->get_number("p_v_eta", opt.gains.p_v_eta);
  opt.gains.p_v_i = s->get_number("p_v_i", opt.gains.p_v_i);
  opt.gains.sigma_lo = s->get_number("sigma_lo", opt.gains.sigma_lo);
  opt.gains.sigma_hi = s->get_number("sigma_hi", opt.gains.sigma_hi);
  if (opt.mode == ctrl::ControllerMode::kAdaptive) opt.gains.validate();
}

std::optional<synth::DesignSpec> load_design(const Config& cfg, const plant::PlantParams& p) {
  const Section* s = cfg.find("design");
  if (!s) return std::nullopt;
  synth::DesignSpec d;
  d.sigma_lo = s->get_number("sigma_lo");
  d.sigma_hi = s->get_number("sigma_hi");
  d.alpha = s->get_number("alpha");
  d.mu = s->get_number("mu");
  d.psi = s->get_number("psi", p.outer.psi());
  d.beta = s->get_number("beta", p.outer.beta());
  d.k_pv = s->get_number("k_pv", p.outer.k_pv);
  d.k_grid = s->get_numbers("k_grid", {});
  d.psd_tol = s->get_number("psd_tol", 1e-8);
  d.p_box = s->get_number("p_box", 2000.0);
  d.x_box = s->get_number("x_box", 400.0);
  d.validate();
  return d;
}

std::optional<ErrorSimSetup> load_error_sim(const Config& cfg) {
  const Section* s = cfg.find("error_sim");
  if (!s) return std::nullopt;
  ErrorSimSetup e;
  e.e0.v_n_tilde = s->get_number("v_n_tilde0", 0.0);
  e.e0.eta = s->get_number("eta0", 0.0);
  e.e0.v_fi_tilde = s->get_number("v_fi_tilde0", 0.0);
  e.sigma_start = s->get_number("sigma_start");
  e.sigma_end = s->get_number("sigma_end", e.sigma_start);
  e.options.sigma_hat0 = s->get_number("sigma_hat0", 0.0);
  e.options.dt = s->get_number("dt", 2e-4);
  e.options.duration = s->get_number("duration", 30.0);
  e.options.freeze_adaptation = s->get_bool("freeze_adaptation", false);
  e.w_amplitude = s->get_number("w_amplitude", 0.0);
  e.w_band_hz = s->get_number("w_band_hz", 5.0);
  e.seed = static_cast<unsigned>(s->get_number("seed", 1.0));
  require_positive(e.options.dt, s->path("dt"));
  require_positive(e.options.duration, s->path("duration"));
  require_positive(e.sigma_start, s->path("sigma_start"));
  return e;
}

Loaded load_config(const Config& cfg, const std::string& cert_dir) {
  Loaded out;
  load_plant(cfg, out.scenario.plant);

  const Section* simsec = cfg.find("simulation");
  if (simsec) {
    out.scenario.name = simsec->get_string("name", "scenario");
    out.scenario.dt = simsec->get_number("dt", 5e-5);
    out.scenario.duration = simsec->get_number("duration", 20.0);
    out.scenario.decimation = simsec->get_number("decimation", 1e-3);
    if (simsec->has("outputs")) out.scenario.outputs = simsec->get_strings("outputs");
    require_positive(out.scenario.dt, simsec->path("dt"));
    require_positive(out.scenario.duration, simsec->path("duration"));
    require_positive(out.scenario.decimation, simsec->path("decimation"));
  }

  // Duplicate event times are allowed; file order decides ties.
  for (const Section* ev : cfg.all("event")) out.scenario.events.push_back(load_event(*ev));

  load_controller(cfg, out.scenario.plant, out.scenario, cert_dir);
  out.design = load_design(cfg, out.scenario.plant);
  out.error_sim = load_error_sim(cfg);
  cfg.reject_unknown_keys();
  return out;
}

}  // namespace

Loaded load(const std::string& path) {
  Config cfg = Config::parse_file(path);
  return load_config(cfg, std::filesystem::path(path).parent_path().string());
}

Loaded load_text(const std::string& text, const std::string& cert_dir) {
  Config cfg = Config::parse_string(text);
  return load_config(cfg, cert_dir);
}

}  // namespace ssolab::loader
