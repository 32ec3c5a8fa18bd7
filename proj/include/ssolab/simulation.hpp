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

#include <optional>
#include <string>
#include <vector>

#include "ssolab/analysis.hpp"
#include "ssolab/controller.hpp"
#include "ssolab/csv.hpp"
#include "ssolab/plant.hpp"
#include "ssolab/synthesis.hpp"

namespace ssolab::sim {

struct Scenario {
  std::string name = "scenario";
  plant::PlantParams plant;
  ctrl::SupplementaryController::Options controller;
  std::vector<plant::Event> events;
  double duration = 20.0;
  double dt = 5e-5;
  double decimation = 1e-3;
  std::vector<std::string> outputs;  // empty = all channels
  // Certificate backing the adaptive controller, for the inline margin.
  std::optional<synth::Certificate> certificate;
};

enum class Verdict { kSettled, kOscillating, kDiverged };

std::string to_string(Verdict v);

struct RunReport {
  std::string name;
  Verdict verdict = Verdict::kOscillating;
  std::optional<double> settling_time;
  double max_p_tilde = 0.0;
  double peak_v_n_tilde = 0.0;
  std::optional<double> dissipativity_margin;
  double sigma_hat_min = 0.0;
  double sigma_hat_max = 0.0;
  double sigma_hat_final = 0.0;
  double end_time = 0.0;              // last simulated time (early on divergence)
  double min_envelope_ratio = 0.0;    // min consecutive 1 s envelope ratio
  double max_envelope_ratio = 0.0;
  std::string note;
};

struct RunResult {
  RunReport report;
  csvio::Table series;  // decimated channels
};

RunResult run_scenario(const Scenario& sc);

// Settling time of |y| against a 2% band of its post-disturbance peak: the
// earliest T with |y| inside the band from T to the end and at least a 2 s
// quiet stretch. nullopt when that never happens.
std::optional<double> settling_time(const std::vector<double>& t,
                                    const std::vector<double>& y, double t_disturb);

// Consecutive 1 s window envelope ratios of |y| after t_disturb.
std::vector<double> envelope_ratios(const std::vector<double>& t,
                                    const std::vector<double>& y, double t_disturb);

// Report serialization in the key-value config format.
std::string report_to_text(const RunReport& r);
std::string gnuplot_script(const std::string& csv_name, const csvio::Table& t);

}  // namespace ssolab::sim
