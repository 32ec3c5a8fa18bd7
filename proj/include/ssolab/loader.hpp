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

#include "ssolab/config.hpp"
#include "ssolab/simulation.hpp"
#include "ssolab/synthesis.hpp"

namespace ssolab::loader {

// Reduced closed-loop error-model run description ([error_sim] section).
struct ErrorSimSetup {
  analysis::ErrorState e0;
  analysis::ErrorSimOptions options;
  double sigma_start = 0.0;
  double sigma_end = 0.0;
  double w_amplitude = 0.0;
  double w_band_hz = 5.0;
  unsigned seed = 1;
};

struct Loaded {
  sim::Scenario scenario;
  std::optional<synth::DesignSpec> design;
  std::optional<ErrorSimSetup> error_sim;
};

// Parses, applies defaults, validates invariants, rejects unknown keys.
Loaded load(const std::string& path);
Loaded load_text(const std::string& text, const std::string& cert_dir = "");

}  // namespace ssolab::loader
