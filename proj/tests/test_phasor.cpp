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
#include "ssolab/phasor.hpp"

using namespace ssolab;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::array<double, 3> balanced(double amp, double phase) {
  return {amp * std::cos(phase), amp * std::cos(phase - 2.0 * kPi / 3.0),
          amp * std::cos(phase + 2.0 * kPi / 3.0)};
}
}  // namespace

TEST_CASE("park of an aligned balanced set") {
  const Phasor2 ph = park_transform(balanced(1.0, 0.0), FrameAngle{0.0});
  CHECK(ph.d == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ph.q == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("park of zero input") {
  const Phasor2 ph = park_transform({0.0, 0.0, 0.0}, FrameAngle{1.234});
  CHECK(ph.d == 0.0);
  CHECK(ph.q == 0.0);
}

TEST_CASE("inverse park of the unit d phasor") {
  const auto abc = inverse_park({1.0, 0.0}, FrameAngle{0.0});
  CHECK(abc[0] == doctest::Approx(1.0));
  CHECK(abc[1] == doctest::Approx(-0.5));
  CHECK(abc[2] == doctest::Approx(-0.5));
}

TEST_CASE("inverse park of zero") {
  const auto abc = inverse_park({0.0, 0.0}, FrameAngle{0.77});
  for (double v : abc) CHECK(v == 0.0);
}

TEST_CASE("park round trip on random balanced signals") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> amp(0.0, 3.0);
  std::uniform_real_distribution<double> ang(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = amp(rng), ph = ang(rng), rho = ang(rng);
    const auto abc = balanced(a, ph);
    const auto back = inverse_park(park_transform(abc, FrameAngle{rho}), FrameAngle{rho});
    for (int k = 0; k < 3; ++k) CHECK(std::abs(back[k] - abc[k]) < 1e-12);
  }
}

TEST_CASE("frequency shift quarter rotation") {
  const Phasor2 ph = frequency_shift({1.0, 0.0}, kPi / 2.0);
  CHECK(ph.d == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(ph.q == doctest::Approx(-1.0));
}

TEST_CASE("frequency shift identity") {
  const Phasor2 ph = frequency_shift({0.3, -0.7}, 0.0);
  CHECK(ph.d == 0.3);
  CHECK(ph.q == -0.7);
}

TEST_CASE("frequency shift preserves magnitude and composes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Phasor2 x{u(rng), u(rng)};
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(magnitude(frequency_shift(x, a)) - magnitude(x)) < 1e-12);
    const Phasor2 once = frequency_shift(x, a + b);
    const Phasor2 twice = frequency_shift(frequency_shift(x, a), b);
    CHECK(std::abs(once.d - twice.d) < 1e-12);
    CHECK(std::abs(once.q - twice.q) < 1e-12);
  }
}

TEST_CASE("magnitude basics") {
  CHECK(magnitude({3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(magnitude({0.0, 0.0}) == 0.0);
  CHECK(magnitude({1.0, 1.0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("power convention carries the 3/2 factor") {
  CHECK(active_power({1.0, 0.0}, {2.0, 0.0}) == doctest::Approx(3.0));
  CHECK(reactive_power({1.0, 0.0}, {0.0, -2.0}) == doctest::Approx(3.0));
}
