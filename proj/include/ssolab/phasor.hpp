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

#include <array>
#include <cmath>

namespace ssolab {

/// A d-q pair representing a space phasor in a rotating frame.
///
/// Convention: amplitude-invariant (peak-scaled) Park transform, so a
/// balanced three-phase set of peak amplitude A aligned with the frame maps
/// to (A, 0) and three-phase power is p = (3/2)(v_d i_d + v_q i_q).
struct Phasor2 {
  double d = 0.0;
  double q = 0.0;

  Phasor2() = default;
  Phasor2(double d_, double q_) : d(d_), q(q_) {}
};

/// Rotating-frame angle in radians. Stored unwrapped; wrap only for display.
struct FrameAngle {
  double rho = 0.0;

  FrameAngle() = default;
  explicit FrameAngle(double r) : rho(r) {}
};

/// Per-unit base quantities. All strictly positive.
struct PerUnitBase {
  double s_base_mva = 100.0;
  double v_ac_base_kv = 20.0;
  double v_dc_base_kv = 48.9873;
  double f_base_hz = 60.0;

  double omega_base() const { return 2.0 * 3.14159265358979323846 * f_base_hz; }
};

inline double magnitude(const Phasor2& ph) { return std::hypot(ph.d, ph.q); }

/// Rotation by -delta_rho. Magnitude preserving.
inline Phasor2 frequency_shift(const Phasor2& ph, double delta_rho) {
  const double c = std::cos(delta_rho);
  const double s = std::sin(delta_rho);
  return {ph.d * c + ph.q * s, -ph.d * s + ph.q * c};
}

/// Amplitude-invariant Park transform of an instantaneous three-phase sample.
inline Phasor2 park_transform(const std::array<double, 3>& abc, FrameAngle rho) {
  constexpr double two_thirds = 2.0 / 3.0;
  constexpr double two_pi_3 = 2.0 * 3.14159265358979323846 / 3.0;
  const double r = rho.rho;
  const double ca = std::cos(r), cb = std::cos(r - two_pi_3), cc = std::cos(r + two_pi_3);
  const double sa = std::sin(r), sb = std::sin(r - two_pi_3), sc = std::sin(r + two_pi_3);
  return {two_thirds * (abc[0] * ca + abc[1] * cb + abc[2] * cc),
          -two_thirds * (abc[0] * sa + abc[1] * sb + abc[2] * sc)};
}

/// Left inverse of park_transform on balanced signals.
inline std::array<double, 3> inverse_park(const Phasor2& ph, FrameAngle rho) {
  constexpr double two_pi_3 = 2.0 * 3.14159265358979323846 / 3.0;
  const double r = rho.rho;
  return {ph.d * std::cos(r) - ph.q * std::sin(r),
          ph.d * std::cos(r - two_pi_3) - ph.q * std::sin(r - two_pi_3),
          ph.d * std::cos(r + two_pi_3) - ph.q * std::sin(r + two_pi_3)};
}

/// Three-phase power carried by a voltage/current phasor pair.
inline double active_power(const Phasor2& v, const Phasor2& i) {
  return 1.5 * (v.d * i.d + v.q * i.q);
}

inline double reactive_power(const Phasor2& v, const Phasor2& i) {
  return 1.5 * (v.q * i.d - v.d * i.q);
}

}  // namespace ssolab
