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
#include <cstddef>

namespace ssolab {

// One classic fixed-step RK4 step on a std::array state. The derivative
// callable must return false to abort (non-finite state, guard violation).
template <std::size_t N, typename Deriv>
bool rk4_step(std::array<double, N>& x, double t, double dt, Deriv&& f) {
  using Vec = std::array<double, N>;
  Vec k1{}, k2{}, k3{}, k4{}, w{};
  if (!f(x, t, k1)) return false;
  for (std::size_t i = 0; i < N; ++i) w[i] = x[i] + 0.5 * dt * k1[i];
  if (!f(w, t + 0.5 * dt, k2)) return false;
  for (std::size_t i = 0; i < N; ++i) w[i] = x[i] + 0.5 * dt * k2[i];
  if (!f(w, t + 0.5 * dt, k3)) return false;
  for (std::size_t i = 0; i < N; ++i) w[i] = x[i] + dt * k3[i];
  if (!f(w, t + dt, k4)) return false;
  for (std::size_t i = 0; i < N; ++i)
    x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return true;
}

}  // namespace ssolab
