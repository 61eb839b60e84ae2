// Copyright 2026 The inline-tomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "inline_tomo/coupler.hpp"
#include "inline_tomo/measurement.hpp"
#include "inline_tomo/state_space.hpp"

namespace inline_tomo::testing {

inline Eigen::MatrixXcd random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// Random density matrix of rank `rank` on the (N+1)-dim Fock space.
inline Eigen::MatrixXcd random_fock_density(int photons, int rank, std::mt19937_64& rng) {
  const Eigen::MatrixXcd a = random_complex(photons + 1, rank, rng);
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline DensityMatrix embed_fock(const Eigen::MatrixXcd& rho_fock, int photons) {
  const Eigen::MatrixXcd v = fock_bridge(photons);
  return {photons, v * rho_fock * v.adjoint()};
}

inline DensityMatrix random_symmetric_state(int photons, int rank, std::mt19937_64& rng) {
  return embed_fock(random_fock_density(photons, rank, rng), photons);
}

inline DetectorLayout random_layout(int detectors, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CouplerParams c = make_coupler(0.5 + u(rng), 0.2 + u(rng));
  std::vector<Detector> d;
  for (int m = 0; m < detectors; ++m) {
    d.push_back({m % 2 == 0 ? Waveguide::first : Waveguide::second, u(rng) * c.period()});
  }
  return make_layout(c, d);
}

}  // namespace inline_tomo::testing
