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

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "inline_tomo/coupler.hpp"
#include "inline_tomo/state_space.hpp"

namespace inline_tomo {

struct Detector {
  Waveguide waveguide = Waveguide::first;
  double z = 0.0;  // mm, in [0, coupler.period())
};

struct DetectorLayout {
  CouplerParams coupler;
  std::vector<Detector> detectors;

  int size() const { return static_cast<int>(detectors.size()); }
};

// Validates and wraps positions into [0, period).
DetectorLayout make_layout(const CouplerParams& coupler, std::vector<Detector> detectors);

// M/2 cross-sections at z1 + k·(2Λ/M), Λ = coupler.period(), one detector per
// waveguide each. Detector order: (wg1, wg2) per cross-section.
DetectorLayout symmetric_layout(const CouplerParams& coupler, int detectors, double z1);

// Waveguide-1 detectors at k·(2Λ/M̃), waveguide-2 detectors shifted by dz,
// M̃ = M rounded up to even; for odd M the last waveguide-2 detector is
// dropped. Detector order: all of waveguide 1, then waveguide 2.
DetectorLayout shifted_layout(const CouplerParams& coupler, int detectors, double dz);

// Even detector count used by shifted_layout.
inline int padded_count(int detectors) { return detectors + detectors % 2; }

// Zero-based, strictly increasing detector indices.
using Combination = std::vector<int>;

// All N-subsets of {0..M-1} in lexicographic order.
std::vector<Combination> enumerate_combinations(int detectors, int photons);
long count_combinations(int detectors, int photons);

Mat2 detector_projector(const DetectorLayout& layout, int m);

// Σ over the N! assignments of detectors to photon slots of ⊗ π_m.
Eigen::MatrixXcd coincidence_operator(const DetectorLayout& layout, const Combination& combo,
                                      int photons);

// Γ_p = Tr(ρ Π_p) for every combination p.
Eigen::VectorXd gamma_tensor(const DensityMatrix& rho, const DetectorLayout& layout);

// Second-quantized reference for Γ. `rho_fock` is (N+1)×(N+1) in the basis
// |N-k, k⟩, k = 0..N (k photons in waveguide 2).
double gamma_fock_oracle(const Eigen::MatrixXcd& rho_fock, const DetectorLayout& layout,
                         const Combination& combo);

/// Linear map from state parameters (SymPauliBasis coordinates) to
/// coincidence rates: Γ = B·r.
struct BMatrix {
  Eigen::MatrixXd matrix;  // P × S
  int photons = 1;
  std::vector<Combination> combinations;
  DetectorLayout layout;
};

BMatrix build_B(const DetectorLayout& layout, int photons);

// Independent Poisson counts with means events·Γ_p/ΣΓ (Γ clipped at 0).
Eigen::VectorXd sample_counts(std::span<const double> gamma, double events,
                              std::uint64_t seed);

// Stream seed for task `index`, derived from one base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace inline_tomo
