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
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "inline_tomo/measurement.hpp"

namespace inline_tomo {

// σ_min < kRankTolerance·σ_max counts as rank-deficient.
inline constexpr double kRankTolerance = 1e-12;

struct ConditioningReport {
  Eigen::VectorXd singular_values;  // descending, length S (zero-padded if P < S)
  double ratio = 0.0;               // raw σ_min/σ_max
  double kappa_inv = 0.0;           // ratio, or exactly 0 when rank-deficient
  double kappa = std::numeric_limits<double>::infinity();
  bool rank_deficient = true;
};

ConditioningReport condition_number(const Eigen::MatrixXd& b);
inline ConditioningReport condition_number(const BMatrix& b) {
  return condition_number(b.matrix);
}

struct CurvePoint {
  double x = 0.0;
  double kappa_inv = 0.0;
};

// κ⁻¹ of the symmetric layout for each β/C in the grid. The coupler is
// rebuilt per point (C = coupling), and z1 is given as a fraction of the
// period so that it scales with it.
std::vector<CurvePoint> sweep_beta(int photons, int detectors, std::span<const double> beta_over_c,
                                   double z1_fraction = 0.0, int threads = 1,
                                   double coupling = 1.0);

std::vector<CurvePoint> sweep_detectors(int photons, std::span<const int> detectors,
                                        double beta_over_c, int threads = 1,
                                        double coupling = 1.0);

// κ⁻¹ of shifted layouts over dz/(2Λ/M̃) = k/points, k = 0..points-1.
std::vector<CurvePoint> scan_dz(int photons, int detectors, double beta_over_c, int points,
                                int threads = 1, double coupling = 1.0);

struct DzOptimum {
  int detectors = 0;
  double dz = 0.0;              // mm
  double dz_normalized = 0.0;   // dz / (2Λ/M̃), the actual grid spacing
  double dz_nominal = 0.0;      // dz / (2Λ/M); differs from the above for odd M
  ConditioningReport report;
};

// Grid scan over [0, 2Λ/M̃) followed by golden-section refinement around the
// best grid point. Defaults to the minimal count M = N+3.
DzOptimum optimize_dz(int photons, double beta_over_c, int detectors = 0, int points = 400,
                      int threads = 1, double coupling = 1.0);

struct FreeOptions {
  int restarts = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  int max_evaluations = 3000;  // per restart
  double coupling = 1.0;
};

struct FreeOptimum {
  DetectorLayout layout;
  double beta_over_c = 0.0;
  ConditioningReport report;
  int best_restart = -1;
  std::vector<double> restart_kappa_inv;  // per restart, in restart order
};

// Multi-start Nelder–Mead over (β/C, z_1..z_M mod Λ). Waveguides are assigned
// as in shifted_layout: the first M̃/2 detectors on waveguide 1, the rest on
// waveguide 2. Restart r depends only on (seed, r), so the result is a max
// over a prefix-stable set of local searches.
FreeOptimum optimize_free_positions(int photons, int detectors, const FreeOptions& options);

}  // namespace inline_tomo
