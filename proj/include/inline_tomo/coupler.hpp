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

#include <complex>

#include <Eigen/Dense>

namespace inline_tomo {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

enum class Waveguide : int { first = 1, second = 2 };

// Throws InvalidArgument unless index is 1 or 2.
Waveguide waveguide_from_index(int index);
inline int index_of(Waveguide q) { return static_cast<int>(q); }

/// Two detuned, evanescently coupled waveguides.
///
/// `revival_length` L = 2π/η is where the transfer matrix returns to the
/// identity. Because T(L/2) = -I, every observable of a fixed photon number
/// (analysis-state projectors, intensities, coincidences) already repeats
/// after `period()` = L/2; detector layouts and reconstruction windows span
/// one period.
struct CouplerParams {
  double coupling = 0.0;  // C, 1/mm
  double detuning = 0.0;  // β, 1/mm
  double eta = 0.0;       // sqrt(C² + β²)
  double revival_length = 0.0;

  double period() const { return 0.5 * revival_length; }
  double beta_over_c() const { return detuning / coupling; }
};

CouplerParams make_coupler(double coupling, double detuning);

// Coupler with C = coupling and β = ratio·C.
CouplerParams make_coupler_ratio(double beta_over_c, double coupling = 1.0);

// Heisenberg-picture transfer matrix:
//   T_qq = cos(ηz) + i(-1)^q (β/η) sin(ηz),  T_q,3-q = -i (C/η) sin(ηz).
Mat2 transfer_matrix(const CouplerParams& p, double z);

// Amplitude map c(0) -> c(z); the elementwise conjugate of T(z).
Mat2 single_photon_propagator(const CouplerParams& p, double z);

struct AnalysisState {
  Vec2 amplitudes;
  Waveguide waveguide = Waveguide::first;
  double z = 0.0;
};

// |ψ⟩ = U(z)†|q⟩, i.e. row q of T(z). A photon with amplitudes c clicks the
// detector (q, z) with probability |⟨ψ|c⟩|².
AnalysisState analysis_state(const CouplerParams& p, Waveguide q, double z);

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

// Pauli matrix by index: 0 = I, 1 = σx, 2 = σy, 3 = σz. Waveguide 1 is the
// +z pole.
Mat2 pauli(int index);

// S_i = Tr(σ_i ρ). Rejects inputs that are not Hermitian with unit trace
// within `tolerance`.
BlochVector bloch_coords(const Mat2& rho, double tolerance = 1e-9);

BlochVector bloch_of_state(const Vec2& psi);

}  // namespace inline_tomo
