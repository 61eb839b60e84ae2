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

#include "inline_tomo/coupler.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "inline_tomo/errors.hpp"

namespace inline_tomo {

Waveguide waveguide_from_index(int index) {
  if (index != 1 && index != 2) {
    throw InvalidArgument("waveguide index must be 1 or 2, got " +
                          std::to_string(index));
  }
  return static_cast<Waveguide>(index);
}

CouplerParams make_coupler(double coupling, double detuning) {
  if (!std::isfinite(coupling) || coupling <= 0.0) {
    throw InvalidArgument("coupling constant must be positive and finite");
  }
  if (!std::isfinite(detuning)) {
    throw InvalidArgument("detuning must be finite");
  }
  CouplerParams p;
  p.coupling = coupling;
  p.detuning = detuning;
  p.eta = std::hypot(coupling, detuning);
  p.revival_length = 2.0 * std::numbers::pi / p.eta;
  return p;
}

CouplerParams make_coupler_ratio(double beta_over_c, double coupling) {
  return make_coupler(coupling, beta_over_c * coupling);
}

Mat2 transfer_matrix(const CouplerParams& p, double z) {
  if (!std::isfinite(z)) throw InvalidArgument("position must be finite");
  const double c = std::cos(p.eta * z);
  const double s = std::sin(p.eta * z);
  const double b = p.detuning / p.eta;
  const double k = p.coupling / p.eta;
  Mat2 t;
  t(0, 0) = Complex(c, -b * s);
  t(1, 1) = Complex(c, b * s);
  t(0, 1) = Complex(0.0, -k * s);
  t(1, 0) = t(0, 1);
  return t;
}

Mat2 single_photon_propagator(const CouplerParams& p, double z) {
  return transfer_matrix(p, z).conjugate();
}

AnalysisState analysis_state(const CouplerParams& p, Waveguide q, double z) {
  const Mat2 t = transfer_matrix(p, z);
  const int row = index_of(q) - 1;
  return {t.row(row).transpose(), q, z};
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

Mat2 pauli(int index) {
  Mat2 m;
  switch (index) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw InvalidArgument("Pauli index must be in 0..3");
  }
  return m;
}

BlochVector bloch_coords(const Mat2& rho, double tolerance) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tolerance) {
    throw InvalidArgument("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - 1.0) > tolerance) {
    throw InvalidArgument("density matrix must have unit trace");
  }
  return {(pauli(1) * rho).trace().real(), (pauli(2) * rho).trace().real(),
          (pauli(3) * rho).trace().real()};
}

BlochVector bloch_of_state(const Vec2& psi) {
  const Vec2 u = psi / psi.norm();
  return bloch_coords(u * u.adjoint());
}

}  // namespace inline_tomo
