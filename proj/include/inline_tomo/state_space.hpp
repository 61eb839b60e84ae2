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

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "inline_tomo/coupler.hpp"

namespace inline_tomo {

// Photon numbers above this need an explicit max_photons argument; operator
// dimensions grow as 2^N.
inline constexpr int kDefaultMaxPhotons = 4;

// Tensor-space convention: photon 0 is the most significant bit of a basis
// index, and bit value 0 means "in waveguide 1".
inline std::size_t tensor_dim(int photons) { return std::size_t{1} << photons; }

// Number of real parameters of a permutation-invariant N-photon state,
// (N+3)!/(N!·3!).
int dim_params(int photons);

// Pauli-label multisets (counts of I, σx, σy, σz) in SymPauliBasis order.
std::vector<std::array<int, 4>> pauli_multisets(int photons);
// Number of distinct orderings of a multiset.
long multiset_arrangements(const std::array<int, 4>& counts);

/// Hilbert–Schmidt orthonormal basis of the permutation-invariant Hermitian
/// operators on (C²)^⊗N.
///
/// Element s is the normalized sum over the distinct orderings of a multiset
/// of N Pauli labels {I, σx, σy, σz}. Multisets are ordered by descending
/// (n_I, n_x, n_y, n_z), so element 0 is always I/√(2^N).
class SymPauliBasis {
 public:
  // Cached per N; safe to call from several threads.
  static const SymPauliBasis& get(int photons,
                                  int max_photons = kDefaultMaxPhotons);

  int photons() const { return photons_; }
  int size() const { return static_cast<int>(ops_.size()); }
  const Eigen::MatrixXcd& op(int s) const { return ops_[s]; }
  // Counts of (I, σx, σy, σz) in element s.
  const std::array<int, 4>& multiset(int s) const { return multisets_[s]; }
  // Number of distinct Pauli strings summed into element s.
  long arrangements(int s) const { return arrangements_[s]; }

 private:
  explicit SymPauliBasis(int photons);

  int photons_;
  std::vector<Eigen::MatrixXcd> ops_;
  std::vector<std::array<int, 4>> multisets_;
  std::vector<long> arrangements_;
};

// Tensor product of single-photon operators, ops[0] acting on photon 0.
Eigen::MatrixXcd kron_all(const std::vector<Mat2>& ops);

/// N-photon density matrix. Tr(rho) = μ, the overall transmission.
struct DensityMatrix {
  int photons = 1;
  Eigen::MatrixXcd rho;

  double mu() const { return rho.trace().real(); }
  DensityMatrix normalized() const;
};

struct StateCheck {
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double permutation_error = 0.0;
  double trace = 0.0;
  bool valid = false;
};

// Hermitian to 1e-10, eigenvalues ≥ -1e-9, permutation-invariant to 1e-10.
StateCheck check_state(const DensityMatrix& rho);
void require_valid(const DensityMatrix& rho);

Eigen::VectorXd density_to_params(const Eigen::MatrixXcd& rho,
                                  const SymPauliBasis& basis);
// Plain linear expansion; positivity is not enforced.
DensityMatrix params_to_density(const Eigen::VectorXd& r,
                                const SymPauliBasis& basis);

// Conjugates a tensor-space operator by the photon relabeling `perm`, where
// photon j is moved to slot perm[j].
Eigen::MatrixXcd permute_photons(const Eigen::MatrixXcd& op,
                                 const std::vector<int>& perm);

// (1/N!) Σ_P P ρ P†.
Eigen::MatrixXcd twirl(const Eigen::MatrixXcd& rho);

// Pure states embedded in the symmetric subspace; all have unit trace.
DensityMatrix make_noon(int photons);
DensityMatrix make_single(Complex c1, Complex c2);
DensityMatrix make_product(Complex c1, Complex c2, int photons);

// Isometry V (2^N × (N+1)). Column k is the normalized symmetric tensor state
// with N-k photons in waveguide 1 and k in waveguide 2, i.e. Fock |N-k, k⟩.
Eigen::MatrixXcd fock_bridge(int photons,
                             int max_photons = kDefaultMaxPhotons);

// Uhlmann fidelity (Tr √(√ρ₁ ρ₂ √ρ₁))² of the trace-normalized inputs.
double fidelity(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2);

// Principal square root of a Hermitian PSD matrix (negative eigenvalues
// clipped).
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m);

}  // namespace inline_tomo
