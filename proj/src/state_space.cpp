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

#include "inline_tomo/state_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "inline_tomo/errors.hpp"

namespace inline_tomo {
namespace {

constexpr int kHardPhotonLimit = 8;

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

void check_photons(int photons, int max_photons) {
  if (photons < 1 || photons > std::min(max_photons, kHardPhotonLimit)) {
    throw InvalidArgument("photon number " + std::to_string(photons) +
                          " outside supported range 1.." +
                          std::to_string(std::min(max_photons, kHardPhotonLimit)));
  }
}

int photons_from_dim(Eigen::Index dim) {
  if (dim < 2 || !std::has_single_bit(static_cast<unsigned long>(dim))) {
    throw InvalidArgument("operator dimension must be 2^N");
  }
  return std::countr_zero(static_cast<unsigned long>(dim));
}

}  // namespace

int dim_params(int photons) {
  if (photons < 1) throw InvalidArgument("photon number must be positive");
  return static_cast<int>(binomial(photons + 3, 3));
}

const SymPauliBasis& SymPauliBasis::get(int photons, int max_photons) {
  check_photons(photons, max_photons);
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<SymPauliBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[photons];
  if (!slot) slot.reset(new SymPauliBasis(photons));
  return *slot;
}

std::vector<std::array<int, 4>> pauli_multisets(int photons) {
  std::vector<std::array<int, 4>> out;
  for (int ni = photons; ni >= 0; --ni) {
    for (int nx = photons - ni; nx >= 0; --nx) {
      for (int ny = photons - ni - nx; ny >= 0; --ny) {
        out.push_back({ni, nx, ny, photons - ni - nx - ny});
      }
    }
  }
  return out;
}

long multiset_arrangements(const std::array<int, 4>& counts) {
  long n = 1;
  int placed = 0;
  for (int c : counts) {
    for (int i = 1; i <= c; ++i) n = n * (placed + i) / i;
    placed += c;
  }
  return n;
}

SymPauliBasis::SymPauliBasis(int photons)
    : photons_(photons), multisets_(pauli_multisets(photons)) {
  const std::size_t dim = tensor_dim(photons);
  for (const auto& counts : multisets_) {
    std::vector<int> labels;
    for (int k = 0; k < 4; ++k) labels.insert(labels.end(), counts[k], k);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
    long n = 0;
    do {
      std::vector<Mat2> factors;
      for (int l : labels) factors.push_back(pauli(l));
      sum += kron_all(factors);
      ++n;
    } while (std::next_permutation(labels.begin(), labels.end()));
    sum /= std::sqrt(static_cast<double>(n) * static_cast<double>(dim));
    ops_.push_back(std::move(sum));
    arrangements_.push_back(n);
  }
}

Eigen::MatrixXcd kron_all(const std::vector<Mat2>& ops) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (const Mat2& f : ops) {
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block<2, 2>(2 * i, 2 * j) = out(i, j) * f;
      }
    }
    out = std::move(next);
  }
  return out;
}

DensityMatrix DensityMatrix::normalized() const {
  const double t = mu();
  if (!(t > 0.0)) throw InvalidArgument("cannot normalize a state with non-positive trace");
  return {photons, rho / t};
}

StateCheck check_state(const DensityMatrix& state) {
  StateCheck c;
  const auto& rho = state.rho;
  if (rho.rows() != static_cast<Eigen::Index>(tensor_dim(state.photons)) ||
      rho.cols() != rho.rows()) {
    throw InvalidArgument("density matrix shape does not match photon number");
  }
  c.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  c.trace = state.mu();
  std::vector<int> perm(state.photons);
  std::iota(perm.begin(), perm.end(), 0);
  for (int j = 0; j + 1 < state.photons; ++j) {
    std::swap(perm[j], perm[j + 1]);
    c.permutation_error = std::max(
        c.permutation_error, (permute_photons(rho, perm) - rho).cwiseAbs().maxCoeff());
    std::swap(perm[j], perm[j + 1]);
  }
  c.valid = c.hermiticity_error <= 1e-10 && c.min_eigenvalue >= -1e-9 &&
            c.permutation_error <= 1e-10;
  return c;
}

void require_valid(const DensityMatrix& rho) {
  const StateCheck c = check_state(rho);
  if (!c.valid) {
    throw InvalidArgument(
        "invalid density matrix (hermiticity " + std::to_string(c.hermiticity_error) +
        ", min eigenvalue " + std::to_string(c.min_eigenvalue) + ", permutation " +
        std::to_string(c.permutation_error) + ")");
  }
}

Eigen::VectorXd density_to_params(const Eigen::MatrixXcd& rho,
                                  const SymPauliBasis& basis) {
  if (rho.rows() != static_cast<Eigen::Index>(tensor_dim(basis.photons()))) {
    throw InvalidArgument("density matrix does not match basis photon number");
  }
  Eigen::VectorXd r(basis.size());
  for (int s = 0; s < basis.size(); ++s) {
    // E_s is Hermitian, so Tr(E_s ρ) = Σ conj(E_s)_{ij} ρ_{ij}.
    r(s) = (basis.op(s).conjugate().cwiseProduct(rho)).sum().real();
  }
  return r;
}

DensityMatrix params_to_density(const Eigen::VectorXd& r, const SymPauliBasis& basis) {
  if (r.size() != basis.size()) {
    throw InvalidArgument("parameter vector has length " + std::to_string(r.size()) +
                          ", expected " + std::to_string(basis.size()));
  }
  const std::size_t dim = tensor_dim(basis.photons());
  DensityMatrix out{basis.photons(), Eigen::MatrixXcd::Zero(dim, dim)};
  for (int s = 0; s < basis.size(); ++s) out.rho += r(s) * basis.op(s);
  return out;
}

Eigen::MatrixXcd permute_photons(const Eigen::MatrixXcd& op, const std::vector<int>& perm) {
  const int n = photons_from_dim(op.rows());
  if (static_cast<int>(perm.size()) != n) {
    throw InvalidArgument("permutation length does not match photon number");
  }
  const std::size_t dim = tensor_dim(n);
  std::vector<std::size_t> image(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t j = 0;
    for (int p = 0; p < n; ++p) {
      const std::size_t bit = (i >> (n - 1 - p)) & 1U;
      j |= bit << (n - 1 - perm[p]);
    }
    image[i] = j;
  }
  Eigen::MatrixXcd out(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < dim; ++k) out(image[i], image[k]) = op(i, k);
  }
  return out;
}

Eigen::MatrixXcd twirl(const Eigen::MatrixXcd& rho) {
  const int n = photons_from_dim(rho.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  long count = 0;
  do {
    sum += permute_photons(rho, perm);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum / static_cast<double>(count);
}

namespace {

DensityMatrix pure(int photons, const Eigen::VectorXcd& psi) {
  return {photons, psi * psi.adjoint()};
}

void check_amplitudes(Complex c1, Complex c2) {
  if (std::abs(std::norm(c1) + std::norm(c2) - 1.0) > 1e-9) {
    throw InvalidArgument("amplitudes must satisfy |c1|² + |c2|² = 1");
  }
}

}  // namespace

DensityMatrix make_noon(int photons) {
  check_photons(photons, kDefaultMaxPhotons);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(tensor_dim(photons));
  psi(0) += (1.0 / std::numbers::sqrt2);
  psi(tensor_dim(photons) - 1) += (1.0 / std::numbers::sqrt2);
  return pure(photons, psi);
}

DensityMatrix make_single(Complex c1, Complex c2) { return make_product(c1, c2, 1); }

DensityMatrix make_product(Complex c1, Complex c2, int photons) {
  check_photons(photons, kDefaultMaxPhotons);
  check_amplitudes(c1, c2);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (int k = 0; k < photons; ++k) {
    Eigen::VectorXcd next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      next(2 * i) = psi(i) * c1;
      next(2 * i + 1) = psi(i) * c2;
    }
    psi = std::move(next);
  }
  return pure(photons, psi);
}

Eigen::MatrixXcd fock_bridge(int photons, int max_photons) {
  check_photons(photons, max_photons);
  const std::size_t dim = tensor_dim(photons);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(dim, photons + 1);
  for (std::size_t i = 0; i < dim; ++i) {
    const int k = std::popcount(i);
    v(i, k) = 1.0 / std::sqrt(static_cast<double>(binomial(photons, k)));
  }
  return v;
}

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols() ||
      rho1.rows() != rho1.cols()) {
    throw InvalidArgument("fidelity needs two square matrices of equal size");
  }
  const double t1 = rho1.trace().real();
  const double t2 = rho2.trace().real();
  if (!(t1 > 0.0) || !(t2 > 0.0)) {
    throw InvalidArgument("fidelity needs states with positive trace");
  }
  const Eigen::MatrixXcd s1 = psd_sqrt(rho1 / t1);
  const Eigen::MatrixXcd inner = s1 * (rho2 / t2) * s1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (inner + inner.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  const double root_sum = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

}  // namespace inline_tomo
