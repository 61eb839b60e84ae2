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

#include "inline_tomo/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "inline_tomo/errors.hpp"

namespace inline_tomo {
namespace {

double wrap(double z, double period) {
  double w = std::fmod(z, period);
  if (w < 0.0) w += period;
  if (w >= period) w = 0.0;
  return w;
}

void check_combination(const Combination& combo, int detectors) {
  for (std::size_t i = 0; i < combo.size(); ++i) {
    if (combo[i] < 0 || combo[i] >= detectors) {
      throw InvalidArgument("detector index " + std::to_string(combo[i]) + " out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (combo[i] == combo[j]) {
        throw InvalidArgument("click detectors cannot appear twice in a coincidence");
      }
    }
  }
}

// Row m: (1, Sx, Sy, Sz) of the detector's analysis state, so that
// Tr(σ_k π_m) = t(m, k).
Eigen::MatrixX4d pauli_overlaps(const DetectorLayout& layout) {
  Eigen::MatrixX4d t(layout.size(), 4);
  for (int m = 0; m < layout.size(); ++m) {
    const auto& d = layout.detectors[m];
    const BlochVector b = bloch_of_state(analysis_state(layout.coupler, d.waveguide, d.z).amplitudes);
    t.row(m) << 1.0, b.x, b.y, b.z;
  }
  return t;
}

double permanent(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double sum = 0.0;
  do {
    double prod = 1.0;
    for (int j = 0; j < n; ++j) prod *= a(j, perm[j]);
    sum += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

}  // namespace

DetectorLayout make_layout(const CouplerParams& coupler, std::vector<Detector> detectors) {
  if (detectors.empty()) throw InvalidArgument("layout needs at least one detector");
  const double period = coupler.period();
  for (auto& d : detectors) {
    waveguide_from_index(index_of(d.waveguide));
    if (!std::isfinite(d.z)) throw InvalidArgument("detector position must be finite");
    d.z = wrap(d.z, period);
  }
  return {coupler, std::move(detectors)};
}

DetectorLayout symmetric_layout(const CouplerParams& coupler, int detectors, double z1) {
  if (detectors < 2 || detectors % 2 != 0) {
    throw InvalidArgument("symmetric layout needs an even detector count >= 2, got " +
                          std::to_string(detectors));
  }
  const double period = coupler.period();
  if (!(z1 >= 0.0 && z1 < period)) {
    throw InvalidArgument("z1 must lie in [0, " + std::to_string(period) + ")");
  }
  const double spacing = 2.0 * period / detectors;
  std::vector<Detector> out;
  for (int k = 0; k < detectors / 2; ++k) {
    const double z = z1 + k * spacing;
    out.push_back({Waveguide::first, z});
    out.push_back({Waveguide::second, z});
  }
  return make_layout(coupler, std::move(out));
}

DetectorLayout shifted_layout(const CouplerParams& coupler, int detectors, double dz) {
  if (detectors < 4) throw InvalidArgument("shifted layout needs at least 4 detectors");
  const int padded = padded_count(detectors);
  const double spacing = 2.0 * coupler.period() / padded;
  if (!(dz >= 0.0 && dz < spacing)) {
    throw InvalidArgument("dz must lie in [0, " + std::to_string(spacing) + ")");
  }
  std::vector<Detector> out;
  for (int k = 0; k < padded / 2; ++k) out.push_back({Waveguide::first, k * spacing});
  for (int k = 0; k < padded / 2; ++k) out.push_back({Waveguide::second, k * spacing + dz});
  if (detectors % 2 != 0) out.pop_back();
  return make_layout(coupler, std::move(out));
}

long count_combinations(int detectors, int photons) {
  if (photons < 0 || detectors < photons) return 0;
  long b = 1;
  for (int i = 1; i <= photons; ++i) b = b * (detectors - photons + i) / i;
  return b;
}

std::vector<Combination> enumerate_combinations(int detectors, int photons) {
  if (photons < 1) throw InvalidArgument("photon number must be positive");
  if (detectors < photons) {
    throw InvalidArgument("need at least N detectors (M=" + std::to_string(detectors) +
                          ", N=" + std::to_string(photons) + ")");
  }
  std::vector<Combination> out;
  out.reserve(count_combinations(detectors, photons));
  Combination c(photons);
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    out.push_back(c);
    int i = photons - 1;
    while (i >= 0 && c[i] == detectors - photons + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < photons; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

Mat2 detector_projector(const DetectorLayout& layout, int m) {
  if (m < 0 || m >= layout.size()) {
    throw InvalidArgument("detector index " + std::to_string(m) + " out of range");
  }
  const auto& d = layout.detectors[m];
  const Vec2 psi = analysis_state(layout.coupler, d.waveguide, d.z).amplitudes;
  return psi * psi.adjoint();
}

Eigen::MatrixXcd coincidence_operator(const DetectorLayout& layout, const Combination& combo,
                                      int photons) {
  if (static_cast<int>(combo.size()) != photons) {
    throw InvalidArgument("combination size must equal the photon number");
  }
  check_combination(combo, layout.size());
  std::vector<Mat2> projectors;
  for (int m : combo) projectors.push_back(detector_projector(layout, m));
  std::vector<int> slot(photons);
  std::iota(slot.begin(), slot.end(), 0);
  const std::size_t dim = tensor_dim(photons);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
  do {
    std::vector<Mat2> factors;
    for (int j = 0; j < photons; ++j) factors.push_back(projectors[slot[j]]);
    sum += kron_all(factors);
  } while (std::next_permutation(slot.begin(), slot.end()));
  return sum;
}

Eigen::VectorXd gamma_tensor(const DensityMatrix& rho, const DetectorLayout& layout) {
  if (rho.rho.rows() != static_cast<Eigen::Index>(tensor_dim(rho.photons))) {
    throw InvalidArgument("density matrix shape does not match its photon number");
  }
  const auto combos = enumerate_combinations(layout.size(), rho.photons);
  Eigen::VectorXd gamma(combos.size());
  for (std::size_t p = 0; p < combos.size(); ++p) {
    const Eigen::MatrixXcd pi = coincidence_operator(layout, combos[p], rho.photons);
    gamma(p) = (rho.rho * pi).trace().real();
  }
  return gamma;
}

double gamma_fock_oracle(const Eigen::MatrixXcd& rho_fock, const DetectorLayout& layout,
                         const Combination& combo) {
  const int photons = static_cast<int>(combo.size());
  if (photons < 1 || rho_fock.rows() != photons + 1 || rho_fock.cols() != photons + 1) {
    throw InvalidArgument("Fock density matrix must be (N+1)x(N+1) for an N-detector combination");
  }
  check_combination(combo, layout.size());

  // Two-mode Fock states with at most N photons.
  std::vector<std::pair<int, int>> states;
  for (int total = 0; total <= photons; ++total) {
    for (int k = 0; k <= total; ++k) states.emplace_back(total - k, k);
  }
  const auto index_of_state = [&](int n1, int n2) {
    const int total = n1 + n2;
    return total * (total + 1) / 2 + n2;
  };
  const int dim = static_cast<int>(states.size());
  Eigen::MatrixXcd a1 = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd a2 = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const auto [n1, n2] = states[i];
    if (n1 > 0) a1(index_of_state(n1 - 1, n2), i) = std::sqrt(static_cast<double>(n1));
    if (n2 > 0) a2(index_of_state(n1, n2 - 1), i) = std::sqrt(static_cast<double>(n2));
  }

  Eigen::MatrixXcd lowering = Eigen::MatrixXcd::Identity(dim, dim);
  for (int m : combo) {
    const auto& d = layout.detectors[m];
    const Mat2 t = transfer_matrix(layout.coupler, d.z);
    const int q = index_of(d.waveguide) - 1;
    const Eigen::MatrixXcd b = std::conj(t(q, 0)) * a1 + std::conj(t(q, 1)) * a2;
    lowering = b * lowering;
  }
  const Eigen::MatrixXcd normal_ordered = lowering.adjoint() * lowering;

  const int offset = index_of_state(photons, 0);
  const Eigen::MatrixXcd sector = normal_ordered.block(offset, offset, photons + 1, photons + 1);
  return (rho_fock * sector).trace().real();
}

BMatrix build_B(const DetectorLayout& layout, int photons) {
  if (photons < 1) throw InvalidArgument("photon number must be positive");
  const auto multisets = pauli_multisets(photons);
  const int params = static_cast<int>(multisets.size());
  BMatrix out;
  out.photons = photons;
  out.layout = layout;
  out.combinations = enumerate_combinations(layout.size(), photons);
  const Eigen::MatrixX4d overlaps = pauli_overlaps(layout);
  const double dim = static_cast<double>(tensor_dim(photons));

  std::vector<std::vector<int>> labels(params);
  std::vector<double> weight(params);
  for (int s = 0; s < params; ++s) {
    for (int k = 0; k < 4; ++k) labels[s].insert(labels[s].end(), multisets[s][k], k);
    weight[s] = std::sqrt(multiset_arrangements(multisets[s]) / dim);
  }

  out.matrix.resize(static_cast<Eigen::Index>(out.combinations.size()), params);
  Eigen::MatrixXd a(photons, photons);
  for (std::size_t p = 0; p < out.combinations.size(); ++p) {
    const auto& combo = out.combinations[p];
    for (int s = 0; s < params; ++s) {
      for (int j = 0; j < photons; ++j) {
        for (int k = 0; k < photons; ++k) a(j, k) = overlaps(combo[k], labels[s][j]);
      }
      // Tr(E_s Π_p): each distinct Pauli string of E_s contributes the same
      // permanent, since permuting rows leaves it unchanged.
      out.matrix(p, s) = weight[s] * permanent(a);
    }
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over (base, index)
  std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd sample_counts(std::span<const double> gamma, double events,
                              std::uint64_t seed) {
  if (!(events > 0.0)) throw InvalidArgument("total events must be positive");
  double total = 0.0;
  for (double g : gamma) total += std::max(g, 0.0);
  if (!(total > 0.0)) throw InvalidArgument("cannot sample counts from all-zero rates");
  std::mt19937_64 rng(seed);
  Eigen::VectorXd counts(static_cast<Eigen::Index>(gamma.size()));
  for (std::size_t p = 0; p < gamma.size(); ++p) {
    const double mean = events * std::max(gamma[p], 0.0) / total;
    if (mean > 0.0) {
      std::poisson_distribution<long long> draw(mean);
      counts(static_cast<Eigen::Index>(p)) = static_cast<double>(draw(rng));
    } else {
      counts(static_cast<Eigen::Index>(p)) = 0.0;
    }
  }
  return counts;
}

}  // namespace inline_tomo
