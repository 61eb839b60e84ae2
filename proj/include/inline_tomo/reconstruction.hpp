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
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "inline_tomo/measurement.hpp"
#include "inline_tomo/state_space.hpp"

namespace inline_tomo {

enum class Method { linear, ml };
enum class Likelihood { poisson, gaussian };

std::string_view to_string(Method m);
std::string_view to_string(Likelihood l);

struct ReconstructionResult {
  DensityMatrix rho;          // linear: trace carries μ; ml: trace-normalized
  Eigen::VectorXd params;     // coordinates of rho in SymPauliBasis
  double residual = 0.0;      // ‖scale·B r − data‖₂
  double mu_hat = 0.0;        // linear: Tr ρ̂; ml: fitted scale t
  Method method = Method::linear;
  Likelihood likelihood = Likelihood::poisson;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = true;
  bool psd = true;
  bool identifiable = true;
  std::vector<double> objective_history;  // accepted iterates, when recorded
};

// Minimum-norm least squares through the SVD of B with cutoff 1e-12·σ_max.
// Throws IllConditioned when B is rank-deficient.
ReconstructionResult linear_reconstruct(const Eigen::VectorXd& gamma, const BMatrix& b);

// Clips negative eigenvalues and rescales to the original trace.
Eigen::MatrixXcd psd_project(const Eigen::MatrixXcd& rho);

struct MlOptions {
  Likelihood likelihood = Likelihood::poisson;
  int max_iterations = 10000;
  double tolerance = 1e-10;  // relative change of the objective
  bool record_history = false;
};

/// Profile log-likelihood of ρ = twirl(A†A) with the overall scale t
/// eliminated in closed form, normalized by the data so that rescaling the
/// data leaves it unchanged.
///
///  poisson:  Σ_p (n_p/Σn) log(Γ_p/ΣΓ)          (t = Σn/ΣΓ)
///  gaussian: ⟨y,Γ⟩² / (2‖Γ‖²‖y‖²)               (t = ⟨y,Γ⟩/‖Γ‖²)
class LikelihoodModel {
 public:
  LikelihoodModel(const BMatrix& b, Eigen::VectorXd data, Likelihood kind);

  int dim() const { return static_cast<int>(tensor_dim(photons_)); }
  Eigen::VectorXd params(const Eigen::MatrixXcd& factor) const;
  Eigen::VectorXd rates(const Eigen::MatrixXcd& factor) const;
  double value(const Eigen::MatrixXcd& factor) const;
  // Real gradient packed as ∂/∂Re A + i ∂/∂Im A.
  Eigen::MatrixXcd gradient(const Eigen::MatrixXcd& factor) const;
  // Best scale t for the given rates.
  double scale(const Eigen::VectorXd& gamma) const;

 private:
  Eigen::VectorXd weights(const Eigen::VectorXd& gamma) const;

  int photons_;
  const SymPauliBasis* basis_;
  Eigen::MatrixXd b_;
  Eigen::VectorXd data_;
  Likelihood kind_;
  double data_total_ = 0.0;
  double data_norm2_ = 0.0;
};

// Gradient ascent with backtracking on the factor A, started from the
// PSD-projected linear solution and from a full-rank mixture of it; the
// better end point is returned. Rank-deficient B does not throw; the result
// carries identifiable = false instead.
ReconstructionResult ml_reconstruct(const Eigen::VectorXd& data, const BMatrix& b,
                                    const MlOptions& options = {});

// Simulate Γ for `truth`, draw Poisson counts, reconstruct by ML and return
// the fidelity to the truth.
double reconstruct_and_score(const DensityMatrix& truth, const DetectorLayout& layout,
                             double events, std::uint64_t seed, const MlOptions& options = {});

}  // namespace inline_tomo
