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

#include "inline_tomo/reconstruction.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "inline_tomo/conditioning.hpp"
#include "inline_tomo/errors.hpp"

namespace inline_tomo {

std::string_view to_string(Method m) { return m == Method::linear ? "linear" : "ml"; }
std::string_view to_string(Likelihood l) {
  return l == Likelihood::poisson ? "poisson" : "gaussian";
}

namespace {

void check_data(const Eigen::VectorXd& data, const BMatrix& b) {
  if (data.size() != b.matrix.rows()) {
    throw InvalidArgument("data has " + std::to_string(data.size()) + " entries, layout needs " +
                          std::to_string(b.matrix.rows()));
  }
  if (!data.allFinite()) throw InvalidArgument("data contains non-finite values");
}

// SVD pseudo-inverse solution; singular values below the cutoff are dropped.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& b, const Eigen::VectorXd& y) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = kRankTolerance * sv(0);
  Eigen::VectorXd coeff = svd.matrixU().transpose() * y;
  for (Eigen::Index i = 0; i < sv.size(); ++i) coeff(i) = sv(i) > cutoff ? coeff(i) / sv(i) : 0.0;
  return svd.matrixV() * coeff;
}

double min_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double frob_dot(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

}  // namespace

ReconstructionResult linear_reconstruct(const Eigen::VectorXd& gamma, const BMatrix& b) {
  check_data(gamma, b);
  const ConditioningReport report = condition_number(b);
  if (report.rank_deficient) {
    throw IllConditioned(
        "measurement frame is degenerate (sigma_min/sigma_max = " + std::to_string(report.ratio) +
        "); the layout cannot identify the state, e.g. zero detuning or coinciding analysis "
        "states");
  }
  const SymPauliBasis& basis = SymPauliBasis::get(b.photons);
  ReconstructionResult out;
  out.method = Method::linear;
  out.params = pinv_solve(b.matrix, gamma);
  out.rho = params_to_density(out.params, basis);
  out.residual = (b.matrix * out.params - gamma).norm();
  out.mu_hat = out.rho.mu();
  out.psd = min_eigenvalue(out.rho.rho) >= -1e-9;
  return out;
}

Eigen::MatrixXcd psd_project(const Eigen::MatrixXcd& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
    throw InvalidArgument("psd_project needs a Hermitian input");
  }
  const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.eigenvalues().minCoeff() >= 0.0) return h;
  const double trace = h.trace().real();
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXcd out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
  const double kept = clipped.sum();
  if (kept > 0.0) out *= trace / kept;
  return out;
}

LikelihoodModel::LikelihoodModel(const BMatrix& b, Eigen::VectorXd data, Likelihood kind)
    : photons_(b.photons),
      basis_(&SymPauliBasis::get(b.photons)),
      b_(b.matrix),
      data_(std::move(data)),
      kind_(kind) {
  check_data(data_, b);
  if (kind_ == Likelihood::poisson) {
    if (data_.minCoeff() < 0.0) throw InvalidArgument("counts must be non-negative");
    data_total_ = data_.sum();
    if (!(data_total_ > 0.0)) throw InvalidArgument("all-zero counts carry no information");
  } else {
    data_norm2_ = data_.squaredNorm();
    if (!(data_norm2_ > 0.0)) throw InvalidArgument("all-zero data carry no information");
  }
}

Eigen::VectorXd LikelihoodModel::params(const Eigen::MatrixXcd& factor) const {
  // The basis operators are permutation-invariant, so Tr(E_s twirl(A†A)) =
  // Tr(E_s A†A) and the twirl never has to be formed here.
  return density_to_params(factor.adjoint() * factor, *basis_);
}

Eigen::VectorXd LikelihoodModel::rates(const Eigen::MatrixXcd& factor) const {
  return b_ * params(factor);
}

double LikelihoodModel::scale(const Eigen::VectorXd& gamma) const {
  if (kind_ == Likelihood::poisson) return data_total_ / gamma.sum();
  return data_.dot(gamma) / gamma.squaredNorm();
}

double LikelihoodModel::value(const Eigen::MatrixXcd& factor) const {
  const Eigen::VectorXd gamma = rates(factor);
  if (kind_ == Likelihood::poisson) {
    const double total = gamma.sum();
    if (!(total > 0.0)) return -std::numeric_limits<double>::infinity();
    double f = 0.0;
    for (Eigen::Index p = 0; p < gamma.size(); ++p) {
      if (data_(p) == 0.0) continue;
      if (!(gamma(p) > 0.0)) return -std::numeric_limits<double>::infinity();
      f += data_(p) / data_total_ * std::log(gamma(p) / total);
    }
    return f;
  }
  const double g = gamma.squaredNorm();
  if (!(g > 0.0)) return -std::numeric_limits<double>::infinity();
  const double a = data_.dot(gamma);
  return 0.5 * a * a / (g * data_norm2_);
}

Eigen::VectorXd LikelihoodModel::weights(const Eigen::VectorXd& gamma) const {
  if (kind_ == Likelihood::poisson) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(gamma.size(), -1.0 / gamma.sum());
    for (Eigen::Index p = 0; p < gamma.size(); ++p) {
      if (data_(p) != 0.0) w(p) += data_(p) / data_total_ / gamma(p);
    }
    return w;
  }
  const double g = gamma.squaredNorm();
  const double a = data_.dot(gamma);
  return (a / g * data_ - a * a / (g * g) * gamma) / data_norm2_;
}

Eigen::MatrixXcd LikelihoodModel::gradient(const Eigen::MatrixXcd& factor) const {
  const Eigen::VectorXd by_param = b_.transpose() * weights(rates(factor));
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim(), dim());
  for (int s = 0; s < basis_->size(); ++s) g += by_param(s) * basis_->op(s);
  return 2.0 * factor * g;
}

namespace {

struct AscentResult {
  Eigen::MatrixXcd factor;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

AscentResult ascend(const LikelihoodModel& model, Eigen::MatrixXcd a, const MlOptions& options) {
  AscentResult res;
  a /= a.norm();
  double f = model.value(a);
  if (!std::isfinite(f)) return res;
  if (options.record_history) res.history.push_back(f);
  Eigen::MatrixXcd g = model.gradient(a);
  double step = 1e-2 / std::max(g.norm(), 1e-300);
  int quiet = 0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    res.iterations = it;
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) {
      res.converged = true;
      break;
    }
    double trial = step;
    bool accepted = false;
    Eigen::MatrixXcd next;
    double f_next = f;
    for (int k = 0; k < 60; ++k) {
      next = a + trial * g;
      f_next = model.value(next);
      if (std::isfinite(f_next) && f_next >= f + 1e-4 * trial * g2) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) {
      // No ascent direction left at machine precision.
      res.converged = true;
      break;
    }
    next /= next.norm();
    f_next = model.value(next);
    if (f_next < f) f_next = f, next = a;  // normalization is exact up to rounding
    const Eigen::MatrixXcd g_next = model.gradient(next);
    const Eigen::MatrixXcd s = next - a;
    const double sy = std::abs(frob_dot(s, g_next - g));
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 2.0 * trial;

    const double change = std::abs(f_next - f) / std::max(std::abs(f), 1e-300);
    a = next;
    f = f_next;
    g = g_next;
    if (options.record_history) res.history.push_back(f);
    quiet = change < options.tolerance ? quiet + 1 : 0;
    if (quiet >= 2) {
      res.converged = true;
      break;
    }
  }
  res.factor = a;
  res.value = f;
  return res;
}

}  // namespace

ReconstructionResult ml_reconstruct(const Eigen::VectorXd& data, const BMatrix& b,
                                    const MlOptions& options) {
  const LikelihoodModel model(b, data, options.likelihood);
  const SymPauliBasis& basis = SymPauliBasis::get(b.photons);
  const int dim = model.dim();
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(dim, dim) / dim;

  Eigen::MatrixXcd start = psd_project(params_to_density(pinv_solve(b.matrix, data), basis).rho);
  const double trace = start.trace().real();
  start = trace > 0.0 ? Eigen::MatrixXcd(start / trace) : identity;

  AscentResult best;
  for (const Eigen::MatrixXcd& rho0 : {start, Eigen::MatrixXcd(0.9 * start + 0.1 * identity)}) {
    AscentResult r = ascend(model, psd_sqrt(rho0), options);
    if (r.value > best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) {
    throw NumericalFailure("maximum-likelihood search found no state with finite likelihood");
  }

  ReconstructionResult out;
  out.method = Method::ml;
  out.likelihood = options.likelihood;
  out.identifiable = !condition_number(b).rank_deficient;
  out.params = model.params(best.factor);
  out.params /= params_to_density(out.params, basis).mu();
  out.rho = params_to_density(out.params, basis);
  const Eigen::VectorXd gamma = b.matrix * out.params;
  out.mu_hat = model.scale(gamma);
  out.residual = (out.mu_hat * gamma - data).norm();
  out.log_likelihood = best.value;
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.psd = true;
  out.objective_history = std::move(best.history);
  return out;
}

double reconstruct_and_score(const DensityMatrix& truth, const DetectorLayout& layout,
                             double events, std::uint64_t seed, const MlOptions& options) {
  require_valid(truth);
  const BMatrix b = build_B(layout, truth.photons);
  const Eigen::VectorXd gamma =
      b.matrix * density_to_params(truth.rho, SymPauliBasis::get(truth.photons));
  const Eigen::VectorXd counts = sample_counts(std::span<const double>(gamma.data(), gamma.size()), events, seed);
  const ReconstructionResult r = ml_reconstruct(counts, b, options);
  return fidelity(r.rho.rho, truth.rho);
}

}  // namespace inline_tomo
