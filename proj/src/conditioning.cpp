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

#include "inline_tomo/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "inline_tomo/errors.hpp"
#include "inline_tomo/parallel.hpp"
#include "optimize.hpp"

namespace inline_tomo {

ConditioningReport condition_number(const Eigen::MatrixXd& b) {
  if (b.size() == 0) throw InvalidArgument("condition number of an empty matrix");
  if (!b.allFinite()) throw InvalidArgument("B matrix has non-finite entries");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  ConditioningReport r;
  r.singular_values = Eigen::VectorXd::Zero(b.cols());
  r.singular_values.head(svd.singularValues().size()) = svd.singularValues();
  const double smax = r.singular_values(0);
  const double smin = r.singular_values(b.cols() - 1);
  r.ratio = smax > 0.0 ? smin / smax : 0.0;
  r.rank_deficient = !(smax > 0.0) || smin < kRankTolerance * smax;
  r.kappa_inv = r.rank_deficient ? 0.0 : r.ratio;
  r.kappa = r.rank_deficient ? std::numeric_limits<double>::infinity() : smax / smin;
  return r;
}

namespace {

double symmetric_kappa_inv(int photons, int detectors, double beta_over_c, double z1_fraction,
                           double coupling) {
  const CouplerParams c = make_coupler_ratio(beta_over_c, coupling);
  const DetectorLayout layout = symmetric_layout(c, detectors, z1_fraction * c.period());
  return condition_number(build_B(layout, photons)).kappa_inv;
}

double shifted_kappa_inv(int photons, int detectors, const CouplerParams& c, double u) {
  const double spacing = 2.0 * c.period() / padded_count(detectors);
  return condition_number(build_B(shifted_layout(c, detectors, u * spacing), photons)).kappa_inv;
}

}  // namespace

std::vector<CurvePoint> sweep_beta(int photons, int detectors, std::span<const double> beta_over_c,
                                   double z1_fraction, int threads, double coupling) {
  if (!(z1_fraction >= 0.0 && z1_fraction < 1.0)) {
    throw InvalidArgument("z1 fraction must lie in [0, 1)");
  }
  std::vector<CurvePoint> out(beta_over_c.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = {beta_over_c[i],
              symmetric_kappa_inv(photons, detectors, beta_over_c[i], z1_fraction, coupling)};
  });
  return out;
}

std::vector<CurvePoint> sweep_detectors(int photons, std::span<const int> detectors,
                                        double beta_over_c, int threads, double coupling) {
  std::vector<CurvePoint> out(detectors.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = {static_cast<double>(detectors[i]),
              symmetric_kappa_inv(photons, detectors[i], beta_over_c, 0.0, coupling)};
  });
  return out;
}

std::vector<CurvePoint> scan_dz(int photons, int detectors, double beta_over_c, int points,
                                int threads, double coupling) {
  if (points < 2) throw InvalidArgument("dz scan needs at least 2 points");
  const CouplerParams c = make_coupler_ratio(beta_over_c, coupling);
  std::vector<CurvePoint> out(points);
  parallel_for(out.size(), threads, [&](std::size_t k) {
    const double u = static_cast<double>(k) / points;
    out[k] = {u, shifted_kappa_inv(photons, detectors, c, u)};
  });
  return out;
}

DzOptimum optimize_dz(int photons, double beta_over_c, int detectors, int points, int threads,
                      double coupling) {
  if (detectors == 0) detectors = photons + 3;
  const auto grid = scan_dz(photons, detectors, beta_over_c, points, threads, coupling);
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k].kappa_inv > grid[best].kappa_inv) best = k;
  }
  const CouplerParams c = make_coupler_ratio(beta_over_c, coupling);
  double u = grid[best].x;
  double value = grid[best].kappa_inv;
  if (value > 0.0) {
    const double h = 1.0 / points;
    const double lo = std::max(0.0, u - h);
    const double hi = std::min(1.0 - 1e-12, u + h);
    const double refined = detail::golden_maximize(
        [&](double x) { return shifted_kappa_inv(photons, detectors, c, x); }, lo, hi, 1e-10);
    const double refined_value = shifted_kappa_inv(photons, detectors, c, refined);
    if (refined_value > value) {
      u = refined;
      value = refined_value;
    }
  }
  DzOptimum out;
  out.detectors = detectors;
  const double spacing = 2.0 * c.period() / padded_count(detectors);
  out.dz = u * spacing;
  out.dz_normalized = u;
  out.dz_nominal = out.dz / (2.0 * c.period() / detectors);
  out.report = condition_number(build_B(shifted_layout(c, detectors, out.dz), photons));
  return out;
}

namespace {

DetectorLayout free_layout(int detectors, const Eigen::VectorXd& x, double coupling) {
  const CouplerParams c = make_coupler_ratio(x(0), coupling);
  const int first = padded_count(detectors) / 2;
  std::vector<Detector> d(detectors);
  for (int m = 0; m < detectors; ++m) {
    d[m] = {m < first ? Waveguide::first : Waveguide::second, x(1 + m) * c.period()};
  }
  return make_layout(c, std::move(d));
}

}  // namespace

FreeOptimum optimize_free_positions(int photons, int detectors, const FreeOptions& options) {
  if (detectors < photons + 3) {
    throw InvalidArgument("free-position search needs M >= N+3 (M=" + std::to_string(detectors) +
                          ", N=" + std::to_string(photons) + ")");
  }
  if (options.restarts < 1) throw InvalidArgument("need at least one restart");

  const auto objective = [&](const Eigen::VectorXd& x) {
    if (!std::isfinite(x(0))) return 0.0;
    return -condition_number(build_B(free_layout(detectors, x, options.coupling), photons))
                .kappa_inv;
  };

  std::vector<Eigen::VectorXd> best_x(options.restarts);
  std::vector<double> best_value(options.restarts);
  parallel_for(options.restarts, options.threads, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(options.seed, r));
    std::uniform_real_distribution<double> ratio(0.1, 1.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd x(detectors + 1);
    x(0) = ratio(rng);
    for (int m = 0; m < detectors; ++m) x(1 + m) = unit(rng);
    auto res = detail::nelder_mead(objective, x, 0.1, options.max_evaluations / 2);
    res = detail::nelder_mead(objective, res.x, 0.02, options.max_evaluations / 2);
    best_x[r] = res.x;
    best_value[r] = -res.value;
  });

  FreeOptimum out;
  out.restart_kappa_inv = best_value;
  out.best_restart = 0;
  for (int r = 1; r < options.restarts; ++r) {
    if (best_value[r] > best_value[out.best_restart]) out.best_restart = r;
  }
  const Eigen::VectorXd& x = best_x[out.best_restart];
  out.layout = free_layout(detectors, x, options.coupling);
  out.beta_over_c = x(0);
  out.report = condition_number(build_B(out.layout, photons));
  return out;
}

}  // namespace inline_tomo
