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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "inline_tomo/conditioning.hpp"
#include "inline_tomo/errors.hpp"

using namespace inline_tomo;

namespace {
const double kRoot2 = 1 / std::numbers::sqrt2;
}

TEST_SUITE("conditioning") {
  TEST_CASE("condition number of known matrices") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 3);
    d.diagonal() << 4.0, 2.0, 1.0;
    const ConditioningReport r = condition_number(d);
    CHECK(r.kappa_inv == doctest::Approx(0.25));
    CHECK(r.kappa == doctest::Approx(4.0));
    CHECK_FALSE(r.rank_deficient);
    CHECK(r.singular_values(0) == doctest::Approx(4.0));

    d(2, 2) = 1e-14;
    const ConditioningReport z = condition_number(d);
    CHECK(z.rank_deficient);
    CHECK(z.kappa_inv == 0.0);
    CHECK(z.ratio == doctest::Approx(2.5e-15));

    // fewer rows than columns: padded with zero singular values
    const ConditioningReport wide = condition_number(Eigen::MatrixXd::Ones(2, 4));
    CHECK(wide.singular_values.size() == 4);
    CHECK(wide.rank_deficient);
  }

  TEST_CASE("sweeps agree with direct evaluation") {
    const std::vector<double> grid{0.0, 0.3, kRoot2, 1.2};
    const auto curve = sweep_beta(2, 8, grid, 0.0, 2);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const CouplerParams c = make_coupler_ratio(grid[i]);
      const double direct = condition_number(build_B(symmetric_layout(c, 8, 0.0), 2)).kappa_inv;
      CHECK(curve[i].x == grid[i]);
      CHECK(curve[i].kappa_inv == doctest::Approx(direct).epsilon(1e-12));
    }
    CHECK(curve[0].kappa_inv == 0.0);
    const std::vector<int> ms{6, 8};
    const auto dm = sweep_detectors(1, ms, kRoot2);
    CHECK(dm[0].x == 6);
    CHECK(dm[1].kappa_inv == doctest::Approx(1 / std::numbers::sqrt3));
  }

  TEST_CASE("threads do not change results") {
    std::vector<double> grid;
    for (int i = 0; i < 40; ++i) grid.push_back(0.05 * i);
    const auto one = sweep_beta(3, 8, grid, 0.25, 1);
    const auto four = sweep_beta(3, 8, grid, 0.25, 4);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(one[i].kappa_inv == four[i].kappa_inv);
  }

  TEST_CASE("dz scan for a single photon is symmetric about the midpoint") {
    const auto scan = scan_dz(1, 4, kRoot2, 100);
    for (int k = 1; k < 50; ++k) {
      CHECK(scan[k].kappa_inv == doctest::Approx(scan[100 - k].kappa_inv).epsilon(1e-9));
    }
    const DzOptimum d = optimize_dz(1, kRoot2);
    CHECK(d.detectors == 4);
    CHECK(d.dz_normalized == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(d.report.kappa_inv == doctest::Approx(1 / std::numbers::sqrt3).epsilon(1e-9));
  }

  TEST_CASE("odd detector counts report both normalizations") {
    const DzOptimum d = optimize_dz(2, kRoot2, 5, 200);
    CHECK(d.dz_nominal == doctest::Approx(d.dz_normalized * 5.0 / 6.0));
    CHECK(d.report.kappa_inv > 1e-3);
  }

  TEST_CASE("free-position search") {
    FreeOptions opts;
    opts.restarts = 4;
    opts.seed = 3;
    const FreeOptimum f = optimize_free_positions(1, 4, opts);
    CHECK(f.restart_kappa_inv.size() == 4);
    CHECK(f.report.kappa_inv == doctest::Approx(1 / std::numbers::sqrt3).epsilon(1e-4));
    CHECK(f.report.kappa_inv == *std::max_element(f.restart_kappa_inv.begin(), f.restart_kappa_inv.end()));
    opts.threads = 3;
    const FreeOptimum g = optimize_free_positions(1, 4, opts);
    CHECK(g.restart_kappa_inv == f.restart_kappa_inv);
    CHECK_THROWS_AS(optimize_free_positions(2, 4, opts), InvalidArgument);
  }

  TEST_CASE("kappa is invariant to a global scale of B") {
    const BMatrix b = build_B(symmetric_layout(make_coupler_ratio(kRoot2), 8, 0.0), 2);
    CHECK(condition_number(b.matrix * 17.0).kappa_inv == doctest::Approx(condition_number(b).kappa_inv));
  }

  TEST_CASE("fewer correlations than parameters is rank deficient") {
    // N=2, M=4: P=6 < S=10
    const BMatrix b = build_B(symmetric_layout(make_coupler_ratio(kRoot2), 4, 0.0), 2);
    CHECK(b.matrix.rows() < b.matrix.cols());
    CHECK(condition_number(b).rank_deficient);
  }

  TEST_CASE("single-photon rows form a tight frame on the Bloch sphere") {
    const CouplerParams c = make_coupler_ratio(kRoot2);
    const DetectorLayout l = symmetric_layout(c, 6, 0.0);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    for (int m = 0; m < l.size(); ++m) {
      const BlochVector b = bloch_coords(detector_projector(l, m));
      const Eigen::Vector3d n(b.x, b.y, b.z);
      sum += n;
      outer += n * n.transpose();
    }
    CHECK(sum.norm() < 1e-12);
    CHECK((outer - 2.0 * Eigen::Matrix3d::Identity()).norm() < 1e-12);
  }

  TEST_CASE("beta sweep is symmetric under beta -> -beta") {
    std::vector<double> pos, neg;
    for (int i = 1; i <= 20; ++i) {
      pos.push_back(0.1 * i);
      neg.push_back(-0.1 * i);
    }
    for (int n = 1; n <= 3; ++n) {
      const int m = n == 3 ? 8 : 6;
      const auto a = sweep_beta(n, m, pos), b = sweep_beta(n, m, neg);
      for (std::size_t i = 0; i < pos.size(); ++i) {
        CHECK(a[i].kappa_inv == doctest::Approx(b[i].kappa_inv).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("zero shift is degenerate at minimal M") {
    for (int n = 1; n <= 3; ++n) {
      const auto scan = scan_dz(n, n + 3, kRoot2, 50);
      CHECK(scan[0].x == 0.0);
      CHECK(scan[0].kappa_inv == 0.0);
    }
  }

  TEST_CASE("more restarts never give a worse optimum") {
    FreeOptions opts;
    opts.seed = 12;
    opts.restarts = 2;
    const FreeOptimum few = optimize_free_positions(2, 5, opts);
    opts.restarts = 5;
    const FreeOptimum many = optimize_free_positions(2, 5, opts);
    CHECK(many.report.kappa_inv >= few.report.kappa_inv);
    for (int k = 0; k < 2; ++k) CHECK(many.restart_kappa_inv[k] == few.restart_kappa_inv[k]);
  }
}
