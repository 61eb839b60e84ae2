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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "inline_tomo/conditioning.hpp"
#include "inline_tomo/errors.hpp"
#include "inline_tomo/reconstruction.hpp"
#include "support.hpp"

using namespace inline_tomo;
namespace it = inline_tomo::testing;

namespace {

BMatrix good_b(int n) {
  const int m = n + 5 + (n + 5) % 2;
  return build_B(symmetric_layout(make_coupler_ratio(1 / std::numbers::sqrt2), m, 0.0), n);
}

double min_eig(const Eigen::MatrixXcd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m).eigenvalues()(0);
}

}  // namespace

TEST_SUITE("reconstruction") {
  TEST_CASE("linear inversion is exact on noiseless data and carries the scale") {
    std::mt19937_64 rng(29);
    for (int n = 1; n <= 4; ++n) {
      const BMatrix b = good_b(n);
      const DensityMatrix truth = it::random_symmetric_state(n, 2, rng);
      const auto r = linear_reconstruct(2.5 * gamma_tensor(truth, b.layout), b);
      CHECK((r.rho.rho - 2.5 * truth.rho).norm() < 1e-9);
      CHECK(r.mu_hat == doctest::Approx(2.5));
      CHECK(r.residual < 1e-10);
      CHECK(r.method == Method::linear);
    }
  }

  TEST_CASE("degenerate frames are rejected") {
    const BMatrix b = build_B(symmetric_layout(make_coupler_ratio(0.7), 4, 0.0), 1);
    CHECK_THROWS_AS(linear_reconstruct(Eigen::VectorXd::Ones(4), b), IllConditioned);
    const BMatrix flat = build_B(symmetric_layout(make_coupler_ratio(0.0), 8, 0.0), 2);
    CHECK_THROWS_AS(linear_reconstruct(Eigen::VectorXd::Ones(flat.matrix.rows()), flat), IllConditioned);
    const auto ml = ml_reconstruct(Eigen::VectorXd::Ones(4), b);
    CHECK_FALSE(ml.identifiable);
  }

  TEST_CASE("PSD projection") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m.diagonal() << 1.2, -0.2;
    const Eigen::MatrixXcd p = psd_project(m);
    CHECK(min_eig(p) >= -1e-15);
    CHECK(p.trace().real() == doctest::Approx(1.0));
    CHECK(p(0, 0).real() == doctest::Approx(1.0));
    std::mt19937_64 rng(2);
    const DensityMatrix good = it::random_symmetric_state(2, 2, rng);
    CHECK((psd_project(good.rho) - good.rho).norm() < 1e-12);
  }

  TEST_CASE("likelihood model validation") {
    const BMatrix b = good_b(1);
    Eigen::VectorXd data = Eigen::VectorXd::Ones(b.matrix.rows());
    data(0) = -1;
    CHECK_THROWS_AS(LikelihoodModel(b, data, Likelihood::poisson), InvalidArgument);
    CHECK_THROWS_AS(LikelihoodModel(b, Eigen::VectorXd::Zero(b.matrix.rows()), Likelihood::poisson),
                    InvalidArgument);
    CHECK_THROWS_AS(LikelihoodModel(b, Eigen::VectorXd::Ones(3), Likelihood::gaussian), InvalidArgument);
  }

  TEST_CASE("likelihood is invariant to rescaling the data and the factor") {
    std::mt19937_64 rng(31);
    const BMatrix b = good_b(2);
    const Eigen::VectorXd gamma = gamma_tensor(it::random_symmetric_state(2, 1, rng), b.layout);
    const Eigen::MatrixXcd a = it::random_complex(4, 4, rng);
    for (Likelihood kind : {Likelihood::poisson, Likelihood::gaussian}) {
      const LikelihoodModel m1(b, gamma, kind), m2(b, 40.0 * gamma, kind);
      CHECK(m1.value(a) == doctest::Approx(m2.value(a)).epsilon(1e-12));
      CHECK(m1.value(a) == doctest::Approx(m1.value(3.0 * a)).epsilon(1e-12));
    }
  }

  TEST_CASE("gradient matches finite differences along random directions") {
    std::mt19937_64 rng(37);
    for (Likelihood kind : {Likelihood::poisson, Likelihood::gaussian}) {
      const BMatrix b = good_b(3);
      const Eigen::VectorXd gamma = gamma_tensor(it::random_symmetric_state(3, 2, rng), b.layout);
      const LikelihoodModel model(b, gamma + 0.01 * Eigen::VectorXd::Ones(gamma.size()), kind);
      const Eigen::MatrixXcd a = it::random_complex(8, 8, rng);
      const Eigen::MatrixXcd e = it::random_complex(8, 8, rng);
      const double h = 1e-6;
      const double fd = (model.value(a + h * e) - model.value(a - h * e)) / (2 * h);
      const double analytic = (model.gradient(a).adjoint() * e).trace().real();
      CHECK(fd == doctest::Approx(analytic).epsilon(1e-6));
    }
  }

  TEST_CASE("maximum likelihood recovers noiseless states") {
    std::mt19937_64 rng(41);
    for (Likelihood kind : {Likelihood::poisson, Likelihood::gaussian}) {
      for (int n = 1; n <= 3; ++n) {
        const BMatrix b = good_b(n);
        const DensityMatrix truth = it::random_symmetric_state(n, 1 + n % 2, rng);
        MlOptions opts;
        opts.likelihood = kind;
        opts.record_history = true;
        const auto r = ml_reconstruct(7.0 * gamma_tensor(truth, b.layout), b, opts);
        CHECK(fidelity(r.rho.rho, truth.rho) > 1 - 1e-6);
        CHECK(r.rho.mu() == doctest::Approx(1.0));
        CHECK(min_eig(r.rho.rho) > -1e-12);
        CHECK(r.identifiable);
        CHECK(r.mu_hat == doctest::Approx(7.0).epsilon(1e-4));
        for (std::size_t k = 1; k < r.objective_history.size(); ++k) {
          CHECK(r.objective_history[k] >= r.objective_history[k - 1] - 1e-12);
        }
      }
    }
  }

  TEST_CASE("maximum likelihood stays physical when linear inversion does not") {
    std::mt19937_64 rng(43);
    const BMatrix b = good_b(2);
    const DensityMatrix truth = make_noon(2);
    const Eigen::VectorXd g = gamma_tensor(truth, b.layout);
    const Eigen::VectorXd counts = sample_counts({g.data(), static_cast<std::size_t>(g.size())}, 200, 4);
    const auto lin = linear_reconstruct(counts, b);
    const auto ml = ml_reconstruct(counts, b);
    CHECK(min_eig(ml.rho.rho) > -1e-12);
    CHECK(fidelity(ml.rho.rho, truth.rho) > 0.8);
    CHECK(lin.psd == (min_eig(lin.rho.rho) >= -1e-9));
  }

  TEST_CASE("reconstruct_and_score is reproducible") {
    const DetectorLayout l = symmetric_layout(make_coupler_ratio(0.7), 8, 0.0);
    const double a = reconstruct_and_score(make_noon(2), l, 1e5, 8);
    CHECK(a == reconstruct_and_score(make_noon(2), l, 1e5, 8));
    CHECK(a > 0.98);
  }

  TEST_CASE("linear inversion recovers arbitrary parameter vectors") {
    std::mt19937_64 rng(47);
    std::normal_distribution<double> g;
    const BMatrix b = good_b(3);
    Eigen::VectorXd r(b.matrix.cols());
    for (auto& v : r) v = g(rng);
    CHECK((linear_reconstruct(b.matrix * r, b).params - r).norm() < 1e-10);
  }

  TEST_CASE("PSD projection of a slightly negative diagonal") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m.diagonal() << 1.1, -0.1;
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(2, 2);
    expect(0, 0) = 1.0;
    CHECK((psd_project(m) - expect).norm() < 1e-14);
  }

  TEST_CASE("noiseless high-count data reconstruct to high fidelity") {
    std::mt19937_64 rng(53);
    const DetectorLayout l = symmetric_layout(make_coupler_ratio(1 / std::numbers::sqrt2), 8, 0.0);
    const BMatrix b = build_B(l, 2);
    for (int k = 0; k < 5; ++k) {
      const DensityMatrix truth = it::random_symmetric_state(2, 1 + k % 3, rng);
      const Eigen::VectorXd g = gamma_tensor(truth, l);
      const auto r = ml_reconstruct(1e8 * g / g.sum(), b);
      CHECK(fidelity(r.rho.rho, truth.rho) >= 0.9999);
      // sampled at the same count level the loss is statistical, of order 1e-4
      CHECK(reconstruct_and_score(truth, l, 1e8, k) >= 0.999);
    }
  }

  TEST_CASE("Gaussian ML matches the linear solution when that is already physical") {
    std::mt19937_64 rng(59);
    const BMatrix b = good_b(1);
    const DensityMatrix truth = it::random_symmetric_state(1, 2, rng);
    std::normal_distribution<double> noise(0.0, 1e-3);
    Eigen::VectorXd data = gamma_tensor(truth, b.layout);
    for (auto& v : data) v += noise(rng);
    const auto lin = linear_reconstruct(data, b);
    REQUIRE(min_eig(lin.rho.rho) > 0.0);
    MlOptions opts;
    opts.likelihood = Likelihood::gaussian;
    const auto ml = ml_reconstruct(data, b, opts);
    CHECK((ml.rho.rho - lin.rho.rho / lin.mu_hat).norm() < 1e-5);
  }

  TEST_CASE("ML is equivariant to scaling the counts") {
    const BMatrix b = good_b(2);
    const Eigen::VectorXd g = gamma_tensor(make_noon(2), b.layout);
    const Eigen::VectorXd counts = sample_counts({g.data(), static_cast<std::size_t>(g.size())}, 1e4, 3);
    const auto a = ml_reconstruct(counts, b);
    const auto c = ml_reconstruct(25.0 * counts, b);
    CHECK(fidelity(a.rho.rho, c.rho.rho) >= 1 - 1e-8);
    CHECK((twirl(a.rho.rho) - a.rho.rho).norm() < 1e-12);
  }

  TEST_CASE("better conditioned layouts give better median fidelity") {
    const CouplerParams c = make_coupler_ratio(1 / std::numbers::sqrt2);
    const DetectorLayout good = symmetric_layout(c, 8, 0.0);
    const DzOptimum d = optimize_dz(2, 1 / std::numbers::sqrt2, 5, 200);
    const DetectorLayout poor = shifted_layout(c, 5, d.dz);
    REQUIRE(d.report.kappa_inv < condition_number(build_B(good, 2)).kappa_inv);
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    std::vector<double> fg, fp;
    for (int s = 0; s < 50; ++s) {
      std::mt19937_64 rng(derive_seed(61, s));
      const DensityMatrix truth = it::random_symmetric_state(2, 1, rng);
      fg.push_back(reconstruct_and_score(truth, good, 1e4, s));
      fp.push_back(reconstruct_and_score(truth, poor, 1e4, s));
    }
    CHECK(median(fg) > median(fp));
  }
}
