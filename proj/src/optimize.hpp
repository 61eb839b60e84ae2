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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace inline_tomo::detail {

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

// Nelder–Mead minimization with standard coefficients.
inline SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& start, double step,
                                 int max_evaluations, double ftol = 1e-13) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  for (int i = 0; i < n; ++i) pts[i + 1](i) += step;
  for (int i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<int> order(n + 1);
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= ftol * (std::abs(vals[best]) + ftol)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = eval(contracted);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = contracted;
        vals[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals};
}

// Golden-section search for a maximum of f on [lo, hi].
inline double golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                              double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace inline_tomo::detail
