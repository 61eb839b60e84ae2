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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <bit>
#include <cstdint>

#include "inline_tomo/conditioning.hpp"
#include "inline_tomo/errors.hpp"
#include "inline_tomo/fluorescence.hpp"
#include "inline_tomo/measurement.hpp"
#include "inline_tomo/reconstruction.hpp"

namespace py = pybind11;
using namespace inline_tomo;

namespace {

DensityMatrix as_density(const Eigen::MatrixXcd& rho) {
  const auto dim = static_cast<std::uint64_t>(rho.rows());
  if (rho.rows() != rho.cols() || dim < 2 || !std::has_single_bit(dim)) {
    throw InvalidArgument("density matrix must be square with dimension 2^N");
  }
  return {std::countr_zero(dim), rho};
}

py::dict conditioning_dict(const ConditioningReport& r) {
  py::dict d;
  d["singular_values"] = r.singular_values;
  d["ratio"] = r.ratio;
  d["kappa_inv"] = r.kappa_inv;
  d["kappa"] = r.kappa;
  d["rank_deficient"] = r.rank_deficient;
  return d;
}

py::dict result_dict(const ReconstructionResult& r) {
  py::dict d;
  d["rho"] = r.rho.rho;
  d["params"] = r.params;
  d["residual"] = r.residual;
  d["mu_hat"] = r.mu_hat;
  d["method"] = std::string(to_string(r.method));
  d["log_likelihood"] = r.log_likelihood;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["psd"] = r.psd;
  d["identifiable"] = r.identifiable;
  return d;
}

Likelihood likelihood_of(const std::string& name) {
  if (name == "poisson") return Likelihood::poisson;
  if (name == "gaussian") return Likelihood::gaussian;
  throw InvalidArgument("likelihood must be 'poisson' or 'gaussian'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "In-line detection and reconstruction of N-photon states in a detuned coupler";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<IllConditioned>(m, "IllConditioned", PyExc_ArithmeticError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  py::class_<CouplerParams>(m, "Coupler")
      .def(py::init(&make_coupler), py::arg("C"), py::arg("beta"))
      .def_static("from_ratio", &make_coupler_ratio, py::arg("beta_over_C"), py::arg("C") = 1.0)
      .def_readonly("C", &CouplerParams::coupling)
      .def_readonly("beta", &CouplerParams::detuning)
      .def_readonly("eta", &CouplerParams::eta)
      .def_readonly("revival_length", &CouplerParams::revival_length)
      .def_property_readonly("period", &CouplerParams::period)
      .def_property_readonly("beta_over_C", &CouplerParams::beta_over_c)
      .def("__repr__", [](const CouplerParams& c) {
        return "Coupler(C=" + std::to_string(c.coupling) + ", beta=" + std::to_string(c.detuning) + ")";
      });

  m.def("transfer_matrix", &transfer_matrix, py::arg("coupler"), py::arg("z"));
  m.def("single_photon_propagator", &single_photon_propagator, py::arg("coupler"), py::arg("z"));
  m.def(
      "analysis_state",
      [](const CouplerParams& c, int wg, double z) {
        return Vec2(analysis_state(c, waveguide_from_index(wg), z).amplitudes);
      },
      py::arg("coupler"), py::arg("waveguide"), py::arg("z"));
  m.def(
      "bloch",
      [](const Mat2& rho) {
        const BlochVector b = bloch_coords(rho);
        return std::array<double, 3>{b.x, b.y, b.z};
      },
      py::arg("rho"));

  py::class_<DetectorLayout>(m, "Layout")
      .def(py::init([](const CouplerParams& c, const std::vector<std::pair<int, double>>& dets) {
             std::vector<Detector> d;
             for (const auto& [wg, z] : dets) d.push_back({waveguide_from_index(wg), z});
             return make_layout(c, std::move(d));
           }),
           py::arg("coupler"), py::arg("detectors"))
      .def_static("symmetric", &symmetric_layout, py::arg("coupler"), py::arg("M"), py::arg("z1") = 0.0)
      .def_static("shifted", &shifted_layout, py::arg("coupler"), py::arg("M"), py::arg("dz"))
      .def_readonly("coupler", &DetectorLayout::coupler)
      .def_property_readonly("detectors",
                             [](const DetectorLayout& l) {
                               std::vector<std::pair<int, double>> out;
                               for (const auto& d : l.detectors) out.emplace_back(index_of(d.waveguide), d.z);
                               return out;
                             })
      .def("__len__", &DetectorLayout::size);

  m.def("dim_params", &dim_params, py::arg("N"));
  m.def(
      "noon", [](int n) { return Eigen::MatrixXcd(make_noon(n).rho); }, py::arg("N"));
  m.def(
      "product", [](Complex c1, Complex c2, int n) { return Eigen::MatrixXcd(make_product(c1, c2, n).rho); },
      py::arg("c1"), py::arg("c2"), py::arg("N"));
  m.def(
      "fidelity", [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return fidelity(a, b); },
      py::arg("rho1"), py::arg("rho2"));

  m.def(
      "combinations", [](int m_, int n) { return enumerate_combinations(m_, n); }, py::arg("M"), py::arg("N"));
  m.def(
      "gamma", [](const Eigen::MatrixXcd& rho, const DetectorLayout& l) { return gamma_tensor(as_density(rho), l); },
      py::arg("rho"), py::arg("layout"));
  m.def(
      "build_B", [](const DetectorLayout& l, int n) { return build_B(l, n).matrix; }, py::arg("layout"),
      py::arg("N"));
  m.def(
      "sample_counts",
      [](const Eigen::VectorXd& gamma, double events, std::uint64_t seed) {
        return sample_counts({gamma.data(), static_cast<std::size_t>(gamma.size())}, events, seed);
      },
      py::arg("gamma"), py::arg("events"), py::arg("seed"));

  m.def(
      "condition_number",
      [](const DetectorLayout& l, int n) { return conditioning_dict(condition_number(build_B(l, n))); },
      py::arg("layout"), py::arg("N"));
  m.def(
      "sweep_beta",
      [](int n, int m_, const std::vector<double>& grid, double z1_fraction, int threads) {
        std::vector<double> out;
        for (const auto& p : sweep_beta(n, m_, grid, z1_fraction, threads)) out.push_back(p.kappa_inv);
        return out;
      },
      py::arg("N"), py::arg("M"), py::arg("beta_over_C"), py::arg("z1_fraction") = 0.0, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "optimize_dz",
      [](int n, double ratio, int m_, int points) {
        const DzOptimum d = optimize_dz(n, ratio, m_, points);
        py::dict out;
        out["M"] = d.detectors;
        out["dz"] = d.dz;
        out["dz_normalized"] = d.dz_normalized;
        out["kappa_inv"] = d.report.kappa_inv;
        return out;
      },
      py::arg("N"), py::arg("beta_over_C"), py::arg("M") = 0, py::arg("points") = 400);
  m.def(
      "optimize_free",
      [](int n, int m_, int restarts, std::uint64_t seed, int threads) {
        FreeOptions opts;
        opts.restarts = restarts;
        opts.seed = seed;
        opts.threads = threads;
        FreeOptimum f;
        {
          py::gil_scoped_release release;
          f = optimize_free_positions(n, m_, opts);
        }
        py::dict out;
        out["layout"] = f.layout;
        out["beta_over_C"] = f.beta_over_c;
        out["kappa_inv"] = f.report.kappa_inv;
        out["ratio"] = f.report.ratio;
        out["restart_kappa_inv"] = f.restart_kappa_inv;
        return out;
      },
      py::arg("N"), py::arg("M"), py::arg("restarts") = 20, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def(
      "reconstruct",
      [](const Eigen::VectorXd& data, const DetectorLayout& l, int n, const std::string& method,
         const std::string& likelihood) {
        const BMatrix b = build_B(l, n);
        if (method == "linear") return result_dict(linear_reconstruct(data, b));
        if (method != "ml") throw InvalidArgument("method must be 'linear' or 'ml'");
        MlOptions opts;
        opts.likelihood = likelihood_of(likelihood);
        return result_dict(ml_reconstruct(data, b, opts));
      },
      py::arg("data"), py::arg("layout"), py::arg("N"), py::arg("method") = "ml",
      py::arg("likelihood") = "poisson");

  m.def(
      "fluorescence_windows",
      [](const CouplerParams& c, const Vec2& c0, double length, double step, double sigma,
         const std::vector<double>& starts, std::uint64_t seed) {
        const auto grid = uniform_grid(0.0, length, step);
        const IntensityTrace t = simulate_trace(c, c0, grid, sigma, seed);
        const WindowSweep s = sweep_windows(t, starts, c, c0);
        py::dict out;
        std::vector<double> f;
        std::vector<std::array<double, 3>> bloch;
        for (const auto& w : s.windows) {
          f.push_back(w.fidelity);
          bloch.push_back({w.bloch.x, w.bloch.y, w.bloch.z});
        }
        out["fidelity"] = f;
        out["bloch"] = bloch;
        out["mean_fidelity"] = s.mean_fidelity;
        return out;
      },
      py::arg("coupler"), py::arg("c0"), py::arg("length"), py::arg("step"), py::arg("sigma"), py::arg("starts"),
      py::arg("seed") = 1);
}
