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

#include "inline_tomo/fluorescence.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "inline_tomo/conditioning.hpp"
#include "inline_tomo/errors.hpp"
#include "inline_tomo/io.hpp"
#include "inline_tomo/measurement.hpp"
#include "inline_tomo/parallel.hpp"
#include "inline_tomo/reconstruction.hpp"

namespace inline_tomo {
namespace {

constexpr double kEdgeTolerance = 1e-9;

Vec2 normalized(const Vec2& c) {
  const double n = c.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("input amplitudes must be non-zero");
  return c / n;
}

void validate(IntensityTrace& t) {
  if (t.z.size() < 2) throw InvalidArgument("trace needs at least two samples");
  if (t.p1.size() != t.z.size() || t.p2.size() != t.z.size()) {
    throw InvalidArgument("trace columns have different lengths");
  }
  for (std::size_t i = 1; i < t.z.size(); ++i) {
    if (!(t.z[i] > t.z[i - 1])) {
      throw InvalidArgument("trace positions must be strictly increasing (row " +
                            std::to_string(i + 1) + ")");
    }
  }
  for (auto* column : {&t.p1, &t.p2}) {
    for (double& p : *column) {
      if (p < 0.0) {
        p = 0.0;
        ++t.clipped;
      }
    }
  }
}

}  // namespace

std::vector<double> uniform_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw InvalidArgument("grid needs finite bounds and a positive step");
  }
  std::vector<double> out;
  for (long k = 0;; ++k) {
    const double z = start + static_cast<double>(k) * step;
    if (z > stop + 1e-9 * step) break;
    out.push_back(z);
  }
  return out;
}

IntensityTrace simulate_trace(const CouplerParams& coupler, const Vec2& c0,
                              std::span<const double> z, double noise_sigma, std::uint64_t seed) {
  if (z.empty()) throw InvalidArgument("empty sampling grid");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  const Vec2 input = normalized(c0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  IntensityTrace t;
  for (double zi : z) {
    const Vec2 c = single_photon_propagator(coupler, zi) * input;
    double p1 = std::norm(c(0));
    double p2 = std::norm(c(1));
    if (noise_sigma > 0.0) {
      p1 += noise_sigma * noise(rng);
      p2 += noise_sigma * noise(rng);
    }
    t.z.push_back(zi);
    t.p1.push_back(p1);
    t.p2.push_back(p2);
  }
  if (t.z.size() >= 2) validate(t);
  return t;
}

IntensityTrace read_trace(std::istream& in, bool renormalize) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("trace CSV is empty");
  const auto header = io::split_csv_line(line);
  const auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InvalidArgument("trace CSV is missing column '" + std::string(name) + "'");
  };
  const std::size_t iz = column("z_mm");
  const std::size_t i1 = column("p1");
  const std::size_t i2 = column("p2");
  IntensityTrace t;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InvalidArgument("trace CSV row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    }
    const std::string where = " (row " + std::to_string(row) + ")";
    t.z.push_back(io::parse_double(fields[iz], "z_mm" + where));
    t.p1.push_back(io::parse_double(fields[i1], "p1" + where));
    t.p2.push_back(io::parse_double(fields[i2], "p2" + where));
  }
  validate(t);
  if (renormalize) {
    for (std::size_t i = 0; i < t.z.size(); ++i) {
      const double s = t.p1[i] + t.p2[i];
      if (s > 0.0) {
        t.p1[i] /= s;
        t.p2[i] /= s;
      }
    }
  }
  return t;
}

IntensityTrace load_trace(const std::filesystem::path& path, bool renormalize) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open trace file " + path.string());
  return read_trace(in, renormalize);
}

void write_trace(std::ostream& out, const IntensityTrace& trace) {
  out << "z_mm,p1,p2\n";
  for (std::size_t i = 0; i < trace.z.size(); ++i) {
    out << io::format_double(trace.z[i]) << ',' << io::format_double(trace.p1[i]) << ','
        << io::format_double(trace.p2[i]) << '\n';
  }
}

void save_trace(const IntensityTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write trace file " + path.string());
  write_trace(out, trace);
}

Mat2 theory_state(const CouplerParams& coupler, const Vec2& c0, double z) {
  const Vec2 c = single_photon_propagator(coupler, z) * normalized(c0);
  return c * c.adjoint();
}

WindowReport window_reconstruct(const IntensityTrace& trace, double z0,
                                const CouplerParams& coupler, const std::optional<Vec2>& c0) {
  if (trace.z.size() < 2) throw InvalidArgument("trace needs at least two samples");
  const double length = coupler.period();
  const double front = trace.z.front();
  const double back = trace.z.back();
  if (z0 < front - kEdgeTolerance || z0 + length > back + kEdgeTolerance) {
    throw InvalidArgument("window [" + io::format_double(z0) + ", " +
                          io::format_double(z0 + length) + "] mm exceeds the trace range [" +
                          io::format_double(front) + ", " + io::format_double(back) +
                          "] mm; one window needs " + io::format_double(length) + " mm");
  }
  std::vector<Detector> detectors;
  std::vector<double> values;
  for (std::size_t i = 0; i < trace.z.size(); ++i) {
    const double rel = trace.z[i] - z0;
    if (rel < -kEdgeTolerance || rel >= length - kEdgeTolerance) continue;
    detectors.push_back({Waveguide::first, std::max(rel, 0.0)});
    detectors.push_back({Waveguide::second, std::max(rel, 0.0)});
    values.push_back(trace.p1[i]);
    values.push_back(trace.p2[i]);
  }
  if (detectors.empty()) throw InvalidArgument("window contains no samples");
  const BMatrix b = build_B(make_layout(coupler, std::move(detectors)), 1);
  const ConditioningReport cond = condition_number(b);
  if (cond.rank_deficient) {
    throw IllConditioned(
        "window at z0 = " + io::format_double(z0) +
        " mm cannot be reconstructed: analysis states are coplanar (zero detuning or too few "
        "samples)");
  }
  const Eigen::VectorXd data = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
  const ReconstructionResult r = ml_reconstruct(data, b, {.likelihood = Likelihood::gaussian});

  WindowReport out;
  out.z0 = z0;
  out.rho = r.rho.rho;
  out.bloch = bloch_coords(out.rho);
  out.residual = r.residual;
  out.scale = r.mu_hat;
  out.kappa_inv = cond.kappa_inv;
  out.samples = static_cast<int>(values.size() / 2);
  out.fidelity = c0 ? fidelity(out.rho, theory_state(coupler, *c0, z0))
                    : std::numeric_limits<double>::quiet_NaN();
  return out;
}

WindowSweep sweep_windows(const IntensityTrace& trace, std::span<const double> z0,
                          const CouplerParams& coupler, const std::optional<Vec2>& c0,
                          int threads) {
  if (z0.empty()) throw InvalidArgument("no window start positions given");
  WindowSweep out;
  out.windows.resize(z0.size());
  parallel_for(z0.size(), threads, [&](std::size_t i) {
    out.windows[i] = window_reconstruct(trace, z0[i], coupler, c0);
  });
  double sum = 0.0;
  for (const auto& w : out.windows) sum += w.fidelity;
  out.mean_fidelity = sum / static_cast<double>(out.windows.size());
  return out;
}

}  // namespace inline_tomo
