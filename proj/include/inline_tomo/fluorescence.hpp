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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "inline_tomo/coupler.hpp"

namespace inline_tomo {

/// Per-waveguide power sampled along the coupler (classical light, N = 1).
struct IntensityTrace {
  std::vector<double> z;   // mm, strictly increasing
  std::vector<double> p1;  // arbitrary units, >= 0
  std::vector<double> p2;
  int clipped = 0;         // negative samples set to zero on ingestion
};

// Ascending grid start, start+step, ... up to stop (inclusive within 1e-9·step).
std::vector<double> uniform_grid(double start, double stop, double step);

// p_q(z) = |(U(z) c0)_q|² plus N(0, σ²) noise in units of the input power,
// clipped at zero. c0 is normalized first.
IntensityTrace simulate_trace(const CouplerParams& coupler, const Vec2& c0,
                              std::span<const double> z, double noise_sigma, std::uint64_t seed);

// CSV with header z_mm,p1,p2 (any column order). With `renormalize`, each
// sample is rescaled so that p1 + p2 = 1.
IntensityTrace read_trace(std::istream& in, bool renormalize = false);
IntensityTrace load_trace(const std::filesystem::path& path, bool renormalize = false);
void write_trace(std::ostream& out, const IntensityTrace& trace);
void save_trace(const IntensityTrace& trace, const std::filesystem::path& path);

// ρ(z) = U(z)|c0⟩⟨c0|U(z)†.
Mat2 theory_state(const CouplerParams& coupler, const Vec2& c0, double z);

struct WindowReport {
  double z0 = 0.0;
  Mat2 rho;
  BlochVector bloch;
  double fidelity = 0.0;  // against theory_state(z0); NaN without an input state
  double residual = 0.0;
  double scale = 0.0;     // fitted intensity units per photon
  double kappa_inv = 0.0;
  int samples = 0;
};

// Reconstructs the state entering [z0, z0+Λ], Λ = coupler.period(). Each
// sample in the window acts as one detector per waveguide at z - z0; the fit
// is Gaussian maximum likelihood with a free overall scale.
WindowReport window_reconstruct(const IntensityTrace& trace, double z0,
                                const CouplerParams& coupler,
                                const std::optional<Vec2>& c0 = std::nullopt);

struct WindowSweep {
  std::vector<WindowReport> windows;
  double mean_fidelity = 0.0;
};

WindowSweep sweep_windows(const IntensityTrace& trace, std::span<const double> z0,
                          const CouplerParams& coupler, const std::optional<Vec2>& c0 = std::nullopt,
                          int threads = 1);

}  // namespace inline_tomo
