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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "inline_tomo/conditioning.hpp"
#include "inline_tomo/fluorescence.hpp"
#include "inline_tomo/measurement.hpp"
#include "inline_tomo/reconstruction.hpp"
#include "inline_tomo/state_space.hpp"

namespace inline_tomo::io {

using nlohmann::json;

// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double v);
// Locale-independent parse of a whole field; throws InvalidArgument.
double parse_double(std::string_view field, std::string_view what);

std::vector<std::string> split_csv_line(std::string_view line);

// {N, mu, re: [...], im: [...]}, row-major 2^N × 2^N.
json density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const json& j);

// {C, beta, detectors: [{wg, z_mm}]}
json layout_to_json(const DetectorLayout& layout);
DetectorLayout layout_from_json(const json& j);

json conditioning_to_json(const ConditioningReport& report);
json reconstruction_to_json(const ReconstructionResult& result);
json window_to_json(const WindowReport& report);

// "1-3-4": one-based detector numbers.
std::string combo_label(const Combination& combo);

// p,combo,<value_name> with one-based p.
void write_correlations(std::ostream& out, const std::vector<Combination>& combos,
                        const Eigen::VectorXd& values, std::string_view value_name);
// Reads p plus a `count` or `gamma` column; rows may come in any order but
// every p in 1..P must appear once.
Eigen::VectorXd read_correlations(std::istream& in, long expected_rows);

// s,r_s with one-based s.
void write_params(std::ostream& out, const Eigen::VectorXd& r);

void write_curve(std::ostream& out, std::string_view x_name, const std::vector<CurvePoint>& curve);

// z0,Sx,Sy,Sz,fidelity
void write_trajectory(std::ostream& out, const std::vector<WindowReport>& windows);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace inline_tomo::io
