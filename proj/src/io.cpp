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

#include "inline_tomo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "inline_tomo/errors.hpp"

namespace inline_tomo::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::string_view what) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty()) {
    throw InvalidArgument("cannot parse " + std::string(what) + " from '" + std::string(field) +
                          "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

json density_to_json(const DensityMatrix& rho) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < rho.rho.rows(); ++i) {
    for (Eigen::Index k = 0; k < rho.rho.cols(); ++k) {
      re.push_back(rho.rho(i, k).real());
      im.push_back(rho.rho(i, k).imag());
    }
  }
  return {{"N", rho.photons}, {"mu", rho.mu()}, {"re", re}, {"im", im}};
}

DensityMatrix density_from_json(const json& j) {
  try {
    const int n = j.at("N").get<int>();
    if (n < 1 || n > kDefaultMaxPhotons) throw InvalidArgument("density matrix N out of range");
    const auto dim = static_cast<Eigen::Index>(tensor_dim(n));
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (static_cast<Eigen::Index>(re.size()) != dim * dim ||
        static_cast<Eigen::Index>(im.size()) != dim * dim) {
      throw InvalidArgument("density matrix needs " + std::to_string(dim * dim) +
                            " entries in re and im");
    }
    DensityMatrix out{n, Eigen::MatrixXcd(dim, dim)};
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        out.rho(i, k) = Complex(re[i * dim + k].get<double>(), im[i * dim + k].get<double>());
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed density matrix JSON: ") + e.what());
  }
}

json layout_to_json(const DetectorLayout& layout) {
  json dets = json::array();
  for (const auto& d : layout.detectors) {
    dets.push_back({{"wg", index_of(d.waveguide)}, {"z_mm", d.z}});
  }
  return {{"C", layout.coupler.coupling},
          {"beta", layout.coupler.detuning},
          {"period_mm", layout.coupler.period()},
          {"detectors", dets}};
}

DetectorLayout layout_from_json(const json& j) {
  try {
    const CouplerParams c = make_coupler(j.at("C").get<double>(), j.at("beta").get<double>());
    std::vector<Detector> dets;
    for (const auto& d : j.at("detectors")) {
      dets.push_back({waveguide_from_index(d.at("wg").get<int>()), d.at("z_mm").get<double>()});
    }
    return make_layout(c, std::move(dets));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed layout JSON: ") + e.what());
  }
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json conditioning_to_json(const ConditioningReport& report) {
  return {{"kappa", finite_or_null(report.kappa)},
          {"kappa_inv", report.kappa_inv},
          {"sigma_ratio", report.ratio},
          {"rank_deficient", report.rank_deficient},
          {"singular_values",
           std::vector<double>(report.singular_values.begin(), report.singular_values.end())}};
}

json reconstruction_to_json(const ReconstructionResult& r) {
  json j = {{"method", to_string(r.method)},
            {"rho", density_to_json(r.rho)},
            {"r", std::vector<double>(r.params.begin(), r.params.end())},
            {"mu_hat", r.mu_hat},
            {"residual", r.residual},
            {"psd", r.psd},
            {"identifiable", r.identifiable}};
  if (r.method == Method::ml) {
    j["likelihood"] = to_string(r.likelihood);
    j["objective"] = r.log_likelihood;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
  }
  return j;
}

json window_to_json(const WindowReport& w) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      re.push_back(w.rho(i, k).real());
      im.push_back(w.rho(i, k).imag());
    }
  }
  return {{"z0_mm", w.z0},
          {"rho", {{"N", 1}, {"mu", 1.0}, {"re", re}, {"im", im}}},
          {"bloch", {w.bloch.x, w.bloch.y, w.bloch.z}},
          {"fidelity", finite_or_null(w.fidelity)},
          {"residual", w.residual},
          {"scale", w.scale},
          {"kappa_inv", w.kappa_inv},
          {"samples", w.samples}};
}

std::string combo_label(const Combination& combo) {
  std::string s;
  for (std::size_t i = 0; i < combo.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(combo[i] + 1);
  }
  return s;
}

void write_correlations(std::ostream& out, const std::vector<Combination>& combos,
                        const Eigen::VectorXd& values, std::string_view value_name) {
  out << "p,combo," << value_name << '\n';
  for (std::size_t p = 0; p < combos.size(); ++p) {
    out << p + 1 << ',' << combo_label(combos[p]) << ','
        << format_double(values(static_cast<Eigen::Index>(p))) << '\n';
  }
}

Eigen::VectorXd read_correlations(std::istream& in, long expected_rows) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("counts CSV is empty");
  const auto header = split_csv_line(line);
  long ip = -1, iv = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "p") ip = static_cast<long>(i);
    if (header[i] == "count" || header[i] == "gamma" || header[i] == "gamma_normalized") iv = static_cast<long>(i);
  }
  if (ip < 0) throw InvalidArgument("counts CSV is missing column 'p'");
  if (iv < 0) throw InvalidArgument("counts CSV is missing column 'count' (or 'gamma', 'gamma_normalized')");
  Eigen::VectorXd values = Eigen::VectorXd::Constant(expected_rows, std::nan(""));
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InvalidArgument("counts CSV row " + std::to_string(row) + " has the wrong field count");
    }
    const double p = parse_double(fields[ip], "p (row " + std::to_string(row) + ")");
    if (p != std::floor(p) || p < 1 || p > expected_rows) {
      throw InvalidArgument("counts CSV row " + std::to_string(row) + ": p must be in 1.." +
                            std::to_string(expected_rows));
    }
    const auto idx = static_cast<Eigen::Index>(p) - 1;
    if (!std::isnan(values(idx))) {
      throw InvalidArgument("counts CSV lists p = " + fields[ip] + " twice");
    }
    values(idx) = parse_double(fields[iv], "value (row " + std::to_string(row) + ")");
    if (std::isnan(values(idx))) throw InvalidArgument("counts CSV contains NaN");
  }
  for (Eigen::Index p = 0; p < values.size(); ++p) {
    if (std::isnan(values(p))) {
      throw InvalidArgument("counts CSV has no row for p = " + std::to_string(p + 1) + " (expected " +
                            std::to_string(expected_rows) + " rows)");
    }
  }
  return values;
}

void write_params(std::ostream& out, const Eigen::VectorXd& r) {
  out << "s,r_s\n";
  for (Eigen::Index s = 0; s < r.size(); ++s) out << s + 1 << ',' << format_double(r(s)) << '\n';
}

void write_curve(std::ostream& out, std::string_view x_name, const std::vector<CurvePoint>& curve) {
  out << x_name << ",kappa_inv\n";
  for (const auto& pt : curve) out << format_double(pt.x) << ',' << format_double(pt.kappa_inv) << '\n';
}

void write_trajectory(std::ostream& out, const std::vector<WindowReport>& windows) {
  out << "z0,Sx,Sy,Sz,fidelity\n";
  for (const auto& w : windows) {
    out << format_double(w.z0) << ',' << format_double(w.bloch.x) << ',' << format_double(w.bloch.y)
        << ',' << format_double(w.bloch.z) << ',' << format_double(w.fidelity) << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << content;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace inline_tomo::io
