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

#include "inline_tomo/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "inline_tomo/conditioning.hpp"
#include "inline_tomo/errors.hpp"
#include "inline_tomo/fluorescence.hpp"
#include "inline_tomo/io.hpp"
#include "inline_tomo/measurement.hpp"
#include "inline_tomo/reconstruction.hpp"

namespace inline_tomo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json default_config() {
  const double amp = 1.0 / std::numbers::sqrt2;
  return {
      {"coupler", {{"C", 1.0}, {"beta", amp}}},
      {"N", 1},
      {"layout", {{"type", "symmetric"}, {"M", 6}, {"z1_mm", 0.0}}},
      {"state", {{"type", "product"}, {"amplitudes", {{amp, 0.0}, {amp, 0.0}}}}},
      {"noise", {{"events", 0.0}, {"mu", 1.0}}},
      {"seed", 1},
      {"threads", 1},
      {"out", "out"},
      {"reconstruct", {{"method", "ml"}, {"likelihood", "poisson"}}},
      {"sweep",
       {{"kind", "beta"},
        {"beta_over_C", {{"start", 0.0}, {"stop", 2.0}, {"step", 0.01}}},
        {"z1_fraction", 0.0},
        {"M_values", {6, 8, 10, 12}},
        {"points", 400}}},
      {"optimize", {{"kind", "dz"}, {"M", 0}, {"points", 400}, {"restarts", 20}}},
      {"fluorescence",
       {{"C", 0.0885},
        {"beta", 0.0240},
        {"device_length_mm", 80.0},
        {"sample_step_mm", 0.5},
        {"noise_sigma", 0.01},
        {"input", {{1.0, 0.0}, {0.0, 0.0}}},
        {"window_start_mm", 0.0},
        {"window_step_mm", 1.0},
        {"windows", 34},
        {"renormalize", false}}},
  };
}

namespace {

// Sections whose content depends on a "type" field and is replaced whole.
bool replaced_whole(const std::string& key) { return key == "layout" || key == "state"; }

void overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw InvalidArgument("config " + path + " must be a JSON object");
  for (const auto& [key, value] : user.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw InvalidArgument("unknown config key '" + where + "'");
    if (path.empty() && replaced_whole(key)) {
      if (!value.is_object()) throw InvalidArgument("config " + where + " must be an object");
      base[key] = value;
    } else if (base[key].is_object()) {
      overlay(base[key], value, where);
    } else {
      base[key] = value;
    }
  }
}

double number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw InvalidArgument("config " + where + "." + key + " must be a number");
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw InvalidArgument("config " + where + "." + key + " must be finite");
  return v;
}

int integer(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw InvalidArgument("config " + where + "." + key + " must be an integer");
  }
  return j.at(key).get<int>();
}

std::string text(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw InvalidArgument("config " + where + "." + key + " must be a string");
  }
  return j.at(key).get<std::string>();
}

Complex amplitude(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw InvalidArgument("amplitudes must be numbers or [re, im] pairs");
}

Vec2 amplitudes(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw InvalidArgument("config " + where + " must list two amplitudes");
  }
  return Vec2(amplitude(j[0]), amplitude(j[1]));
}

CouplerParams coupler_of(const json& cfg) {
  return make_coupler(number(cfg["coupler"], "C", "coupler"), number(cfg["coupler"], "beta", "coupler"));
}

DetectorLayout layout_of(const json& cfg) {
  const CouplerParams c = coupler_of(cfg);
  const json& l = cfg["layout"];
  const std::string type = text(l, "type", "layout");
  if (type == "symmetric") return symmetric_layout(c, integer(l, "M", "layout"), number(l, "z1_mm", "layout"));
  if (type == "shifted") return shifted_layout(c, integer(l, "M", "layout"), number(l, "dz_mm", "layout"));
  if (type == "explicit") {
    return io::layout_from_json({{"C", c.coupling}, {"beta", c.detuning}, {"detectors", l.at("detectors")}});
  }
  throw InvalidArgument("layout.type must be symmetric, shifted or explicit");
}

DensityMatrix state_of(const json& cfg) {
  const json& s = cfg["state"];
  const int n = cfg["N"].get<int>();
  const std::string type = text(s, "type", "state");
  DensityMatrix rho;
  if (type == "single" || type == "product") {
    if (type == "single" && n != 1) throw InvalidArgument("state type 'single' needs N = 1");
    const Vec2 c = amplitudes(s.at("amplitudes"), "state.amplitudes");
    rho = make_product(c(0), c(1), n);
  } else if (type == "noon") {
    rho = make_noon(n);
  } else if (type == "density") {
    rho = s.contains("path") ? io::density_from_json(json::parse(io::read_text(text(s, "path", "state"))))
                             : io::density_from_json(s);
    if (rho.photons != n) throw InvalidArgument("state photon number does not match N");
  } else {
    throw InvalidArgument("state.type must be single, product, noon or density");
  }
  require_valid(rho);
  return rho;
}

}  // namespace

json resolve_config(const json& user) {
  json cfg = default_config();
  overlay(cfg, user, "");

  const int n = integer(cfg, "N", "");
  if (n < 1 || n > kDefaultMaxPhotons) {
    throw InvalidArgument("N must be in 1.." + std::to_string(kDefaultMaxPhotons));
  }
  if (integer(cfg, "threads", "") < 1) throw InvalidArgument("threads must be >= 1");
  if (!cfg["seed"].is_number_unsigned() && !(cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() >= 0)) {
    throw InvalidArgument("seed must be a non-negative integer");
  }
  if (!cfg["out"].is_string()) throw InvalidArgument("out must be a string");
  const CouplerParams c = coupler_of(cfg);
  cfg["coupler"]["beta_over_C"] = c.beta_over_c();
  cfg["coupler"]["eta"] = c.eta;
  cfg["coupler"]["revival_length_mm"] = c.revival_length;
  cfg["coupler"]["period_mm"] = c.period();

  json& l = cfg["layout"];
  const std::string type = text(l, "type", "layout");
  if (type == "shifted" && !l.contains("dz_mm") && l.contains("dz_normalized")) {
    const int m = integer(l, "M", "layout");
    l["dz_mm"] = number(l, "dz_normalized", "layout") * 2.0 * c.period() / padded_count(m);
  }
  if (type == "symmetric" && !l.contains("z1_mm")) l["z1_mm"] = 0.0;
  const DetectorLayout layout = layout_of(cfg);
  if (type == "shifted") {
    l["dz_normalized"] = number(l, "dz_mm", "layout") / (2.0 * c.period() / padded_count(layout.size()));
  }
  if (layout.size() < n) throw InvalidArgument("layout has fewer detectors than photons");
  state_of(cfg);

  if (number(cfg["noise"], "events", "noise") < 0.0) throw InvalidArgument("noise.events must be >= 0");
  if (!(number(cfg["noise"], "mu", "noise") > 0.0)) throw InvalidArgument("noise.mu must be > 0");
  const std::string method = text(cfg["reconstruct"], "method", "reconstruct");
  if (method != "linear" && method != "ml") throw InvalidArgument("reconstruct.method must be linear or ml");
  const std::string lik = text(cfg["reconstruct"], "likelihood", "reconstruct");
  if (lik != "poisson" && lik != "gaussian") {
    throw InvalidArgument("reconstruct.likelihood must be poisson or gaussian");
  }
  const std::string sweep = text(cfg["sweep"], "kind", "sweep");
  if (sweep != "beta" && sweep != "detectors" && sweep != "dz") {
    throw InvalidArgument("sweep.kind must be beta, detectors or dz");
  }
  const std::string opt = text(cfg["optimize"], "kind", "optimize");
  if (opt != "dz" && opt != "free") throw InvalidArgument("optimize.kind must be dz or free");
  const json& f = cfg["fluorescence"];
  make_coupler(number(f, "C", "fluorescence"), number(f, "beta", "fluorescence"));
  if (number(f, "noise_sigma", "fluorescence") < 0.0) throw InvalidArgument("fluorescence.noise_sigma must be >= 0");
  if (integer(f, "windows", "fluorescence") < 1) throw InvalidArgument("fluorescence.windows must be >= 1");
  amplitudes(f.at("input"), "fluorescence.input");
  return cfg;
}

namespace {

struct Context {
  json config;
  fs::path out_dir;
  std::ostream& out;
};

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  io::write_text(path, ss.str());
}

std::uint64_t seed_of(const json& cfg) { return cfg["seed"].get<std::uint64_t>(); }
int threads_of(const json& cfg) { return cfg["threads"].get<int>(); }

void cmd_simulate(Context& ctx) {
  const json& cfg = ctx.config;
  const DensityMatrix rho = state_of(cfg);
  const DetectorLayout layout = layout_of(cfg);
  // rates carry the detector scale mu; the exported table is normalized to sum 1
  const Eigen::VectorXd gamma = cfg["noise"]["mu"].get<double>() * gamma_tensor(rho, layout);
  const auto combos = enumerate_combinations(layout.size(), rho.photons);
  const double events = cfg["noise"]["events"].get<double>();
  const double total = gamma.sum();
  write_stream(ctx.out_dir / "gamma.csv", [&](std::ostream& s) {
    if (events > 0.0) {
      const auto g = std::span<const double>(gamma.data(), gamma.size());
      io::write_correlations(s, combos, sample_counts(g, events, derive_seed(seed_of(cfg), 0)), "count");
    } else {
      io::write_correlations(s, combos, gamma / total, "gamma_normalized");
    }
  });
  write_json(ctx.out_dir / "layout.json", io::layout_to_json(layout));
  write_json(ctx.out_dir / "truth.json", io::density_to_json(rho));
  write_json(ctx.out_dir / "simulate.json",
             {{"N", rho.photons}, {"M", layout.size()}, {"P", combos.size()}, {"mu", cfg["noise"]["mu"]},
              {"gamma_sum", total}, {"events", events}});
  ctx.out << "simulated " << combos.size() << " correlations for N=" << rho.photons << ", M=" << layout.size()
          << (events > 0.0 ? " (Poisson counts)" : " (rates normalized to sum 1)") << '\n';
}

void cmd_reconstruct(Context& ctx, const std::string& counts_path, const std::string& truth_path) {
  const json& cfg = ctx.config;
  const int n = cfg["N"].get<int>();
  const DetectorLayout layout = layout_of(cfg);
  const BMatrix b = build_B(layout, n);
  std::ifstream in(counts_path);
  if (!in) throw InvalidArgument("cannot open counts file " + counts_path);
  const Eigen::VectorXd data = io::read_correlations(in, b.matrix.rows());

  ReconstructionResult result;
  if (cfg["reconstruct"]["method"] == "linear") {
    result = linear_reconstruct(data, b);
  } else {
    const ConditioningReport cond = condition_number(b);
    if (cond.rank_deficient) {
      throw IllConditioned("layout is degenerate (sigma_min/sigma_max = " + io::format_double(cond.ratio) +
                           "): the analysis states cannot identify the state; check the detuning");
    }
    MlOptions opts;
    opts.likelihood = cfg["reconstruct"]["likelihood"] == "gaussian" ? Likelihood::gaussian : Likelihood::poisson;
    result = ml_reconstruct(data, b, opts);
  }
  json report = io::reconstruction_to_json(result);
  report["conditioning"] = io::conditioning_to_json(condition_number(b));
  if (!truth_path.empty()) {
    const DensityMatrix truth = io::density_from_json(json::parse(io::read_text(truth_path)));
    const double f = fidelity(result.rho.rho, truth.rho);
    report["fidelity"] = f;
    ctx.out << "fidelity: " << io::format_double(f) << '\n';
  }
  write_json(ctx.out_dir / "reconstruction.json", report);
  write_stream(ctx.out_dir / "params.csv", [&](std::ostream& s) { io::write_params(s, result.params); });
  ctx.out << "reconstructed N=" << n << " state (" << to_string(result.method) << "), mu_hat "
          << io::format_double(result.mu_hat) << '\n';
}

std::vector<double> grid_of(const json& g) {
  return uniform_grid(number(g, "start", "sweep.beta_over_C"), number(g, "stop", "sweep.beta_over_C"),
                      number(g, "step", "sweep.beta_over_C"));
}

void cmd_sweep(Context& ctx) {
  const json& cfg = ctx.config;
  const json& s = cfg["sweep"];
  const int n = cfg["N"].get<int>();
  const CouplerParams c = coupler_of(cfg);
  const int threads = threads_of(cfg);
  const std::string kind = s["kind"];
  std::vector<CurvePoint> curve;
  std::string x_name;
  json points = json::array();
  if (kind == "beta") {
    const int m = cfg["layout"]["M"].get<int>();
    const auto grid = grid_of(s["beta_over_C"]);
    curve = sweep_beta(n, m, grid, s["z1_fraction"].get<double>(), threads, c.coupling);
    x_name = "beta_over_C";
    for (const auto& pt : curve) {
      const CouplerParams ci = make_coupler_ratio(pt.x, c.coupling);
      const auto layout = symmetric_layout(ci, m, s["z1_fraction"].get<double>() * ci.period());
      points.push_back({{"beta_over_C", pt.x}, {"report", io::conditioning_to_json(condition_number(build_B(layout, n)))}});
    }
  } else if (kind == "detectors") {
    const auto ms = s["M_values"].get<std::vector<int>>();
    curve = sweep_detectors(n, ms, c.beta_over_c(), threads, c.coupling);
    x_name = "M";
    for (const auto& pt : curve) {
      const auto layout = symmetric_layout(c, static_cast<int>(pt.x), 0.0);
      points.push_back({{"M", static_cast<int>(pt.x)}, {"report", io::conditioning_to_json(condition_number(build_B(layout, n)))}});
    }
  } else {
    int m = cfg["optimize"]["M"].get<int>();
    if (m == 0) m = n + 3;
    curve = scan_dz(n, m, c.beta_over_c(), integer(s, "points", "sweep"), threads, c.coupling);
    x_name = "dz_normalized";
    for (const auto& pt : curve) points.push_back({{"dz_normalized", pt.x}, {"kappa_inv", pt.kappa_inv}});
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].kappa_inv > curve[best].kappa_inv) best = i;
  }
  write_stream(ctx.out_dir / ("sweep_" + kind + ".csv"), [&](std::ostream& o) { io::write_curve(o, x_name, curve); });
  write_json(ctx.out_dir / ("sweep_" + kind + ".json"),
             {{"kind", kind}, {"N", n}, {"argmax", curve[best].x}, {"max_kappa_inv", curve[best].kappa_inv}, {"points", points}});
  ctx.out << "sweep " << kind << ": max kappa_inv " << io::format_double(curve[best].kappa_inv) << " at " << x_name
          << " = " << io::format_double(curve[best].x) << '\n';
}

void cmd_optimize(Context& ctx) {
  const json& cfg = ctx.config;
  const json& o = cfg["optimize"];
  const int n = cfg["N"].get<int>();
  const CouplerParams c = coupler_of(cfg);
  int m = o["M"].get<int>();
  if (m == 0) m = n + 3;
  json report;
  DetectorLayout layout;
  if (o["kind"] == "dz") {
    const DzOptimum d = optimize_dz(n, c.beta_over_c(), m, integer(o, "points", "optimize"), threads_of(cfg), c.coupling);
    layout = shifted_layout(c, m, d.dz);
    report = {{"kind", "dz"},        {"N", n},
              {"M", m},              {"dz_mm", d.dz},
              {"dz_normalized", d.dz_normalized},
              {"dz_normalized_2L_over_M", d.dz_nominal},
              {"conditioning", io::conditioning_to_json(d.report)}};
    ctx.out << "optimal dz: " << io::format_double(d.dz_normalized) << " of the detector spacing, kappa_inv "
            << io::format_double(d.report.kappa_inv) << '\n';
  } else {
    FreeOptions opts;
    opts.restarts = integer(o, "restarts", "optimize");
    opts.seed = seed_of(cfg);
    opts.threads = threads_of(cfg);
    opts.coupling = c.coupling;
    const FreeOptimum f = optimize_free_positions(n, m, opts);
    layout = f.layout;
    report = {{"kind", "free"},
              {"N", n},
              {"M", m},
              {"beta_over_C", f.beta_over_c},
              {"best_restart", f.best_restart},
              {"restart_kappa_inv", f.restart_kappa_inv},
              {"conditioning", io::conditioning_to_json(f.report)}};
    ctx.out << "best kappa_inv over " << opts.restarts << " restarts: " << io::format_double(f.report.kappa_inv)
            << '\n';
  }
  report["layout"] = io::layout_to_json(layout);
  write_json(ctx.out_dir / "optimize.json", report);
  write_json(ctx.out_dir / "layout.json", io::layout_to_json(layout));
}

void cmd_fluorescence(Context& ctx, const std::string& trace_path, bool synthetic) {
  const json& cfg = ctx.config;
  const json& f = cfg["fluorescence"];
  const CouplerParams c = make_coupler(f["C"].get<double>(), f["beta"].get<double>());
  const Vec2 input = amplitudes(f["input"], "fluorescence.input");
  IntensityTrace trace;
  if (!trace_path.empty() && synthetic) throw InvalidArgument("give either --trace or --synthetic, not both");
  if (!trace_path.empty()) {
    trace = load_trace(trace_path, f["renormalize"].get<bool>());
  } else {
    const auto grid = uniform_grid(0.0, f["device_length_mm"].get<double>(), f["sample_step_mm"].get<double>());
    trace = simulate_trace(c, input, grid, f["noise_sigma"].get<double>(), derive_seed(seed_of(cfg), 1));
    write_stream(ctx.out_dir / "trace.csv", [&](std::ostream& s) { write_trace(s, trace); });
  }
  const double span = trace.z.back() - trace.z.front();
  if (span + 1e-9 < c.period()) {
    throw InvalidArgument("trace covers " + io::format_double(span) + " mm but one window needs " +
                          io::format_double(c.period()) + " mm");
  }
  std::vector<double> starts;
  const double first = f["window_start_mm"].get<double>();
  const double step = f["window_step_mm"].get<double>();
  for (int k = 0; k < f["windows"].get<int>(); ++k) starts.push_back(first + k * step);
  const WindowSweep sweep = sweep_windows(trace, starts, c, input, threads_of(cfg));

  json windows = json::array();
  for (const auto& w : sweep.windows) windows.push_back(io::window_to_json(w));
  write_json(ctx.out_dir / "windows.json",
             {{"window_length_mm", c.period()},
              {"clipped_samples", trace.clipped},
              {"mean_fidelity", sweep.mean_fidelity},
              {"windows", windows}});
  write_stream(ctx.out_dir / "trajectory.csv", [&](std::ostream& s) { io::write_trajectory(s, sweep.windows); });
  ctx.out << "windows: " << sweep.windows.size() << ", window length " << io::format_double(c.period())
          << " mm, mean fidelity " << io::format_double(sweep.mean_fidelity) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"In-line detection and reconstruction of N-photon states in a detuned coupler"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Base random seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "Simulate coincidence rates or counts");
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct a state from correlation data");
  std::string counts_path, truth_path;
  reconstruct->add_option("--counts", counts_path, "CSV with columns p and count (or gamma)")->required();
  reconstruct->add_option("--truth", truth_path, "Reference density matrix JSON");
  auto* sweep = app.add_subcommand("sweep", "Inverse condition number curves");
  std::string sweep_kind;
  sweep->add_option("--kind", sweep_kind, "beta | detectors | dz");
  auto* optimize = app.add_subcommand("optimize", "Detector placement at small M");
  std::string optimize_kind;
  optimize->add_option("--kind", optimize_kind, "dz | free");
  auto* fluorescence = app.add_subcommand("fluorescence", "Windowed reconstruction of intensity traces");
  std::string trace_path;
  bool synthetic = false;
  fluorescence->add_option("--trace", trace_path, "CSV with columns z_mm,p1,p2");
  fluorescence->add_flag("--synthetic", synthetic, "Simulate the trace from the configuration");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    json user = json::object();
    if (!config_path.empty()) {
      try {
        user = json::parse(io::read_text(config_path));
      } catch (const json::parse_error& e) {
        throw InvalidArgument("config " + config_path + " is not valid JSON: " + e.what());
      }
    }
    if (seed) user["seed"] = *seed;
    if (threads) user["threads"] = *threads;
    if (!out_dir.empty()) user["out"] = out_dir;
    if (!sweep_kind.empty()) user["sweep"]["kind"] = sweep_kind;
    if (!optimize_kind.empty()) user["optimize"]["kind"] = optimize_kind;
    Context ctx{resolve_config(user), {}, out};
    ctx.out_dir = ctx.config["out"].get<std::string>();
    fs::create_directories(ctx.out_dir);
    write_json(ctx.out_dir / "resolved_config.json", ctx.config);

    if (*simulate) cmd_simulate(ctx);
    if (*reconstruct) cmd_reconstruct(ctx, counts_path, truth_path);
    if (*sweep) cmd_sweep(ctx);
    if (*optimize) cmd_optimize(ctx);
    if (*fluorescence) cmd_fluorescence(ctx, trace_path, synthetic);
    return kSuccess;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const IllConditioned& e) {
    err << "error: ill-conditioned design: " << e.what() << '\n';
    return kIllConditioned;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace inline_tomo::cli
