// Copyright 2026 The qident Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qident/cli/config.hpp"
#include "qident/control/control_fit.hpp"
#include "qident/core/error.hpp"
#include "qident/device/simulator.hpp"
#include "qident/protocols/decoherence.hpp"
#include "qident/protocols/leakage.hpp"
#include "qident/protocols/qubit.hpp"
#include "qident/spectral/spectrum.hpp"

#ifndef QIDENT_VERSION
#define QIDENT_VERSION "0.0.0"
#endif

namespace qident::cli {

inline constexpr const char* kResultSchema = "qident.result/1";

struct PipelineOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  /// Add noiseless comparison columns computed from the device model.
  bool oracle = false;
  bool write_files = true;
};

struct PipelineResult {
  json document;
  int exit_code = 0;
};

inline const char* to_string(ProtocolErrorCode c) {
  switch (c) {
    case ProtocolErrorCode::kNoConditionedShots: return "no_conditioned_shots";
    case ProtocolErrorCode::kNoPeak: return "no_peak";
    case ProtocolErrorCode::kUndefinedBound: return "undefined_bound";
    case ProtocolErrorCode::kInvalidFrame: return "invalid_frame";
    case ProtocolErrorCode::kCoefficientOutOfRange: return "coefficient_out_of_range";
    case ProtocolErrorCode::kMissingControl: return "missing_control";
    case ProtocolErrorCode::kOverdamped: return "overdamped";
  }
  return "unknown";
}

/// Text table of the available protocols, sorted by name.
inline std::string list_protocols() {
  std::ostringstream out;
  std::size_t w0 = 4;
  std::size_t w1 = 8;
  for (const auto& p : protocol_catalog()) {
    w0 = std::max(w0, p.name.size());
    w1 = std::max(w1, p.required.size());
  }
  const auto row = [&](const std::string& a, const std::string& b, const std::string& c) {
    out << a << std::string(w0 - a.size() + 2, ' ') << b << std::string(w1 - b.size() + 2, ' ') << c << '\n';
  };
  row("name", "requires", "description");
  for (const auto& p : protocol_catalog()) row(p.name, p.required, p.description);
  return out.str();
}

namespace detail {

inline json to_json(const HamiltonianEstimate& e) {
  json j{{"setting", e.setting},
         {"control", e.control},
         {"omega_hat", e.omega_hat},
         {"theta_hat", e.theta_hat},
         {"omega_undetermined", e.omega_undetermined},
         {"sigma_omega", e.sigma_omega},
         {"sigma_theta", e.sigma_theta},
         {"h0", e.h0},
         {"h0_discrepancy", e.h0_discrepancy},
         {"spectral_sin2", e.spectral_sin2},
         {"peak_omega_bin", e.peak_omega_bin},
         {"theta_note", kThetaAmbiguityNote}};
  if (e.phi_hat) {
    j["phi_hat"] = *e.phi_hat;
    j["phi_candidates"] = e.phi_candidates;
    j["phi_ambiguous"] = e.phi_ambiguous;
    j["phi_from_first_order"] = e.phi_from_first_order;
    if (e.phi_first_order) j["phi_first_order"] = *e.phi_first_order;
    if (e.sigma_phi) j["sigma_phi"] = *e.sigma_phi;
    j["c_hat"] = e.c_hat;
    j["d_hat"] = e.d_hat;
  }
  return j;
}

inline json to_json(const PreparedFrame& f) {
  return {{"reference", describe(f.reference)}, {"alpha0", f.alpha0},          {"beta", f.beta},
          {"beta_closed_form", f.beta_closed_form}, {"s1", {f.s1.x(), f.s1.y(), f.s1.z()}},
          {"theta_ref", f.theta_ref},           {"omega_ref", f.omega_ref},    {"duration", f.duration()}};
}

inline json to_json(const LorentzianFit& f) {
  return {{"omega0", f.omega0}, {"gamma", f.gamma},           {"amplitude", f.amplitude},
          {"residual", f.residual}, {"iterations", f.iterations}, {"points", f.points}};
}

inline json to_json(const DecoherenceReport& r) {
  json j{{"classification", to_string(r.classification)},
         {"no_population_decay", r.no_population_decay},
         {"resolution_limited", r.resolution_limited}};
  if (r.gamma_hat) j["gamma_hat"] = *r.gamma_hat;
  if (r.omega0_hat) j["omega0_hat"] = *r.omega0_hat;
  if (r.lorentzian) j["lorentzian"] = to_json(*r.lorentzian);
  if (r.flips) {
    j["max_flip_fraction"] = r.max_flip_fraction;
    j["dwell_times"] = r.flips->dwell;
    j["flip_fraction_from_0"] = r.flips->q[0];
    j["flip_fraction_from_1"] = r.flips->q[1];
    for (int a = 0; a < 2; ++a) {
      if (r.rate[a]) {
        j[a == 0 ? "rate_from_0" : "rate_from_1"] = {
            {"gamma", r.rate[a]->gamma}, {"sigma", r.rate[a]->sigma}, {"chi2", r.rate[a]->chi2}};
      }
    }
  }
  return j;
}

inline json to_json(const ConfinementBounds& b) {
  return {{"eps_lower", b.lower}, {"eps_upper", b.upper}, {"h0_plus_2h1", b.sum}, {"noise_artifact", b.noise_artifact}};
}

/// Writes `t,<name>,shots[,<name>_exact]`.
inline void write_trace_csv(std::ostream& out, const SampledTrace& tr, const std::string& column,
                            const std::vector<std::uint64_t>& shots, const std::vector<double>* exact) {
  out << "t," << column << ",shots";
  if (exact) out << ',' << column.substr(0, column.rfind("_hat")) << "_exact";
  out << '\n';
  for (std::size_t k = 0; k < tr.size(); ++k) {
    out << csv::format_double(tr.time(k)) << ',' << csv::format_double(tr.values[k]) << ','
        << (k < shots.size() ? shots[k] : 0);
    if (exact) out << ',' << csv::format_double((*exact)[k]);
    out << '\n';
  }
}

inline void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
  out << "omega,re,im,abs\n";
  for (std::size_t k = 0; k < s.freqs.size(); ++k) {
    out << csv::format_double(s.freqs[k]) << ',' << csv::format_double(s.coeffs[k].real()) << ','
        << csv::format_double(s.coeffs[k].imag()) << ',' << csv::format_double(std::abs(s.coeffs[k])) << '\n';
  }
}

/// Collects output files and writes them only when asked.
class Outputs {
 public:
  Outputs(const PipelineOptions& o, json& doc) : opt_(o), doc_(doc) {}

  template <class Writer>
  void file(const std::string& role, const std::string& name, Writer&& w) {
    doc_["outputs"][role] = name;
    if (!opt_.write_files) return;
    std::filesystem::create_directories(opt_.out_dir);
    std::ofstream f(opt_.out_dir / name);
    if (!f) throw ConfigError("output." + role, "cannot open '" + (opt_.out_dir / name).string() + "'");
    w(f);
  }

 private:
  const PipelineOptions& opt_;
  json& doc_;
};

inline std::vector<double> exact_z(const SimulatedDevice& dev, const ControlSetting& s, const TimeGrid& g,
                                   const std::optional<PrepareStep>& prep = std::nullopt) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.push_back(expected_z(dev.joint_probabilities(ShotPlan{s, g.at(k), 1, 0, prep}), dev.outcome_values()));
  }
  return out;
}

inline std::vector<double> exact_p0(const SimulatedDevice& dev, const ControlSetting& s, const TimeGrid& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const RealMatrix p = dev.joint_probabilities(ShotPlan{s, g.at(k), 1, 0, std::nullopt});
    out.push_back(p(0, 0) / p.row(0).sum());
  }
  return out;
}

inline std::vector<double> exact_leak(const SimulatedDevice& dev, const HermitianOperator& proj,
                                      const ControlSetting& s, const TimeGrid& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const RealMatrix p = dev.joint_probabilities_three_outcome(proj, ShotPlan{s, g.at(k), 1, 0, std::nullopt});
    const MeasurementBasis basis = dev.basis().restricted_to_subspace(proj);
    const std::size_t c = basis.complement_index();
    if (c >= basis.size()) {
      out.push_back(0.0);
      continue;
    }
    const auto ci = static_cast<Eigen::Index>(c);
    const double inside = p.sum() - p.row(ci).sum();
    out.push_back((p.col(ci).sum() - p(ci, ci)) / inside);
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

struct Context {
  const RunConfig& cfg;
  const PipelineOptions& opt;
  const SimulatedDevice& dev;
  json& doc;
  Outputs& out;
  std::uint64_t total_shots = 0;
  RunOptions run() const { return RunOptions{opt.threads}; }
};

inline std::vector<double> control_of(const RunConfig& cfg, const ControlSetting& s) {
  if (const auto* f = std::get_if<std::vector<double>>(&s)) return *f;
  auto it = cfg.table_controls.find(std::get<std::string>(s));
  return it == cfg.table_controls.end() ? std::vector<double>{} : it->second;
}

inline int run_leakage(Context& c) {
  const auto& p = c.cfg.protocol;
  const ControlSetting s = setting_from_json(p.params.at("control"), "protocol.control");
  std::vector<Eigen::Index> idx;
  for (const auto& v : p.params.at("subspace")) idx.push_back(v.get<Eigen::Index>());
  const HermitianOperator proj = HermitianOperator::basis_projector(c.dev.model().hamiltonians.dim(), idx);
  LeakageReport r = estimate_leakage_direct(c.dev, proj, s, p.grid, p.shots, p.seed, c.run());
  if (c.opt.oracle) {
    r.exact = exact_leak(c.dev, proj, s, p.grid);
    r.exact_mean = mean(*r.exact);
  }
  c.total_shots = r.total_shots;
  json rep{{"mean_p_leak", r.mean_p_leak},
           {"max_p_leak", *std::max_element(r.p_leak.begin(), r.p_leak.end())},
           {"conditioned_shots", std::accumulate(r.conditioned.begin(), r.conditioned.end(), std::uint64_t{0})},
           {"points", r.p_leak.size()}};
  if (r.exact_mean) rep["exact_mean_p_leak"] = *r.exact_mean;
  c.doc["report"] = rep;
  const SampledTrace tr(p.grid.t0, p.grid.dt, r.p_leak, r.conditioned);
  c.out.file("trace", c.cfg.output.trace, [&](std::ostream& o) {
    write_trace_csv(o, tr, "p_leak_hat", r.conditioned, r.exact ? &*r.exact : nullptr);
  });
  return 0;
}

inline int run_confinement(Context& c) {
  const auto& p = c.cfg.protocol;
  const ControlSetting s = setting_from_json(p.params.at("control"), "protocol.control");
  const SampledTrace tr = acquire_p0_trace(c.dev, s, p.grid, p.shots, p.seed, c.run());
  c.total_shots = p.shots * p.grid.size();
  std::optional<std::vector<double>> exact;
  if (c.opt.oracle) exact = exact_p0(c.dev, s, p.grid);
  c.out.file("trace", c.cfg.output.trace, [&](std::ostream& o) {
    write_trace_csv(o, tr, "p0_hat", tr.shots, exact ? &*exact : nullptr);
  });
  const Spectrum spec = dft(tr);
  c.out.file("spectrum", c.cfg.output.spectrum, [&](std::ostream& o) { write_spectrum_csv(o, spec); });
  const ConfinementReport r = confinement_from_trace(tr);
  json rep{{"h0", r.h0}, {"h1", r.h1}, {"bounds", to_json(r.bounds)}, {"note", r.note}};
  if (r.spectrum.peak) rep["peak_omega"] = r.spectrum.peak->refined_omega;
  if (exact) {
    const Spectrum es = dft(SampledTrace(p.grid.t0, p.grid.dt, *exact));
    rep["exact_h0"] = es.h0;
    rep["exact_h1"] = es.h1();
  }
  c.doc["report"] = rep;
  return 0;
}

inline int run_omega_theta(Context& c) {
  const auto& p = c.cfg.protocol;
  const ControlSetting s = setting_from_json(p.params.at("control"), "protocol.control");
  const SampledTrace tr = acquire_z_trace(c.dev, s, p.grid, p.shots, p.seed, c.run());
  c.total_shots = p.shots * p.grid.size();
  std::optional<std::vector<double>> exact;
  if (c.opt.oracle) exact = exact_z(c.dev, s, p.grid);
  c.out.file("trace", c.cfg.output.trace, [&](std::ostream& o) {
    write_trace_csv(o, tr, "z_hat", tr.shots, exact ? &*exact : nullptr);
  });
  c.out.file("spectrum", c.cfg.output.spectrum, [&](std::ostream& o) { write_spectrum_csv(o, dft(tr)); });
  HamiltonianEstimate e = estimate_omega_theta(tr);
  e.setting = describe(s);
  e.control = control_of(c.cfg, s);
  c.doc["report"] = to_json(e);
  if (exact) {
    const HamiltonianEstimate ex = estimate_omega_theta(SampledTrace(p.grid.t0, p.grid.dt, *exact));
    c.doc["report"]["exact_trace_estimate"] = {{"omega_hat", ex.omega_hat}, {"theta_hat", ex.theta_hat}};
  }
  if (e.omega_undetermined) {
    c.doc["status"] = "protocol_error";
    c.doc["error"] = {{"code", "omega_undetermined"},
                      {"message", "no first-order peak: rotation axis parallel to the measurement axis"}};
    return 2;
  }
  return 0;
}

inline int run_phi(Context& c) {
  const auto& p = c.cfg.protocol;
  const ControlSetting s = setting_from_json(p.params.at("control"), "protocol.control");
  const json& ref = p.params.at("reference");
  const ControlSetting rs = setting_from_json(ref.at("control"), "protocol.reference.control");
  json rep;
  double omega_ref = 0.0;
  double theta_ref = 0.0;
  if (ref.contains("omega") && ref.contains("theta")) {
    omega_ref = ref.at("omega").get<double>();
    theta_ref = ref.at("theta").get<double>();
  } else {
    const HamiltonianEstimate e = identify_omega_theta(c.dev, rs, p.grid, p.shots, derive_seed(p.seed, 1), c.run());
    c.total_shots += p.shots * p.grid.size();
    rep["reference_estimate"] = to_json(e);
    if (e.omega_undetermined) throw ProtocolError(ProtocolErrorCode::kInvalidFrame, "reference rotation not observable");
    omega_ref = e.omega_hat;
    theta_ref = e.theta_hat;
  }
  double omega_f = 0.0;
  double theta_f = 0.0;
  const json target = p.params.value("target", json::object());
  if (target.contains("omega") && target.contains("theta")) {
    omega_f = target.at("omega").get<double>();
    theta_f = target.at("theta").get<double>();
  } else {
    const HamiltonianEstimate e = identify_omega_theta(c.dev, s, p.grid, p.shots, derive_seed(p.seed, 2), c.run());
    c.total_shots += p.shots * p.grid.size();
    rep["target_estimate"] = to_json(e);
    if (e.omega_undetermined) throw ProtocolError(ProtocolErrorCode::kNoPeak, "target rotation not observable");
    omega_f = e.omega_hat;
    theta_f = e.theta_hat;
  }
  const PreparedFrame frame = prepare_equatorial(omega_ref, theta_ref, rs);
  rep["frame"] = to_json(frame);
  const SampledTrace tr =
      acquire_z_trace(c.dev, s, p.grid, p.shots, derive_seed(p.seed, 0), c.run(), frame.prepare_step());
  c.total_shots += p.shots * p.grid.size();
  std::optional<std::vector<double>> exact;
  if (c.opt.oracle) exact = exact_z(c.dev, s, p.grid, frame.prepare_step());
  c.out.file("trace", c.cfg.output.trace, [&](std::ostream& o) {
    write_trace_csv(o, tr, "z_hat", tr.shots, exact ? &*exact : nullptr);
  });
  c.out.file("spectrum", c.cfg.output.spectrum, [&](std::ostream& o) { write_spectrum_csv(o, dft(tr)); });
  HamiltonianEstimate e = estimate_phi(tr, frame, omega_f, theta_f);
  e.setting = describe(s);
  e.control = control_of(c.cfg, s);
  rep["estimate"] = to_json(e);
  if (exact) {
    const HamiltonianEstimate ex = estimate_phi(SampledTrace(p.grid.t0, p.grid.dt, *exact), frame, omega_f, theta_f);
    rep["exact_trace_phi"] = *ex.phi_hat;
  }
  c.doc["report"] = rep;
  return 0;
}

inline int run_fit_control(Context& c) {
  const auto& p = c.cfg.protocol;
  std::vector<ControlPoint> points;
  if (p.params.contains("controls")) {
    const json& cs = p.params.at("controls");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const ControlSetting s = setting_from_json(cs[i], "protocol.controls");
      points.push_back({s, control_of(c.cfg, s)});
    }
  } else {
    for (const auto& [label, f] : c.cfg.table_controls) points.push_back({label, f});
    std::stable_sort(points.begin(), points.end(),
                     [](const ControlPoint& a, const ControlPoint& b) { return a.control < b.control; });
  }
  const AxisTable table = identify_axis_table(c.dev, points, p.grid, p.shots, p.seed, c.run());
  std::uint64_t batches = table.estimates.size();
  for (std::size_t i = 0; i < table.estimates.size(); ++i) {
    if (i != table.reference && !table.estimates[i].omega_undetermined) ++batches;
  }
  c.total_shots = batches * p.shots * p.grid.size();

  ControlDataset data;
  json rows = json::array();
  json excluded = json::array();
  for (const auto& e : table.estimates) {
    rows.push_back(to_json(e));
    if (e.omega_undetermined) {
      excluded.push_back(e.setting);
      continue;
    }
    if (e.control.empty()) throw ConfigError("device.hamiltonians.table", "entry '" + e.setting + "' has no control values");
    data.rows.push_back({e.control, e.cartesian(), e.phi_ambiguous});
  }
  json rep{{"estimates", rows},
           {"reference", table.estimates[table.reference].setting},
           {"frame", to_json(table.frame)},
           {"excluded_undetermined", excluded}};

  const LinearControlModel lin = fit_linear_model(data);
  json lj{{"delta", lin.delta}};
  for (Eigen::Index j = 0; j < lin.coefficients.cols(); ++j) {
    lj["d" + std::to_string(j)] = {lin.coefficients(0, j), lin.coefficients(1, j), lin.coefficients(2, j)};
  }
  rep["linear_model"] = lj;

  std::vector<PolynomialComponentFit> polys;
  std::vector<ModelSpec> specs{ModelSpec::linear()};
  if (data.controls() == 1) {
    for (char comp : {'x', 'y', 'z'}) {
      for (int deg = 1; deg <= 2; ++deg) {
        if (static_cast<std::size_t>(deg) >= data.size()) continue;
        polys.push_back(fit_polynomial_component(data, comp, deg));
        specs.push_back(ModelSpec::polynomial(comp, deg));
      }
    }
  }
  json pj = json::array();
  for (const auto& f : polys) {
    pj.push_back({{"component", std::string(1, f.component)},
                  {"degree", f.degree},
                  {"coefficients", f.coefficients},
                  {"residual", f.residual}});
  }
  rep["polynomial_fits"] = pj;
  json ranking = json::array();
  for (const auto& s : compare_models(data, specs)) {
    ranking.push_back({{"model", s.spec.name()},
                       {"rss", s.rss},
                       {"delta", s.delta},
                       {"parameters", s.parameters},
                       {"dof", s.dof},
                       {"score", s.score},
                       {"point_residuals", s.point_residuals}});
  }
  rep["model_ranking"] = ranking;
  c.doc["report"] = rep;
  c.out.file("dataset", c.cfg.output.dataset, [&](std::ostream& o) { write_dataset_csv(o, data); });
  c.out.file("fits", c.cfg.output.fits, [&](std::ostream& o) { write_fits_csv(o, &lin, polys); });
  return 0;
}

inline int run_decoherence(Context& c) {
  const auto& p = c.cfg.protocol;
  DecoherenceReport merged;
  if (p.params.contains("z_control")) {
    const ControlSetting zs = setting_from_json(p.params.at("z_control"), "protocol.z_control");
    const std::vector<double> dwell = p.params.contains("dwell_times")
                                          ? ::qident::cli::detail::number_list(p.params.at("dwell_times"), "protocol.dwell_times")
                                          : default_dwell_times();
    const std::uint64_t dshots = p.params.value("dwell_shots", p.shots);
    merged = discriminate_dephasing_relaxation(c.dev, zs, dwell, dshots, derive_seed(p.seed, 1), c.run());
    c.total_shots += dshots * dwell.size();
  }
  if (p.params.contains("control")) {
    const ControlSetting s = setting_from_json(p.params.at("control"), "protocol.control");
    const SampledTrace tr = acquire_z_trace(c.dev, s, p.grid, p.shots, derive_seed(p.seed, 0), c.run());
    c.total_shots += p.shots * p.grid.size();
    std::optional<std::vector<double>> exact;
    if (c.opt.oracle) exact = exact_z(c.dev, s, p.grid);
    c.out.file("trace", c.cfg.output.trace, [&](std::ostream& o) {
      write_trace_csv(o, tr, "z_hat", tr.shots, exact ? &*exact : nullptr);
    });
    c.out.file("spectrum", c.cfg.output.spectrum, [&](std::ostream& o) { write_spectrum_csv(o, dft(tr)); });
    const DecoherenceReport lr = decoherence_from_trace(tr);
    merged.lorentzian = lr.lorentzian;
    merged.omega0_hat = lr.omega0_hat;
    merged.gamma_hat = lr.gamma_hat;
    merged.resolution_limited = lr.resolution_limited;
  }
  c.doc["report"] = to_json(merged);
  return 0;
}

}  // namespace detail

/// Runs the configured protocol against a simulated device built from the
/// config. Configuration problems throw ConfigError; protocol failures are
/// recorded in the document and give exit code 2.
inline PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& opt = {}) {
  PipelineResult res;
  json& doc = res.document;
  doc["schema"] = kResultSchema;
  doc["toolkit_version"] = QIDENT_VERSION;
  doc["config"] = cfg.raw;
  doc["protocol"] = cfg.protocol.name;
  doc["status"] = "ok";
  detail::Outputs outputs(opt, doc);
  const SimulatedDevice dev(*cfg.device);
  detail::Context ctx{cfg, opt, dev, doc, outputs};
  const std::string& name = cfg.protocol.name;
  try {
    if (name == "leakage-direct") {
      res.exit_code = detail::run_leakage(ctx);
    } else if (name == "confinement-fourier") {
      res.exit_code = detail::run_confinement(ctx);
    } else if (name == "identify-omega-theta") {
      res.exit_code = detail::run_omega_theta(ctx);
    } else if (name == "identify-phi") {
      res.exit_code = detail::run_phi(ctx);
    } else if (name == "fit-control") {
      res.exit_code = detail::run_fit_control(ctx);
    } else if (name == "decoherence") {
      res.exit_code = detail::run_decoherence(ctx);
    } else {
      throw ConfigError("protocol.name", "unknown protocol '" + name + "'");
    }
  } catch (const ProtocolError& e) {
    doc["status"] = "protocol_error";
    doc["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
    res.exit_code = 2;
  } catch (const FitError& e) {
    doc["status"] = "protocol_error";
    doc["error"] = {{"code", "fit_not_converged"}, {"message", e.what()}, {"best", detail::to_json(e.best())}};
    res.exit_code = 2;
  }
  const auto& g = cfg.protocol.grid;
  doc["provenance"] = {{"seed", cfg.protocol.seed},
                       {"grid", {{"t0", g.t0}, {"dt", g.dt}, {"K", g.K}, {"points", g.size()}}},
                       {"shots_per_point", cfg.protocol.shots},
                       {"total_shots", ctx.total_shots}};
  outputs.file("result", cfg.output.result, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
  return res;
}

}  // namespace qident::cli
