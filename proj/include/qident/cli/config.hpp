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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qident/core/bloch.hpp"
#include "qident/core/error.hpp"
#include "qident/core/operators.hpp"
#include "qident/device/device_model.hpp"
#include "qident/protocols/parallel.hpp"

namespace qident::cli {

using nlohmann::json;

struct ProtocolConfig {
  std::string name;
  TimeGrid grid;
  std::uint64_t shots = 100;
  std::uint64_t seed = 0;
  /// The protocol object as written, for protocol-specific fields.
  json params;
};

struct OutputConfig {
  std::string trace = "trace.csv";
  std::string spectrum = "spectrum.csv";
  std::string result = "result.json";
  std::string dataset = "dataset.csv";
  std::string fits = "fits.csv";
};

struct RunConfig {
  json raw;
  std::optional<DeviceModel> device;
  /// Control values recorded for table entries, by label.
  std::map<std::string, std::vector<double>> table_controls;
  ProtocolConfig protocol;
  OutputConfig output;
};

/// Protocol names accepted in protocol.name, with their required fields.
struct ProtocolInfo {
  std::string name;
  std::string required;
  std::string description;
};

inline const std::vector<ProtocolInfo>& protocol_catalog() {
  static const std::vector<ProtocolInfo> catalog = [] {
    std::vector<ProtocolInfo> c{
        {"confinement-fourier", "control", "leakage bounds from the 0th and 1st order peaks of the p0(t) spectrum"},
        {"decoherence", "control and/or z_control",
         "Lorentzian estimate of rotation frequency and decay rate; dephasing vs relaxation test"},
        {"fit-control", "controls (optional)", "identify every control setting and fit linear/polynomial models"},
        {"identify-omega-theta", "control", "rotation frequency and axis declination from z(t)"},
        {"identify-phi", "control, reference", "axis azimuth relative to a reference control"},
        {"leakage-direct", "control, subspace", "leakage out of a subspace from three-outcome measurements"},
    };
    std::stable_sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return c;
  }();
  return catalog;
}

inline bool is_known_protocol(const std::string& name) {
  for (const auto& p : protocol_catalog()) {
    if (p.name == name) return true;
  }
  return false;
}

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path.empty() ? key : path + "." + key, "is required");
  return obj.at(key);
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

inline std::uint64_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

/// Row-major list of N^2 [re, im] pairs.
inline Matrix parse_matrix(const json& v, Eigen::Index n, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected a list of [re, im] pairs");
  if (static_cast<Eigen::Index>(v.size()) != n * n) {
    throw ConfigError(path, "expected " + std::to_string(n * n) + " entries, got " + std::to_string(v.size()));
  }
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i * n + j);
      const json& e = v[idx];
      const std::string where = path + "[" + std::to_string(idx) + "]";
      if (!e.is_array() || e.size() != 2) throw ConfigError(where, "expected an [re, im] pair");
      m(i, j) = Complex(number(e[0], where), number(e[1], where));
    }
  }
  return m;
}

inline HermitianOperator parse_hermitian(const json& v, Eigen::Index n, const std::string& path) {
  try {
    return HermitianOperator(parse_matrix(v, n, path));
  } catch (const ContractError& e) {
    throw ConfigError(path, e.what());
  }
}

inline std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline HermitianOperator parse_table_hamiltonian(const json& entry, Eigen::Index n, const std::string& path) {
  if (entry.contains("matrix")) return parse_hermitian(entry.at("matrix"), n, join(path, "matrix"));
  if (entry.contains("axis")) {
    if (n != 2) throw ConfigError(join(path, "axis"), "axis form is only valid for dimension 2");
    const json& a = entry.at("axis");
    const std::string ap = join(path, "axis");
    AxisAngles ang;
    ang.omega = number(require(a, "omega", ap), join(ap, "omega"));
    ang.theta = number(require(a, "theta", ap), join(ap, "theta"));
    ang.phi = a.contains("phi") ? number(a.at("phi"), join(ap, "phi")) : 0.0;
    ang.d0 = a.contains("d0") ? number(a.at("d0"), join(ap, "d0")) : 0.0;
    if (!(ang.omega >= 0.0)) throw ConfigError(join(ap, "omega"), "must be non-negative");
    ang.degenerate = ang.omega == 0.0;
    return hamiltonian_from_axis_angles(ang);
  }
  throw ConfigError(path, "table entry needs 'matrix' or 'axis'");
}

inline LindbladDissipator parse_dissipator(const json& d, Eigen::Index n, const std::string& path) {
  std::vector<DissipatorTerm> terms;
  if (d.contains("terms")) {
    const json& ts = d.at("terms");
    if (!ts.is_array()) throw ConfigError(join(path, "terms"), "expected a list");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string tp = join(path, "terms") + "[" + std::to_string(i) + "]";
      const json& t = ts[i];
      DissipatorTerm term;
      term.rate = number(require(t, "rate", tp), join(tp, "rate"));
      if (t.contains("operator")) {
        term.op = parse_matrix(t.at("operator"), n, join(tp, "operator"));
      } else if (t.contains("kind")) {
        if (n != 2) throw ConfigError(join(tp, "kind"), "named jump operators need dimension 2");
        const std::string kind = t.at("kind").get<std::string>();
        if (kind == "dephasing") {
          term.op = LindbladDissipator::half_sigma_z();
        } else if (kind == "lowering") {
          term.op = LindbladDissipator::sigma_minus();
        } else if (kind == "raising") {
          term.op = LindbladDissipator::sigma_plus();
        } else {
          throw ConfigError(join(tp, "kind"), "unknown jump operator '" + kind + "'");
        }
      } else {
        throw ConfigError(tp, "term needs 'operator' or 'kind'");
      }
      terms.push_back(std::move(term));
    }
  }
  std::optional<Matrix> u;
  if (d.contains("basis_unitary")) u = parse_matrix(d.at("basis_unitary"), n, join(path, "basis_unitary"));
  try {
    return LindbladDissipator(n, std::move(terms), std::move(u));
  } catch (const ContractError& e) {
    throw ConfigError(path, e.what());
  }
}

inline DeviceModel parse_device(const json& dev, std::map<std::string, std::vector<double>>& controls) {
  const std::string path = "device";
  const json& dim_v = require(dev, "dimension", path);
  if (!dim_v.is_number_integer() || dim_v.get<std::int64_t>() < 2) {
    throw ConfigError("device.dimension", "expected an integer >= 2");
  }
  const auto n = static_cast<Eigen::Index>(dim_v.get<std::int64_t>());

  const json& hs = require(dev, "hamiltonians", path);
  std::optional<ControlledHamiltonian> ham;
  if (hs.contains("table")) {
    const json& tab = hs.at("table");
    if (!tab.is_object() || tab.empty()) throw ConfigError("device.hamiltonians.table", "expected a non-empty object");
    ControlTable table;
    for (const auto& [label, entry] : tab.items()) {
      const std::string ep = "device.hamiltonians.table." + label;
      ControlTableEntry e{parse_table_hamiltonian(entry, n, ep), {}};
      if (entry.contains("control")) e.control = number_list(entry.at("control"), join(ep, "control"));
      controls[label] = e.control;
      table.emplace(label, std::move(e));
    }
    ham.emplace(std::move(table));
  } else if (hs.contains("linear")) {
    const json& lin = hs.at("linear");
    const std::string lp = "device.hamiltonians.linear";
    LinearControlForm form{parse_hermitian(require(lin, "h0", lp), n, join(lp, "h0")), {}};
    if (lin.contains("controls")) {
      const json& cs = lin.at("controls");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        form.controls.push_back(parse_hermitian(cs[i], n, join(lp, "controls") + "[" + std::to_string(i) + "]"));
      }
    }
    ham.emplace(std::move(form));
  } else {
    throw ConfigError("device.hamiltonians", "needs 'table' or 'linear'");
  }

  LindbladDissipator diss(n, {});
  if (dev.contains("dissipator")) diss = parse_dissipator(dev.at("dissipator"), n, "device.dissipator");

  const json& obs = require(dev, "observable", path);
  HermitianOperator a;
  if (obs.contains("eigenvalues")) {
    const auto ev = number_list(obs.at("eigenvalues"), "device.observable.eigenvalues");
    if (static_cast<Eigen::Index>(ev.size()) != n) {
      throw ConfigError("device.observable.eigenvalues", "expected " + std::to_string(n) + " values");
    }
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = ev[static_cast<std::size_t>(i)];
    a = HermitianOperator(m);
  } else if (obs.contains("matrix")) {
    a = parse_hermitian(obs.at("matrix"), n, "device.observable.matrix");
  } else {
    throw ConfigError("device.observable", "needs 'eigenvalues' or 'matrix'");
  }

  std::optional<DensityMatrix> pre;
  if (dev.contains("pre_measurement_state")) {
    const json& s = dev.at("pre_measurement_state");
    const std::string sp = "device.pre_measurement_state";
    try {
      if (s.is_string() && s.get<std::string>() == "maximally_mixed") {
        pre = DensityMatrix::maximally_mixed(n);
      } else if (s.is_object() && s.contains("basis_state")) {
        pre = DensityMatrix::basis_state(n, static_cast<Eigen::Index>(count(s.at("basis_state"), join(sp, "basis_state"))));
      } else if (s.is_object() && s.contains("matrix")) {
        pre = DensityMatrix(parse_matrix(s.at("matrix"), n, join(sp, "matrix")));
      } else {
        throw ConfigError(sp, "expected \"maximally_mixed\", {basis_state} or {matrix}");
      }
    } catch (const ContractError& e) {
      throw ConfigError(sp, e.what());
    }
  }
  try {
    return DeviceModel(std::move(*ham), std::move(diss), std::move(a), std::move(pre));
  } catch (const ContractError& e) {
    throw ConfigError("device", e.what());
  }
}

inline std::size_t default_points(const std::string& protocol) {
  return protocol == "leakage-direct" || protocol == "confinement-fourier" ? 10000 : 2000;
}

inline void check_setting(const json& v, const RunConfig& cfg, const std::string& path) {
  const ControlledHamiltonian& h = cfg.device->hamiltonians;
  if (v.is_string()) {
    if (!h.resolves(ControlSetting(v.get<std::string>()))) {
      throw ConfigError(path, "unknown control label '" + v.get<std::string>() + "'");
    }
  } else if (v.is_array()) {
    if (!h.resolves(ControlSetting(number_list(v, path)))) throw ConfigError(path, "control vector does not fit the device");
  } else {
    throw ConfigError(path, "expected a control label or a control vector");
  }
}

/// Every control reference in the protocol section names something the
/// device provides.
inline void check_protocol_fields(const RunConfig& cfg) {
  const json& p = cfg.protocol.params;
  const std::string& name = cfg.protocol.name;
  const auto need = [&](const char* key) { return require(p, key, "protocol"); };
  if (name == "leakage-direct") {
    check_setting(need("control"), cfg, "protocol.control");
    const json& s = need("subspace");
    if (!s.is_array() || s.empty()) throw ConfigError("protocol.subspace", "expected a list of basis indices");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto k = count(s[i], "protocol.subspace[" + std::to_string(i) + "]");
      if (static_cast<Eigen::Index>(k) >= cfg.device->hamiltonians.dim()) {
        throw ConfigError("protocol.subspace[" + std::to_string(i) + "]", "basis index out of range");
      }
    }
  } else if (name == "confinement-fourier" || name == "identify-omega-theta") {
    check_setting(need("control"), cfg, "protocol.control");
  } else if (name == "identify-phi") {
    check_setting(need("control"), cfg, "protocol.control");
    const json& r = need("reference");
    check_setting(require(r, "control", "protocol.reference"), cfg, "protocol.reference.control");
  } else if (name == "fit-control") {
    if (p.contains("controls")) {
      const json& cs = p.at("controls");
      if (!cs.is_array() || cs.empty()) throw ConfigError("protocol.controls", "expected a non-empty list");
      for (std::size_t i = 0; i < cs.size(); ++i) check_setting(cs[i], cfg, "protocol.controls[" + std::to_string(i) + "]");
    } else if (!cfg.device->hamiltonians.table()) {
      throw ConfigError("protocol.controls", "is required for a linear control form");
    }
  } else if (name == "decoherence") {
    if (!p.contains("control") && !p.contains("z_control")) {
      throw ConfigError("protocol", "decoherence needs 'control', 'z_control' or both");
    }
    if (p.contains("control")) check_setting(p.at("control"), cfg, "protocol.control");
    if (p.contains("z_control")) check_setting(p.at("z_control"), cfg, "protocol.z_control");
  }
}

}  // namespace detail

/// Control setting written as a label string or a numeric list.
inline ControlSetting setting_from_json(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  return detail::number_list(v, path);
}

inline RunConfig parse_config_json(json raw, std::optional<std::uint64_t> seed_override = std::nullopt) {
  if (!raw.is_object()) throw ConfigError("", "configuration must be a JSON object");
  RunConfig cfg;
  const json& proto = detail::require(raw, "protocol", "");
  cfg.protocol.name = detail::require(proto, "name", "protocol").get<std::string>();
  if (!is_known_protocol(cfg.protocol.name)) {
    throw ConfigError("protocol.name", "unknown protocol '" + cfg.protocol.name + "'");
  }
  if (seed_override) raw["protocol"]["seed"] = *seed_override;
  const json& p = raw.at("protocol");
  if (!p.contains("seed")) throw ConfigError("protocol.seed", "is required (no implicit seeding)");
  cfg.protocol.seed = detail::count(p.at("seed"), "protocol.seed");
  cfg.protocol.grid.t0 = p.contains("t0") ? detail::number(p.at("t0"), "protocol.t0") : 0.0;
  cfg.protocol.grid.dt = p.contains("dt") ? detail::number(p.at("dt"), "protocol.dt") : 0.01;
  cfg.protocol.grid.K = p.contains("K") ? detail::count(p.at("K"), "protocol.K") : detail::default_points(cfg.protocol.name);
  cfg.protocol.shots = p.contains("shots") ? detail::count(p.at("shots"), "protocol.shots") : 100;
  if (cfg.protocol.shots < 1) throw ConfigError("protocol.shots", "must be at least 1");
  try {
    cfg.protocol.grid.validate();
  } catch (const ContractError& e) {
    throw ConfigError("protocol", e.what());
  }
  cfg.protocol.params = p;

  cfg.device.emplace(detail::parse_device(detail::require(raw, "device", ""), cfg.table_controls));
  detail::check_protocol_fields(cfg);

  if (raw.contains("output")) {
    const json& o = raw.at("output");
    const auto str = [&](const char* key, std::string& dst) {
      if (o.contains(key)) {
        if (!o.at(key).is_string()) throw ConfigError(std::string("output.") + key, "expected a file name");
        dst = o.at(key).get<std::string>();
      }
    };
    str("trace", cfg.output.trace);
    str("spectrum", cfg.output.spectrum);
    str("result", cfg.output.result);
    str("dataset", cfg.output.dataset);
    str("fits", cfg.output.fits);
  }
  cfg.raw = std::move(raw);
  return cfg;
}

/// Parses configuration text. Syntax errors report line and column.
inline RunConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override = std::nullopt) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col), "syntax error");
  } catch (const json::exception& e) {
    throw ConfigError("", e.what());
  }
  try {
    return parse_config_json(std::move(raw), seed_override);
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("malformed value: ") + e.what());
  }
}

}  // namespace qident::cli
