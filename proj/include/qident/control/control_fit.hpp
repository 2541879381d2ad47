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
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qident/core/error.hpp"
#include "qident/core/types.hpp"

namespace qident {

struct ControlRow {
  std::vector<double> f;
  Vec3 d = Vec3::Zero();
  /// The phi branch behind d was not resolved by the data.
  bool phi_ambiguous = false;
};

/// Identified axis vectors d_k at control settings f^(k).
struct ControlDataset {
  std::vector<ControlRow> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t controls() const { return rows.empty() ? 0 : rows.front().f.size(); }

  void validate() const {
    if (rows.empty()) throw ContractError("control dataset is empty");
    for (const auto& r : rows) {
      if (r.f.size() != controls()) throw ContractError("control dataset rows have different control lengths");
    }
  }
};

/// d(f) = d0 + sum_m f_m d_m. coefficients.col(0) is d0, col(m) is d_m.
struct LinearControlModel {
  Eigen::Matrix<double, 3, Eigen::Dynamic> coefficients;
  /// Delta = sqrt(sum_k |r_k|^2).
  double delta = 0.0;
  std::vector<Vec3> residuals;

  Vec3 operator()(const std::vector<double>& f) const {
    Vec3 d = coefficients.col(0);
    for (std::size_t m = 0; m < f.size(); ++m) d += f[m] * coefficients.col(static_cast<Eigen::Index>(m) + 1);
    return d;
  }
};

namespace detail {

inline RealMatrix control_design(const ControlDataset& data) {
  const auto k = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(data.controls());
  RealMatrix x(k, m + 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < m; ++j) x(i, j + 1) = data.rows[static_cast<std::size_t>(i)].f[static_cast<std::size_t>(j)];
  }
  return x;
}

inline RealMatrix axis_targets(const ControlDataset& data) {
  RealMatrix y(static_cast<Eigen::Index>(data.size()), 3);
  for (std::size_t i = 0; i < data.size(); ++i) y.row(static_cast<Eigen::Index>(i)) = data.rows[i].d.transpose();
  return y;
}

inline int component_index(char c) {
  switch (c) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
  }
  throw ContractError(std::string("unknown axis component '") + c + "'");
}

}  // namespace detail

/// Least-squares linear control model, solved for all three components
/// with one column-pivoted QR factorization of [1, f].
inline LinearControlModel fit_linear_model(const ControlDataset& data) {
  data.validate();
  const std::size_t m = data.controls();
  if (data.size() < m + 1) throw ContractError("linear fit needs at least M+1 rows");
  const RealMatrix x = detail::control_design(data);
  const Eigen::ColPivHouseholderQR<RealMatrix> qr(x);
  if (qr.rank() < x.cols()) {
    const Eigen::FullPivLU<RealMatrix> lu(x);
    const RealVector dir = lu.kernel().col(0).normalized();
    std::ostringstream msg;
    msg << "design matrix is rank deficient along (constant, f_1..f_M) direction (";
    for (Eigen::Index i = 0; i < dir.size(); ++i) msg << (i ? ", " : "") << dir(i);
    msg << ")";
    throw ContractError(msg.str());
  }
  const RealMatrix y = detail::axis_targets(data);
  const RealMatrix beta = qr.solve(y);
  LinearControlModel model;
  model.coefficients = beta.transpose();
  const RealMatrix r = x * beta - y;
  for (Eigen::Index i = 0; i < r.rows(); ++i) model.residuals.emplace_back(r.row(i).transpose());
  model.delta = r.norm();
  return model;
}

/// Polynomial fit of one Cartesian component against a scalar control.
struct PolynomialComponentFit {
  char component = 'x';
  int degree = 0;
  /// Ascending powers: c0 + c1 f + c2 f^2 + ...
  std::vector<double> coefficients;
  /// Norm of the residual vector.
  double residual = 0.0;
  std::vector<double> residuals;

  double operator()(double f) const {
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * f + *it;
    return acc;
  }
};

inline PolynomialComponentFit fit_polynomial_component(const ControlDataset& data, char component, int degree) {
  data.validate();
  if (data.controls() != 1) throw ContractError("polynomial component fits need exactly one control");
  if (degree < 0 || static_cast<std::size_t>(degree) >= data.size()) {
    throw ContractError("polynomial degree must be below the number of rows");
  }
  const int c = detail::component_index(component);
  const auto k = static_cast<Eigen::Index>(data.size());
  RealMatrix v(k, degree + 1);
  RealVector y(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double f = data.rows[static_cast<std::size_t>(i)].f[0];
    double p = 1.0;
    for (int j = 0; j <= degree; ++j, p *= f) v(i, j) = p;
    y(i) = data.rows[static_cast<std::size_t>(i)].d(c);
  }
  const Eigen::ColPivHouseholderQR<RealMatrix> qr(v);
  if (qr.rank() < v.cols()) throw ContractError("control values do not determine a polynomial of this degree");
  const RealVector beta = qr.solve(y);
  PolynomialComponentFit fit;
  fit.component = component;
  fit.degree = degree;
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  const RealVector r = v * beta - y;
  fit.residuals.assign(r.data(), r.data() + r.size());
  fit.residual = r.norm();
  return fit;
}

/// A candidate model: the full linear model, or one polynomial component.
struct ModelSpec {
  enum class Kind { kLinear, kPolynomial };
  Kind kind = Kind::kLinear;
  char component = 'x';
  int degree = 1;

  static ModelSpec linear() { return {}; }
  static ModelSpec polynomial(char component, int degree) { return {Kind::kPolynomial, component, degree}; }

  std::string name() const {
    if (kind == Kind::kLinear) return "linear";
    return std::string("poly") + std::to_string(degree) + "_" + component;
  }
};

struct ModelScore {
  ModelSpec spec;
  double rss = 0.0;
  double delta = 0.0;
  std::size_t parameters = 0;
  double dof = 0.0;
  /// rss / dof; infinite when no degrees of freedom remain.
  double score = 0.0;
  std::vector<double> point_residuals;
};

/// Models ranked by degrees-of-freedom adjusted score (stable for ties).
inline std::vector<ModelScore> compare_models(const ControlDataset& data, const std::vector<ModelSpec>& models) {
  if (models.empty()) throw ContractError("no models to compare");
  std::vector<ModelScore> out;
  for (const auto& spec : models) {
    ModelScore s;
    s.spec = spec;
    std::size_t observations = 0;
    if (spec.kind == ModelSpec::Kind::kLinear) {
      const LinearControlModel m = fit_linear_model(data);
      s.rss = m.delta * m.delta;
      s.parameters = 3 * (data.controls() + 1);
      observations = 3 * data.size();
      for (const auto& r : m.residuals) s.point_residuals.push_back(r.norm());
    } else {
      const PolynomialComponentFit p = fit_polynomial_component(data, spec.component, spec.degree);
      s.rss = p.residual * p.residual;
      s.parameters = static_cast<std::size_t>(spec.degree) + 1;
      observations = data.size();
      s.point_residuals = p.residuals;
    }
    s.delta = std::sqrt(s.rss);
    s.dof = static_cast<double>(observations) - static_cast<double>(s.parameters);
    s.score = s.dof > 0.0 ? s.rss / s.dof : std::numeric_limits<double>::infinity();
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const ModelScore& a, const ModelScore& b) { return a.score < b.score; });
  return out;
}

namespace csv {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ConfigError(where, "'" + s + "' is not a number");
  return v;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace csv

/// Header f1..fM,d_x,d_y,d_z then one row per setting.
inline void write_dataset_csv(std::ostream& out, const ControlDataset& data) {
  data.validate();
  for (std::size_t m = 0; m < data.controls(); ++m) out << 'f' << (m + 1) << ',';
  out << "d_x,d_y,d_z\n";
  for (const auto& r : data.rows) {
    for (double f : r.f) out << csv::format_double(f) << ',';
    out << csv::format_double(r.d.x()) << ',' << csv::format_double(r.d.y()) << ',' << csv::format_double(r.d.z())
        << '\n';
  }
}

inline ControlDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset", "missing CSV header");
  const auto header = csv::split(line);
  if (header.size() < 3 || header[header.size() - 3] != "d_x" || header[header.size() - 2] != "d_y" ||
      header.back() != "d_z") {
    throw ConfigError("dataset", "header must end with d_x,d_y,d_z");
  }
  const std::size_t m = header.size() - 3;
  ControlDataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    const std::string where = "dataset line " + std::to_string(lineno);
    if (cells.size() != header.size()) throw ConfigError(where, "wrong number of columns");
    ControlRow r;
    for (std::size_t j = 0; j < m; ++j) r.f.push_back(csv::parse_double(cells[j], where));
    r.d = Vec3(csv::parse_double(cells[m], where), csv::parse_double(cells[m + 1], where),
               csv::parse_double(cells[m + 2], where));
    data.rows.push_back(std::move(r));
  }
  data.validate();
  return data;
}

/// Long format model,component,term,value. Linear terms are "d0".."dM";
/// polynomial terms are "c0".."cN".
inline void write_fits_csv(std::ostream& out, const LinearControlModel* linear,
                           const std::vector<PolynomialComponentFit>& polys) {
  out << "model,component,term,value\n";
  if (linear) {
    const char comps[] = {'x', 'y', 'z'};
    for (Eigen::Index j = 0; j < linear->coefficients.cols(); ++j) {
      for (int c = 0; c < 3; ++c) {
        out << "linear," << comps[c] << ",d" << j << ',' << csv::format_double(linear->coefficients(c, j)) << '\n';
      }
    }
    out << "linear,all,delta," << csv::format_double(linear->delta) << '\n';
  }
  for (const auto& p : polys) {
    const std::string model = "poly" + std::to_string(p.degree);
    for (std::size_t j = 0; j < p.coefficients.size(); ++j) {
      out << model << ',' << p.component << ",c" << j << ',' << csv::format_double(p.coefficients[j]) << '\n';
    }
    out << model << ',' << p.component << ",residual," << csv::format_double(p.residual) << '\n';
  }
}

struct FitRecord {
  std::string model;
  std::string component;
  std::string term;
  double value = 0.0;
};

inline std::vector<FitRecord> read_fits_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "model,component,term,value") {
    throw ConfigError("fits", "header must be model,component,term,value");
  }
  std::vector<FitRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    const std::string where = "fits line " + std::to_string(lineno);
    if (cells.size() != 4) throw ConfigError(where, "wrong number of columns");
    out.push_back({cells[0], cells[1], cells[2], csv::parse_double(cells[3], where)});
  }
  return out;
}

}  // namespace qident
