#pragma once

// Scenario documents (JSON, schema_version 1) and the built-in presets.
//
//   {
//     "schema_version": 1,
//     "name": "...",                        optional
//     "dim": 2,
//     "observables": [{"name": "Sz", "matrix": [[1, 0], [0, -1]]}],
//     "contexts": [{"id": "V_z", "generators": ["Sz", {"projection": [[1, 0], [0, 0]]}]}],
//     "closure": "subalgebras" | "none",    optional, default subalgebras
//     "propositions": [{"name": "SzUp", "observable": "Sz", "intervals": [[1, 1]]}],
//     "states": [{"name": "zero", "vector": [1, 0]}, {"name": "mixed", "density": [[0.5, 0], [0, 0.5]]}],
//     "tolerances": {"num": 1e-9, "cluster": 1e-7, "meas": 1e-9},
//     "report": {...}                       optional, passed through to the CLI
//   }
//
// A complex entry is a number or an [re, im] pair. Matrices are row-major.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "toposq/spectrum.hpp"

namespace toposq {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct NamedObservable {
  std::string name;
  Observable observable;
};

/// A context as written: its generating projections, in document order.
struct ContextSpec {
  std::string id;
  std::vector<Projection> generators;
};

struct Proposition {
  std::string name;
  std::string observable;
  IntervalSet intervals;
};

struct NamedState {
  std::string name;
  std::variant<PureState, DensityState> state;

  bool is_pure() const { return std::holds_alternative<PureState>(state); }
  DensityState density() const {
    return is_pure() ? DensityState::pure(std::get<PureState>(state)) : std::get<DensityState>(state);
  }
};

struct Scenario {
  std::string name;
  std::size_t dim = 0;
  std::vector<NamedObservable> observables;
  std::vector<ContextSpec> contexts;
  Closure closure = Closure::subalgebras;
  std::vector<Proposition> propositions;
  std::vector<NamedState> states;
  Tolerances tolerances;
  Json report = Json::object();
  Json document;  // the validated source, kept for persistence

  const Observable& observable(const std::string& name) const {
    for (const auto& o : observables) {
      if (o.name == name) return o.observable;
    }
    throw Error(ErrorCode::UnknownProposition, "no observable named '" + name + "'");
  }
  const Proposition& proposition(const std::string& name) const {
    for (const auto& p : propositions) {
      if (p.name == name) return p;
    }
    throw Error(ErrorCode::UnknownProposition, "no proposition named '" + name + "'");
  }
  const NamedState& state(const std::string& name) const {
    for (const auto& s : states) {
      if (s.name == name) return s;
    }
    throw Error(ErrorCode::UnknownState, "no state named '" + name + "'");
  }
  Projection projection_of(const Proposition& p) const {
    return spectralProjection(observable(p.observable), p.intervals, tolerances);
  }
};

namespace detail {

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + "." + key, "missing field");
  return *it;
}

inline std::string string_field(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_string()) throw ValidationError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline double number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(path, "not finite");
  return x;
}

inline const Json& array(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, "expected an array");
  return v;
}

inline Complex complex_entry(const Json& v, const std::string& path) {
  if (v.is_number()) return {number(v, path), 0.0};
  if (v.is_array() && v.size() == 2) return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
  throw ValidationError(path, "expected a number or an [re, im] pair");
}

inline Matrix matrix(const Json& v, std::size_t dim, const std::string& path) {
  array(v, path);
  if (v.size() != dim) throw ValidationError(path, "expected " + std::to_string(dim) + " rows");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix m(n, n);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const Json& row = array(v[i], row_path);
    if (row.size() != dim) throw ValidationError(row_path, "expected " + std::to_string(dim) + " entries");
    for (std::size_t j = 0; j < dim; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          complex_entry(row[j], row_path + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

inline Vector vector(const Json& v, std::size_t dim, const std::string& path) {
  array(v, path);
  if (v.size() != dim) throw ValidationError(path, "expected " + std::to_string(dim) + " entries");
  Vector out(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    out(static_cast<Eigen::Index>(i)) = complex_entry(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

// Runs a validating constructor; its Error becomes a ValidationError at `path`.
template <class F>
auto at_path(const std::string& path, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& err) {
    throw ValidationError(path, err.what());
  }
}

inline void check_name(std::set<std::string>& seen, const std::string& name, const std::string& path) {
  if (name.empty()) throw ValidationError(path, "empty name");
  if (!seen.insert(name).second) throw ValidationError(path, "duplicate name '" + name + "'");
}

inline Json complex_json(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

}  // namespace detail

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(detail::complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(detail::complex_json(v(i)));
  return out;
}

/// Validates a parsed document.
inline Scenario scenarioFromJson(const Json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ValidationError("$", "expected an object");
  const Json& version = field(doc, "schema_version", "$");
  if (!version.is_number_integer()) throw ValidationError("$.schema_version", "expected an integer");
  if (version.get<long long>() != kSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionError, "unsupported schema_version " + version.dump() + " (supported: " +
                                                   std::to_string(kSchemaVersion) + ")");
  }

  Scenario sc;
  sc.document = doc;
  if (doc.contains("name")) sc.name = string_field(doc, "name", "$");
  const Json& dim = field(doc, "dim", "$");
  if (!dim.is_number_integer() || dim.get<long long>() < static_cast<long long>(kMinDim) ||
      dim.get<long long>() > static_cast<long long>(kMaxDim)) {
    throw ValidationError("$.dim", "expected an integer in [2, 64]");
  }
  sc.dim = dim.get<std::size_t>();

  if (doc.contains("tolerances")) {
    const Json& t = doc["tolerances"];
    if (!t.is_object()) throw ValidationError("$.tolerances", "expected an object");
    for (const auto& [key, value] : t.items()) {
      const std::string p = "$.tolerances." + key;
      const double x = number(value, p);
      if (x <= 0.0 || x >= 1.0) throw ValidationError(p, "expected a value in (0, 1)");
      if (key == "num") sc.tolerances.num = x;
      else if (key == "cluster") sc.tolerances.cluster = x;
      else if (key == "meas") sc.tolerances.meas = x;
      else throw ValidationError(p, "unknown tolerance");
    }
  }
  const Tolerances& tol = sc.tolerances;

  if (doc.contains("closure")) {
    const Json& c = doc["closure"];
    if (c == "subalgebras") sc.closure = Closure::subalgebras;
    else if (c == "none") sc.closure = Closure::none;
    else throw ValidationError("$.closure", "expected \"subalgebras\" or \"none\"");
  }

  std::set<std::string> names;
  const Json& observables = array(field(doc, "observables", "$"), "$.observables");
  for (std::size_t i = 0; i < observables.size(); ++i) {
    const std::string p = "$.observables[" + std::to_string(i) + "]";
    const std::string name = string_field(observables[i], "name", p);
    check_name(names, name, p + ".name");
    const Matrix m = matrix(field(observables[i], "matrix", p), sc.dim, p + ".matrix");
    sc.observables.push_back({name, at_path(p + ".matrix", [&] { return Observable::from(m, tol); })});
  }

  std::set<std::string> context_ids;
  const Json& contexts = array(field(doc, "contexts", "$"), "$.contexts");
  if (contexts.empty()) throw ValidationError("$.contexts", "at least one context is required");
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const std::string p = "$.contexts[" + std::to_string(i) + "]";
    ContextSpec spec;
    spec.id = string_field(contexts[i], "id", p);
    check_name(context_ids, spec.id, p + ".id");
    const Json& gens = array(field(contexts[i], "generators", p), p + ".generators");
    if (gens.empty()) throw ValidationError(p + ".generators", "at least one generator is required");
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const std::string gp = p + ".generators[" + std::to_string(g) + "]";
      if (gens[g].is_string()) {
        const std::string ref = gens[g].get<std::string>();
        const auto it = std::find_if(sc.observables.begin(), sc.observables.end(),
                                     [&](const NamedObservable& o) { return o.name == ref; });
        if (it == sc.observables.end()) throw ValidationError(gp, "unknown observable '" + ref + "'");
        for (const auto& c : spectralDecompose(it->observable, tol)) spec.generators.push_back(c.projection);
      } else {
        const Matrix m = matrix(field(gens[g], "projection", gp), sc.dim, gp + ".projection");
        spec.generators.push_back(at_path(gp + ".projection", [&] { return Projection::from(m, tol); }));
      }
    }
    at_path(p + ".generators", [&] { return generateContext(spec.generators, spec.id, tol); });
    sc.contexts.push_back(std::move(spec));
  }

  if (doc.contains("propositions")) {
    const Json& props = array(doc["propositions"], "$.propositions");
    for (std::size_t i = 0; i < props.size(); ++i) {
      const std::string p = "$.propositions[" + std::to_string(i) + "]";
      Proposition prop;
      prop.name = string_field(props[i], "name", p);
      check_name(names, prop.name, p + ".name");
      prop.observable = string_field(props[i], "observable", p);
      if (std::none_of(sc.observables.begin(), sc.observables.end(),
                       [&](const NamedObservable& o) { return o.name == prop.observable; })) {
        throw ValidationError(p + ".observable", "unknown observable '" + prop.observable + "'");
      }
      const Json& intervals = array(field(props[i], "intervals", p), p + ".intervals");
      for (std::size_t k = 0; k < intervals.size(); ++k) {
        const std::string ip = p + ".intervals[" + std::to_string(k) + "]";
        if (!intervals[k].is_array() || intervals[k].size() != 2) throw ValidationError(ip, "expected [lo, hi]");
        const double lo = number(intervals[k][0], ip + "[0]");
        const double hi = number(intervals[k][1], ip + "[1]");
        if (lo > hi) throw ValidationError(ip, "lo exceeds hi");
        prop.intervals.push_back({lo, hi});
      }
      sc.propositions.push_back(std::move(prop));
    }
  }

  if (doc.contains("states")) {
    const Json& states = array(doc["states"], "$.states");
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::string p = "$.states[" + std::to_string(i) + "]";
      const std::string name = string_field(states[i], "name", p);
      check_name(names, name, p + ".name");
      const bool has_vector = states[i].contains("vector");
      if (has_vector == states[i].contains("density")) {
        throw ValidationError(p, "exactly one of \"vector\" and \"density\" is required");
      }
      if (has_vector) {
        const Vector v = vector(states[i]["vector"], sc.dim, p + ".vector");
        sc.states.push_back({name, at_path(p + ".vector", [&] { return PureState::from(v, tol); })});
      } else {
        const Matrix m = matrix(states[i]["density"], sc.dim, p + ".density");
        sc.states.push_back({name, at_path(p + ".density", [&] { return DensityState::from(m, tol); })});
      }
    }
  }

  if (doc.contains("report")) {
    if (!doc["report"].is_object()) throw ValidationError("$.report", "expected an object");
    sc.report = doc["report"];
  }
  return sc;
}

inline Scenario loadScenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& err) {
    throw Error(ErrorCode::ParseError, err.what());
  }
  return scenarioFromJson(doc);
}

inline std::vector<Context> generatingContexts(const Scenario& sc) {
  std::vector<Context> out;
  for (const auto& spec : sc.contexts) out.push_back(generateContext(spec.generators, spec.id, sc.tolerances));
  return out;
}

inline PresheafPtr buildPresheaf(const Scenario& sc) {
  return make_presheaf(buildPoset(generatingContexts(sc), sc.closure, sc.tolerances));
}

// ---------------------------------------------------------------------------
// Presets

namespace detail {

inline Json observable_json(const std::string& name, const Matrix& m) { return {{"name", name}, {"matrix", matrix_json(m)}}; }

inline Json proposition_json(const std::string& name, const std::string& obs, double value) {
  return {{"name", name}, {"observable", obs}, {"intervals", Json::array({Json::array({value, value})})}};
}

inline Json pure_json(const std::string& name, const Vector& v) { return {{"name", name}, {"vector", vector_json(v)}}; }

inline Json density_json(const std::string& name, const Matrix& m) {
  return {{"name", name}, {"density", matrix_json(m)}};
}

inline Matrix pauli(char c) {
  Matrix m(2, 2);
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = Matrix::Identity(2, 2); break;
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline Vector basis_vector(std::size_t dim, std::size_t i) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

inline Json qubit_document(const std::string& name, const std::string& axes) {
  Json doc = {{"schema_version", kSchemaVersion}, {"name", name}, {"dim", 2}, {"closure", "subalgebras"}};
  doc["observables"] = Json::array();
  doc["contexts"] = Json::array();
  doc["propositions"] = Json::array();
  for (char a : axes) {
    const std::string lower(1, static_cast<char>(std::tolower(a)));
    const std::string obs = "S" + lower;
    doc["observables"].push_back(observable_json(obs, pauli(a)));
    doc["contexts"].push_back({{"id", "V_" + lower}, {"generators", Json::array({obs})}});
    doc["propositions"].push_back(proposition_json(obs + "Up", obs, 1));
    doc["propositions"].push_back(proposition_json(obs + "Down", obs, -1));
  }
  const double r = std::numbers::sqrt2 / 2;
  Vector plus(2), minus(2);
  plus << r, r;
  minus << r, -r;
  doc["states"] = Json::array({pure_json("zero", basis_vector(2, 0)), pure_json("one", basis_vector(2, 1)),
                               pure_json("plus", plus), pure_json("minus", minus),
                               density_json("mixed", Matrix::Identity(2, 2) * 0.5)});
  return doc;
}

inline Json qutrit_chain_document() {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << 1, 2, 3;
  Json doc = {{"schema_version", kSchemaVersion}, {"name", "qutrit-chain"}, {"dim", 3}, {"closure", "subalgebras"}};
  doc["observables"] = Json::array({observable_json("A", a)});
  doc["contexts"] = Json::array({{{"id", "V3"}, {"generators", Json::array({"A"})}}});
  doc["propositions"] = Json::array();
  doc["states"] = Json::array();
  for (int k = 1; k <= 3; ++k) {
    doc["propositions"].push_back(proposition_json("E" + std::to_string(k), "A", k));
    doc["states"].push_back(pure_json("e" + std::to_string(k), basis_vector(3, static_cast<std::size_t>(k - 1))));
  }
  doc["propositions"].push_back(
      {{"name", "E23"}, {"observable", "A"}, {"intervals", Json::array({Json::array({1.5, 3.5})})}});
  Vector u(3);
  u << 1, 1, 1;
  doc["states"].push_back(pure_json("uniform", u / std::sqrt(3.0)));
  doc["states"].push_back(density_json("mixed", Matrix::Identity(3, 3) / 3.0));
  return doc;
}

// Computational basis plus the three quadratic-phase bases
// |a,b> = sum_k w^(a k^2 + b k) |k> / sqrt 3: four mutually unbiased bases.
inline Json qutrit_mub_document() {
  Json doc = qutrit_chain_document();
  doc["name"] = "qutrit-mub";
  const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  for (int a = 0; a < 3; ++a) {
    Json gens = Json::array();
    for (int b = 0; b < 3; ++b) {
      Vector v(3);
      for (int k = 0; k < 3; ++k) v(k) = std::pow(omega, (a * k * k + b * k) % 3) / std::sqrt(3.0);
      gens.push_back({{"projection", matrix_json(v * v.adjoint())}});
    }
    doc["contexts"].push_back({{"id", "M" + std::to_string(a)}, {"generators", gens}});
  }
  return doc;
}

inline Json mermin_document(const std::string& name) {
  Json doc = {{"schema_version", kSchemaVersion}, {"name", name}, {"dim", 4}, {"closure", "subalgebras"}};
  const char* square[3][3] = {{"XI", "IX", "XX"}, {"IY", "YI", "YY"}, {"XY", "YX", "ZZ"}};
  doc["observables"] = Json::array();
  doc["propositions"] = Json::array();
  for (const auto& row : square) {
    for (const char* obs : row) {
      doc["observables"].push_back(observable_json(obs, kron(pauli(obs[0]), pauli(obs[1]))));
      doc["propositions"].push_back(proposition_json(std::string(obs) + "Up", obs, 1));
    }
  }
  doc["contexts"] = Json::array();
  for (int r = 0; r < 3; ++r) {
    doc["contexts"].push_back(
        {{"id", "R" + std::to_string(r + 1)}, {"generators", Json::array({square[r][0], square[r][1], square[r][2]})}});
  }
  for (int c = 0; c < 3; ++c) {
    doc["contexts"].push_back(
        {{"id", "C" + std::to_string(c + 1)}, {"generators", Json::array({square[0][c], square[1][c], square[2][c]})}});
  }
  const double r = std::numbers::sqrt2 / 2;
  Vector bell = Vector::Zero(4);
  bell(0) = r;
  bell(3) = r;
  doc["states"] = Json::array({pure_json("zerozero", basis_vector(4, 0)), pure_json("bell", bell),
                               density_json("mixed", Matrix::Identity(4, 4) * 0.25)});
  return doc;
}

}  // namespace detail

inline std::vector<std::string> presetNames() {
  return {"qubit-zx", "qubit-xyz", "qutrit-chain", "qutrit-mub", "mermin-square", "ks-demo"};
}

inline Json presetDocument(const std::string& name) {
  if (name == "qubit-zx") return detail::qubit_document(name, "ZX");
  if (name == "qubit-xyz") return detail::qubit_document(name, "ZXY");
  if (name == "qutrit-chain") return detail::qutrit_chain_document();
  if (name == "qutrit-mub") return detail::qutrit_mub_document();
  if (name == "mermin-square") return detail::mermin_document(name);
  if (name == "ks-demo") {
    Json doc = detail::mermin_document(name);
    doc["report"] = {{"show_contexts", true}, {"show_parity", true}};
    return doc;
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

inline Scenario preset(const std::string& name) { return scenarioFromJson(presetDocument(name)); }

}  // namespace toposq
