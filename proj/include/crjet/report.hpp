#pragma once

// JSON schemas for command-line reports and for parametrization systems
// written to disk and read back.

#include <string>
#include <vector>

#include "crjet/automorphism.hpp"
#include "crjet/hypersurface.hpp"
#include "crjet/json_io.hpp"
#include "crjet/parametrization.hpp"

namespace crjet {

inline json point_to_json(const Point& p) {
  json a = json::array();
  for (const auto& c : p) a.push_back(c.to_string());
  return a;
}

inline Point point_from_json(const json& j) {
  Point p;
  for (const auto& c : j) p.push_back(parse_constant(c.get<std::string>()));
  return p;
}

inline json series_tuple_to_json(const SeriesTuple<GaussQ>& t, const std::vector<std::string>& names) {
  json j = json::object();
  for (std::size_t i = 0; i < t.size(); ++i) j[names.at(i)] = to_string(t[i]);
  return j;
}

/// Original coordinates as functions of the normal ones, as pre/post-composition data for maps.
inline json coordinate_change_to_json(const NormalForm& nf) {
  json j = json::object();
  j["base_point"] = point_to_json(nf.base_point);
  j["original_in_normal"] = series_tuple_to_json(nf.change, nf.coords.holomorphic());
  j["exact"] = nf.polynomial;
  return j;
}

inline json normal_form_to_json(const NormalForm& nf) {
  json j = json::object();
  j["source"] = nf.source;
  j["n"] = nf.coords.n;
  j["D"] = nf.order();
  j["Q"] = to_string(nf.Q);
  j["Q_series"] = series_to_json(nf.Q);
  j["coordinate_change"] = coordinate_change_to_json(nf);
  auto res = normal_form_residual(nf.input, nf, nf.polynomial ? 0 : nf.order());
  j["defining_function_residual_zero"] = res.is_zero();
  return j;
}

inline json nondegeneracy_to_json(const NondegeneracyReport& r) {
  json j = json::object();
  if (r.k0)
    j["k0"] = *r.k0;
  else
    j["k0"] = nullptr;
  j["k_max"] = r.k_max;
  j["witness"] = r.witness;
  if (r.k0) j["witness_minor"] = r.witness_minor.to_string();
  return j;
}

/// Where a parametrization system came from; enough to rebuild it.
struct SystemMeta {
  std::string mode = "numeric";  // numeric | dual | symbolic
  int n = 1, k0 = 0, D = 0, jet_order = 0;
  std::vector<std::vector<int>> witness;
  std::vector<std::string> sources;  // source, target
  std::vector<Point> base_points;    // source, target
  std::vector<std::string> variables;
};

inline SystemMeta system_meta(const Pipeline& P, const std::string& mode) {
  SystemMeta m;
  m.mode = mode;
  m.n = P.coords().n;
  m.k0 = P.k0();
  m.D = P.D();
  m.jet_order = P.jet_order();
  m.witness = P.witness_report().witness;
  m.sources = {P.source().source, P.target().source};
  m.base_points = {P.source().base_point, P.target().base_point};
  return m;
}

inline json meta_to_json(const SystemMeta& m) {
  json j = json::object();
  j["mode"] = m.mode;
  j["n"] = m.n;
  j["k0"] = m.k0;
  j["D"] = m.D;
  j["jet_order"] = m.jet_order;
  j["witness"] = m.witness;
  j["sources"] = m.sources;
  json bp = json::array();
  for (const auto& p : m.base_points) bp.push_back(point_to_json(p));
  j["base_points"] = bp;
  j["variables"] = m.variables;
  return j;
}

inline SystemMeta meta_from_json(const json& j) {
  SystemMeta m;
  m.mode = j.at("mode").get<std::string>();
  if (m.mode != "numeric" && m.mode != "dual" && m.mode != "symbolic") throw parse_error("unknown system mode '" + m.mode + "'");
  m.n = j.at("n").get<int>();
  m.k0 = j.at("k0").get<int>();
  m.D = j.at("D").get<int>();
  m.jet_order = j.at("jet_order").get<int>();
  m.witness = j.at("witness").get<std::vector<std::vector<int>>>();
  m.sources = j.at("sources").get<std::vector<std::string>>();
  for (const auto& p : j.at("base_points")) m.base_points.push_back(point_from_json(p));
  m.variables = j.at("variables").get<std::vector<std::string>>();
  if (m.sources.size() != 2 || m.base_points.size() != 2) throw parse_error("system needs a source and a target");
  return m;
}

inline json equation_to_json(char family, const std::vector<int>& index) {
  json j = json::object();
  j["family"] = std::string(1, family);
  j["index"] = index;
  return j;
}

template <class R>
json param_system_to_json(const ParamSystem<R>& ps, const SystemMeta& meta) {
  json j = json::object();
  j["meta"] = meta_to_json(meta);
  json eqs = json::array();
  for (const auto& e : ps.equations) {
    json x = equation_to_json(e.family, e.index);
    json v = json::object();
    put_coefficient(v, e.value);
    x["value"] = v;
    eqs.push_back(x);
  }
  j["equations"] = eqs;
  json K = json::array();
  for (const auto& k : ps.K) K.push_back(series_to_json(k));
  j["K"] = K;
  return j;
}

inline json materialized_to_json(const MaterializedSystem& ms, SystemMeta meta) {
  meta.mode = "symbolic";
  meta.variables = ms.ctx->names;
  json j = json::object();
  j["meta"] = meta_to_json(meta);
  j["dropped_zero_equations"] = ms.dropped;
  json eqs = json::array();
  for (const auto& e : ms.equations) {
    json x = equation_to_json(e.family, e.index);
    x["poly"] = poly_to_json(e.value);
    eqs.push_back(x);
  }
  j["equations"] = eqs;
  json K = json::array();
  for (const auto& k : ms.K) K.push_back(series_to_json(k));
  j["K"] = K;
  return j;
}

/// Reads a symbolic system back; the variable list must match the canonical one.
inline MaterializedSystem materialized_from_json(const json& j) {
  SystemMeta meta = meta_from_json(j.at("meta"));
  if (meta.mode != "symbolic") throw parse_error("not a symbolic system");
  MaterializedSystem ms;
  ms.k0 = meta.k0;
  ms.D = meta.D;
  ms.jet_order = meta.jet_order;
  ms.ctx = jet_symbols(Coordinates::make(meta.n), meta.jet_order);
  if (ms.ctx->names != meta.variables) throw parse_error("system variables do not match the jet coordinates");
  ms.dropped = j.value("dropped_zero_equations", std::size_t{0});
  for (const auto& e : j.at("equations")) {
    std::string fam = e.at("family").get<std::string>();
    if (fam.size() != 1) throw parse_error("bad equation family");
    ms.equations.push_back({fam[0], e.at("index").get<std::vector<int>>(), poly_from_json(e.at("poly"), ms.ctx)});
  }
  CoefficientReader<Symbolic> read{ms.ctx};
  for (const auto& k : j.at("K")) ms.K.push_back(series_from_json<Symbolic>(k, read));
  return ms;
}

}  // namespace crjet
