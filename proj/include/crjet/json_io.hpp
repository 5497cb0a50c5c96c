#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "crjet/dual.hpp"
#include "crjet/series.hpp"
#include "crjet/symbolic.hpp"

namespace crjet {

using json = nlohmann::ordered_json;

inline json rational_to_json(const mpq_class& q) { return json::array({q.get_num().get_str(), q.get_den().get_str()}); }

inline mpq_class rational_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("rational must be [num, den]");
  mpq_class q(mpz_class(j[0].get<std::string>()), mpz_class(j[1].get<std::string>()));
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
  q.canonicalize();
  return q;
}

inline void put_gauss(json& j, const GaussQ& c) {
  j["re"] = rational_to_json(c.re());
  j["im"] = rational_to_json(c.im());
}
inline GaussQ get_gauss(const json& j) { return GaussQ(rational_from_json(j.at("re")), rational_from_json(j.at("im"))); }

inline json gauss_to_json(const GaussQ& c) {
  json j = json::object();
  put_gauss(j, c);
  return j;
}

inline json poly_to_json(const Poly& p) {
  json j = json::object();
  json vars = json::array();
  if (p.context())
    for (const auto& n : p.context()->names) vars.push_back(n);
  j["vars"] = vars;
  json terms = json::array();
  for (const auto& [m, c] : p.terms()) {
    json t = json::object();
    std::vector<int> e(p.nvars(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) e[i] = m[i];
    t["exp"] = e;
    put_gauss(t, c);
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j;
}

inline Poly poly_from_json(const json& j, const SymbolContextPtr& ctx) {
  std::vector<std::string> vars = j.at("vars").get<std::vector<std::string>>();
  std::vector<Poly::Term> terms;
  for (const auto& t : j.at("terms")) {
    auto e = t.at("exp").get<std::vector<int>>();
    Poly::Mono m(ctx ? ctx->size() : 0, 0);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i]) continue;
      auto idx = ctx ? ctx->index_of(vars.at(i)) : std::nullopt;
      if (!idx) throw std::invalid_argument("unknown symbolic variable " + vars.at(i));
      m[*idx] = static_cast<std::uint16_t>(e[i]);
    }
    terms.emplace_back(std::move(m), get_gauss(t));
  }
  return Poly::from_terms(ctx, std::move(terms));
}

/// Coefficient codecs, one per ring.
inline void put_coefficient(json& t, const GaussQ& c) { put_gauss(t, c); }
inline void put_coefficient(json& t, const Dual& c) {
  put_gauss(t, c.value());
  json s = json::array();
  for (const auto& x : c.slots()) s.push_back(gauss_to_json(x));
  t["slots"] = s;
}
inline void put_coefficient(json& t, const Symbolic& c) {
  t["num"] = poly_to_json(c.num());
  t["den"] = poly_to_json(c.den());
}

template <class R>
struct CoefficientReader;

template <>
struct CoefficientReader<GaussQ> {
  GaussQ operator()(const json& t) const { return get_gauss(t); }
};
template <>
struct CoefficientReader<Dual> {
  Dual operator()(const json& t) const {
    std::vector<GaussQ> d;
    if (t.contains("slots"))
      for (const auto& x : t["slots"]) d.push_back(get_gauss(x));
    return Dual(get_gauss(t), d);
  }
};
template <>
struct CoefficientReader<Symbolic> {
  SymbolContextPtr ctx;
  Symbolic operator()(const json& t) const {
    return Symbolic(poly_from_json(t.at("num"), ctx), poly_from_json(t.at("den"), ctx));
  }
};

template <class R>
json series_to_json(const Series<R>& s) {
  const Space& sp = s.space();
  json j = json::object();
  j["vars"] = sp.names();
  j["degree"] = sp.degree();
  if (!sp.is_plain()) {
    j["weights"] = sp.weights();
    j["caps"] = sp.caps();
  }
  json terms = json::array();
  for (const auto& [x, c] : s.terms()) {
    json t = json::object();
    t["exp"] = x.to_vector(sp.nvars());
    put_coefficient(t, c);
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j;
}

template <class R>
Series<R> series_from_json(const json& j, CoefficientReader<R> read = {}) {
  auto names = j.at("vars").get<std::vector<std::string>>();
  int degree = j.at("degree").get<int>();
  SpacePtr sp;
  if (j.contains("weights"))
    sp = Space::make(names, j["weights"].get<std::vector<int>>(), degree, j.at("caps").get<std::vector<int>>());
  else
    sp = Space::make(names, degree);
  std::vector<typename Series<R>::Term> terms;
  for (const auto& t : j.at("terms")) {
    auto e = t.at("exp").get<std::vector<int>>();
    if (e.size() != names.size()) throw std::invalid_argument("exponent length mismatch");
    Exp x = Exp::from(e);
    if (!sp->contains(x)) throw std::invalid_argument("term beyond the truncation degree");
    terms.emplace_back(x, read(t));
  }
  return Series<R>::from_terms(sp, std::move(terms));
}

}  // namespace crjet
