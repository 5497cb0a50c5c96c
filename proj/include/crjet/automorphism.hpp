#pragma once

// Verification of candidate maps, evaluation of the jet system, reconstruction,
// and the dimension of the isotropy algebra by linearization at the identity.

#include <optional>
#include <string>
#include <vector>

#include "crjet/dual.hpp"
#include "crjet/hypersurface.hpp"
#include "crjet/jet.hpp"
#include "crjet/json_io.hpp"
#include "crjet/parametrization.hpp"
#include "crjet/symbolic.hpp"

namespace crjet {

struct VerificationReport {
  int D = 0;
  std::optional<int> residual_degree;  // empty: residual zero mod D
  bool invertible = false;
  std::optional<int> k0;  // of the target, if nondegenerate to order D - 1
  std::optional<JetGroupElement<GaussQ>> jet;
  Series<GaussQ> residual;

  bool verified() const { return !residual_degree && invertible; }
};

inline SeriesTuple<GaussQ> as_map(const SeriesTuple<GaussQ>& H, const Coordinates& C, int D) {
  if (static_cast<int>(H.size()) != C.N())
    throw precondition_error("map needs " + std::to_string(C.N()) + " components");
  auto hs = Space::make(C.holomorphic(), D);
  SeriesTuple<GaussQ> out;
  for (const auto& h : H) {
    for (const auto& nm : h.space().names())
      if (!hs->find(nm)) throw precondition_error("map uses variable '" + nm + "' outside " + C.w + " and the z's");
    out.push_back(h.rebase(hs));
    if (!out.back().constant_term().is_zero()) throw precondition_error("map does not fix the origin");
  }
  return out;
}

inline VerificationReport verify_map(const SeriesTuple<GaussQ>& H, const NormalForm& src, const NormalForm& tgt, int D) {
  const Coordinates& C = src.coords;
  if (!(tgt.coords == C)) throw precondition_error("source and target live in different dimensions");
  VerificationReport rep;
  rep.D = D;
  SeriesTuple<GaussQ> h = as_map(H, C, D);
  auto zwc = Space::make(C.zwchi_vars(), D);
  rep.residual = tangency_residual(h, C, conjugate_series(src.Q_at(D), C.swap()).rebase(zwc), tgt.Q_at(D), D);
  if (!rep.residual.is_zero()) rep.residual_degree = rep.residual.order();
  rep.invertible = is_unit(determinant(JetGroupElement<GaussQ>(C, 1, h).linear_part()));
  if (tgt.order() >= 2) {
    auto nd = nondegeneracy(tgt, tgt.order() - 1);
    rep.k0 = nd.k0;
  }
  if (rep.verified() && rep.k0 && 2 * *rep.k0 <= D) rep.jet = eta(h, C, 2 * *rep.k0);
  return rep;
}

struct ResidualReport {
  int D = 0, jet_order = 0;
  std::size_t equations = 0;
  std::vector<Equation<GaussQ>> nonzero;

  bool zero() const { return nonzero.empty(); }
};

template <class R>
ResidualReport residual_report(const ParamSystem<R>& ps) {
  ResidualReport r;
  r.D = ps.D;
  r.jet_order = ps.jet_order;
  r.equations = ps.equations.size();
  for (const auto& e : ps.equations)
    if (!is_zero(e.value)) r.nonzero.push_back(e);
  return r;
}

/// Runs the system at a numeric jet. A singular step means the jet lies outside the chart.
inline ParamSystem<GaussQ> evaluate_system(const Pipeline& P, const JetGroupElement<GaussQ>& lambda) {
  if (!(lambda.coords() == P.coords())) throw precondition_error("jet has the wrong dimension");
  if (lambda.order() < P.jet_order()) throw precondition_error("jet order below 2k0");
  auto l = lambda.truncated(P.jet_order());
  if (!l.in_G0()) throw precondition_error("jet is not in G0 (the w-component has pure z terms)");
  try {
    return P.system(l);
  } catch (const math_error& e) {
    throw precondition_error(std::string("jet lies outside the chart of the system: ") + e.what());
  }
}

/// K at the jet, i.e. the unique map with that jet, if the system vanishes there.
inline SeriesTuple<GaussQ> reconstruct(const Pipeline& P, const JetGroupElement<GaussQ>& lambda) {
  auto ps = evaluate_system(P, lambda);
  auto rr = residual_report(ps);
  if (!rr.zero())
    throw math_error("system residual is nonzero at the jet (" + std::to_string(rr.nonzero.size()) + " equations)");
  return ps.K;
}

// Symbolic materialization -------------------------------------------------

/// Symbol names lambda_{key} / mu_{key} and their conjugates for the G0 jet coordinates.
inline SymbolContextPtr jet_symbols(const Coordinates& C, int order) {
  auto ctx = std::make_shared<SymbolContext>();
  for (const auto& ix : jet_indices(C, order, true)) {
    std::string base = ix.component == C.n ? "mu" : (C.n == 1 ? "lambda" : "lambda" + std::to_string(ix.component + 1));
    std::string key = monomial_key(C, ix.exp);
    for (auto& ch : key)
      if (ch == ' ') ch = ',';
    std::size_t v = ctx->names.size();
    ctx->names.push_back(base + "[" + key + "]");
    ctx->names.push_back(base + "bar[" + key + "]");
    ctx->partner.push_back(v + 1);
    ctx->partner.push_back(v);
  }
  return ctx;
}

/// The system as polynomials in the jet variables and their conjugates.
struct MaterializedSystem {
  int k0 = 0, D = 0, jet_order = 0;
  SymbolContextPtr ctx;
  std::vector<Equation<Poly>> equations;  // identically zero equations are dropped
  std::size_t dropped = 0;
  SeriesTuple<Symbolic> K;
};

inline MaterializedSystem materialize(const Pipeline& P) {
  const Coordinates& C = P.coords();
  MaterializedSystem ms;
  ms.k0 = P.k0();
  ms.D = P.D();
  ms.jet_order = P.jet_order();
  ms.ctx = jet_symbols(C, ms.jet_order);
  std::vector<Symbolic> vals;
  for (std::size_t k = 0; k < ms.ctx->size() / 2; ++k) vals.push_back(Symbolic::variable(ms.ctx, 2 * k));
  auto lam = JetGroupElement<Symbolic>::from_coordinates(C, ms.jet_order, vals, true);
  auto ps = P.system(lam);
  // Evaluation at the identity jet, used to check that denominators stay away from zero.
  auto idv = JetGroupElement<GaussQ>::identity(C, ms.jet_order).coordinates(true);
  auto at_identity = [&](std::size_t v) { return (v % 2 ? conj(idv[v / 2]) : idv[v / 2]); };
  for (auto& e : ps.equations) {
    if (e.value.is_zero()) {
      ++ms.dropped;
      continue;
    }
    GaussQ d0 = e.value.den().evaluate<GaussQ>(at_identity);
    if (d0.is_zero()) throw math_error("denominator vanishes at the identity jet");
    // Scaled by 1/den(identity) so that first-order terms at the identity agree with the fraction's.
    ms.equations.push_back({e.family, e.index, e.value.num().scaled(inverse(d0))});
  }
  ms.K = ps.K;
  return ms;
}

inline std::function<GaussQ(std::size_t)> jet_values(const JetGroupElement<GaussQ>& lambda) {
  auto vals = lambda.coordinates(true);
  return [vals](std::size_t v) { return (v % 2 ? conj(vals[v / 2]) : vals[v / 2]); };
}

inline ResidualReport evaluate_system(const MaterializedSystem& ms, const JetGroupElement<GaussQ>& lambda) {
  ResidualReport r;
  r.D = ms.D;
  r.jet_order = ms.jet_order;
  r.equations = ms.equations.size();
  auto l = lambda.truncated(ms.jet_order);
  if (!l.in_G0()) throw precondition_error("jet is not in G0 (the w-component has pure z terms)");
  auto val = jet_values(l);
  for (const auto& e : ms.equations) {
    GaussQ v = e.value.evaluate<GaussQ>(val);
    if (!v.is_zero()) r.nonzero.push_back({e.family, e.index, v});
  }
  return r;
}

inline SeriesTuple<GaussQ> reconstruct(const MaterializedSystem& ms, const JetGroupElement<GaussQ>& lambda) {
  auto rr = evaluate_system(ms, lambda);
  if (!rr.zero())
    throw math_error("system residual is nonzero at the jet (" + std::to_string(rr.nonzero.size()) + " equations)");
  auto val = jet_values(lambda.truncated(ms.jet_order));
  SeriesTuple<GaussQ> out;
  for (const auto& k : ms.K) {
    std::vector<Series<GaussQ>::Term> t;
    for (const auto& [x, c] : k.terms()) t.emplace_back(x, c.evaluate<GaussQ>(val));
    out.push_back(Series<GaussQ>::from_terms(k.space_ptr(), std::move(t)));
  }
  return out;
}

// Linearization ------------------------------------------------------------

struct LieDimReport {
  int dim = 0;
  std::size_t rank = 0;
  std::size_t real_coordinates = 0;
  std::size_t equations = 0;
  int k0 = 0, D = 0, jet_order = 0;
};

/// Real Jacobian of the system at the identity jet. Column 2k perturbs jet
/// coordinate k in the real direction, column 2k+1 in the imaginary direction;
/// rows 2i and 2i+1 are the real and imaginary parts of equation i.
struct Linearization {
  Matrix<GaussQ> rows;
  std::vector<std::pair<char, std::vector<int>>> labels;
};

/// The system over dual numbers seeded at a G0 jet: slot 2k moves jet coordinate k
/// in the real direction, slot 2k+1 in the imaginary direction.
inline ParamSystem<Dual> dual_system(const Pipeline& P, const JetGroupElement<GaussQ>& at) {
  const Coordinates& C = P.coords();
  const int ord = P.jet_order();
  if (!(at.coords() == C) || at.order() < ord) throw precondition_error("base jet has the wrong shape");
  auto base = at.truncated(ord);
  if (!base.in_G0()) throw precondition_error("base jet is not in G0");
  auto idv = base.coordinates(true);
  const std::size_t K = idv.size(), ns = 2 * K;
  std::vector<Dual> vals;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<GaussQ> d(ns);
    d[2 * k] = GaussQ(1);
    d[2 * k + 1] = GaussQ(mpq_class(0), mpq_class(1));
    vals.emplace_back(idv[k], std::move(d));
  }
  try {
    return P.system(JetGroupElement<Dual>::from_coordinates(C, ord, vals, true));
  } catch (const math_error& e) {
    throw precondition_error(std::string("jet lies outside the chart of the system: ") + e.what());
  }
}

inline Linearization linearization(const Pipeline& P) {
  const std::size_t ns = 2 * jet_indices(P.coords(), P.jet_order(), true).size();
  auto ps = dual_system(P, JetGroupElement<GaussQ>::identity(P.coords(), P.jet_order()));
  Linearization L;
  for (const auto& e : ps.equations) {
    if (!e.value.value().is_zero()) throw math_error("the identity jet does not solve the system");
    std::vector<GaussQ> re(ns), im(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      GaussQ x = e.value.slot_value(s);
      re[s] = GaussQ(x.re());
      im[s] = GaussQ(x.im());
    }
    L.rows.push_back(std::move(re));
    L.rows.push_back(std::move(im));
    L.labels.emplace_back(e.family, e.index);
  }
  return L;
}

inline LieDimReport lie_dim(const Pipeline& P) {
  const NormalForm& s = P.source();
  const NormalForm& t = P.target();
  if (!(s.Q.rebase(t.Q.space_ptr()) == t.Q) || s.base_point != t.base_point)
    throw precondition_error("lie-dim needs the same hypersurface and point on both sides");
  LieDimReport r;
  r.k0 = P.k0();
  r.D = P.D();
  r.jet_order = P.jet_order();
  auto L = linearization(P);
  r.equations = L.labels.size();
  r.real_coordinates = 2 * jet_indices(P.coords(), r.jet_order, true).size();
  r.rank = L.rows.empty() ? 0 : matrix_rank(L.rows);
  r.dim = static_cast<int>(r.real_coordinates - r.rank);
  return r;
}

// Formal maps ----------------------------------------------------------------

struct FormalCheckReport {
  VerificationReport verification;
  std::optional<ResidualReport> residuals;
  SeriesTuple<GaussQ> reconstructed;
  bool agrees = false;

  bool accepted() const { return verification.verified() && residuals && residuals->zero() && agrees; }
};

/// A formal map verified mod D is recovered from its 2k0-jet; agreement with the input is checked.
inline FormalCheckReport formal_to_convergent(const SeriesTuple<GaussQ>& H, const Pipeline& P) {
  FormalCheckReport r;
  r.verification = verify_map(H, P.source(), P.target(), P.D());
  SeriesTuple<GaussQ> h = as_map(H, P.coords(), P.D());
  auto lam = eta(h, P.coords(), P.jet_order());
  if (!lam.in_G0()) return r;
  auto ps = evaluate_system(P, lam);
  r.residuals = residual_report(ps);
  r.reconstructed = ps.K;
  r.agrees = true;
  for (std::size_t i = 0; i < h.size(); ++i) r.agrees = r.agrees && ps.K[i] == h[i].rebase(ps.K[i].space_ptr());
  return r;
}

// Sweeps ---------------------------------------------------------------------

struct SweepEntry {
  Point point;
  std::optional<LieDimReport> report;
  std::optional<int> k0;
  std::string error;
};

/// Smallest k0 found with a probe order, or empty when degenerate up to it.
inline std::optional<int> probe_k0(const DefiningFunction& df, const Point& p, int probe_order) {
  auto nf = normal_coordinates(parse_hypersurface(df.source, probe_order, df.coords.n), p);
  return nondegeneracy(nf, probe_order - 1).k0;
}

/// Default order for a hypersurface at a point: 2k0 + 4.
inline int default_order(const DefiningFunction& df, const Point& p, int probe_order = 12) {
  auto k0 = probe_k0(df, p, probe_order);
  if (!k0) throw precondition_error("hypersurface is not finitely nondegenerate up to order " + std::to_string(probe_order - 1));
  return 2 * *k0 + 4;
}

/// lie_dim at each point; D = 0 picks the default order per point.
inline std::vector<SweepEntry> lie_dim_sweep(const std::string& hypersurface, const std::vector<Point>& points, int D = 0) {
  std::vector<SweepEntry> out;
  for (const auto& p : points) {
    SweepEntry e;
    e.point = p;
    try {
      auto probe = parse_hypersurface(hypersurface, 12);
      int d = D > 0 ? D : default_order(probe, p);
      auto nf = normal_coordinates(parse_hypersurface(hypersurface, d, probe.coords.n), p);
      Pipeline P(nf, nf, d);
      e.k0 = P.k0();
      e.report = lie_dim(P);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

// JSON -----------------------------------------------------------------------

inline json equation_index_json(const std::vector<int>& ix) {
  json a = json::array();
  for (int i : ix) a.push_back(i);
  return a;
}

inline json residual_report_to_json(const ResidualReport& r) {
  json j;
  j["D"] = r.D;
  j["jet_order"] = r.jet_order;
  j["equations"] = r.equations;
  j["zero"] = r.zero();
  json nz = json::array();
  for (const auto& e : r.nonzero) {
    json x;
    x["family"] = std::string(1, e.family);
    x["index"] = equation_index_json(e.index);
    x["value"] = gauss_to_json(e.value);
    nz.push_back(x);
  }
  j["nonzero"] = nz;
  return j;
}

inline json verification_to_json(const VerificationReport& r) {
  json j;
  j["verified"] = r.verified();
  j["D"] = r.D;
  if (r.residual_degree)
    j["tangency_residual_degree"] = *r.residual_degree;
  else
    j["tangency_residual_degree"] = "zero mod D";
  j["invertible"] = r.invertible;
  if (r.k0) j["k0"] = *r.k0;
  if (r.jet) j["jet"] = jet_to_json(*r.jet);
  return j;
}

inline json lie_dim_to_json(const LieDimReport& r) {
  json j;
  j["dim_hol0"] = r.dim;
  j["rank"] = r.rank;
  j["real_jet_coordinates"] = r.real_coordinates;
  j["equations"] = r.equations;
  j["k0"] = r.k0;
  j["D"] = r.D;
  j["jet_order"] = r.jet_order;
  return j;
}

}  // namespace crjet
