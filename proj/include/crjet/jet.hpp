#pragma once

// Jets of biholomorphisms fixing the origin, and the reflection identities
// obtained by differentiating the tangency identity along CR vector fields.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crjet/hypersurface.hpp"
#include "crjet/json_io.hpp"
#include "crjet/linalg.hpp"
#include "crjet/series.hpp"
#include "crjet/series_ops.hpp"

namespace crjet {

template <class R>
Series<R> lift(const Series<GaussQ>& s) {
  std::vector<typename Series<R>::Term> t;
  t.reserve(s.size());
  for (const auto& [x, c] : s.terms()) t.emplace_back(x, R(c));
  return Series<R>::from_terms(s.space_ptr(), std::move(t));
}

/// One jet coordinate: d^exp H_component (0), component n meaning w.
struct JetIndex {
  int component = 0;
  Exp exp;
  bool operator==(const JetIndex& o) const { return component == o.component && exp == o.exp; }
};

/// Jet coordinates in a fixed order: component-major, exponents in grlex
/// order over (z.., w). With g0_only the pure-z coordinates of the w component
/// are left out.
inline std::vector<JetIndex> jet_indices(const Coordinates& C, int order, bool g0_only) {
  auto sp = Space::make(C.holomorphic(), order);
  std::vector<Exp> exps;
  std::vector<int> a(C.N(), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == C.N() - 1) {
      a[pos] = left;
      exps.push_back(Exp::from(a));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      a[pos] = e;
      rec(pos + 1, left - e);
    }
  };
  for (int k = 1; k <= order; ++k) rec(0, k);
  std::stable_sort(exps.begin(), exps.end(), grlex_less);
  std::vector<JetIndex> out;
  for (int c = 0; c < C.N(); ++c)
    for (const auto& x : exps) {
      if (g0_only && c == C.n && x[C.n] == 0) continue;
      out.push_back({c, x});
    }
  return out;
}

/// "z^2 w^1" (or "z1^1 z2^0 w^1").
inline std::string monomial_key(const Coordinates& C, const Exp& x) {
  std::string s;
  auto names = C.holomorphic();
  for (int i = 0; i < C.N(); ++i) {
    if (i) s += ' ';
    s += names[i] + "^" + std::to_string(x[i]);
  }
  return s;
}

inline Exp parse_monomial_key(const Coordinates& C, const std::string& key) {
  auto names = C.holomorphic();
  std::vector<int> e(C.N(), 0);
  std::size_t pos = 0;
  while (pos < key.size()) {
    while (pos < key.size() && key[pos] == ' ') ++pos;
    if (pos >= key.size()) break;
    std::size_t caret = key.find('^', pos);
    if (caret == std::string::npos) throw parse_error("bad monomial key '" + key + "'");
    std::string nm = key.substr(pos, caret - pos);
    std::size_t end = key.find(' ', caret);
    if (end == std::string::npos) end = key.size();
    auto it = std::find(names.begin(), names.end(), nm);
    if (it == names.end()) throw parse_error("unknown variable in monomial key '" + key + "'");
    e[it - names.begin()] = std::stoi(key.substr(caret + 1, end - caret - 1));
    pos = end;
  }
  return Exp::from(e);
}

/// A k-jet at 0 of a holomorphic map fixing 0, stored as its Taylor polynomial.
/// Coordinates are derivatives: lambda for the z components, mu for w.
template <class R>
class JetGroupElement {
 public:
  JetGroupElement() = default;
  JetGroupElement(Coordinates C, int order, SeriesTuple<R> map) : coords_(std::move(C)), order_(order) {
    space_ = Space::make(coords_.holomorphic(), order_);
    if (static_cast<int>(map.size()) != coords_.N()) throw math_error("jet: wrong number of components");
    for (auto& m : map) {
      m = m.rebase(space_);
      if (!detail::ring_is_zero(m.constant_term())) throw math_error("jet: map does not fix the origin");
    }
    map_ = std::move(map);
  }

  static JetGroupElement identity(const Coordinates& C, int order) {
    auto sp = Space::make(C.holomorphic(), order);
    SeriesTuple<R> m;
    for (const auto& v : C.holomorphic()) m.push_back(Series<R>::variable(sp, v));
    return JetGroupElement(C, order, m);
  }

  /// Builds a jet from derivative coordinates listed as in jet_indices(C, order, g0_only).
  static JetGroupElement from_coordinates(const Coordinates& C, int order, const std::vector<R>& values,
                                          bool g0_only) {
    auto idx = jet_indices(C, order, g0_only);
    if (idx.size() != values.size()) throw math_error("jet: wrong number of coordinates");
    auto sp = Space::make(C.holomorphic(), order);
    std::vector<std::vector<typename Series<R>::Term>> terms(C.N());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (detail::ring_is_zero(values[k])) continue;
      terms[idx[k].component].emplace_back(idx[k].exp, values[k] * R(inverse(factorial(idx[k].exp, C.N()))));
    }
    SeriesTuple<R> m;
    for (auto& t : terms) m.push_back(Series<R>::from_terms(sp, std::move(t)));
    return JetGroupElement(C, order, m);
  }

  static GaussQ factorial(const Exp& x, int nv) {
    mpz_class f = 1;
    for (int i = 0; i < nv; ++i)
      for (int k = 2; k <= x[i]; ++k) f *= k;
    return GaussQ(mpq_class(f));
  }

  const Coordinates& coords() const { return coords_; }
  int order() const { return order_; }
  const SpacePtr& space_ptr() const { return space_; }
  const SeriesTuple<R>& map() const { return map_; }

  R coordinate(const JetIndex& j) const {
    return map_[j.component].coefficient(j.exp) * R(factorial(j.exp, coords_.N()));
  }
  std::vector<R> coordinates(bool g0_only) const {
    std::vector<R> v;
    for (const auto& j : jet_indices(coords_, order_, g0_only)) v.push_back(coordinate(j));
    return v;
  }

  /// mu_{z^alpha} = 0 for all alpha: the w component has no pure z terms.
  bool in_G0() const {
    for (const auto& [x, c] : map_[coords_.n].terms())
      if (x[coords_.n] == 0) return false;
    return true;
  }

  JetGroupElement conj() const {
    SeriesTuple<R> m;
    for (const auto& s : map_) m.push_back(s.map_coefficients([](const R& c) { return crjet::conj(c); }));
    return JetGroupElement(coords_, order_, m);
  }

  JetGroupElement truncated(int k) const { return JetGroupElement(coords_, k, map_); }

  /// Jacobian at the origin.
  Matrix<R> linear_part() const {
    const int N = coords_.N();
    Matrix<R> J(N, std::vector<R>(N, R(0)));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) J[i][j] = map_[i].coefficient(Exp::unit(j));
    return J;
  }

  friend bool operator==(const JetGroupElement& a, const JetGroupElement& b) {
    return a.order_ == b.order_ && a.coords_ == b.coords_ && a.map_ == b.map_;
  }
  friend bool operator!=(const JetGroupElement& a, const JetGroupElement& b) { return !(a == b); }

 private:
  Coordinates coords_;
  int order_ = 0;
  SpacePtr space_;
  SeriesTuple<R> map_;
};

/// a . b = j_k(a o b).
template <class R>
JetGroupElement<R> jet_compose(const JetGroupElement<R>& a, const JetGroupElement<R>& b) {
  if (a.order() != b.order()) throw math_error("jet_compose: order mismatch");
  if (!(a.coords() == b.coords())) throw math_error("jet_compose: dimension mismatch");
  const auto& C = a.coords();
  std::map<std::string, Series<R>> assign;
  auto hol = C.holomorphic();
  for (int i = 0; i < C.N(); ++i) assign.emplace(hol[i], b.map()[i]);
  SeriesTuple<R> m;
  for (const auto& s : a.map()) m.push_back(substitute(s, assign, a.space_ptr()));
  return JetGroupElement<R>(C, a.order(), m);
}

template <class R>
JetGroupElement<R> jet_invert(const JetGroupElement<R>& a) {
  const auto& C = a.coords();
  const int N = C.N();
  auto hol = C.holomorphic();
  std::vector<std::string> names = hol, unknowns;
  for (int i = 0; i < N; ++i) unknowns.push_back("y_" + std::to_string(i));
  names.insert(names.end(), unknowns.begin(), unknowns.end());
  auto sp = Space::make(names, a.order());
  std::map<std::string, Series<R>> assign;
  for (int i = 0; i < N; ++i) assign.emplace(hol[i], Series<R>::variable(sp, unknowns[i]));
  SeriesTuple<R> G;
  for (int i = 0; i < N; ++i) G.push_back(substitute(a.map()[i], assign, sp) - Series<R>::variable(sp, hol[i]));
  SeriesTuple<R> inv;
  try {
    inv = solve_implicit(G, unknowns);
  } catch (const math_error&) {
    throw math_error("jet_invert: singular linear part");
  }
  return JetGroupElement<R>(C, a.order(), inv);
}

/// The k-jet of a map H fixing 0 with invertible Jacobian.
template <class R>
JetGroupElement<R> eta(const SeriesTuple<R>& H, const Coordinates& C, int order) {
  JetGroupElement<R> j(C, order, H);
  auto L = j.linear_part();
  if (!is_unit(determinant(L))) throw math_error("eta: the map is not invertible at 0");
  return j;
}

inline json jet_to_json(const JetGroupElement<GaussQ>& j) {
  const auto& C = j.coords();
  json out = json::object();
  out["order"] = j.order();
  json lambda = json::object(), mu = json::object();
  for (const auto& ix : jet_indices(C, j.order(), false)) {
    json v = gauss_to_json(j.coordinate(ix));
    std::string key = monomial_key(C, ix.exp);
    if (ix.component == C.n)
      mu[key] = v;
    else if (C.n == 1)
      lambda[key] = v;
    else
      lambda[C.z[ix.component]][key] = v;
  }
  out["lambda"] = lambda;
  out["mu"] = mu;
  return out;
}

inline JetGroupElement<GaussQ> jet_from_json(const json& j, const Coordinates& C) {
  int order = j.at("order").get<int>();
  auto sp = Space::make(C.holomorphic(), order);
  std::vector<std::vector<Series<GaussQ>::Term>> terms(C.N());
  auto read = [&](int comp, const json& obj) {
    for (const auto& [key, v] : obj.items()) {
      Exp x = parse_monomial_key(C, key);
      if (x.total() < 1 || x.total() > order) throw parse_error("jet coordinate '" + key + "' out of range");
      GaussQ c = get_gauss(v);
      if (!is_zero(c))
        terms[comp].emplace_back(x, c * inverse(JetGroupElement<GaussQ>::factorial(x, C.N())));
    }
  };
  if (C.n == 1) {
    read(0, j.at("lambda"));
  } else {
    for (int i = 0; i < C.n; ++i)
      if (j.at("lambda").contains(C.z[i])) read(i, j["lambda"][C.z[i]]);
  }
  read(C.n, j.at("mu"));
  SeriesTuple<GaussQ> m;
  for (auto& t : terms) m.push_back(Series<GaussQ>::from_terms(sp, std::move(t)));
  return JetGroupElement<GaussQ>(C, order, m);
}

/// f(z, w, chi, tau) restricted to the complexification: tau = conj(Q)(chi, z, w).
/// On the result the CR fields act as plain chi-derivatives.
template <class R>
Series<R> restrict_to_M(const Series<R>& f, const NormalForm& nf) {
  const auto& C = nf.coords;
  auto target = Space::make(C.zwchi_vars(), std::min(f.space().degree(), nf.order()));
  auto qbar = lift<R>(nf.conj_Q()).rebase(target);
  return substitute(f, {{C.tau, qbar}}, target);
}

/// Inverse of a square matrix of series whose value at 0 is invertible.
template <class R>
Matrix<Series<R>> invert_series_matrix(Matrix<Series<R>> a) {
  const std::size_t n = a.size();
  if (n == 1) return {{invert_unit(a[0][0])}};
  const SpacePtr& sp = a[0][0].space_ptr();
  Matrix<Series<R>> inv(n, std::vector<Series<R>>(n, Series<R>(sp)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = Series<R>::constant(sp, R(1));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && !is_unit(a[piv][col].constant_term())) ++piv;
    if (piv == n) throw math_error("series matrix is singular at the origin");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Series<R> p = invert_unit(a[col][col]);
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] = a[col][k] * p;
      inv[col][k] = inv[col][k] * p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      Series<R> f = a[r][col];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] = a[r][k] - f * a[col][k];
        inv[r][k] = inv[r][k] - f * inv[col][k];
      }
    }
  }
  return inv;
}

/// Reflection identities. Given the conjugated map components Fbar (n of them)
/// and Gbar as functions on a chart of the complexification, and derivations
/// L_1..L_n annihilating the holomorphic side, returns phi_alpha with
///   phi_0 = Gbar,  phi_{alpha + e_k} = sum_j (J^{-1})_{kj} L_j phi_alpha,  J_{jk} = L_j Fbar_k,
/// so that phi_alpha = conj(Q')_{chi^alpha}(Fbar, f, g) whenever the map is tangent.
/// `level(l)` is the space in which l-fold derivatives are exact.
template <class R>
std::map<Exp, Series<R>, bool (*)(const Exp&, const Exp&)> reflection_identities(
    const SeriesTuple<R>& Fbar, const Series<R>& Gbar,
    const std::function<Series<R>(std::size_t, const Series<R>&)>& derive,
    const std::function<SpacePtr(int)>& level, const std::vector<Exp>& wanted) {
  const std::size_t n = Fbar.size();
  std::map<Exp, Series<R>, bool (*)(const Exp&, const Exp&)> phi(grlex_less);
  phi.emplace(Exp{}, Gbar.rebase(level(0)));
  int top = 0;
  for (const auto& a : wanted) top = std::max(top, a.total());
  if (top == 0) return phi;
  auto l1 = level(1);
  Matrix<Series<R>> J(n, std::vector<Series<R>>(n, Series<R>(l1)));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) J[j][k] = derive(j, Fbar[k].rebase(level(0))).rebase(l1);
  Matrix<Series<R>> Jinv = invert_series_matrix(J);
  // Every wanted index is reached from 0 by raising its first nonzero entry last.
  std::function<const Series<R>&(const Exp&)> get = [&](const Exp& a) -> const Series<R>& {
    auto it = phi.find(a);
    if (it != phi.end()) return it->second;
    std::size_t k = 0;
    while (a[k] == 0) ++k;
    Exp prev = a;
    prev.e[k] -= 1;
    const Series<R>& p = get(prev);
    auto sp = level(a.total());
    Series<R> acc(sp);
    for (std::size_t j = 0; j < n; ++j) acc += Jinv[k][j].rebase(sp) * derive(j, p).rebase(sp);
    return phi.emplace(a, std::move(acc)).first->second;
  };
  for (const auto& a : wanted) get(a);
  return phi;
}

}  // namespace crjet
