#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crjet/linalg.hpp"
#include "crjet/series.hpp"

namespace crjet {

/// Partial derivative in variable v. The result lives on the truncation where
/// it is exact (degree lowered by the weight of v, cap of v lowered by one).
template <class R>
Series<R> differentiate(const Series<R>& f, std::size_t v) {
  auto sp = f.space().after_derivative(v);
  std::vector<typename Series<R>::Term> out;
  for (const auto& [x, c] : f.terms()) {
    if (!x[v]) continue;
    Exp y = x;
    y[v] = static_cast<std::uint8_t>(x[v] - 1);
    out.emplace_back(y, c * R(static_cast<long>(x[v])));
  }
  return Series<R>::from_terms(sp, std::move(out));
}

template <class R>
Series<R> differentiate(const Series<R>& f, const std::string& v) {
  return differentiate(f, f.space().index(v));
}

/// Partial derivative that keeps the space of f. Use when the caller tracks
/// precision separately; the top layer of the result is not meaningful.
template <class R>
Series<R> differentiate_in_place(const Series<R>& f, std::size_t v) {
  return differentiate(f, v).rebase(f.space_ptr());
}

/// Composition: every variable of f named in `assignment` is replaced by the
/// given series (all in `target`); other variables map by name into `target`.
template <class R>
Series<R> substitute(const Series<R>& f, const std::map<std::string, Series<R>>& assignment, const SpacePtr& target,
                     bool allow_constant_terms = false) {
  const Space& src = f.space();
  const std::size_t n = src.nvars();
  std::vector<Series<R>> value(n);
  std::vector<bool> used(n, false);
  for (const auto& [x, c] : f.terms())
    for (std::size_t v = 0; v < n; ++v)
      if (x[v]) used[v] = true;
  for (std::size_t v = 0; v < n; ++v) {
    auto it = assignment.find(src.name(v));
    if (it != assignment.end()) {
      if (!same_space(it->second.space_ptr(), target)) throw math_error("substitute: value not in target space");
      value[v] = it->second;
      if (used[v] && !allow_constant_terms && !detail::ring_is_zero(value[v].constant_term()))
        throw math_error("substitute: nonzero constant term for " + src.name(v));
    } else if (used[v]) {
      value[v] = Series<R>::variable(target, target->index(src.name(v)));
    }
  }
  // Lexicographic grouping gives a Horner-like evaluation with cached powers.
  std::vector<const typename Series<R>::Term*> order;
  for (const auto& t : f.terms()) order.push_back(&t);
  std::sort(order.begin(), order.end(), [n](const auto* a, const auto* b) {
    for (std::size_t v = 0; v < n; ++v)
      if (a->first[v] != b->first[v]) return a->first[v] < b->first[v];
    return false;
  });
  std::vector<std::vector<Series<R>>> powers(n);
  auto power = [&](std::size_t v, int e) -> const Series<R>& {
    auto& p = powers[v];
    if (p.empty()) p.push_back(Series<R>::constant(target, R(1)));
    while (static_cast<int>(p.size()) <= e) p.push_back(p.back() * value[v]);
    return p[e];
  };
  std::function<Series<R>(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t lo, std::size_t hi,
                                                                            std::size_t v) -> Series<R> {
    if (v == n) {
      R c(0);
      for (std::size_t i = lo; i < hi; ++i) c += order[i]->second;
      return Series<R>::constant(target, c);
    }
    Series<R> acc(target);
    std::size_t i = lo;
    while (i < hi) {
      int e = order[i]->first[v];
      std::size_t j = i;
      while (j < hi && order[j]->first[v] == e) ++j;
      Series<R> inner = rec(i, j, v + 1);
      acc += e == 0 ? inner : inner * power(v, e);
      i = j;
    }
    return acc;
  };
  if (order.empty()) return Series<R>(target);
  return rec(0, order.size(), 0);
}

/// Multiplicative inverse of a series whose constant term is a unit.
template <class R>
Series<R> invert_unit(const Series<R>& f) {
  R c0 = f.constant_term();
  if (!is_unit(c0)) throw math_error("invert_unit: constant term is not a unit");
  auto one = Series<R>::constant(f.space_ptr(), R(1));
  Series<R> x = Series<R>::constant(f.space_ptr(), inverse(c0));
  for (int it = 0; it <= 2 * f.space().degree() + 2; ++it) {
    Series<R> e = one - f * x;
    if (e.is_zero()) return x;
    x = x + x * e;
  }
  throw math_error("invert_unit: no convergence");
}

/// Solves G(x, u) = 0 for u(x) with u(0) = 0 by degree-graded fixed-point
/// iteration u <- u - L^{-1} G(x, u), L = D_u G(0, 0).
template <class R>
SeriesTuple<R> solve_implicit(const SeriesTuple<R>& G, const std::vector<std::string>& unknowns) {
  const std::size_t m = unknowns.size();
  if (G.size() != m) throw math_error("solve_implicit: need one equation per unknown");
  const SpacePtr& gs = G[0].space_ptr();
  for (const auto& g : G)
    if (!same_space(g.space_ptr(), gs)) throw math_error("solve_implicit: equations in different spaces");
  Matrix<R> L(m, std::vector<R>(m, R(0)));
  for (std::size_t i = 0; i < m; ++i) {
    if (!detail::ring_is_zero(G[i].constant_term())) throw math_error("solve_implicit: G(0,0) != 0");
    for (std::size_t j = 0; j < m; ++j) L[i][j] = G[i].coefficient(Exp::unit(gs->index(unknowns[j])));
  }
  Matrix<R> Linv;
  try {
    Linv = invert_matrix(L);
  } catch (const math_error&) {
    throw math_error("solve_implicit: singular Jacobian at the origin");
  }
  SpacePtr xs = gs->without(unknowns);
  SeriesTuple<R> u(m, Series<R>(xs));
  const int rounds = gs->degree() + 2;
  for (int r = 0; r <= rounds; ++r) {
    std::map<std::string, Series<R>> assign;
    for (std::size_t j = 0; j < m; ++j) assign.emplace(unknowns[j], u[j]);
    SeriesTuple<R> res;
    bool done = true;
    for (std::size_t i = 0; i < m; ++i) {
      res.push_back(substitute(G[i], assign, xs));
      done = done && res.back().is_zero();
    }
    if (done) return u;
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < m; ++i)
        if (!detail::ring_is_zero(Linv[j][i])) u[j] = u[j] - res[i].scaled(Linv[j][i]);
  }
  throw math_error("solve_implicit: no convergence");
}

template <class R>
struct WeierstrassResult {
  Series<R> quotient;
  std::vector<Series<R>> remainder;  // r_p(z'), p = 0..order-1, free of the division variable
  int order = 0;                     // z1-order of the divisor power
};

/// Divides F by B^j with respect to variable z1: F = Q B^j + sum_p r_p z1^p.
template <class R>
WeierstrassResult<R> weierstrass_divide(const Series<R>& F, const Series<R>& B, int j, std::size_t z1) {
  if (!same_space(F.space_ptr(), B.space_ptr())) throw math_error("weierstrass_divide: rebase required");
  const SpacePtr& sp = F.space_ptr();
  Series<R> P = Series<R>::constant(sp, R(1));
  for (int k = 0; k < j; ++k) P = P * B;
  int K = -1;
  for (const auto& [x, c] : P.terms()) {
    bool pure = true;
    for (std::size_t v = 0; v < sp->nvars() && pure; ++v)
      if (v != z1 && x[v]) pure = false;
    if (pure && (K < 0 || x[z1] < K)) K = x[z1];
  }
  if (K < 0) throw math_error("weierstrass_divide: divisor is not regular in the division variable");
  auto shift_down = [&](const Series<R>& s) {
    std::vector<typename Series<R>::Term> t;
    for (const auto& [x, c] : s.terms())
      if (x[z1] >= K) {
        Exp y = x;
        y[z1] = static_cast<std::uint8_t>(x[z1] - K);
        t.emplace_back(y, c);
      }
    return Series<R>::from_terms(sp, std::move(t));
  };
  auto low = [&](const Series<R>& s) { return s.filter([&](const Exp& x) { return x[z1] < K; }); };
  Series<R> V = shift_down(P), Plo = low(P);
  Series<R> Vinv = invert_unit(V);
  WeierstrassResult<R> out{Series<R>(sp), {}, K};
  Series<R> rem(sp), G = F;
  for (int it = 0; !G.is_zero(); ++it) {
    if (it > sp->degree() + 2) throw math_error("weierstrass_divide: no convergence");
    Series<R> q = shift_down(G) * Vinv;
    rem = rem + low(G);
    out.quotient = out.quotient + q;
    G = -(q * Plo);
  }
  for (int p = 0; p < K; ++p) out.remainder.push_back(rem.coefficient_of(z1, p));
  return out;
}

template <class R>
struct Regularization {
  std::vector<long> shift;  // z_k -> z_k + shift[k] * z_1 for the listed z variables (shift[0] == 0)
  Series<R> transformed;
};

/// Finds a linear change z_k -> z_k + c_k z_1 making B regular in z_1.
template <class R>
Regularization<R> regularize(const Series<R>& B, const std::vector<std::string>& zvars) {
  if (B.is_zero()) throw math_error("regularize: series vanishes at this truncation");
  const SpacePtr& sp = B.space_ptr();
  const std::size_t n = zvars.size();
  auto apply = [&](const std::vector<long>& c) {
    std::map<std::string, Series<R>> a;
    auto z1 = Series<R>::variable(sp, zvars[0]);
    for (std::size_t k = 1; k < n; ++k)
      if (c[k] != 0) a.emplace(zvars[k], Series<R>::variable(sp, zvars[k]) + z1.scaled(R(c[k])));
    return a.empty() ? B : substitute(B, a, sp);
  };
  auto regular = [&](const Series<R>& s) {
    std::size_t v1 = sp->index(zvars[0]);
    for (const auto& [x, c] : s.terms()) {
      bool pure = true;
      for (std::size_t k = 1; k < n; ++k)
        if (x[sp->index(zvars[k])]) pure = false;
      (void)v1;
      if (pure) return true;
    }
    return false;
  };
  // Candidates ordered by max-norm, entries 0, 1, -1, 2, -2, ...
  for (long radius = 0; radius <= 8; ++radius) {
    std::vector<long> c(n, 0);
    std::function<std::optional<Regularization<R>>(std::size_t, bool)> rec =
        [&](std::size_t k, bool hit) -> std::optional<Regularization<R>> {
      if (k == n) {
        if (!hit && radius > 0) return std::nullopt;
        auto t = apply(c);
        if (regular(t)) return Regularization<R>{c, t};
        return std::nullopt;
      }
      for (long a = 0; a <= radius; ++a)
        for (long s : {1L, -1L}) {
          if (a == 0 && s < 0) continue;
          c[k] = s * a;
          if (auto r = rec(k + 1, hit || a == radius)) return r;
        }
      c[k] = 0;
      return std::nullopt;
    };
    if (n == 1) {
      if (regular(B)) return Regularization<R>{{0}, B};
      break;
    }
    c[0] = 0;
    if (auto r = rec(1, false)) return *r;
  }
  throw math_error("regularize: no regularizing linear change found");
}

/// Coefficient-wise conjugation with variable relabeling old name -> new name.
template <class R>
Series<R> conjugate_series(const Series<R>& f, const std::map<std::string, std::string>& relabel) {
  std::vector<std::string> names = f.space().names();
  std::vector<std::string> seen;
  for (auto& nm : names) {
    auto it = relabel.find(nm);
    if (it != relabel.end()) nm = it->second;
    if (std::find(seen.begin(), seen.end(), nm) != seen.end())
      throw math_error("conjugate_series: relabeling is not a bijection");
    seen.push_back(nm);
  }
  auto sp = f.space().renamed(names);
  std::vector<typename Series<R>::Term> t;
  for (const auto& [x, c] : f.terms()) t.emplace_back(x, conj(c));
  return Series<R>::from_terms(sp, std::move(t));
}

/// Value of a polynomial series at a point given per variable of its space.
template <class R>
R evaluate_point(const Series<R>& f, const std::vector<R>& point) {
  if (point.size() != f.space().nvars()) throw math_error("evaluate_point: wrong number of coordinates");
  R acc(0);
  for (const auto& [x, c] : f.terms()) {
    R t = c;
    for (std::size_t v = 0; v < point.size(); ++v)
      for (int k = 0; k < x[v]; ++k) t = t * point[v];
    acc += t;
  }
  return acc;
}

}  // namespace crjet
