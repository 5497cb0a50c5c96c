#pragma once

// Parametrization of 2k0-jets of maps (M, 0) -> (M', 0) by the finite system
// of c, d and e equations. Every step is written once over a coefficient ring:
// GaussQ evaluates at a concrete jet, Dual linearizes, Symbolic materializes.

#include <map>
#include <string>
#include <vector>

#include "crjet/hypersurface.hpp"
#include "crjet/jet.hpp"
#include "crjet/linalg.hpp"
#include "crjet/series.hpp"
#include "crjet/series_ops.hpp"

namespace crjet {

/// Psi_j(z) = d^j/dw^j H(z, 0), j = 0..J, each an (n+1)-tuple of series in z.
template <class R>
struct PsiFamily {
  std::vector<SeriesTuple<R>> psi;
};

/// Phi(z, chi) = H(z, Q(z, chi, 0)) on the weighted (z, chi) space.
template <class R>
struct PhiMap {
  SeriesTuple<R> phi;
};

/// Data of the meromorphic inverse chi_1 = theta(z, w) = A psi(z, w / A^2).
struct ThetaData {
  int m = 0;                           // order of A
  Series<GaussQ> A, B;                 // A = Q_{chi_1}(z, 0, 0), B = A^2
  std::vector<Series<GaussQ>> coeffs;  // A_j, j = 0.., with Q(z, (chi_1, 0), 0) = sum A_j chi_1^j
  std::vector<Series<GaussQ>> C;       // C_j = A_j A^{j-2}, j >= 2 (C[0], C[1] unused)
  Series<GaussQ> psi;                  // in (z.., t)
  std::vector<long> shift;             // regularizing change z_k -> z_k + shift[k] z_1
};

/// F(z, t) = Phi(z, (A psi(z, t), 0)) and its t-coefficients F_j(z).
template <class R>
struct FMap {
  SeriesTuple<R> F;
  std::vector<SeriesTuple<R>> Fj;
};

template <class R>
struct Equation {
  char family = 'c';
  std::vector<int> index;
  R value;
};

template <class R>
struct ParamSystem {
  int k0 = 0, D = 0, jet_order = 0;
  std::vector<Equation<R>> equations;
  SeriesTuple<R> K;  // in (z.., w), degree D
  PsiFamily<R> psi;
  PhiMap<R> phi;
  FMap<R> fmap;
};

class Pipeline {
 public:
  /// D is the truncation degree of K and of the e-equations.
  Pipeline(NormalForm source, NormalForm target, int D) : src_(std::move(source)), tgt_(std::move(target)), D_(D) {
    C_ = src_.coords;
    if (!(tgt_.coords == C_)) throw precondition_error("source and target live in different dimensions");
    const int kmax = std::max(1, std::min(D_ - 1, 32));
    auto rs = nondegeneracy(src_, std::min(kmax, src_.order() - 1));
    auto rt = nondegeneracy(tgt_, std::min(kmax, tgt_.order() - 1));
    if (!rs.k0 || !rt.k0) throw precondition_error("hypersurface is not finitely nondegenerate up to the given order");
    if (*rs.k0 != *rt.k0)
      throw precondition_error("nondegeneracy orders differ (" + std::to_string(*rs.k0) + " vs " +
                               std::to_string(*rt.k0) + "), so there are no maps");
    k0_ = *rt.k0;
    witness_report_ = rt;
    for (const auto& a : rt.witness) witness_.push_back(Exp::from(a));
    if (D_ < 2 * k0_ + 2)
      throw precondition_error("order D = " + std::to_string(D_) + " is below 2*k0 + 2 = " +
                               std::to_string(2 * k0_ + 2));
    prepare_theta();
  }

  const Coordinates& coords() const { return C_; }
  int k0() const { return k0_; }
  int D() const { return D_; }
  int jet_order() const { return 2 * k0_; }
  const std::vector<Exp>& witness() const { return witness_; }
  const NondegeneracyReport& witness_report() const { return witness_report_; }
  const NormalForm& source() const { return src_; }
  const NormalForm& target() const { return tgt_; }
  const ThetaData& theta() const { return theta_; }
  /// Weighted degree of the Step 2 chart.
  int step2_degree() const { return 2 * theta_.m * D_ + theta_.m * k0_; }

  /// Step 1. hbar is the conjugated jet (order >= k0 + J); Psi_j is exact to z-degree Zc.
  template <class R>
  PsiFamily<R> psi(const JetGroupElement<R>& hbar, int J, int Zc) const;
  /// Step 2 from Psi_0..Psi_k0 (exact to z-degree D + k0).
  template <class R>
  PhiMap<R> phi(const PsiFamily<R>& ps) const;
  /// Step 4, first half: F and its t-coefficients.
  template <class R>
  FMap<R> fmap(const PhiMap<R>& ph) const;
  /// Steps 1-5 at the jet lambda in G^{2k0}_0.
  template <class R>
  ParamSystem<R> system(const JetGroupElement<R>& lambda) const;
  /// The map T with lambda = T(conj lambda) on jets of maps; needs D >= 3k0.
  template <class R>
  JetGroupElement<R> T(const JetGroupElement<R>& conj_lambda) const;

 private:
  NormalForm src_, tgt_;
  int D_;
  Coordinates C_;
  int k0_ = 0;
  std::vector<Exp> witness_;
  NondegeneracyReport witness_report_;
  ThetaData theta_;
  Series<GaussQ> q_src_, qbar_src_, q_tgt_;     // at the Step 2 degree
  std::map<Exp, Series<GaussQ>, bool (*)(const Exp&, const Exp&)> qbar_tgt_d_{grlex_less};  // conj(Q')_{chi^alpha}

  void prepare_theta();

  std::map<std::string, std::string> hol_to_anti() const {
    std::map<std::string, std::string> m;
    for (int j = 0; j < C_.n; ++j) m[C_.z[j]] = C_.chi[j];
    m[C_.w] = C_.tau;
    return m;
  }
  std::vector<std::size_t> indices(const SpacePtr& sp, const std::vector<std::string>& names) const {
    std::vector<std::size_t> r;
    for (const auto& s : names) r.push_back(sp->index(s));
    return r;
  }
  std::vector<std::string> unknowns() const {
    std::vector<std::string> u;
    for (int k = 0; k < C_.n; ++k) u.push_back("u" + std::to_string(k + 1));
    return u;
  }
};

/// Renames variables without touching the terms.
template <class R>
Series<R> relabel(const Series<R>& s, const std::map<std::string, std::string>& m) {
  auto names = s.space().names();
  for (auto& nm : names)
    if (auto it = m.find(nm); it != m.end()) nm = it->second;
  return Series<R>::from_terms(s.space().renamed(names), s.terms());
}

/// Restriction of g - Q'(f, conj(f)(chi, tau), conj(g)(chi, tau)) to tau = conj(Q)(chi, z, w),
/// as a series in (z.., w, chi..) of degree D. It vanishes iff H = (f, g) maps M into M' mod D.
/// qbar_src is conj(Q) of the source in (z.., w, chi..), q_tgt is Q' in (z.., chi.., tau).
template <class R>
Series<R> tangency_residual(const SeriesTuple<R>& H, const Coordinates& C, const Series<GaussQ>& qbar_src,
                            const Series<GaussQ>& q_tgt, int D) {
  using S = Series<R>;
  const int n = C.n;
  auto zwc = Space::make(C.zwchi_vars(), D);
  auto hs = Space::make(C.holomorphic(), D);
  S qbar = lift<R>(qbar_src.rebase(zwc));
  std::map<std::string, std::string> h2a;
  for (int j = 0; j < n; ++j) h2a[C.z[j]] = C.chi[j];
  h2a[C.w] = C.tau;
  auto anti = Space::make(C.antiholomorphic(), D);
  auto bar_on_M = [&](const S& h) {
    S b = relabel(h.rebase(hs).map_coefficients([](const R& x) { return crjet::conj(x); }), h2a).rebase(anti);
    return substitute(b, {{C.tau, qbar}}, zwc);
  };
  std::map<std::string, S> qa;
  for (int j = 0; j < n; ++j) {
    qa.emplace(C.chi[j], bar_on_M(H[j]));
    qa.emplace(C.z[j], H[j].rebase(hs).rebase(zwc));
  }
  qa.emplace(C.tau, bar_on_M(H[n]));
  return H[n].rebase(hs).rebase(zwc) - substitute(lift<R>(q_tgt.rebase(Space::make(C.q_vars(), D))), qa, zwc);
}

inline void Pipeline::prepare_theta() {
  const int n = C_.n;
  auto lowest_a = [&](const Series<GaussQ>& q) {
    auto qs = q.space_ptr();
    Series<GaussQ> a(Space::make(C_.z, qs->degree()));
    std::vector<Series<GaussQ>::Term> t;
    for (const auto& [x, c] : q.terms()) {
      bool ok = x[qs->index(C_.chi[0])] == 1 && x[qs->index(C_.tau)] == 0;
      for (int j = 1; j < n && ok; ++j) ok = x[qs->index(C_.chi[j])] == 0;
      if (!ok) continue;
      Exp y = x;
      y[qs->index(C_.chi[0])] = 0;
      t.emplace_back(y, c);
    }
    return Series<GaussQ>::from_terms(qs, std::move(t)).rebase(Space::make(C_.z, qs->degree()));
  };
  Series<GaussQ> a0 = lowest_a(src_.Q);
  if (a0.is_zero()) throw precondition_error("Q_{chi_1}(z, 0, 0) vanishes to the working order");
  const int m = a0.order();
  theta_.m = m;
  const int E2 = std::max(step2_degree(), 2 * m * D_ + D_);
  q_src_ = src_.Q_at(E2);
  q_tgt_ = tgt_.Q_at(E2);
  auto zwc = Space::make(C_.zwchi_vars(), E2);
  qbar_src_ = conjugate_series(q_src_, C_.swap()).rebase(zwc);
  Series<GaussQ> qbar_tgt = conjugate_series(q_tgt_, C_.swap()).rebase(zwc);
  for (const auto& a : multi_indices(n, k0_)) {
    Series<GaussQ> d = qbar_tgt;
    for (int j = 0; j < n; ++j)
      for (int e = 0; e < a[j]; ++e) d = differentiate(d, C_.chi[j]);
    qbar_tgt_d_.emplace(a, d);
  }
  qbar_tgt_d_.emplace(Exp{}, qbar_tgt);

  // Expansion of Q(z, (chi_1, 0), 0) in chi_1 over z-series of degree 2mD.
  const int Zd = 2 * m * D_;
  auto zs = Space::make(C_.z, Zd);
  auto qs = q_src_.space_ptr();
  std::size_t c1 = qs->index(C_.chi[0]);
  std::vector<std::vector<Series<GaussQ>::Term>> parts(D_ + 1);
  for (const auto& [x, c] : q_src_.terms()) {
    bool ok = x[qs->index(C_.tau)] == 0 && x[c1] <= D_;
    for (int j = 1; j < n && ok; ++j) ok = x[qs->index(C_.chi[j])] == 0;
    if (!ok) continue;
    Exp y = x;
    y[c1] = 0;
    parts[x[c1]].emplace_back(y, c);
  }
  for (auto& p : parts) theta_.coeffs.push_back(Series<GaussQ>::from_terms(qs, std::move(p)).rebase(zs));
  theta_.A = theta_.coeffs[1];
  theta_.B = theta_.A * theta_.A;

  // psi(z, t): u + sum_{j>=2} C_j u^j = t on the box z <= 2mD, t <= D.
  std::vector<std::string> names = C_.z;
  names.push_back("t");
  names.push_back("u_");
  std::vector<int> w(names.size(), 1), caps(names.size(), Zd);
  caps[n] = D_;
  caps[n + 1] = D_;
  auto ztu = Space::make(names, w, Zd + 2 * D_, caps);
  Series<GaussQ> u = Series<GaussQ>::variable(ztu, "u_");
  Series<GaussQ> G = u - Series<GaussQ>::variable(ztu, "t");
  Series<GaussQ> A_big = theta_.A.rebase(ztu);
  Series<GaussQ> upow = u;
  Series<GaussQ> apow = Series<GaussQ>::constant(ztu, GaussQ(1));  // A^{j-2}
  theta_.C.assign(2, Series<GaussQ>(zs));
  for (int j = 2; j <= D_; ++j) {
    upow = upow * u;
    Series<GaussQ> Cj = theta_.coeffs[j].rebase(ztu) * apow;
    theta_.C.push_back(Cj.rebase(zs));
    G += Cj * upow;
    apow = apow * A_big;
  }
  theta_.psi = solve_implicit(SeriesTuple<GaussQ>{G}, {"u_"})[0];

  theta_.shift.assign(n, 0);
  if (n > 1) theta_.shift = regularize(theta_.B, C_.z).shift;
}

template <class R>
PsiFamily<R> Pipeline::psi(const JetGroupElement<R>& hbar, int J, int Zc) const {
  using S = Series<R>;
  const int n = C_.n, k0 = k0_;
  if (hbar.order() < k0 + J) throw math_error("psi: jet order too small");
  const int d1 = Zc + J + k0;
  if (d1 > q_src_.space().degree()) throw math_error("psi: normal form computed to too low a degree");
  std::vector<int> ones(2 * n + 1, 1), caps(2 * n + 1, -1);
  for (int j = 0; j < n; ++j) caps[j] = Zc;
  caps[n] = J;
  auto level = [&](int l) {
    std::vector<int> c = caps;
    for (int j = 0; j < n; ++j) c[n + 1 + j] = k0 - l;
    return Space::make(C_.zwchi_vars(), ones, d1 - l, c);
  };
  auto S1 = level(0);
  S qbar = lift<R>(qbar_src_.rebase(S1));

  // conj(H)(chi, tau) restricted to tau = conj(Q)(chi, z, w).
  auto h2a = hol_to_anti();
  SeriesTuple<R> bar, at0;
  auto anti = Space::make(C_.antiholomorphic(), hbar.order());
  std::vector<std::string> sg_names = C_.holomorphic();
  for (const auto& u : unknowns()) sg_names.push_back(u);
  std::vector<int> sg_caps(sg_names.size(), -1);
  for (int j = 0; j < n; ++j) sg_caps[j] = Zc;
  sg_caps[n] = J;
  auto SG = Space::make(sg_names, std::vector<int>(sg_names.size(), 1), Zc + J, sg_caps);
  std::vector<std::size_t> chi_in_anti = indices(anti, C_.chi);
  for (const auto& comp : hbar.map()) {
    S c = relabel(comp, h2a).rebase(anti);
    bar.push_back(substitute(c, {{C_.tau, qbar}}, S1));
    // conj(H)(0, w) for the right-hand side of Q' and conj(Q')_{chi^alpha}.
    at0.push_back(relabel(c.vanish(chi_in_anti), {{C_.tau, C_.w}}).rebase(SG));
  }
  SeriesTuple<R> Fbar(bar.begin(), bar.begin() + n);
  std::function<S(std::size_t, const S&)> derive = [&](std::size_t j, const S& f) {
    return differentiate(f, C_.chi[j]);
  };
  std::function<SpacePtr(int)> lev = level;
  auto phi = reflection_identities<R>(Fbar, bar[n], derive, lev, witness_);

  // Solve conj(Q')_{chi^alpha_j}(conj f(0,w), u, Q'(u, conj f(0,w), conj g(0,w))) = R_j(z, w) for u = f(z, w).
  std::map<std::string, S> qa;
  auto us = unknowns();
  for (int j = 0; j < n; ++j) {
    qa.emplace(C_.z[j], S::variable(SG, us[j]));
    qa.emplace(C_.chi[j], at0[j]);
  }
  qa.emplace(C_.tau, at0[n]);
  S gw = substitute(lift<R>(q_tgt_.rebase(Space::make(C_.q_vars(), Zc + J))), qa, SG);
  std::map<std::string, S> qb;
  for (int j = 0; j < n; ++j) {
    qb.emplace(C_.chi[j], at0[j]);
    qb.emplace(C_.z[j], S::variable(SG, us[j]));
  }
  qb.emplace(C_.w, gw);
  SeriesTuple<R> G;
  std::vector<std::size_t> chi_idx;
  for (int j = 0; j < n; ++j) chi_idx.push_back(S1->index(C_.chi[j]));
  for (const auto& a : witness_) {
    const auto& d = qbar_tgt_d_.at(a);
    S lhs = substitute(lift<R>(d.rebase(Space::make(C_.zwchi_vars(), Zc + J))), qb, SG);
    const S& rhs = phi.at(a);
    S r0 = rhs.vanish(indices(rhs.space_ptr(), C_.chi));
    G.push_back(lhs - r0.rebase(SG));
  }
  SeriesTuple<R> f = solve_implicit(G, us);
  std::map<std::string, S> back;
  for (int j = 0; j < n; ++j) back.emplace(us[j], f[j]);
  SeriesTuple<R> H = f;
  H.push_back(substitute(gw, back, f[0].space_ptr()));

  PsiFamily<R> out;
  auto zs = Space::make(C_.z, Zc);
  std::size_t wi = f[0].space().index(C_.w);
  GaussQ fact(1);
  for (int j = 0; j <= J; ++j) {
    if (j > 0) fact = fact * GaussQ(j);
    SeriesTuple<R> row;
    for (const auto& h : H) row.push_back(h.coefficient_of(wi, j).scaled(R(fact)).rebase(zs));
    out.psi.push_back(row);
  }
  return out;
}

template <class R>
PhiMap<R> Pipeline::phi(const PsiFamily<R>& ps) const {
  using S = Series<R>;
  const int n = C_.n, k0 = k0_, m = theta_.m, E2 = step2_degree();
  if (static_cast<int>(ps.psi.size()) <= k0) throw math_error("phi: need Psi_0..Psi_k0");
  auto qv = C_.q_vars();
  std::vector<int> wts(qv.size(), m), caps(qv.size(), -1);
  for (int j = 0; j < n; ++j) {
    wts[j] = 1;
    caps[n + j] = D_ + k0;
  }
  caps[2 * n] = k0;
  auto level = [&](int l) {
    std::vector<int> c = caps;
    for (int j = 0; j < n; ++j) c[n + j] = D_ + k0 - l;
    c[2 * n] = k0 - l;
    return Space::make(qv, wts, E2 - l * m, c);
  };
  auto S2 = level(0), L1 = level(1);
  S Q = lift<R>(q_src_.rebase(S2));
  S qtau_inv = invert_unit(differentiate(Q, C_.tau).rebase(L1));
  std::vector<S> coef;
  for (int j = 0; j < n; ++j) coef.push_back(differentiate(Q, C_.chi[j]).rebase(L1) * qtau_inv);
  std::function<S(std::size_t, const S&)> derive = [&](std::size_t j, const S& f) {
    int l = (E2 - f.space().degree()) / m;
    auto tgt = level(l + 1);
    return differentiate(f, C_.chi[j]).rebase(tgt) - coef[j].rebase(tgt) * differentiate(f, C_.tau).rebase(tgt);
  };

  // conj(H)(chi, tau) to order k0 in tau from conj(Psi_j)(chi).
  std::map<std::string, std::string> z2chi;
  for (int j = 0; j < n; ++j) z2chi[C_.z[j]] = C_.chi[j];
  SeriesTuple<R> bar(n + 1, S(S2));
  S taupow = S::constant(S2, R(GaussQ(1)));
  GaussQ fact(1);
  for (int j = 0; j <= k0; ++j) {
    if (j > 0) {
      fact = fact * GaussQ(j);
      taupow = taupow * S::variable(S2, C_.tau);
    }
    for (int c = 0; c <= n; ++c) {
      S cj = relabel(ps.psi[j][c].map_coefficients([](const R& x) { return crjet::conj(x); }), z2chi);
      bar[c] += cj.rebase(S2) * taupow.scaled(R(inverse(fact)));
    }
  }
  SeriesTuple<R> Fbar(bar.begin(), bar.begin() + n);
  std::function<SpacePtr(int)> lev = level;
  auto refl = reflection_identities<R>(Fbar, bar[n], derive, lev, witness_);

  // At tau = 0 solve for u = f(z, Q(z, chi, 0)).
  auto us = unknowns();
  std::vector<std::string> names = C_.z;
  names.insert(names.end(), C_.chi.begin(), C_.chi.end());
  for (const auto& u : us) names.push_back(u);
  std::vector<int> w2(names.size(), 1), c2(names.size(), -1);
  for (int j = 0; j < n; ++j) {
    w2[n + j] = m;
    c2[n + j] = D_;
  }
  auto SG = Space::make(names, w2, 2 * m * D_, c2);
  std::size_t tau_idx = S2->index(C_.tau);
  SeriesTuple<R> at0;
  for (const auto& b : bar) at0.push_back(b.vanish({tau_idx}).rebase(SG));
  std::map<std::string, S> qa;
  for (int j = 0; j < n; ++j) {
    qa.emplace(C_.z[j], S::variable(SG, us[j]));
    qa.emplace(C_.chi[j], at0[j]);
  }
  qa.emplace(C_.tau, at0[n]);
  S gw = substitute(lift<R>(q_tgt_), qa, SG);
  std::map<std::string, S> qb;
  for (int j = 0; j < n; ++j) {
    qb.emplace(C_.chi[j], at0[j]);
    qb.emplace(C_.z[j], S::variable(SG, us[j]));
  }
  qb.emplace(C_.w, gw);
  SeriesTuple<R> G;
  for (const auto& a : witness_) {
    S lhs = substitute(lift<R>(qbar_tgt_d_.at(a)), qb, SG);
    const S& rhs = refl.at(a);
    G.push_back(lhs - rhs.vanish({rhs.space().index(C_.tau)}).rebase(SG));
  }
  SeriesTuple<R> f = solve_implicit(G, us);
  std::map<std::string, S> back;
  for (int j = 0; j < n; ++j) back.emplace(us[j], f[j]);
  PhiMap<R> out;
  out.phi = f;
  out.phi.push_back(substitute(gw, back, f[0].space_ptr()));
  return out;
}

template <class R>
FMap<R> Pipeline::fmap(const PhiMap<R>& ph) const {
  using S = Series<R>;
  const int n = C_.n;
  auto zt = theta_.psi.space_ptr();
  S chi1 = lift<R>(theta_.A.rebase(zt) * theta_.psi);
  std::map<std::string, S> a;
  a.emplace(C_.chi[0], chi1);
  for (int j = 1; j < n; ++j) a.emplace(C_.chi[j], S(zt));
  FMap<R> out;
  for (const auto& p : ph.phi) out.F.push_back(substitute(p, a, zt));
  std::size_t ti = zt->index("t");
  auto zs = Space::make(C_.z, 2 * theta_.m * D_);
  for (int j = 0; j <= D_; ++j) {
    SeriesTuple<R> row;
    for (const auto& f : out.F) row.push_back(f.coefficient_of(ti, j).rebase(zs));
    out.Fj.push_back(row);
  }
  return out;
}

template <class R>
ParamSystem<R> Pipeline::system(const JetGroupElement<R>& lambda) const {
  using S = Series<R>;
  const int n = C_.n, k0 = k0_, m = theta_.m;
  if (lambda.order() != 2 * k0) throw math_error("system: the jet must have order 2k0");
  if (!lambda.in_G0()) throw math_error("system: the jet is not in G0");
  ParamSystem<R> ps;
  ps.k0 = k0;
  ps.D = D_;
  ps.jet_order = 2 * k0;
  ps.psi = psi(lambda.conj(), k0, D_ + k0);
  ps.phi = phi(ps.psi);
  ps.fmap = fmap(ps.phi);

  // Step 4: F_j = Q_j B^j + remainder, c-equations from the remainders.
  auto zs = Space::make(C_.z, 2 * m * D_);
  S B = lift<R>(theta_.B.rebase(zs));
  bool shifted = false;
  for (long s : theta_.shift) shifted = shifted || s != 0;
  std::map<std::string, S> fwd, bwd;
  if (shifted) {
    for (int k = 1; k < n; ++k) {
      S z1 = S::variable(zs, C_.z[0]);
      fwd.emplace(C_.z[k], S::variable(zs, C_.z[k]) + z1.scaled(R(GaussQ(theta_.shift[k]))));
      bwd.emplace(C_.z[k], S::variable(zs, C_.z[k]) - z1.scaled(R(GaussQ(theta_.shift[k]))));
    }
    B = substitute(B, fwd, zs);
  }
  auto ks = Space::make(C_.holomorphic(), D_);
  SeriesTuple<R> K(n + 1, S(ks));
  std::size_t z1 = zs->index(C_.z[0]);
  for (int j = 0; j <= D_; ++j) {
    S wj = S::monomial(ks, Exp::unit(ks->index(C_.w), j), R(GaussQ(1)));
    for (int c = 0; c <= n; ++c) {
      S Fj = ps.fmap.Fj[j][c];
      if (shifted) Fj = substitute(Fj, fwd, zs);
      auto wd = weierstrass_divide(Fj, B, j, z1);
      for (int p = 0; p < wd.order; ++p)
        for (const auto& [x, v] : wd.remainder[p].terms()) {
          std::vector<int> idx{j, c, p};
          for (int k = 1; k < n; ++k) idx.push_back(x[zs->index(C_.z[k])]);
          ps.equations.push_back({'c', idx, v});
        }
      S qj = wd.quotient;
      if (shifted) qj = substitute(qj, bwd, zs);
      K[c] += qj.rebase(ks) * wj;
    }
  }
  ps.K = K;

  // Step 5: d = jet of K minus lambda; e = tangency of K.
  JetGroupElement<R> kj(C_, 2 * k0, K);
  auto idx = jet_indices(C_, 2 * k0, true);
  auto kv = kj.coordinates(true), lv = lambda.coordinates(true);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::vector<int> ix{idx[i].component};
    auto e = idx[i].exp.to_vector(C_.N());
    ix.insert(ix.end(), e.begin(), e.end());
    ps.equations.push_back({'d', ix, kv[i] - lv[i]});
  }
  auto zwc = Space::make(C_.zwchi_vars(), D_);
  S e = tangency_residual(K, C_, qbar_src_, q_tgt_, D_);
  for (const auto& [x, v] : e.terms()) ps.equations.push_back({'e', x.to_vector(zwc->nvars()), v});
  return ps;
}

template <class R>
JetGroupElement<R> Pipeline::T(const JetGroupElement<R>& conj_lambda) const {
  const int k0 = k0_;
  if (D_ < 3 * k0) throw precondition_error("the T map needs D >= 3k0");
  // The 3k0-jet of H follows from its 2k0-jet through K.
  ParamSystem<R> ps = system(conj_lambda.conj());
  JetGroupElement<R> h3(C_, 3 * k0, ps.K);
  PsiFamily<R> p = psi(h3.conj(), 2 * k0, 2 * k0);
  auto sp = Space::make(C_.holomorphic(), 2 * k0);
  SeriesTuple<R> map(C_.N(), Series<R>(sp));
  GaussQ fact(1);
  for (int j = 0; j <= 2 * k0; ++j) {
    if (j > 0) fact = fact * GaussQ(j);
    Series<R> wj = Series<R>::monomial(sp, Exp::unit(sp->index(C_.w), j), R(inverse(fact)));
    for (int c = 0; c < C_.N(); ++c) map[c] += p.psi[j][c].rebase(sp) * wj;
  }
  return JetGroupElement<R>(C_, 2 * k0, map);
}

}  // namespace crjet
