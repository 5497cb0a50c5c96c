#pragma once

// Randomized property suites shared by the unit tests and the acceptance binary.
// Every suite runs at least kPropertyCases cases and records failures instead of aborting.

#include <random>
#include <string>
#include <utility>

#include "crjet/crjet.hpp"
#include "support.hpp"

namespace crjet::properties {

using test_support::random_gauss;
using test_support::random_numeric;
using test_support::without_constant;
using S = Series<GaussQ>;
using Jet = JetGroupElement<GaussQ>;

constexpr int kPropertyCases = 1000;

struct Outcome {
  explicit Outcome(std::string n) : name(std::move(n)) {}

  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) first_failure = what + " (case " + std::to_string(cases) + ")";
  }
  bool passed() const { return cases >= kPropertyCases && failures == 0; }
};

namespace detail {

inline GaussQ q(long a, long b = 1) { return GaussQ(mpq_class(a, b)); }
inline GaussQ gi(long re, long im) { return GaussQ(mpq_class(re), mpq_class(im)); }

/// Random polynomial map fixing 0 with an invertible linear part; g0 keeps pure z terms out of w.
inline SeriesTuple<GaussQ> random_map(std::mt19937_64& rng, const SpacePtr& sp, bool g0) {
  SeriesTuple<GaussQ> h;
  const std::size_t N = sp->nvars();
  for (;;) {
    h.clear();
    for (std::size_t i = 0; i < N; ++i) h.push_back(without_constant(random_numeric(rng, sp, 6)));
    if (g0) h[N - 1] = h[N - 1].filter([&](const Exp& x) { return x[N - 1] > 0; });
    Matrix<GaussQ> L(N, std::vector<GaussQ>(N));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) L[i][j] = h[i].coefficient(Exp::unit(j));
    if (!is_zero(determinant(L))) return h;
  }
}

/// a o b computed exactly in a space large enough to hold the composite.
inline SeriesTuple<GaussQ> compose_exact(const SeriesTuple<GaussQ>& a, const SeriesTuple<GaussQ>& b, const SpacePtr& sp) {
  std::map<std::string, S> m;
  for (std::size_t i = 0; i < b.size(); ++i) m.emplace(sp->name(i), b[i].rebase(sp));
  SeriesTuple<GaussQ> r;
  for (const auto& s : a) r.push_back(substitute(s.rebase(sp), m, sp));
  return r;
}

inline NormalForm at_origin(const std::string& eq, int D) {
  auto df = parse_hypersurface(eq, D);
  return normal_coordinates(df, Point(df.coords.N(), GaussQ(0)));
}

}  // namespace detail

/// Distributivity, associativity, commutativity and identities over GaussQ and Dual coefficients.
inline Outcome series_ring_axioms(unsigned seed = 11) {
  Outcome o("series ring axioms");
  std::mt19937_64 rng(seed);
  auto sp = Space::make({"z", "w", "x"}, 5);
  auto ds = Space::make({"z", "w"}, 4);
  auto dual_coeff = [&] {
    std::vector<GaussQ> d(3);
    for (auto& x : d) x = random_gauss(rng);
    return Dual(random_gauss(rng), d);
  };
  for (; o.cases < kPropertyCases; ++o.cases) {
    auto a = random_numeric(rng, sp, 6), b = random_numeric(rng, sp, 6), c = random_numeric(rng, sp, 6);
    o.check(a * (b + c) == a * b + a * c, "distributivity");
    o.check((a * b) * c == a * (b * c), "associativity");
    o.check(a * b == b * a, "commutativity");
    o.check(a + (b + c) == (a + b) + c, "additive associativity");
    o.check((a - a).is_zero(), "additive inverse");
    o.check(a * S::constant(sp, detail::q(1)) == a, "unit");
    auto da = test_support::random_series<Dual>(rng, ds, 4, dual_coeff);
    auto db = test_support::random_series<Dual>(rng, ds, 4, dual_coeff);
    auto dc = test_support::random_series<Dual>(rng, ds, 4, dual_coeff);
    o.check(da * (db + dc) == da * db + da * dc, "dual distributivity");
    o.check((da * db) * dc == da * (db * dc), "dual associativity");
  }
  return o;
}

/// Substituting the implicit solution back into the system gives zero.
inline Outcome solve_implicit_back_substitution(unsigned seed = 41) {
  Outcome o("solve_implicit back-substitution");
  std::mt19937_64 rng(seed);
  auto sp = Space::make({"x", "y", "u", "v"}, 5);
  auto u = S::variable(sp, "u"), v = S::variable(sp, "v");
  auto quad = [](const S& s) { return s.filter([](const Exp& e) { return e.total() >= 2; }); };
  for (; o.cases < kPropertyCases; ++o.cases) {
    auto n1 = random_numeric(rng, sp, 5), n2 = random_numeric(rng, sp, 5);
    auto g1 = u + v.scaled(random_gauss(rng)) + quad(n1) + without_constant(random_numeric(rng, sp, 2)).vanish({2, 3});
    auto g2 = v + quad(n2) + without_constant(random_numeric(rng, sp, 2)).vanish({2, 3});
    auto sol = solve_implicit<GaussQ>({g1, g2}, {"u", "v"});
    auto xs = sol[0].space_ptr();
    o.check(substitute(g1, {{"u", sol[0]}, {"v", sol[1]}}, xs).is_zero(), "first equation");
    o.check(substitute(g2, {{"u", sol[0]}, {"v", sol[1]}}, xs).is_zero(), "second equation");
    o.check(sol[0].constant_term().is_zero() && sol[1].constant_term().is_zero(), "solution vanishes at 0");
  }
  return o;
}

/// F = q B^j + sum r_p z1^p with r_p free of z1, and the split is deterministic.
inline Outcome weierstrass_reconstruction(unsigned seed = 51) {
  Outcome o("Weierstrass reconstruction and uniqueness");
  std::mt19937_64 rng(seed);
  auto sp = Space::make({"z1", "z2"}, 7);
  auto z1 = S::variable(sp, "z1");
  std::uniform_int_distribution<int> pw(1, 2);
  for (; o.cases < kPropertyCases; ++o.cases) {
    auto F = random_numeric(rng, sp, 8);
    auto B = z1 * z1 * S::constant(sp, random_gauss(rng, 3, false)) +
             without_constant(random_numeric(rng, sp, 3)).filter([](const Exp& e) { return e[1] > 0; });
    int j = pw(rng);
    auto r1 = weierstrass_divide(F, B, j, 0), r2 = weierstrass_divide(F, B, j, 0);
    S Bj = S::constant(sp, detail::q(1));
    for (int i = 0; i < j; ++i) Bj = Bj * B;
    S rebuilt = r1.quotient * Bj, z1p = S::constant(sp, detail::q(1));
    bool free = true;
    for (const auto& r : r1.remainder) {
      free = free && r.max_degree_in(0) == 0;
      rebuilt = rebuilt + r * z1p;
      z1p = z1p * z1;
    }
    o.check(free, "remainder free of z1");
    o.check(rebuilt == F, "reconstruction");
    bool same = r1.quotient == r2.quotient && r1.remainder.size() == r2.remainder.size();
    for (std::size_t p = 0; same && p < r1.remainder.size(); ++p) same = r1.remainder[p] == r2.remainder[p];
    o.check(same, "uniqueness");
  }
  return o;
}

/// eta_k(H2 o H1) = eta_k(H2) o eta_k(H1).
inline Outcome eta_homomorphism(unsigned seed = 7) {
  Outcome o("eta homomorphism");
  std::mt19937_64 rng(seed);
  auto C = Coordinates::make(1);
  auto big = Space::make({"z", "w"}, 6), small = Space::make({"z", "w"}, 3);
  for (; o.cases < kPropertyCases; ++o.cases) {
    auto h1 = detail::random_map(rng, small, false), h2 = detail::random_map(rng, small, false);
    int order = 1 + o.cases % 3;
    o.check(eta(detail::compose_exact(h2, h1, big), C, order) == jet_compose(eta(h2, C, order), eta(h1, C, order)),
            "eta(h2 o h1)");
  }
  return o;
}

/// G0 is closed under composition, inversion and conjugation; conjugation is an involution.
inline Outcome g0_closure(unsigned seed = 9) {
  Outcome o("G0 closure under composition and conjugation");
  std::mt19937_64 rng(seed);
  auto C = Coordinates::make(1);
  auto sp = Space::make({"z", "w"}, 3);
  for (; o.cases < kPropertyCases; ++o.cases) {
    Jet a(C, 3, detail::random_map(rng, sp, true)), b(C, 3, detail::random_map(rng, sp, true));
    o.check(a.in_G0() && b.in_G0(), "generated in G0");
    o.check(jet_compose(a, b).in_G0(), "composition");
    o.check(jet_invert(a).in_G0(), "inversion");
    o.check(a.conj().in_G0(), "conjugation");
    o.check(a.conj().conj() == a, "conjugation involution");
    auto va = a.coordinates(true), vc = a.conj().coordinates(true);
    bool coords = va.size() == vc.size();
    for (std::size_t i = 0; coords && i < va.size(); ++i) coords = vc[i] == conj(va[i]);
    o.check(coords, "conjugate coordinates");
  }
  return o;
}

/// Q(z, 0, tau) = Q(0, chi, tau) = tau and Q(z, chi, conj Q(chi, z, w)) = w on random
/// real hypersurfaces through random points; the recorded change pulls rho back to zero.
inline Outcome normal_form_identities(unsigned seed = 2024) {
  Outcome o("normal-form triple identity");
  std::mt19937_64 rng(seed);
  auto C = Coordinates::make(1);
  auto sp = Space::make(C.all(), 3);
  auto var = [&](const char* n) { return S::variable(sp, n); };
  S im_w = (var("w") - var("tau")).scaled(inverse(detail::gi(0, 2)));
  int attempts = 0;
  while (o.cases < kPropertyCases && attempts < 4 * kPropertyCases) {
    ++attempts;
    S x = without_constant(random_numeric(rng, sp, 5));
    S rho0 = im_w + x + crjet::detail::conj_swap(x, C);
    GaussQ a = random_gauss(rng), b = random_gauss(rng);
    std::map<std::string, S> shift{{"z", var("z") - S::constant(sp, a)},
                                   {"w", var("w") - S::constant(sp, b)},
                                   {"chi", var("chi") - S::constant(sp, conj(a))},
                                   {"tau", var("tau") - S::constant(sp, conj(b))}};
    DefiningFunction df;
    df.coords = C;
    df.rho = substitute(rho0, shift, sp, true);
    df.order = 4;
    df.origin = {detail::q(0), detail::q(0)};
    NormalForm nf;
    try {
      nf = normal_coordinates(df, {a, b});
    } catch (const precondition_error&) {
      continue;  // vanishing gradient: not a hypersurface there
    }
    auto qs = nf.Q.space_ptr();
    S tau = S::variable(qs, "tau");
    o.check(nf.Q.vanish({qs->index("chi")}) == tau, "Q(z, 0, tau) = tau");
    o.check(nf.Q.vanish({qs->index("z")}) == tau, "Q(0, chi, tau) = tau");
    auto zwc = Space::make(C.zwchi_vars(), nf.order());
    o.check(substitute(nf.Q, {{"tau", nf.conj_Q()}}, zwc) == S::variable(zwc, "w"), "involution");
    o.check(normal_form_residual(df, nf, nf.order()).is_zero(), "recorded change");
    ++o.cases;
  }
  return o;
}

/// T(conj lambda) = lambda for the jets of verified maps on the golden examples.
inline Outcome t_fixed_point(unsigned seed = 71) {
  using detail::gi;
  using detail::q;
  Outcome o("T fixed point on verified jets");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> small(1, 9), sign(0, 1), pm(-4, 4);
  auto ncub = detail::at_origin("Im w = Re(z)*|z|^2", 8);
  auto nrez2 = detail::at_origin("Im w = |z|^2 + Re(z^2)|z|^2", 8);
  auto nquart = detail::at_origin("Im w = |z|^2 + |z|^4", 10);
  auto n11 = detail::at_origin("Im w = |z|^2 + Re(z)|z|^2", 8);
  auto nsp = detail::at_origin("Im w = |z|^2", 4);
  Pipeline Pcub(ncub, ncub, 8), Prez2(nrez2, nrez2, 8), Pquart(nquart, nquart, 10), Psp(nsp, nsp, 4);
  const auto& C = ncub.coords;
  auto s4 = Space::make(C.holomorphic(), 4), s8 = Space::make(C.holomorphic(), 8), s10 = Space::make(C.holomorphic(), 10);
  auto check = [&](const Pipeline& P, const SeriesTuple<GaussQ>& H, const std::string& what) {
    auto rep = verify_map(H, P.source(), P.target(), P.D());
    o.check(rep.verified(), what + " verified");
    if (rep.verified()) {
      auto lam = eta(H, C, P.jet_order());
      o.check(P.T(lam.conj()) == lam, what + " fixed by T");
    }
    ++o.cases;
  };
  while (o.cases < kPropertyCases) {
    // Dilations (t z, t^3 w).
    GaussQ t(mpq_class(small(rng) * (sign(rng) ? 1 : -1), small(rng)));
    check(Pcub, {S::variable(s8, "z").scaled(t), S::variable(s8, "w").scaled(t * t * t)}, "dilation");
    // Maps M(1,1) -> M(a,b): (a/b z, a^3/|b|^2 w).
    GaussQ a(mpq_class(small(rng) * (sign(rng) ? 1 : -1), small(rng)));
    GaussQ b = gi(pm(rng), pm(rng));
    if (b.is_zero()) b = q(1);
    auto tgt = detail::at_origin("Im w = " + a.to_string() + "|z|^2 + Re((" + b.to_string() + ") z)|z|^2", 8);
    Pipeline Pequiv(n11, tgt, 8);
    check(Pequiv, {S::variable(s8, "z").scaled(a * inverse(b)), S::variable(s8, "w").scaled(a * a * a * inverse(b * conj(b)))},
          "equivalence");
    // Rotations by unit Gaussian rationals (c + di)^2 / (c^2 + d^2).
    long c = pm(rng), d = pm(rng);
    if (c == 0 && d == 0) c = 1;
    GaussQ e = gi(c, d) * gi(c, d) * inverse(q(c * c + d * d));
    check(Pquart, {S::variable(s10, "z").scaled(e), S::variable(s10, "w")}, "rotation");
    // The two elements of the discrete group, alternating.
    bool flip = o.cases % 2;
    check(Prez2, {S::variable(s8, "z").scaled(q(flip ? -1 : 1)), S::variable(s8, "w")}, "reflection");
    // Sphere isotropy (l (z + s w), |l|^2 w) / (1 - 2i conj(s) z - (r + i|s|^2) w), truncated.
    GaussQ l = gi(pm(rng), pm(rng));
    if (l.is_zero()) l = q(1);
    GaussQ s = gi(pm(rng), pm(rng)) * inverse(q(small(rng)));
    GaussQ r(mpq_class(pm(rng), small(rng)));
    S z = S::variable(s4, "z"), w = S::variable(s4, "w");
    S den = S::constant(s4, q(1)) - z.scaled(gi(0, 2) * conj(s)) - w.scaled(r + gi(0, 1) * s * conj(s));
    S inv = invert_unit(den);
    check(Psp, {(z + w.scaled(s)).scaled(l) * inv, w.scaled(l * conj(l)) * inv}, "sphere isotropy");
  }
  return o;
}

}  // namespace crjet::properties
