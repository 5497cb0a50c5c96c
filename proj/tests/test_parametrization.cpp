#include <gtest/gtest.h>

#include <random>

#include "crjet/crjet.hpp"
#include "support.hpp"

using namespace crjet;
using namespace crjet::test_support;
using S = Series<GaussQ>;
using Jet = JetGroupElement<GaussQ>;

namespace {

GaussQ q(long a, long b = 1) { return GaussQ(mpq_class(a, b)); }
GaussQ gi(long re, long im) { return GaussQ(mpq_class(re), mpq_class(im)); }

NormalForm at_origin(const std::string& eq, int D) {
  auto df = parse_hypersurface(eq, D);
  return normal_coordinates(df, Point(df.coords.N(), GaussQ(0)));
}

SeriesTuple<GaussQ> map_of(const std::string& text, int D) { return parse_map(text, Coordinates::make(1), D); }

void expect_specialization(const Pipeline& P, const SeriesTuple<GaussQ>& H) {
  const Coordinates& C = P.coords();
  const int D = P.D();
  auto rep = verify_map(H, P.source(), P.target(), D);
  ASSERT_TRUE(rep.verified());
  auto lam = eta(H, C, P.jet_order());
  auto ps = P.system(lam);
  // System soundness.
  for (const auto& e : ps.equations) EXPECT_TRUE(e.value.is_zero()) << e.family;
  // K = H mod D.
  for (int c = 0; c < C.N(); ++c) EXPECT_EQ(ps.K[c], H[c].rebase(ps.K[c].space_ptr()));
  // Psi_j = d^j/dw^j H(z, 0).
  for (int j = 0; j < static_cast<int>(ps.psi.psi.size()); ++j)
    for (int c = 0; c < C.N(); ++c) {
      S d = H[c];
      for (int k = 0; k < j; ++k) d = differentiate(d, C.w);
      const S& psi = ps.psi.psi[j][c];
      EXPECT_EQ(psi, d.vanish({d.space().index(C.w)}).rebase(Space::make(C.z, 127)).filter([&](const Exp& x) {
        return psi.space().contains(x);
      }).rebase(psi.space_ptr()));
    }
  // Phi = H(z, Q(z, chi, 0)).
  const auto& phs = ps.phi.phi[0].space_ptr();
  std::vector<std::string> gn = C.z;
  gn.insert(gn.end(), C.chi.begin(), C.chi.end());
  auto big = Space::make(gn, phs->degree());
  S q0 = P.source().Q_at(phs->degree()).vanish({P.source().Q_at(phs->degree()).space().index(C.tau)});
  q0 = q0.rebase(Space::make(gn, phs->degree()));
  for (int c = 0; c < C.N(); ++c) {
    S v = substitute(H[c], {{C.z[0], S::variable(big, C.z[0])}, {C.w, q0}}, big);
    EXPECT_EQ(ps.phi.phi[c], v.filter([&](const Exp& x) { return phs->contains(x); }).rebase(phs));
  }
}

}  // namespace

TEST(Theta, SphereAndExampleData) {
  Pipeline sphere(at_origin("Im w = |z|^2", 4), at_origin("Im w = |z|^2", 4), 4);
  const auto& t = sphere.theta();
  auto zs = t.A.space_ptr();
  EXPECT_EQ(t.m, 1);
  EXPECT_EQ(t.A, S::variable(zs, "z").scaled(gi(0, 2)));
  for (std::size_t j = 2; j < t.C.size(); ++j) EXPECT_TRUE(t.C[j].is_zero());
  EXPECT_EQ(t.psi, S::variable(t.psi.space_ptr(), "t"));

  Pipeline cubic(at_origin("Im w = Re(z)*|z|^2", 8), at_origin("Im w = Re(z)*|z|^2", 8), 8);
  const auto& u = cubic.theta();
  auto z = S::variable(u.A.space_ptr(), "z");
  EXPECT_EQ(u.m, 2);
  EXPECT_EQ(u.A, (z * z).scaled(gi(0, 1)));
  EXPECT_EQ(u.coeffs[2], z.scaled(gi(0, 1)));
  EXPECT_EQ(u.C[2], z.scaled(gi(0, 1)));
  for (std::size_t j = 3; j < u.C.size(); ++j) EXPECT_TRUE(u.C[j].is_zero());
}

TEST(Theta, PsiSolvesItsEquationAndInvertsQ) {
  for (const std::string eq : {"Im w = |z|^2", "Im w = Re(z)*|z|^2", "Im w = |z|^2 + |z|^4",
                               "Im w = |z|^2 + Re(z^2)|z|^2", "Im w = 2|z|^2 + 2Re(z)|z|^2 + |z|^4"}) {
    auto nf = at_origin(eq, 8);
    Pipeline P(nf, nf, 8);
    const auto& th = P.theta();
    auto sp = th.psi.space_ptr();
    S psi = th.psi;
    // v_j(0) = 0 and psi = t + O(t^2).
    EXPECT_EQ(psi.coefficient(Exp::unit(sp->index("t"))), GaussQ(1)) << eq;
    for (const auto& [x, c] : psi.terms()) {
      if (x[sp->index("t")] >= 2) {
        EXPECT_GT(x.total(), x[sp->index("t")]) << eq;
      }
    }
    // t = psi + sum C_j psi^j.
    S lhs = psi, p = psi;
    for (std::size_t j = 2; j < th.C.size(); ++j) {
      p = p * psi;
      lhs += th.C[j].rebase(sp) * p;
    }
    EXPECT_EQ(lhs, S::variable(sp, "t")) << eq;
    // Q(z, A psi, 0) = A^2 t, i.e. Q(z, theta(z, w), 0) = w with w = A^2 t.
    S chi = th.A.rebase(sp) * psi, acc(sp), pw = S::constant(sp, GaussQ(1));
    for (std::size_t k = 1; k < th.coeffs.size(); ++k) {
      pw = pw * chi;
      acc += th.coeffs[k].rebase(sp) * pw;
    }
    EXPECT_EQ(acc, th.B.rebase(sp) * S::variable(sp, "t")) << eq;
  }
}

TEST(Steps, SphereIdentity) {
  auto nf = at_origin("Im w = |z|^2", 6);
  Pipeline P(nf, nf, 6);
  EXPECT_EQ(P.k0(), 1);
  auto ps = P.system(Jet::identity(nf.coords, 2));
  auto zs = ps.psi.psi[0][0].space_ptr();
  EXPECT_EQ(ps.psi.psi[0][0], S::variable(zs, "z"));
  EXPECT_TRUE(ps.psi.psi[0][1].is_zero());
  auto phs = ps.phi.phi[0].space_ptr();
  EXPECT_EQ(ps.phi.phi[0], S::variable(phs, "z"));
  EXPECT_EQ(ps.phi.phi[1], (S::variable(phs, "z") * S::variable(phs, "chi")).scaled(gi(0, 2)));
  for (const auto& e : ps.equations) EXPECT_TRUE(e.value.is_zero());
  auto ks = ps.K[0].space_ptr();
  EXPECT_EQ(ps.K[0], S::variable(ks, "z"));
  EXPECT_EQ(ps.K[1], S::variable(ks, "w"));
}

TEST(Steps, LastComponentOfPsi0VanishesSymbolically) {
  for (const std::string eq : {"Im w = |z|^2", "Im w = |z|^2 + |z|^4"}) {
    auto nf = at_origin(eq, 4);
    Pipeline P(nf, nf, 4);
    auto ctx = jet_symbols(nf.coords, 2);
    std::vector<Symbolic> vals;
    for (std::size_t k = 0; k < ctx->size() / 2; ++k) vals.push_back(Symbolic::variable(ctx, 2 * k));
    auto lam = JetGroupElement<Symbolic>::from_coordinates(nf.coords, 2, vals, true);
    auto psi = P.psi(lam.conj(), 1, 4);
    EXPECT_TRUE(psi.psi[0][1].is_zero()) << eq;
    EXPECT_FALSE(psi.psi[0][0].is_zero()) << eq;
    auto phi = P.phi(psi);
    for (const auto& f : phi.phi) EXPECT_TRUE(f.constant_term().is_zero()) << eq;
  }
}

TEST(Steps, CubicDilation) {
  auto nf = at_origin("Im w = Re(z)*|z|^2", 8);
  Pipeline P(nf, nf, 8);
  EXPECT_EQ(P.k0(), 2);
  auto H = map_of("(2z, 8w)", 8);
  auto ps = P.system(eta(H, nf.coords, 4));
  auto zs = ps.psi.psi[1][0].space_ptr();
  EXPECT_TRUE(ps.psi.psi[1][0].is_zero());
  EXPECT_EQ(ps.psi.psi[1][1], S::constant(zs, q(8)));
  EXPECT_EQ(ps.K[0], H[0].rebase(ps.K[0].space_ptr()));
  EXPECT_EQ(ps.K[1], H[1].rebase(ps.K[1].space_ptr()));
  for (const auto& e : ps.equations) EXPECT_TRUE(e.value.is_zero());
  expect_specialization(P, H);
}

TEST(Steps, CorruptedJetLeavesResidual) {
  auto nf = at_origin("Im w = Re(z)*|z|^2", 8);
  Pipeline P(nf, nf, 8);
  auto idx = jet_indices(nf.coords, 4, true);
  auto vals = eta(map_of("(2z, 8w)", 8), nf.coords, 4).coordinates(true);
  // Perturb each mu coordinate by 1 in turn.
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k].component != 1) continue;
    auto v = vals;
    v[k] = v[k] + GaussQ(1);
    auto lam = Jet::from_coordinates(nf.coords, 4, v, true);
    bool nonzero = false;
    try {
      auto ps = P.system(lam);
      for (const auto& e : ps.equations) nonzero = nonzero || !e.value.is_zero();
    } catch (const math_error&) {
      nonzero = true;  // outside the chart counts as rejection
    }
    EXPECT_TRUE(nonzero) << monomial_key(nf.coords, idx[k].exp);
  }
}

TEST(Steps, RotationsReflectionAndEquivalences) {
  auto nquart = at_origin("Im w = |z|^2 + |z|^4", 10);
  Pipeline Pquart(nquart, nquart, 10);
  expect_specialization(Pquart, map_of("((3+4i)/5 z, w)", 10));

  auto nrez2 = at_origin("Im w = |z|^2 + Re(z^2)|z|^2", 8);
  Pipeline Prez2(nrez2, nrez2, 8);
  expect_specialization(Prez2, map_of("(-z, w)", 8));
  expect_specialization(Prez2, map_of("(z, w)", 8));

  auto m11 = at_origin("Im w = |z|^2 + Re(z)|z|^2", 8);
  auto m21 = at_origin("Im w = 2|z|^2 + Re(z)|z|^2", 8);
  auto m12 = at_origin("Im w = |z|^2 + Re(2z)|z|^2", 8);
  auto m3 = at_origin("Im w = 3|z|^2 + Re((1+i)z)|z|^2", 8);
  expect_specialization(Pipeline(m11, m21, 8), map_of("(2z, 8w)", 8));
  expect_specialization(Pipeline(m11, m12, 8), map_of("(z/2, w/4)", 8));
  expect_specialization(Pipeline(m11, m3, 8), map_of("(3/(1+i) z, 27/2 w)", 8));
  // conj(b) in place of b is not a map for non-real b.
  EXPECT_FALSE(verify_map(map_of("(3/(1-i) z, 27/2 w)", 8), m11, m3, 8).verified());
}

TEST(Steps, WeierstrassConsistency) {
  auto nf = at_origin("Im w = Re(z)*|z|^2", 8);
  Pipeline P(nf, nf, 8);
  auto good = eta(map_of("(-z, -w)", 8), nf.coords, 4);
  auto idx = jet_indices(nf.coords, 4, true);
  auto v = good.coordinates(true);
  v[3] = v[3] + gi(1, 1);
  for (const auto& lam : {good, Jet::from_coordinates(nf.coords, 4, v, true)}) {
    auto ph = P.phi(P.psi(lam.conj(), 2, 10));
    auto fm = P.fmap(ph);
    const auto& th = P.theta();
    auto zs = fm.Fj[0][0].space_ptr();
    S B = th.B.rebase(zs);
    MeromorphicRing<GaussQ> ring(B, 0);
    for (int j = 0; j <= 8; ++j)
      for (const auto& Fj : fm.Fj[j]) {
        auto wd = weierstrass_divide(Fj, B, j, 0);
        S back = wd.quotient * ring.power(j);
        for (int p = 0; p < wd.order; ++p)
          back += wd.remainder[p].rebase(zs) * S::monomial(zs, Exp::unit(0, p), GaussQ(1));
        EXPECT_EQ(back, Fj);
        bool exact = true;
        for (const auto& r : wd.remainder) exact = exact && r.is_zero();
        // F_j / B^j is holomorphic exactly when the remainder vanishes.
        auto m = ring.make(Fj, j);
        EXPECT_EQ(m.pole == 0, exact);
        if (exact) {
          auto lo = Space::make({"z"}, 32 - 4 * j);
          EXPECT_EQ(m.numerator.rebase(lo), wd.quotient.rebase(lo));
        }
      }
  }
}

TEST(TMap, ExamplesAndIdentity) {
  auto ncub = at_origin("Im w = Re(z)*|z|^2", 8);
  Pipeline Pcub(ncub, ncub, 8);
  auto id = Jet::identity(ncub.coords, 4);
  EXPECT_EQ(Pcub.T(id.conj()), id);
  auto dil = eta(map_of("(2z, 8w)", 8), ncub.coords, 4);
  EXPECT_EQ(Pcub.T(dil.conj()), dil);

  auto nquart = at_origin("Im w = |z|^2 + |z|^4", 10);
  Pipeline Pquart(nquart, nquart, 10);
  auto rot = eta(map_of("((3+4i)/5 z, w)", 10), nquart.coords, 2);
  EXPECT_NE(rot.conj(), rot);
  EXPECT_EQ(Pquart.T(rot.conj()), rot);
}

// Families of verified maps with exact rational parameters.
TEST(TMapProperty, FixedPointOnVerifiedJets) {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<long> small(1, 9), sign(0, 1), pm(-4, 4);
  auto ncub = at_origin("Im w = Re(z)*|z|^2", 8);
  auto nquart = at_origin("Im w = |z|^2 + |z|^4", 10);
  auto nrez2 = at_origin("Im w = |z|^2 + Re(z^2)|z|^2", 8);
  auto nsp = at_origin("Im w = |z|^2", 4);
  Pipeline Pcub(ncub, ncub, 8), Pquart(nquart, nquart, 10), Prez2(nrez2, nrez2, 8), Psp(nsp, nsp, 4);
  const auto& C = ncub.coords;
  int cases = 0;
  auto check = [&](const Pipeline& P, const SeriesTuple<GaussQ>& H) {
    auto rep = verify_map(H, P.source(), P.target(), P.D());
    ASSERT_TRUE(rep.verified());
    auto lam = eta(H, C, P.jet_order());
    ASSERT_EQ(P.T(lam.conj()), lam);
    ++cases;
  };
  for (int k = 0; k < 250; ++k) {
    // Dilations (t z, t^3 w) of Im w = Re(z)|z|^2.
    GaussQ t(mpq_class(small(rng) * (sign(rng) ? 1 : -1), small(rng)));
    auto sp = Space::make(C.holomorphic(), 8);
    check(Pcub, {S::variable(sp, "z").scaled(t), S::variable(sp, "w").scaled(t * t * t)});
    // Rotations of Im w = |z|^2 + |z|^4 by unit Gaussian rationals (a + bi)^2 / (a^2 + b^2).
    long a = pm(rng), b = pm(rng);
    if (a == 0 && b == 0) a = 1;
    GaussQ e = gi(a, b) * gi(a, b) * inverse(q(a * a + b * b));
    auto s10 = Space::make(C.holomorphic(), 10);
    check(Pquart, {S::variable(s10, "z").scaled(e), S::variable(s10, "w")});
    // Identity and (-z, w) on Im w = |z|^2 + Re(z^2)|z|^2, alternating.
    check(Prez2, map_of(k % 2 ? "(-z, w)" : "(z, w)", 8));
    // Sphere isotropy: (l (z + c w), |l|^2 w) / (1 - 2i conj(c) z - (r + i|c|^2) w), truncated.
    GaussQ l = gi(pm(rng), pm(rng));
    if (l.is_zero()) l = q(1);
    GaussQ c = gi(pm(rng), pm(rng)) * inverse(q(small(rng)));
    GaussQ r(mpq_class(pm(rng), small(rng)));
    auto s4 = Space::make(C.holomorphic(), 4);
    S z = S::variable(s4, "z"), w = S::variable(s4, "w");
    S den = S::constant(s4, q(1)) - z.scaled(gi(0, 2) * conj(c)) - w.scaled(r + gi(0, 1) * c * conj(c));
    S inv = invert_unit(den);
    check(Psp, {(z + w.scaled(c)).scaled(l) * inv, w.scaled(l * conj(l)) * inv});
  }
  EXPECT_GE(cases, 1000);
}
