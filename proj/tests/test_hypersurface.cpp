#include <gtest/gtest.h>

#include <random>

#include "crjet/crjet.hpp"
#include "support.hpp"

using namespace crjet;
using namespace crjet::test_support;
using S = Series<GaussQ>;

namespace {

GaussQ q(long a, long b = 1) { return GaussQ(mpq_class(a, b)); }

S var(const SpacePtr& sp, const std::string& n) { return S::variable(sp, n); }

// (w - tau)/(2i) in the complexified space.
S im_w(const SpacePtr& sp) { return (var(sp, "w") - var(sp, "tau")).scaled(inverse(GaussQ(0, 2))); }

// rho(change(z, Q), conj change(chi, tau)) in (z, chi, tau); zero iff the recorded change is right.
S pulled_back(const DefiningFunction& df, const NormalForm& nf) {
  const Coordinates& C = nf.coords;
  auto qs = nf.Q.space_ptr();
  std::map<std::string, S> a;
  auto hol = C.holomorphic(), anti = C.antiholomorphic();
  std::map<std::string, std::string> to_conj;
  for (int j = 0; j < C.n; ++j) to_conj[C.z[j]] = C.chi[j];
  to_conj[C.w] = C.tau;
  for (int i = 0; i < C.N(); ++i) {
    a.emplace(hol[i], substitute(nf.change[i], {{C.w, nf.Q}}, qs, true));
    a.emplace(anti[i], conjugate_series(nf.change[i], to_conj).rebase(qs));
  }
  return substitute(df.rho, a, qs, true);
}

void expect_normal(const NormalForm& nf) {
  const Coordinates& C = nf.coords;
  auto qs = nf.Q.space_ptr();
  std::vector<std::size_t> zi, ci;
  for (const auto& s : C.z) zi.push_back(qs->index(s));
  for (const auto& s : C.chi) ci.push_back(qs->index(s));
  EXPECT_EQ(nf.Q.vanish(ci), var(qs, "tau"));
  EXPECT_EQ(nf.Q.vanish(zi), var(qs, "tau"));
  auto zwc = Space::make(C.zwchi_vars(), nf.order());
  EXPECT_EQ(substitute(nf.Q, {{"tau", nf.conj_Q()}}, zwc), var(zwc, "w"));
}

}  // namespace

TEST(Parse, ExampleEquations) {
  auto df = parse_hypersurface("Im w = Re(z)*|z|^2", 6);
  auto sp = df.rho.space_ptr();
  ASSERT_EQ(sp->names(), (std::vector<std::string>{"z", "w", "chi", "tau"}));
  S z = var(sp, "z"), chi = var(sp, "chi");
  EXPECT_EQ(df.rho, im_w(sp) - (z + chi).scaled(q(1, 2)) * z * chi);

  auto sphere = parse_hypersurface("Im w = |z|^2", 6);
  auto s2 = sphere.rho.space_ptr();
  EXPECT_EQ(sphere.rho, im_w(s2) - var(s2, "z") * var(s2, "chi"));

  auto quartic = parse_hypersurface("Im w = |z|^2 + |z|^4", 6);
  auto s4 = quartic.rho.space_ptr();
  S zc = var(s4, "z") * var(s4, "chi");
  EXPECT_EQ(quartic.rho, im_w(s4) - zc - zc * zc);
}

TEST(Parse, NotationVariants) {
  auto a = parse_hypersurface("Im w = (Re z)|z|^2", 6);
  auto b = parse_hypersurface("Im(w) = Re(z) * z * conj(z)", 6);
  auto c = parse_hypersurface("rho = (w - conj(w))/(2i) - (z + conj(z))/2 * |z|^2", 6);
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_EQ(a.rho, c.rho);
  // Unit multiples are rescaled to a real defining function.
  auto d = parse_hypersurface("rho = w - conj(w) - 2i z conj(z)", 4);
  EXPECT_EQ(detail::conj_swap(d.rho, d.coords), d.rho);
  auto e = parse_hypersurface("Im w = 0.5 |z|^2 + Re(z^2 conj(z))", 4);
  auto se = e.rho.space_ptr();
  S z = var(se, "z"), chi = var(se, "chi");
  EXPECT_EQ(e.rho, im_w(se) - (z * chi).scaled(q(1, 2)) - (z * z * chi + chi * chi * z).scaled(q(1, 2)));
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_hypersurface("Im w = z", 4), parse_error);          // not real
  EXPECT_THROW(parse_hypersurface("Im w = |z|^3", 4), parse_error);      // odd modulus power
  EXPECT_THROW(parse_hypersurface("Im w = |z|^2 + b", 4), parse_error);  // unknown name
  EXPECT_THROW(parse_hypersurface("|z|^2", 4), parse_error);              // no equation
  EXPECT_THROW(parse_hypersurface("Im w = |z|^2 / z", 4), parse_error);
  EXPECT_THROW(parse_hypersurface("Im w = (|z|^2", 4), parse_error);
  EXPECT_THROW(parse_hypersurface("Im w = |z|^2 = 1", 4), parse_error);
  EXPECT_THROW(parse_hypersurface("Im w = |z|^2 + |z1|^2", 4), parse_error);
  EXPECT_THROW(parse_hypersurface("w = 2 conj(w)", 4), parse_error);
  EXPECT_NO_THROW(parse_hypersurface("w = conj(w)", 4));  // conj(rho) = -rho
}

TEST(Parse, SeveralVariables) {
  auto df = parse_hypersurface("Im w = |z1|^2 - |z2|^2", 4);
  EXPECT_EQ(df.coords.n, 2);
  EXPECT_EQ(df.rho.space().names(), (std::vector<std::string>{"z1", "z2", "w", "chi1", "chi2", "tau"}));
}

TEST(Parse, ConstantsAndPoints) {
  EXPECT_EQ(parse_constant("1/2"), q(1, 2));
  EXPECT_EQ(parse_constant("5i/16"), GaussQ(0, mpq_class(5, 16)));
  EXPECT_EQ(parse_constant("(1-i)^2"), GaussQ(0, -2));
  EXPECT_EQ(parse_point("(1/2, 5i/16)", 2), (Point{q(1, 2), GaussQ(0, mpq_class(5, 16))}));
  EXPECT_EQ(parse_point("1,i", 2), (Point{q(1), GaussQ::I()}));
  EXPECT_THROW(parse_point("1", 2), parse_error);
  EXPECT_THROW(parse_constant("z"), parse_error);
  EXPECT_THROW(parse_constant("1/0"), std::exception);
}

TEST(NormalCoordinates, Examples) {
  auto sphere = normal_coordinates(parse_hypersurface("Im w = |z|^2", 6), {q(0), q(0)});
  auto qs = sphere.Q.space_ptr();
  ASSERT_EQ(qs->names(), (std::vector<std::string>{"z", "chi", "tau"}));
  S z = var(qs, "z"), chi = var(qs, "chi"), tau = var(qs, "tau");
  EXPECT_EQ(sphere.Q, tau + (z * chi).scaled(GaussQ(0, 2)));
  expect_normal(sphere);

  auto cubic = normal_coordinates(parse_hypersurface("Im w = Re(z)|z|^2", 6), {q(0), q(0)});
  EXPECT_EQ(cubic.Q, tau + (z * z * chi + z * chi * chi).scaled(GaussQ::I()));
  expect_normal(cubic);
  // At the origin nothing moves.
  EXPECT_EQ(cubic.change[0], S::variable(Space::make({"z", "w"}, 6), "z"));
  EXPECT_EQ(cubic.change[1], S::variable(Space::make({"z", "w"}, 6), "w"));
}

TEST(NormalCoordinates, Preconditions) {
  auto df = parse_hypersurface("Im w = |z|^2", 5);
  EXPECT_THROW(normal_coordinates(df, {q(1), q(0)}), precondition_error);
  EXPECT_THROW(normal_coordinates(df, {q(0)}), precondition_error);
  auto sing = parse_hypersurface("rho = |z|^2 + |w|^2", 5);
  EXPECT_THROW(normal_coordinates(sing, {q(0), q(0)}), precondition_error);
}

TEST(NormalCoordinates, RecenteredDilationFamilyMember) {
  auto quartic = parse_hypersurface("Im w = |z|^2 + |z|^4", 7);
  Point pa{q(1, 2), GaussQ(0, mpq_class(5, 16))};
  auto at_pa = normal_coordinates(quartic, pa);
  auto ma = normal_coordinates(parse_hypersurface("Im w = 2|z|^2 + 2 Re(z)|z|^2 + |z|^4", 7), {q(0), q(0)});
  EXPECT_EQ(at_pa.Q, ma.Q);
  EXPECT_EQ(at_pa.base_point, pa);
  EXPECT_TRUE(pulled_back(quartic, at_pa).is_zero());
  // The printed real second coordinate is not on M.
  EXPECT_THROW(normal_coordinates(quartic, {q(1, 2), q(5, 16)}), precondition_error);
}

TEST(NormalCoordinates, RecenterAtOriginIsIdentity) {
  auto df = parse_hypersurface("Im w = |z|^2 + Re(z^2)|z|^2", 6);
  Point zero{q(0), q(0)};
  auto r = recenter(df, zero);
  EXPECT_EQ(r.rho, df.rho);
  EXPECT_EQ(normal_coordinates(r, zero).Q, normal_coordinates(df, zero).Q);
}

TEST(Nondegeneracy, Examples) {
  auto sphere = normal_coordinates(parse_hypersurface("Im w = |z|^2", 6), {q(0), q(0)});
  auto rs = nondegeneracy(sphere, 5);
  ASSERT_TRUE(rs.k0);
  EXPECT_EQ(*rs.k0, 1);
  EXPECT_EQ(rs.witness, (std::vector<std::vector<int>>{{1}}));
  EXPECT_EQ(rs.witness_minor, GaussQ(0, -2));

  auto m = parse_hypersurface("Im w = Re(z)|z|^2", 6);
  auto r0 = nondegeneracy(normal_coordinates(m, {q(0), q(0)}), 5);
  ASSERT_TRUE(r0.k0);
  EXPECT_EQ(*r0.k0, 2);
  EXPECT_EQ(r0.witness, (std::vector<std::vector<int>>{{2}}));
  // conj(Q)_{chi chi z}(0) = 2! * conj(i) for Q = tau + i z^2 chi + i z chi^2.
  EXPECT_EQ(r0.witness_minor, GaussQ(0, -2));

  auto r1 = nondegeneracy(normal_coordinates(m, {q(1), GaussQ::I()}), 5);
  ASSERT_TRUE(r1.k0);
  EXPECT_EQ(*r1.k0, 1);

  auto flat = normal_coordinates(parse_hypersurface("Im w = 0", 6), {q(0), q(0)});
  EXPECT_FALSE(nondegeneracy(flat, 5).k0);
  EXPECT_THROW(nondegeneracy(flat, 6), precondition_error);
}

TEST(Nondegeneracy, GrlexMinimalWitnessInTwoVariables) {
  auto nf = normal_coordinates(parse_hypersurface("Im w = |z1|^2 + |z2|^2", 4), {q(0), q(0), q(0)});
  auto r = nondegeneracy(nf, 3);
  ASSERT_TRUE(r.k0);
  EXPECT_EQ(*r.k0, 1);
  EXPECT_EQ(r.witness, (std::vector<std::vector<int>>{{0, 1}, {1, 0}}));
  // Levi form of rank one plus a cubic term that fills the missing direction at order 2.
  auto nf2 = normal_coordinates(parse_hypersurface("Im w = |z1|^2 + Re(z1^2 conj(z2))", 5), {q(0), q(0), q(0)});
  auto r2 = nondegeneracy(nf2, 4);
  ASSERT_TRUE(r2.k0);
  EXPECT_EQ(*r2.k0, 2);
  EXPECT_EQ(r2.witness, (std::vector<std::vector<int>>{{1, 0}, {2, 0}}));
}

TEST(Nondegeneracy, RandomSpherePointsStayLeviNondegenerate) {
  std::mt19937_64 rng(11);
  auto df = parse_hypersurface("Im w = |z|^2", 5);
  for (int k = 0; k < 40; ++k) {
    GaussQ a = random_gauss(rng, 5, true);
    GaussQ x = random_gauss(rng, 5, true);
    Point p{a, GaussQ(x.re(), a.norm())};
    auto nf = normal_coordinates(df, p);
    auto r = nondegeneracy(nf, 4);
    ASSERT_TRUE(r.k0);
    EXPECT_EQ(*r.k0, 1);
    EXPECT_TRUE(pulled_back(df, nf).is_zero());
  }
}

// Random real polynomial hypersurfaces through a random point, including
// w-dependent terms, so that every stage of the construction is exercised.
TEST(NormalCoordinates, PropertyIdentitiesAndChangeOfCoordinates) {
  std::mt19937_64 rng(2024);
  auto C = Coordinates::make(1);
  auto sp = Space::make(C.all(), 3);
  int built = 0, rejected = 0;
  for (int k = 0; k < 1000; ++k) {
    S x = random_numeric(rng, sp, 5);
    x = without_constant(x);
    S rho0 = im_w(sp) + x + detail::conj_swap(x, C);
    GaussQ a = random_gauss(rng, 3, true), b = random_gauss(rng, 3, true);
    std::map<std::string, S> shift{{"z", var(sp, "z") - S::constant(sp, a)},
                                   {"w", var(sp, "w") - S::constant(sp, b)},
                                   {"chi", var(sp, "chi") - S::constant(sp, conj(a))},
                                   {"tau", var(sp, "tau") - S::constant(sp, conj(b))}};
    DefiningFunction df;
    df.coords = C;
    df.rho = substitute(rho0, shift, sp, true);
    df.order = 4;
    df.origin = {q(0), q(0)};
    NormalForm nf;
    try {
      nf = normal_coordinates(df, {a, b});
    } catch (const precondition_error&) {
      ++rejected;  // vanishing gradient
      continue;
    }
    ++built;
    expect_normal(nf);
    ASSERT_TRUE(pulled_back(df, nf).is_zero()) << "case " << k;
    auto r = nondegeneracy(nf, 3);
    if (r.k0) {
      for (int kk = *r.k0; kk <= 3; ++kk) EXPECT_EQ(nondegeneracy(nf, kk).witness, r.witness);
      for (int kk = 1; kk < *r.k0; ++kk) EXPECT_FALSE(nondegeneracy(nf, kk).k0);
    }
  }
  EXPECT_GT(built, 900);
  EXPECT_EQ(built + rejected, 1000);
}

TEST(NormalCoordinates, CurvedWLineAndSwappedPivot) {
  // {z = 0} meets M in the parabola Im w = (Re w)^2, which the construction straightens.
  auto curved = parse_hypersurface("Im w = (Re w)^2 + |z|^2 + Re(w)|z|^2", 6);
  auto nf = normal_coordinates(curved, {q(0), q(0)});
  expect_normal(nf);
  EXPECT_TRUE(pulled_back(curved, nf).is_zero());
  EXPECT_EQ(*nondegeneracy(nf, 3).k0, 1);
  // Only z is transverse at the origin here; the roles of z and w are exchanged.
  auto swapped = parse_hypersurface("Im z = |w|^2", 5);
  auto ns = normal_coordinates(swapped, {q(0), q(0)});
  expect_normal(ns);
  EXPECT_TRUE(pulled_back(swapped, ns).is_zero());
  EXPECT_EQ(*nondegeneracy(ns, 3).k0, 1);
}

TEST(NormalCoordinates, PolynomialDetectionAndHigherOrders) {
  auto quartic = parse_hypersurface("Im w = |z|^2 + |z|^4", 6);
  auto nf = normal_coordinates(quartic, {q(1, 2), GaussQ(0, mpq_class(5, 16))});
  EXPECT_TRUE(nf.polynomial);
  EXPECT_EQ(nf.Q_at(12).space().degree(), 12);
  EXPECT_EQ(nf.Q_at(12).rebase(nf.Q.space_ptr()), nf.Q);
  // A curved w-line makes Q a genuine series; higher orders are recomputed.
  auto curved = parse_hypersurface("Im w = (Re w)^2 + |z|^2", 5);
  auto nc = normal_coordinates(curved, {q(0), q(0)});
  EXPECT_FALSE(nc.polynomial);
  auto q8 = nc.Q_at(8);
  EXPECT_EQ(q8.rebase(nc.Q.space_ptr()), nc.Q);
  EXPECT_GT(detail::polynomial_degree(q8), 5);
  EXPECT_TRUE(normal_form_residual(curved, nc, 5).is_zero());
}
