#pragma once

// Brute-force infinitesimal isotropy of a rigid hypersurface Im w = phi(z, conj z):
// holomorphic vector fields sum a_k d/dz_k + b d/dw with polynomial coefficients of
// degree 1..dmax whose real part is tangent, found by exact linear algebra.

#include <string>
#include <vector>

#include "crjet/linalg.hpp"
#include "crjet/series.hpp"
#include "crjet/series_ops.hpp"

namespace crjet::oracle {

/// Variables of the parametrization of M: z_k, zb_k (standing for conj z_k) and s = Re w.
inline SpacePtr rigid_space(int n, int degree = 60) {
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) names.push_back(n == 1 ? "z" : "z" + std::to_string(k + 1));
  for (int k = 0; k < n; ++k) names.push_back(n == 1 ? "zb" : "zb" + std::to_string(k + 1));
  names.push_back("s");
  return Space::make(names, degree);
}

/// Dimension of the space of such vector fields; phi lives in rigid_space(n).
inline int isotropy_dimension(const Series<GaussQ>& phi, int n, int dmax) {
  using S = Series<GaussQ>;
  const SpacePtr& sp = phi.space_ptr();
  const GaussQ I(mpq_class(0), mpq_class(1));
  S s = S::variable(sp, 2 * n);
  S W = s + phi.scaled(I), Wb = s - phi.scaled(I);
  std::vector<S> z, zb, phz, phzb;
  for (int k = 0; k < n; ++k) {
    z.push_back(S::variable(sp, k));
    zb.push_back(S::variable(sp, n + k));
    phz.push_back(differentiate_in_place(phi, k));
    phzb.push_back(differentiate_in_place(phi, n + k));
  }
  // Monomials z^p w^q of degree 1..dmax and their conjugates on M.
  std::vector<std::pair<S, S>> monos;
  std::vector<int> e(n + 1, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n + 1) {
      int d = 0;
      for (int x : e) d += x;
      if (d == 0) return;
      S m = S::constant(sp, GaussQ(1)), mb = m;
      for (int k = 0; k < n; ++k)
        for (int t = 0; t < e[k]; ++t) {
          m = m * z[k];
          mb = mb * zb[k];
        }
      for (int t = 0; t < e[n]; ++t) {
        m = m * W;
        mb = mb * Wb;
      }
      monos.emplace_back(m, mb);
      return;
    }
    for (int x = 0; x <= left; ++x) {
      e[pos] = x;
      rec(pos + 1, left - x);
    }
    e[pos] = 0;
  };
  rec(0, dmax);
  // Columns: (component, monomial, real or imaginary coefficient).
  std::vector<S> cols;
  const GaussQ half_i = inverse(GaussQ(mpq_class(0), mpq_class(2)));
  for (int comp = 0; comp <= n; ++comp)
    for (const auto& [m, mb] : monos)
      for (const GaussQ& c : {GaussQ(1), I}) {
        S E = comp == n ? m.scaled(c * half_i) - mb.scaled(conj(c) * half_i)
                        : -(m * phz[comp]).scaled(c) - (mb * phzb[comp]).scaled(conj(c));
        cols.push_back(E);
      }
  std::map<Exp, std::size_t, bool (*)(const Exp&, const Exp&)> row_of(grlex_less);
  for (const auto& E : cols)
    for (const auto& [x, c] : E.terms()) row_of.emplace(x, row_of.size());
  Matrix<GaussQ> A(2 * row_of.size(), std::vector<GaussQ>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (const auto& [x, c] : cols[j].terms()) {
      std::size_t r = row_of.at(x);
      A[2 * r][j] = GaussQ(c.re());
      A[2 * r + 1][j] = GaussQ(c.im());
    }
  return static_cast<int>(cols.size() - (A.empty() ? 0 : matrix_rank(A)));
}

}  // namespace crjet::oracle
