#pragma once

#include <random>
#include <string>
#include <vector>

#include "crjet/crjet.hpp"

namespace crjet::test_support {

inline GaussQ random_gauss(std::mt19937_64& rng, int range = 3, bool allow_zero = true) {
  std::uniform_int_distribution<int> num(-range, range), den(1, 3);
  for (;;) {
    GaussQ g(mpq_class(num(rng), den(rng)), mpq_class(num(rng), den(rng)));
    if (allow_zero || !g.is_zero()) return g;
  }
}

template <class R, class Gen>
Series<R> random_series(std::mt19937_64& rng, const SpacePtr& sp, int terms, Gen coeff) {
  std::vector<typename Series<R>::Term> t;
  std::uniform_int_distribution<int> var(0, static_cast<int>(sp->nvars()) - 1);
  std::uniform_int_distribution<int> deg(0, sp->degree());
  for (int k = 0; k < terms; ++k) {
    Exp x;
    int d = deg(rng);
    for (int s = 0; s < d; ++s) {
      Exp y = x;
      y[var(rng)] += 1;
      if (!sp->contains(y)) break;
      x = y;
    }
    t.emplace_back(x, coeff());
  }
  return Series<R>::from_terms(sp, std::move(t));
}

inline Series<GaussQ> random_numeric(std::mt19937_64& rng, const SpacePtr& sp, int terms) {
  return random_series<GaussQ>(rng, sp, terms, [&] { return random_gauss(rng); });
}

/// Same series with the constant term removed.
template <class R>
Series<R> without_constant(const Series<R>& s) {
  return s.filter([](const Exp& x) { return x.total() > 0; });
}

}  // namespace crjet::test_support
