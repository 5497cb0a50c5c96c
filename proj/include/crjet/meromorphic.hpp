#pragma once

#include <utility>
#include <vector>

#include "crjet/series_ops.hpp"

namespace crjet {

/// numerator / A^pole for a fixed distinguished series A.
template <class R>
struct Meromorphic {
  Series<R> numerator;
  int pole = 0;
};

/// Arithmetic on elements numerator / A^k. Division by A is only ever exact:
/// it happens in reduce() when the Weierstrass remainder vanishes.
template <class R>
class MeromorphicRing {
 public:
  MeromorphicRing(Series<R> A, std::size_t division_var) : A_(std::move(A)), var_(division_var) {
    if (A_.is_zero()) throw math_error("meromorphic ring: distinguished series vanishes");
  }

  const Series<R>& distinguished() const { return A_; }

  Meromorphic<R> make(Series<R> num, int pole) const { return reduce({std::move(num), pole}); }
  Meromorphic<R> holomorphic(Series<R> num) const { return {std::move(num), 0}; }

  Meromorphic<R> reduce(Meromorphic<R> m) const {
    while (m.pole > 0) {
      if (m.numerator.is_zero()) {
        m.pole = 0;
        break;
      }
      auto wd = weierstrass_divide(m.numerator, A_, 1, var_);
      bool exact = true;
      for (const auto& r : wd.remainder) exact = exact && r.is_zero();
      if (!exact) break;
      m.numerator = wd.quotient;
      --m.pole;
    }
    return m;
  }

  Meromorphic<R> add(const Meromorphic<R>& a, const Meromorphic<R>& b) const {
    int p = std::max(a.pole, b.pole);
    return reduce({a.numerator * power(p - a.pole) + b.numerator * power(p - b.pole), p});
  }
  Meromorphic<R> negate(const Meromorphic<R>& a) const { return {-a.numerator, a.pole}; }
  Meromorphic<R> sub(const Meromorphic<R>& a, const Meromorphic<R>& b) const { return add(a, negate(b)); }
  Meromorphic<R> mul(const Meromorphic<R>& a, const Meromorphic<R>& b) const {
    return reduce({a.numerator * b.numerator, a.pole + b.pole});
  }
  /// Equality of a/A^p and b/A^q, tested as a A^q == b A^p.
  bool equal(const Meromorphic<R>& a, const Meromorphic<R>& b) const {
    return a.numerator * power(b.pole) == b.numerator * power(a.pole);
  }

  Series<R> power(int k) const {
    Series<R> p = Series<R>::constant(A_.space_ptr(), R(1));
    for (int i = 0; i < k; ++i) p = p * A_;
    return p;
  }

 private:
  Series<R> A_;
  std::size_t var_;
};

}  // namespace crjet
