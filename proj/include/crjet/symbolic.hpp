#pragma once

#include <string>
#include <utility>

#include "crjet/polynomial.hpp"

namespace crjet {

/// Reduced fraction num/den of polynomials in symbolic jet variables.
/// The denominator is monic and coprime to the numerator.
class Symbolic {
 public:
  Symbolic() : den_(1) {}
  Symbolic(int c) : num_(c), den_(1) {}
  Symbolic(long c) : num_(GaussQ(c)), den_(1) {}
  Symbolic(GaussQ c) : num_(std::move(c)), den_(1) {}
  Symbolic(Poly p) : num_(std::move(p)), den_(1) {}
  Symbolic(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { reduce(); }

  static Symbolic variable(const SymbolContextPtr& ctx, std::size_t v) { return Symbolic(Poly::variable(ctx, v)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }

  Symbolic conj() const { return Symbolic(num_.conj(), den_.conj()); }

  Symbolic inverse() const {
    if (num_.is_zero()) throw math_error("division by the zero rational function");
    return Symbolic(den_, num_);
  }

  Symbolic operator-() const {
    Symbolic r = *this;
    r.num_ = -r.num_;
    return r;
  }

  friend Symbolic operator+(const Symbolic& a, const Symbolic& b) { return add(a, b, false); }
  friend Symbolic operator-(const Symbolic& a, const Symbolic& b) { return add(a, b, true); }
  friend Symbolic operator*(const Symbolic& a, const Symbolic& b) {
    if (a.is_zero() || b.is_zero()) return Symbolic();
    if (a.is_polynomial() && b.is_polynomial()) {
      Symbolic r;
      r.num_ = a.num_ * b.num_;
      return r;
    }
    Poly g1 = Poly::gcd(a.num_, b.den_), g2 = Poly::gcd(b.num_, a.den_);
    Symbolic r;
    r.num_ = quot(a.num_, g1) * quot(b.num_, g2);
    r.den_ = quot(a.den_, g2) * quot(b.den_, g1);
    r.normalize_den();
    return r;
  }
  friend Symbolic operator/(const Symbolic& a, const Symbolic& b) { return a * b.inverse(); }
  Symbolic& operator+=(const Symbolic& o) { return *this = *this + o; }
  Symbolic& operator-=(const Symbolic& o) { return *this = *this - o; }
  Symbolic& operator*=(const Symbolic& o) { return *this = *this * o; }
  Symbolic& operator/=(const Symbolic& o) { return *this = *this / o; }
  void add_product(const Symbolic& a, const Symbolic& b) { *this += a * b; }

  friend bool operator==(const Symbolic& a, const Symbolic& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator!=(const Symbolic& a, const Symbolic& b) { return !(a == b); }

  /// Partial derivative in symbolic variable v.
  Symbolic derivative(std::size_t v) const {
    if (is_polynomial()) return Symbolic(num_.derivative(v).scaled(den_.constant_value().inverse()));
    return Symbolic(num_.derivative(v) * den_ - num_ * den_.derivative(v), den_ * den_);
  }

  /// Evaluates at numeric values; throws if the denominator vanishes there.
  template <class V, class F>
  V evaluate(const F& value_of) const {
    V d = den_.evaluate<V>(value_of);
    if (!is_unit(d)) throw math_error("denominator vanishes at the evaluation point");
    return num_.evaluate<V>(value_of) / d;
  }

  std::string to_string() const {
    if (is_polynomial()) return num_.to_string();
    return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
  }

 private:
  static Poly quot(const Poly& a, const Poly& g) {
    if (g.is_constant()) return a.scaled(g.constant_value().inverse());
    return *Poly::divide_exact(a, g);
  }

  static Symbolic add(const Symbolic& a, const Symbolic& b, bool subtract) {
    Symbolic r;
    if (a.den_ == b.den_) {
      r.num_ = subtract ? a.num_ - b.num_ : a.num_ + b.num_;
      r.den_ = a.den_;
      if (!r.is_polynomial()) r.reduce();
      return r;
    }
    Poly g = Poly::gcd(a.den_, b.den_);
    Poly ad = quot(a.den_, g), bd = quot(b.den_, g);
    Poly bn = b.num_ * ad;
    r.num_ = subtract ? a.num_ * bd - bn : a.num_ * bd + bn;
    r.den_ = ad * b.den_;
    r.reduce();
    return r;
  }

  void reduce() {
    if (den_.is_zero()) throw math_error("zero denominator");
    if (num_.is_zero()) {
      den_ = Poly(1);
      return;
    }
    if (!den_.is_constant()) {
      Poly g = Poly::gcd(num_, den_);
      if (!g.is_constant()) {
        num_ = quot(num_, g);
        den_ = quot(den_, g);
      }
    }
    normalize_den();
  }

  void normalize_den() {
    GaussQ lc = den_.leading_coefficient();
    if (lc != GaussQ(1)) {
      GaussQ inv = lc.inverse();
      num_ = num_.scaled(inv);
      den_ = den_.scaled(inv);
    }
  }

  Poly num_;
  Poly den_;
};

inline Symbolic conj(const Symbolic& x) { return x.conj(); }
inline bool is_zero(const Symbolic& x) { return x.is_zero(); }
inline bool is_unit(const Symbolic& x) { return !x.is_zero(); }
inline Symbolic inverse(const Symbolic& x) { return x.inverse(); }
inline void add_product(Symbolic& acc, const Symbolic& a, const Symbolic& b) { acc.add_product(a, b); }

}  // namespace crjet
