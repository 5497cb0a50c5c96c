#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crjet {

class math_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact Gaussian rational a + b i with arbitrary-precision rational parts.
class GaussQ {
 public:
  GaussQ() = default;
  GaussQ(int v) : re_(v) {}
  GaussQ(long v) : re_(v) {}
  GaussQ(mpq_class re) : re_(std::move(re)) { re_.canonicalize(); }
  GaussQ(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
  }

  static GaussQ I() { return GaussQ(mpq_class(0), mpq_class(1)); }

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }

  GaussQ conj() const { return GaussQ(re_, -im_); }
  mpq_class norm() const { return re_ * re_ + im_ * im_; }

  GaussQ inverse() const {
    if (is_zero()) throw math_error("division by zero");
    if (is_real()) return GaussQ(mpq_class(1) / re_);
    mpq_class n = norm();
    return GaussQ(re_ / n, -im_ / n);
  }

  GaussQ operator-() const { return GaussQ(-re_, -im_); }

  GaussQ& operator+=(const GaussQ& o) {
    re_ += o.re_;
    if (sgn(o.im_) != 0) im_ += o.im_;
    return *this;
  }
  GaussQ& operator-=(const GaussQ& o) {
    re_ -= o.re_;
    if (sgn(o.im_) != 0) im_ -= o.im_;
    return *this;
  }
  GaussQ& operator*=(const GaussQ& o) {
    if (o.is_real()) {
      re_ *= o.re_;
      if (sgn(im_) != 0) im_ *= o.re_;
    } else if (is_real()) {
      im_ = re_ * o.im_;
      re_ *= o.re_;
    } else {
      mpq_class r = re_ * o.re_ - im_ * o.im_;
      im_ = re_ * o.im_ + im_ * o.re_;
      re_ = std::move(r);
    }
    return *this;
  }
  GaussQ& operator/=(const GaussQ& o) { return *this *= o.inverse(); }

  /// this += a * b without allocating a temporary GaussQ.
  void add_product(const GaussQ& a, const GaussQ& b) {
    if (a.is_real() && b.is_real()) {
      mpq_class t = a.re_ * b.re_;
      re_ += t;
      return;
    }
    re_ += a.re_ * b.re_ - a.im_ * b.im_;
    im_ += a.re_ * b.im_ + a.im_ * b.re_;
  }

  friend GaussQ operator+(GaussQ a, const GaussQ& b) { return a += b; }
  friend GaussQ operator-(GaussQ a, const GaussQ& b) { return a -= b; }
  friend GaussQ operator*(GaussQ a, const GaussQ& b) { return a *= b; }
  friend GaussQ operator/(GaussQ a, const GaussQ& b) { return a /= b; }
  friend bool operator==(const GaussQ& a, const GaussQ& b) { return a.re_ == b.re_ && a.im_ == b.im_; }
  friend bool operator!=(const GaussQ& a, const GaussQ& b) { return !(a == b); }

  /// Human-readable form, e.g. "3/4", "-2i", "1/2+3i".
  std::string to_string() const {
    if (is_zero()) return "0";
    std::string out;
    if (sgn(re_) != 0) out = re_.get_str();
    if (sgn(im_) != 0) {
      mpq_class a = abs(im_);
      std::string sign = sgn(im_) < 0 ? "-" : (out.empty() ? "" : "+");
      out += sign + (a == 1 ? std::string() : a.get_str()) + "i";
    }
    return out;
  }

  std::size_t hash() const {
    std::hash<std::string> h;
    return h(re_.get_str()) * 31u + h(im_.get_str());
  }

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

inline std::ostream& operator<<(std::ostream& os, const GaussQ& x) { return os << x.to_string(); }

inline GaussQ conj(const GaussQ& x) { return x.conj(); }
inline bool is_zero(const GaussQ& x) { return x.is_zero(); }
inline bool is_unit(const GaussQ& x) { return !x.is_zero(); }
inline GaussQ inverse(const GaussQ& x) { return x.inverse(); }
inline void add_product(GaussQ& acc, const GaussQ& a, const GaussQ& b) { acc.add_product(a, b); }

/// Parses "p", "p/q" (optionally signed) into a canonical rational.
inline mpq_class parse_rational(std::string_view s) {
  mpq_class q;
  if (q.set_str(std::string(s), 10) != 0) throw std::invalid_argument("bad rational: " + std::string(s));
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + std::string(s));
  q.canonicalize();
  return q;
}

}  // namespace crjet
