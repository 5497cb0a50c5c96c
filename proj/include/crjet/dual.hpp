#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "crjet/gaussq.hpp"

namespace crjet {

/// First-order perturbation v + sum_k d_k eps_k over Gaussian rationals
/// (eps_j eps_k = 0). An empty slot vector means all slots are zero.
class Dual {
 public:
  Dual() = default;
  Dual(int v) : v_(v) {}
  Dual(long v) : v_(v) {}
  Dual(GaussQ v) : v_(std::move(v)) {}
  Dual(GaussQ v, std::vector<GaussQ> d) : v_(std::move(v)), d_(std::move(d)) {}

  /// Value c + eps_slot.
  static Dual slot(GaussQ c, std::size_t slot, std::size_t nslots, GaussQ dir = GaussQ(1)) {
    std::vector<GaussQ> d(nslots);
    d[slot] = std::move(dir);
    return Dual(std::move(c), std::move(d));
  }

  const GaussQ& value() const { return v_; }
  const std::vector<GaussQ>& slots() const { return d_; }
  GaussQ slot_value(std::size_t k) const { return k < d_.size() ? d_[k] : GaussQ(); }
  bool is_constant() const {
    return std::all_of(d_.begin(), d_.end(), [](const GaussQ& x) { return x.is_zero(); });
  }

  bool is_zero() const { return v_.is_zero() && is_constant(); }

  Dual conj() const {
    Dual r(v_.conj());
    r.d_.reserve(d_.size());
    for (const auto& x : d_) r.d_.push_back(x.conj());
    return r;
  }

  Dual inverse() const {
    GaussQ iv = v_.inverse();
    Dual r(iv);
    if (!d_.empty()) {
      GaussQ f = -(iv * iv);
      r.d_.reserve(d_.size());
      for (const auto& x : d_) r.d_.push_back(x * f);
    }
    return r;
  }

  Dual operator-() const {
    Dual r(-v_);
    r.d_.reserve(d_.size());
    for (const auto& x : d_) r.d_.push_back(-x);
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v_ += o.v_;
    if (o.d_.size() > d_.size()) d_.resize(o.d_.size());
    for (std::size_t k = 0; k < o.d_.size(); ++k)
      if (!o.d_[k].is_zero()) d_[k] += o.d_[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v_ -= o.v_;
    if (o.d_.size() > d_.size()) d_.resize(o.d_.size());
    for (std::size_t k = 0; k < o.d_.size(); ++k)
      if (!o.d_[k].is_zero()) d_[k] -= o.d_[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    Dual r;
    r.add_product(*this, o);
    return *this = std::move(r);
  }
  Dual& operator/=(const Dual& o) { return *this *= o.inverse(); }

  /// this += a * b
  void add_product(const Dual& a, const Dual& b) {
    v_.add_product(a.v_, b.v_);
    std::size_t n = std::max(a.d_.size(), b.d_.size());
    if (n == 0) return;
    if (d_.size() < n) d_.resize(n);
    if (!b.v_.is_zero())
      for (std::size_t k = 0; k < a.d_.size(); ++k)
        if (!a.d_[k].is_zero()) d_[k].add_product(a.d_[k], b.v_);
    if (!a.v_.is_zero())
      for (std::size_t k = 0; k < b.d_.size(); ++k)
        if (!b.d_[k].is_zero()) d_[k].add_product(a.v_, b.d_[k]);
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.add_product(a, b);
    return r;
  }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
  friend bool operator==(const Dual& a, const Dual& b) {
    if (a.v_ != b.v_) return false;
    std::size_t n = std::max(a.d_.size(), b.d_.size());
    for (std::size_t k = 0; k < n; ++k)
      if (a.slot_value(k) != b.slot_value(k)) return false;
    return true;
  }
  friend bool operator!=(const Dual& a, const Dual& b) { return !(a == b); }

  std::string to_string() const {
    std::string out = "(" + v_.to_string();
    for (std::size_t k = 0; k < d_.size(); ++k)
      if (!d_[k].is_zero()) out += " + (" + d_[k].to_string() + ")e" + std::to_string(k);
    return out + ")";
  }

 private:
  GaussQ v_;
  std::vector<GaussQ> d_;
};

inline Dual conj(const Dual& x) { return x.conj(); }
inline bool is_zero(const Dual& x) { return x.is_zero(); }
inline bool is_unit(const Dual& x) { return !x.value().is_zero(); }
inline Dual inverse(const Dual& x) { return x.inverse(); }
inline void add_product(Dual& acc, const Dual& a, const Dual& b) { acc.add_product(a, b); }

}  // namespace crjet
