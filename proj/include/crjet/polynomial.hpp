#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crjet/gaussq.hpp"

namespace crjet {

/// Names of the symbolic jet variables and their conjugation partners.
struct SymbolContext {
  std::vector<std::string> names;
  std::vector<std::size_t> partner;  // partner[partner[v]] == v

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    return std::nullopt;
  }
};
using SymbolContextPtr = std::shared_ptr<const SymbolContext>;

/// Sparse multivariate polynomial over the Gaussian rationals.
/// Terms are kept in descending graded-lexicographic order with no zero coefficients.
class Poly {
 public:
  using Mono = std::vector<std::uint16_t>;
  using Term = std::pair<Mono, GaussQ>;

  Poly() = default;
  Poly(GaussQ c) {
    if (!c.is_zero()) terms_.emplace_back(Mono{}, std::move(c));
  }
  Poly(int c) : Poly(GaussQ(c)) {}

  static Poly variable(const SymbolContextPtr& ctx, std::size_t v) {
    Poly p;
    p.ctx_ = ctx;
    Mono m(ctx->size(), 0);
    m[v] = 1;
    p.terms_.emplace_back(std::move(m), GaussQ(1));
    return p;
  }

  const SymbolContextPtr& context() const { return ctx_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && total_degree(terms_[0].first) == 0); }
  GaussQ constant_value() const {
    for (const auto& t : terms_)
      if (total_degree(t.first) == 0) return t.second;
    return GaussQ();
  }
  const GaussQ& leading_coefficient() const { return terms_.front().second; }
  std::size_t nvars() const { return ctx_ ? ctx_->size() : 0; }

  static unsigned total_degree(const Mono& m) {
    unsigned d = 0;
    for (auto e : m) d += e;
    return d;
  }
  static std::uint16_t exp_of(const Mono& m, std::size_t v) { return v < m.size() ? m[v] : 0; }

  /// Strict "a > b" in graded lexicographic order.
  static bool grlex_greater(const Mono& a, const Mono& b) {
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da > db;
    std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto x = exp_of(a, i), y = exp_of(b, i);
      if (x != y) return x > y;
    }
    return false;
  }

  unsigned degree_in(std::size_t v) const {
    unsigned d = 0;
    for (const auto& t : terms_) d = std::max<unsigned>(d, exp_of(t.first, v));
    return d;
  }
  bool uses(std::size_t v) const { return degree_in(v) > 0; }

  Poly operator-() const {
    Poly r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }
  friend Poly operator+(const Poly& a, const Poly& b) { return combine(a, b, false); }
  friend Poly operator-(const Poly& a, const Poly& b) { return combine(a, b, true); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    auto ctx = unify(a, b);
    std::size_t n = ctx ? ctx->size() : 0;
    if (a.terms_.size() == 1 || b.terms_.size() == 1) {
      // A monomial factor preserves the term order.
      const Poly& one = a.terms_.size() == 1 ? a : b;
      const Poly& many = a.terms_.size() == 1 ? b : a;
      const auto& [m1, c1] = one.terms_.front();
      Poly r;
      r.ctx_ = ctx;
      r.terms_.reserve(many.terms_.size());
      for (const auto& [m, c] : many.terms_) {
        Mono e(n, 0);
        for (std::size_t i = 0; i < n; ++i) e[i] = exp_of(m, i) + exp_of(m1, i);
        r.terms_.emplace_back(std::move(e), c * c1);
      }
      return r;
    }
    std::map<Mono, GaussQ, GreaterCmp> acc;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Mono m(n, 0);
        for (std::size_t i = 0; i < n; ++i) m[i] = exp_of(ma, i) + exp_of(mb, i);
        acc[std::move(m)].add_product(ca, cb);
      }
    Poly r;
    r.ctx_ = ctx;
    for (auto& [m, c] : acc)
      if (!c.is_zero()) r.terms_.emplace_back(m, std::move(c));
    return r;
  }
  Poly& operator+=(const Poly& o) { return *this = *this + o; }
  Poly& operator-=(const Poly& o) { return *this = *this - o; }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  Poly scaled(const GaussQ& c) const {
    if (c.is_zero()) return Poly();
    Poly r = *this;
    for (auto& t : r.terms_) t.second *= c;
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      if (a.terms_[i].second != b.terms_[i].second) return false;
      if (grlex_greater(a.terms_[i].first, b.terms_[i].first) || grlex_greater(b.terms_[i].first, a.terms_[i].first))
        return false;
    }
    return true;
  }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  /// Conjugates coefficients and swaps each variable with its partner.
  Poly conj() const {
    Poly r;
    r.ctx_ = ctx_;
    for (const auto& [m, c] : terms_) {
      Mono mm(nvars(), 0);
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i]) mm[ctx_->partner[i]] = m[i];
      r.terms_.emplace_back(std::move(mm), c.conj());
    }
    r.sort();
    return r;
  }

  /// Returns this divided by the leading coefficient (zero stays zero).
  Poly monic() const {
    if (is_zero()) return *this;
    return scaled(leading_coefficient().inverse());
  }

  Poly derivative(std::size_t v) const {
    Poly r;
    r.ctx_ = ctx_;
    for (const auto& [m, c] : terms_) {
      auto e = exp_of(m, v);
      if (e == 0) continue;
      Mono mm = m;
      mm[v] = e - 1;
      r.terms_.emplace_back(std::move(mm), c * GaussQ(static_cast<long>(e)));
    }
    r.sort();
    return r;
  }

  template <class V, class F>
  V evaluate(const F& value_of) const {
    V out(0);
    std::vector<std::vector<V>> powers(nvars());
    for (const auto& [m, c] : terms_) {
      V t(c);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i]) continue;
        auto& pw = powers[i];
        if (pw.empty()) pw.push_back(V(1));
        while (pw.size() <= m[i]) pw.push_back(pw.back() * value_of(i));
        t = t * pw[m[i]];
      }
      out += t;
    }
    return out;
  }

  /// Exact quotient a / b, or nullopt when b does not divide a.
  static std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw math_error("polynomial division by zero");
    if (a.is_zero()) return Poly();
    auto ctx = unify(a, b);
    std::size_t nv = ctx ? ctx->size() : 0;
    auto divides = [&](const Mono& d, const Mono& m) {
      for (std::size_t i = 0; i < nv; ++i)
        if (exp_of(d, i) > exp_of(m, i)) return false;
      return true;
    };
    // Leading and trailing terms of a are products of those of q and b.
    if (!divides(b.terms_.front().first, a.terms_.front().first) || !divides(b.terms_.back().first, a.terms_.back().first))
      return std::nullopt;
    if (b.terms_.size() == 1) {
      const auto& [mb, c1] = b.terms_.front();
      GaussQ ic = c1.inverse();
      Poly q;
      q.ctx_ = ctx;
      q.terms_.reserve(a.terms_.size());
      for (const auto& [m, c] : a.terms_) {
        if (!divides(mb, m)) return std::nullopt;
        Mono r(nv, 0);
        for (std::size_t i = 0; i < nv; ++i) r[i] = static_cast<std::uint16_t>(exp_of(m, i) - exp_of(mb, i));
        q.terms_.emplace_back(std::move(r), c * ic);
      }
      return q;
    }
    const auto& [lb, cb] = b.terms_.front();
    GaussQ icb = cb.inverse();
    Poly rem = a, q;
    q.ctx_ = ctx;
    std::size_t n = ctx ? ctx->size() : 0;
    while (!rem.is_zero()) {
      const auto& [lr, cr] = rem.terms_.front();
      Mono m(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        int d = int(exp_of(lr, i)) - int(exp_of(lb, i));
        if (d < 0) return std::nullopt;
        m[i] = static_cast<std::uint16_t>(d);
      }
      Poly t;
      t.ctx_ = ctx;
      t.terms_.emplace_back(std::move(m), cr * icb);
      rem = rem - t * b;
      q = q + t;
    }
    return q;
  }

  /// Coefficients of this viewed as a polynomial in variable v.
  std::vector<Poly> coefficients_in(std::size_t v) const {
    std::vector<Poly> out(degree_in(v) + 1);
    for (auto& p : out) p.ctx_ = ctx_;
    for (const auto& [m, c] : terms_) {
      auto e = exp_of(m, v);
      Mono mm = m;
      if (v < mm.size()) mm[v] = 0;
      out[e].terms_.emplace_back(std::move(mm), c);
    }
    for (auto& p : out) p.sort();
    return out;
  }

  static Poly from_coefficients(const std::vector<Poly>& cs, std::size_t v, const SymbolContextPtr& ctx) {
    Poly r;
    r.ctx_ = ctx;
    for (std::size_t e = 0; e < cs.size(); ++e)
      for (const auto& [m, c] : cs[e].terms_) {
        Mono mm(ctx->size(), 0);
        for (std::size_t i = 0; i < m.size(); ++i) mm[i] = m[i];
        mm[v] = static_cast<std::uint16_t>(e);
        r.terms_.emplace_back(std::move(mm), c);
      }
    r.sort();
    return r;
  }

  static Poly gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    if (a.is_constant() || b.is_constant()) return Poly(1);
    auto ctx = unify(a, b);
    if (a == b) return a.monic();
    if (a.terms_.size() == 1 || b.terms_.size() == 1) {
      Mono ma = a.min_exponents(), mb = b.min_exponents(), mg(ctx->size(), 0);
      for (std::size_t i = 0; i < mg.size(); ++i) mg[i] = std::min(exp_of(ma, i), exp_of(mb, i));
      Poly m;
      m.ctx_ = ctx;
      m.terms_.emplace_back(std::move(mg), GaussQ(1));
      return m;
    }
    if (a.terms_.size() <= b.terms_.size()) {
      if (divide_exact(b, a)) return a.monic();
    } else if (divide_exact(a, b)) {
      return b.monic();
    }
    // Pull out the common monomial factor first.
    std::size_t n = ctx->size();
    Mono ma = a.min_exponents(), mb = b.min_exponents(), mg(n, 0);
    bool has_mono = false;
    for (std::size_t i = 0; i < n; ++i) {
      mg[i] = std::min(exp_of(ma, i), exp_of(mb, i));
      has_mono = has_mono || mg[i] > 0;
    }
    Poly pa = a.divide_monomial(ma), pb = b.divide_monomial(mb);
    Poly g = gcd_no_monomial(pa, pb, ctx);
    if (has_mono) {
      Poly m;
      m.ctx_ = ctx;
      m.terms_.emplace_back(mg, GaussQ(1));
      g = g * m;
    }
    return g.monic();
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [m, c] : terms_) {
      std::string mono;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i]) continue;
        if (!mono.empty()) mono += "*";
        mono += ctx_->names[i];
        if (m[i] > 1) mono += "^" + std::to_string(m[i]);
      }
      std::string coeff = c.to_string();
      if (!out.empty()) out += " + ";
      if (mono.empty()) out += coeff;
      else if (c == GaussQ(1)) out += mono;
      else out += "(" + coeff + ")*" + mono;
    }
    return out;
  }

  /// Builds from raw terms (any order, duplicates summed).
  static Poly from_terms(const SymbolContextPtr& ctx, std::vector<Term> terms) {
    Poly r;
    r.ctx_ = ctx;
    std::map<Mono, GaussQ, GreaterCmp> acc;
    for (auto& [m, c] : terms) {
      Mono mm(ctx ? ctx->size() : 0, 0);
      for (std::size_t i = 0; i < m.size() && i < mm.size(); ++i) mm[i] = m[i];
      acc[std::move(mm)] += c;
    }
    for (auto& [m, c] : acc)
      if (!c.is_zero()) r.terms_.emplace_back(m, std::move(c));
    return r;
  }

 private:
  struct GreaterCmp {
    bool operator()(const Mono& a, const Mono& b) const { return grlex_greater(a, b); }
  };

  void sort() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& x, const Term& y) { return grlex_greater(x.first, y.first); });
  }

  static SymbolContextPtr unify(const Poly& a, const Poly& b) {
    if (!a.ctx_) return b.ctx_;
    if (!b.ctx_ || a.ctx_ == b.ctx_) return a.ctx_;
    if (a.ctx_->names != b.ctx_->names) throw math_error("polynomials over different symbol sets");
    return a.ctx_;
  }

  static Poly combine(const Poly& a, const Poly& b, bool subtract) {
    Poly r;
    r.ctx_ = unify(a, b);
    std::size_t n = r.ctx_ ? r.ctx_->size() : 0;
    auto pad = [n](const Mono& m) {
      Mono mm(n, 0);
      for (std::size_t i = 0; i < m.size(); ++i) mm[i] = m[i];
      return mm;
    };
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() || (i < a.terms_.size() && grlex_greater(a.terms_[i].first, b.terms_[j].first))) {
        r.terms_.emplace_back(pad(a.terms_[i].first), a.terms_[i].second);
        ++i;
      } else if (i == a.terms_.size() || grlex_greater(b.terms_[j].first, a.terms_[i].first)) {
        r.terms_.emplace_back(pad(b.terms_[j].first), subtract ? -b.terms_[j].second : b.terms_[j].second);
        ++j;
      } else {
        GaussQ c = subtract ? a.terms_[i].second - b.terms_[j].second : a.terms_[i].second + b.terms_[j].second;
        if (!c.is_zero()) r.terms_.emplace_back(pad(a.terms_[i].first), std::move(c));
        ++i;
        ++j;
      }
    }
    return r;
  }

  Mono min_exponents() const {
    Mono m(nvars(), 0);
    bool first = true;
    for (const auto& [e, c] : terms_) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = first ? exp_of(e, i) : std::min(m[i], exp_of(e, i));
      first = false;
    }
    return m;
  }

  Poly divide_monomial(const Mono& d) const {
    Poly r = *this;
    for (auto& [m, c] : r.terms_)
      for (std::size_t i = 0; i < m.size() && i < d.size(); ++i) m[i] -= d[i];
    return r;
  }

  /// Pseudo-remainder of a by b in variable v.
  static Poly prem(Poly a, const Poly& b, std::size_t v) {
    auto bc = b.coefficients_in(v);
    std::size_t db = bc.size() - 1;
    const Poly& lb = bc.back();
    const auto& ctx = b.ctx_;
    while (!a.is_zero() && a.degree_in(v) >= db) {
      auto ac = a.coefficients_in(v);
      std::size_t da = ac.size() - 1;
      Mono shift(ctx->size(), 0);
      shift[v] = static_cast<std::uint16_t>(da - db);
      Poly xs;
      xs.ctx_ = ctx;
      xs.terms_.emplace_back(std::move(shift), GaussQ(1));
      a = lb * a - ac.back() * xs * b;
    }
    return a;
  }

  static Poly content_in(const Poly& p, std::size_t v) {
    auto cs = p.coefficients_in(v);
    Poly g;
    for (const auto& c : cs) {
      if (c.is_zero()) continue;
      g = g.is_zero() ? c.monic() : gcd(g, c);
      if (g.is_constant()) return Poly(1);
    }
    return g;
  }

  static Poly primitive_in(const Poly& p, std::size_t v) {
    Poly c = content_in(p, v);
    if (c.is_constant()) return p.monic();
    return divide_exact(p, c)->monic();
  }

  static Poly gcd_no_monomial(const Poly& a, const Poly& b, const SymbolContextPtr& ctx) {
    if (a.is_constant() || b.is_constant()) return Poly(1);
    std::size_t n = ctx->size();
    std::size_t v = n;
    for (std::size_t i = 0; i < n && v == n; ++i)
      if (a.uses(i) && b.uses(i)) v = i;
    if (v == n) return Poly(1);  // a common factor would use a shared variable
    Poly ca = content_in(a, v), cb = content_in(b, v);
    Poly c = gcd(ca, cb);
    Poly pa = ca.is_constant() ? a : *divide_exact(a, ca);
    Poly pb = cb.is_constant() ? b : *divide_exact(b, cb);
    if (pa.degree_in(v) < pb.degree_in(v)) std::swap(pa, pb);
    while (!pb.is_zero() && pb.degree_in(v) > 0) {
      Poly r = prem(pa, pb, v);
      pa = std::move(pb);
      pb = r.is_zero() ? r : primitive_in(r, v);
    }
    Poly g = pb.is_zero() ? primitive_in(pa, v) : Poly(1);
    return (c * g).monic();
  }

  std::vector<Term> terms_;
  SymbolContextPtr ctx_;
};

}  // namespace crjet
