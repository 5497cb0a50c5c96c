#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crjet/gaussq.hpp"

namespace crjet {

inline constexpr std::size_t kMaxVars = 16;

/// Exponent vector of a monomial; unused trailing slots are zero.
struct Exp {
  std::array<std::uint8_t, kMaxVars> e{};

  std::uint8_t& operator[](std::size_t i) { return e[i]; }
  std::uint8_t operator[](std::size_t i) const { return e[i]; }

  int total() const {
    int d = 0;
    for (auto x : e) d += x;
    return d;
  }
  friend Exp operator+(Exp a, const Exp& b) {
    for (std::size_t i = 0; i < kMaxVars; ++i) a.e[i] = static_cast<std::uint8_t>(a.e[i] + b.e[i]);
    return a;
  }
  friend bool operator==(const Exp& a, const Exp& b) { return a.e == b.e; }
  friend bool operator!=(const Exp& a, const Exp& b) { return !(a == b); }

  static Exp unit(std::size_t v, int power = 1) {
    Exp x;
    x.e[v] = static_cast<std::uint8_t>(power);
    return x;
  }
  static Exp from(const std::vector<int>& v) {
    if (v.size() > kMaxVars) throw std::invalid_argument("too many variables");
    Exp x;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0 || v[i] > 255) throw std::invalid_argument("exponent out of range");
      x.e[i] = static_cast<std::uint8_t>(v[i]);
    }
    return x;
  }
  std::vector<int> to_vector(std::size_t n) const { return std::vector<int>(e.begin(), e.begin() + n); }
};

struct ExpHash {
  std::size_t operator()(const Exp& x) const {
    std::uint64_t a, b;
    std::memcpy(&a, x.e.data(), 8);
    std::memcpy(&b, x.e.data() + 8, 8);
    return std::hash<std::uint64_t>()(a * 0x9E3779B97F4A7C15ull ^ b);
  }
};

/// Graded lexicographic "a < b" (total degree first, then earlier variables dominate).
inline bool grlex_less(const Exp& a, const Exp& b) {
  int da = a.total(), db = b.total();
  if (da != db) return da < db;
  for (std::size_t i = 0; i < kMaxVars; ++i)
    if (a.e[i] != b.e[i]) return a.e[i] < b.e[i];
  return false;
}

namespace detail {
template <class R>
bool ring_is_zero(const R& x) {
  return is_zero(x);
}
}  // namespace detail

class Space;
using SpacePtr = std::shared_ptr<const Space>;

/// Ordered variable names plus the truncation: a monomial is kept when
/// sum(weight_v * e_v) <= degree and e_v <= cap_v for every capped variable.
class Space {
 public:
  static SpacePtr make(std::vector<std::string> names, int degree) {
    std::vector<int> w(names.size(), 1), c(names.size(), -1);
    return make(std::move(names), std::move(w), degree, std::move(c));
  }
  static SpacePtr make(std::vector<std::string> names, std::vector<int> weights, int degree,
                       std::vector<int> caps = {}) {
    if (caps.empty()) caps.assign(names.size(), -1);
    if (names.size() > kMaxVars) throw std::invalid_argument("at most 16 series variables");
    if (weights.size() != names.size() || caps.size() != names.size())
      throw std::invalid_argument("space: weights/caps length mismatch");
    if (degree < 0 || degree > 127) throw std::invalid_argument("space: degree must lie in [0, 127]");
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (weights[i] < 1) throw std::invalid_argument("space: weights must be positive");
      if (caps[i] > 127) throw std::invalid_argument("space: cap too large");
      for (std::size_t j = 0; j < i; ++j)
        if (names[i] == names[j]) throw std::invalid_argument("space: duplicate variable " + names[i]);
    }
    auto s = std::shared_ptr<Space>(new Space());
    s->names_ = std::move(names);
    s->weights_ = std::move(weights);
    s->caps_ = std::move(caps);
    s->degree_ = degree;
    return s;
  }

  std::size_t nvars() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t v) const { return names_[v]; }
  const std::vector<int>& weights() const { return weights_; }
  const std::vector<int>& caps() const { return caps_; }
  int weight(std::size_t v) const { return weights_[v]; }
  int cap(std::size_t v) const { return caps_[v]; }
  int degree() const { return degree_; }
  bool is_plain() const {
    for (std::size_t i = 0; i < nvars(); ++i)
      if (weights_[i] != 1 || caps_[i] >= 0) return false;
    return true;
  }

  std::optional<std::size_t> find(const std::string& n) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == n) return i;
    return std::nullopt;
  }
  std::size_t index(const std::string& n) const {
    auto i = find(n);
    if (!i) throw math_error("unknown variable: " + n);
    return *i;
  }

  int weighted(const Exp& x) const {
    int d = 0;
    for (std::size_t i = 0; i < nvars(); ++i) d += weights_[i] * x[i];
    return d;
  }
  bool contains(const Exp& x) const {
    if (weighted(x) > degree_) return false;
    for (std::size_t i = 0; i < nvars(); ++i)
      if (caps_[i] >= 0 && x[i] > caps_[i]) return false;
    return true;
  }
  /// Largest exponent of variable v inside the truncation.
  int bound(std::size_t v) const {
    int b = degree_ / weights_[v];
    return caps_[v] >= 0 ? std::min(b, caps_[v]) : b;
  }

  /// The truncation on which a partial derivative in v is still exact.
  SpacePtr after_derivative(std::size_t v) const {
    auto caps = caps_;
    if (caps[v] >= 0) caps[v] = std::max(0, caps[v] - 1);
    return make(names_, weights_, std::max(0, degree_ - weights_[v]), caps);
  }
  SpacePtr with_degree(int d) const { return make(names_, weights_, d, caps_); }
  SpacePtr with_caps(std::vector<int> caps) const { return make(names_, weights_, degree_, std::move(caps)); }
  SpacePtr without(const std::vector<std::string>& drop) const {
    std::vector<std::string> n;
    std::vector<int> w, c;
    for (std::size_t i = 0; i < nvars(); ++i) {
      if (std::find(drop.begin(), drop.end(), names_[i]) != drop.end()) continue;
      n.push_back(names_[i]);
      w.push_back(weights_[i]);
      c.push_back(caps_[i]);
    }
    return make(n, w, degree_, c);
  }
  SpacePtr renamed(const std::vector<std::string>& names) const { return make(names, weights_, degree_, caps_); }

  /// Intersection of two truncations over the same variables and weights.
  static SpacePtr meet(const SpacePtr& a, const SpacePtr& b) {
    if (a == b || *a == *b) return a;
    if (a->names_ != b->names_ || a->weights_ != b->weights_) throw math_error("rebase required: incompatible spaces");
    std::vector<int> caps(a->nvars());
    for (std::size_t i = 0; i < caps.size(); ++i) {
      int x = a->caps_[i], y = b->caps_[i];
      caps[i] = x < 0 ? y : (y < 0 ? x : std::min(x, y));
    }
    return make(a->names_, a->weights_, std::min(a->degree_, b->degree_), caps);
  }

  friend bool operator==(const Space& a, const Space& b) {
    return a.degree_ == b.degree_ && a.names_ == b.names_ && a.weights_ == b.weights_ && a.caps_ == b.caps_;
  }

 private:
  Space() = default;
  std::vector<std::string> names_;
  std::vector<int> weights_;
  std::vector<int> caps_;
  int degree_ = 0;
};

inline bool same_space(const SpacePtr& a, const SpacePtr& b) { return a == b || *a == *b; }

/// Sparse truncated multivariate power series with coefficients in R.
/// Terms are sorted in ascending graded-lexicographic order, contain no zero
/// coefficient and lie inside the truncation of the space.
template <class R>
class Series {
 public:
  using Term = std::pair<Exp, R>;

  Series() = default;
  explicit Series(SpacePtr s) : space_(std::move(s)) {}

  static Series constant(SpacePtr s, R c) {
    Series r(std::move(s));
    if (!detail::ring_is_zero(c)) r.terms_.emplace_back(Exp{}, std::move(c));
    return r;
  }
  static Series variable(SpacePtr s, std::size_t v) {
    Series r(std::move(s));
    Exp x = Exp::unit(v);
    if (r.space_->contains(x)) r.terms_.emplace_back(x, R(1));
    return r;
  }
  static Series variable(SpacePtr s, const std::string& name) {
    auto v = s->index(name);
    return variable(std::move(s), v);
  }
  static Series monomial(SpacePtr s, const Exp& x, R c) {
    Series r(std::move(s));
    if (r.space_->contains(x) && !detail::ring_is_zero(c)) r.terms_.emplace_back(x, std::move(c));
    return r;
  }
  /// Sums duplicates, drops zeros and terms outside the truncation.
  static Series from_terms(SpacePtr s, std::vector<Term> terms) {
    Series r(std::move(s));
    std::unordered_map<Exp, std::size_t, ExpHash> pos;
    for (auto& [x, c] : terms) {
      if (!r.space_->contains(x)) continue;
      auto it = pos.find(x);
      if (it == pos.end()) {
        pos.emplace(x, r.terms_.size());
        r.terms_.emplace_back(x, std::move(c));
      } else {
        r.terms_[it->second].second += c;
      }
    }
    r.canonicalize();
    return r;
  }

  const SpacePtr& space_ptr() const { return space_; }
  const Space& space() const { return *space_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  R coefficient(const Exp& x) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), x,
                               [](const Term& t, const Exp& k) { return grlex_less(t.first, k); });
    if (it != terms_.end() && it->first == x) return it->second;
    return R(0);
  }
  R constant_term() const {
    if (!terms_.empty() && terms_.front().first.total() == 0) return terms_.front().second;
    return R(0);
  }
  /// Lowest total degree of a nonzero term, or -1 for the zero series.
  int order() const { return terms_.empty() ? -1 : terms_.front().first.total(); }
  /// Lowest weighted degree of a nonzero term, or -1.
  int weighted_order() const {
    int o = -1;
    for (const auto& t : terms_) {
      int d = space_->weighted(t.first);
      if (o < 0 || d < o) o = d;
    }
    return o;
  }
  int max_degree_in(std::size_t v) const {
    int d = 0;
    for (const auto& t : terms_) d = std::max<int>(d, t.first[v]);
    return d;
  }

  template <class F>
  Series map_coefficients(F f) const {
    Series r(space_);
    for (const auto& [x, c] : terms_) {
      R y = f(c);
      if (!detail::ring_is_zero(y)) r.terms_.emplace_back(x, std::move(y));
    }
    return r;
  }
  /// Keeps the terms satisfying pred(exp).
  template <class P>
  Series filter(P pred) const {
    Series r(space_);
    for (const auto& t : terms_)
      if (pred(t.first)) r.terms_.push_back(t);
    return r;
  }

  Series operator-() const {
    return map_coefficients([](const R& c) { return -c; });
  }
  Series& operator+=(const Series& o) { return *this = *this + o; }
  Series& operator-=(const Series& o) { return *this = *this - o; }
  Series& operator*=(const Series& o) { return *this = *this * o; }

  friend Series operator+(const Series& a, const Series& b) { return merge(a, b, false); }
  friend Series operator-(const Series& a, const Series& b) { return merge(a, b, true); }
  friend Series operator*(const Series& a, const Series& b) { return multiply(a, b); }
  friend Series operator*(const R& c, const Series& a) { return a.scaled(c); }
  friend Series operator*(const Series& a, const R& c) { return a.scaled(c); }

  Series scaled(const R& c) const {
    if (detail::ring_is_zero(c)) return Series(space_);
    return map_coefficients([&](const R& x) { return x * c; });
  }

  friend bool operator==(const Series& a, const Series& b) {
    if (!same_space(a.space_, b.space_)) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].first != b.terms_[i].first || a.terms_[i].second != b.terms_[i].second) return false;
    return true;
  }
  friend bool operator!=(const Series& a, const Series& b) { return !(a == b); }

  /// Re-expresses the series in another space, matching variables by name and
  /// dropping terms outside the new truncation.
  Series rebase(const SpacePtr& target) const {
    if (same_space(space_, target)) return Series(target, terms_);
    std::vector<int> map(space_->nvars(), -1);
    for (std::size_t i = 0; i < space_->nvars(); ++i)
      if (auto j = target->find(space_->name(i))) map[i] = static_cast<int>(*j);
    Series r(target);
    for (const auto& [x, c] : terms_) {
      Exp y;
      bool ok = true;
      for (std::size_t i = 0; i < space_->nvars() && ok; ++i) {
        if (!x[i]) continue;
        if (map[i] < 0) {
          ok = false;
          throw math_error("rebase: variable " + space_->name(i) + " missing in target");
        }
        y[map[i]] = x[i];
      }
      if (target->contains(y)) r.terms_.emplace_back(y, c);
    }
    r.canonicalize();
    return r;
  }

  /// Sets the listed variables to zero.
  Series vanish(const std::vector<std::size_t>& vars) const {
    return filter([&](const Exp& x) {
      for (auto v : vars)
        if (x[v]) return false;
      return true;
    });
  }

  /// Coefficient of var^p, as a series in the same space without var.
  Series coefficient_of(std::size_t var, int p) const {
    Series r(space_);
    for (const auto& [x, c] : terms_)
      if (x[var] == p) {
        Exp y = x;
        y[var] = 0;
        r.terms_.emplace_back(y, c);
      }
    r.canonicalize();
    return r;
  }

 private:
  Series(SpacePtr s, std::vector<Term> t) : space_(std::move(s)), terms_(std::move(t)) {}

  void canonicalize() {
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const Term& t) { return detail::ring_is_zero(t.second); }),
                 terms_.end());
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return grlex_less(a.first, b.first); });
  }

  static void check(const Series& a, const Series& b) {
    if (!a.space_ || !b.space_) throw math_error("series without a space");
    if (!same_space(a.space_, b.space_)) throw math_error("rebase required: series live in different spaces");
  }

  static Series merge(const Series& a, const Series& b, bool subtract) {
    check(a, b);
    Series r(a.space_);
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() || (i < a.terms_.size() && grlex_less(a.terms_[i].first, b.terms_[j].first))) {
        r.terms_.push_back(a.terms_[i++]);
      } else if (i == a.terms_.size() || grlex_less(b.terms_[j].first, a.terms_[i].first)) {
        r.terms_.emplace_back(b.terms_[j].first, subtract ? -b.terms_[j].second : b.terms_[j].second);
        ++j;
      } else {
        R c = subtract ? a.terms_[i].second - b.terms_[j].second : a.terms_[i].second + b.terms_[j].second;
        if (!detail::ring_is_zero(c)) r.terms_.emplace_back(a.terms_[i].first, std::move(c));
        ++i;
        ++j;
      }
    }
    return r;
  }

  static Series multiply(const Series& a, const Series& b) {
    check(a, b);
    const Space& sp = *a.space_;
    Series r(a.space_);
    if (a.is_zero() || b.is_zero()) return r;
    if (b.terms_.size() == 1) return a.times_term(b.terms_[0]);
    if (a.terms_.size() == 1) return b.times_term(a.terms_[0]);

    std::size_t n = sp.nvars();
    std::vector<int> bounds(n);
    std::size_t box = 1;
    for (std::size_t v = 0; v < n; ++v) {
      bounds[v] = sp.bound(v);
      box *= static_cast<std::size_t>(bounds[v] + 1);
      if (box > (std::size_t(1) << 22)) break;
    }
    // Order b by weighted degree so the inner loop can stop early.
    std::vector<std::pair<int, std::size_t>> bw(b.terms_.size());
    for (std::size_t j = 0; j < bw.size(); ++j) bw[j] = {sp.weighted(b.terms_[j].first), j};
    std::sort(bw.begin(), bw.end());
    const int D = sp.degree();

    std::vector<Term> out;
    auto fits = [&](const Exp& x, const Exp& y) {
      for (std::size_t v = 0; v < n; ++v)
        if (sp.cap(v) >= 0 && x[v] + y[v] > sp.cap(v)) return false;
      return true;
    };
    if (box <= (std::size_t(1) << 22)) {
      std::vector<std::size_t> stride(n);
      std::size_t s = 1;
      for (std::size_t v = 0; v < n; ++v) {
        stride[v] = s;
        s *= static_cast<std::size_t>(bounds[v] + 1);
      }
      std::vector<std::int32_t> slot(box, -1);
      for (const auto& [xa, ca] : a.terms_) {
        int wa = sp.weighted(xa);
        for (const auto& [wb, j] : bw) {
          if (wa + wb > D) break;
          const auto& [xb, cb] = b.terms_[j];
          if (!fits(xa, xb)) continue;
          std::size_t idx = 0;
          for (std::size_t v = 0; v < n; ++v) idx += static_cast<std::size_t>(xa[v] + xb[v]) * stride[v];
          auto& sl = slot[idx];
          if (sl < 0) {
            sl = static_cast<std::int32_t>(out.size());
            out.emplace_back(xa + xb, R(0));
          }
          add_product(out[sl].second, ca, cb);
        }
      }
    } else {
      std::unordered_map<Exp, std::size_t, ExpHash> pos;
      for (const auto& [xa, ca] : a.terms_) {
        int wa = sp.weighted(xa);
        for (const auto& [wb, j] : bw) {
          if (wa + wb > D) break;
          const auto& [xb, cb] = b.terms_[j];
          if (!fits(xa, xb)) continue;
          Exp x = xa + xb;
          auto [it, fresh] = pos.emplace(x, out.size());
          if (fresh) out.emplace_back(x, R(0));
          add_product(out[it->second].second, ca, cb);
        }
      }
    }
    r.terms_ = std::move(out);
    r.canonicalize();
    return r;
  }

  /// Product with a single term; monomial orders are preserved by shifts.
  Series times_term(const Term& t) const {
    Series r(space_);
    r.terms_.reserve(terms_.size());
    for (const auto& [x, c] : terms_) {
      Exp y = x + t.first;
      bool ok = true;
      for (std::size_t v = 0; v < space_->nvars() && ok; ++v)
        ok = space_->caps()[v] < 0 || y[v] <= space_->caps()[v];
      if (!ok || space_->weighted(y) > space_->degree()) continue;
      R p = c * t.second;
      if (!detail::ring_is_zero(p)) r.terms_.emplace_back(y, std::move(p));
    }
    return r;
  }

  SpacePtr space_;
  std::vector<Term> terms_;
};

/// Ordered tuple of series over a common space (maps, z-parts, ...).
template <class R>
using SeriesTuple = std::vector<Series<R>>;

/// Human-readable form, e.g. "(2i) z*chi + tau". Zero prints as "0".
template <class R>
std::string to_string(const Series<R>& s) {
  if (s.is_zero()) return "0";
  std::string out;
  for (const auto& [x, c] : s.terms()) {
    if (!out.empty()) out += " + ";
    std::string mono;
    for (std::size_t v = 0; v < s.space().nvars(); ++v) {
      if (!x[v]) continue;
      if (!mono.empty()) mono += "*";
      mono += s.space().name(v);
      if (x[v] > 1) mono += "^" + std::to_string(x[v]);
    }
    std::string cs = c.to_string();
    if (mono.empty()) out += cs;
    else if (cs == "1") out += mono;
    else out += "(" + cs + ") " + mono;
  }
  return out;
}

template <class R>
std::ostream& operator<<(std::ostream& os, const Series<R>& s) {
  return os << to_string(s);
}

}  // namespace crjet
