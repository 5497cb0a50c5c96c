#pragma once

// Real hypersurfaces M = {rho(Z, conj Z) = 0} in C^{n+1}: parsing,
// complexification, normal coordinates and the nondegeneracy order.

#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crjet/linalg.hpp"
#include "crjet/series.hpp"
#include "crjet/series_ops.hpp"

namespace crjet {

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class precondition_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::vector<GaussQ>;

/// Variable names for C^{n+1} and its complexification: z.., w, chi.., tau.
struct Coordinates {
  int n = 1;
  std::vector<std::string> z, chi;
  std::string w = "w", tau = "tau";

  static Coordinates make(int n) {
    if (n < 1 || 2 * (n + 1) > static_cast<int>(kMaxVars)) throw std::invalid_argument("unsupported dimension");
    Coordinates c;
    c.n = n;
    for (int i = 0; i < n; ++i) {
      std::string suffix = n == 1 ? "" : std::to_string(i + 1);
      c.z.push_back("z" + suffix);
      c.chi.push_back("chi" + suffix);
    }
    return c;
  }
  int N() const { return n + 1; }
  /// Holomorphic coordinates z.., w.
  std::vector<std::string> holomorphic() const {
    auto r = z;
    r.push_back(w);
    return r;
  }
  /// Conjugate coordinates chi.., tau.
  std::vector<std::string> antiholomorphic() const {
    auto r = chi;
    r.push_back(tau);
    return r;
  }
  std::vector<std::string> all() const {
    auto r = holomorphic();
    for (const auto& s : antiholomorphic()) r.push_back(s);
    return r;
  }
  /// (z, chi, tau): the variables of Q.
  std::vector<std::string> q_vars() const {
    auto r = z;
    r.insert(r.end(), chi.begin(), chi.end());
    r.push_back(tau);
    return r;
  }
  /// (z, w, chi): the chart of the complexified hypersurface used for reflection.
  std::vector<std::string> zwchi_vars() const {
    auto r = holomorphic();
    r.insert(r.end(), chi.begin(), chi.end());
    return r;
  }
  std::map<std::string, std::string> swap() const {
    std::map<std::string, std::string> m;
    for (int i = 0; i < n; ++i) {
      m[z[i]] = chi[i];
      m[chi[i]] = z[i];
    }
    m[w] = tau;
    m[tau] = w;
    return m;
  }
  bool operator==(const Coordinates& o) const { return n == o.n; }
};

/// Complexified defining function, kept as an exact polynomial.
struct DefiningFunction {
  Coordinates coords;
  Series<GaussQ> rho;  // in coords.all(), real: conj-swap(rho) == rho
  int order = 0;       // truncation degree D for derived series
  Point origin;        // original coordinates of the current origin
  std::string source;
};

namespace detail {

class DslParser {
 public:
  DslParser(std::string_view text, int n_hint) : text_(text) {
    int n = n_hint > 0 ? n_hint : scan_dimension();
    coords_ = Coordinates::make(n);
    space_ = Space::make(coords_.all(), 127);
  }

  const Coordinates& coords() const { return coords_; }
  const SpacePtr& space() const { return space_; }

  Series<GaussQ> equation() {
    std::size_t eq = text_.find('=');
    if (eq == std::string_view::npos) fail(text_.size(), "expected an equation 'LHS = RHS'");
    if (text_.find('=', eq + 1) != std::string_view::npos) fail(eq, "more than one '='");
    skip_ws();
    std::size_t save = pos_;
    bool rho_form = false;
    if (ident_at(pos_) == "rho") {
      pos_ += 3;
      skip_ws();
      rho_form = pos_ == eq;
      if (!rho_form) pos_ = save;
    }
    Series<GaussQ> lhs(space_);
    if (!rho_form) {
      lhs = expr();
      skip_ws();
      if (pos_ != eq) fail(pos_, "unexpected input before '='");
    }
    pos_ = eq + 1;
    Series<GaussQ> rhs = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(pos_, "unexpected trailing input");
    return rho_form ? rhs : lhs - rhs;
  }

  Series<GaussQ> expression() {
    Series<GaussQ> v = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(pos_, "unexpected trailing input");
    return v;
  }

  GaussQ constant() {
    Series<GaussQ> v = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(pos_, "unexpected trailing input");
    for (const auto& [x, c] : v.terms())
      if (x.total() != 0) fail(0, "expected a constant");
    return v.constant_term();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int bar_depth_ = 0;
  Coordinates coords_;
  SpacePtr space_;

  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw parse_error("parse error at column " + std::to_string(at + 1) + ": " + what);
  }

  std::string ident_at(std::size_t p) const {
    std::size_t q = p;
    while (q < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[q])) || text_[q] == '_')) ++q;
    if (q == p || std::isdigit(static_cast<unsigned char>(text_[p]))) return {};
    return std::string(text_.substr(p, q - p));
  }

  int scan_dimension() const {
    int n = 0;
    bool plain = false;
    for (std::size_t p = 0; p < text_.size();) {
      std::string id = ident_at(p);
      if (id.empty()) {
        ++p;
        continue;
      }
      if (id == "z") plain = true;
      if (id.size() > 1 && id[0] == 'z' && id.find_first_not_of("0123456789", 1) == std::string::npos)
        n = std::max(n, std::stoi(id.substr(1)));
      p += id.size();
    }
    if (plain && n > 0) fail(0, "mixing z with indexed z1..zn");
    return std::max(n, 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) fail(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  Series<GaussQ> conj_of(const Series<GaussQ>& x) const {
    return conjugate_series(x, coords_.swap()).rebase(space_);
  }
  Series<GaussQ> mul(const Series<GaussQ>& a, const Series<GaussQ>& b) {
    int da = 0, db = 0;
    for (const auto& t : a.terms()) da = std::max(da, t.first.total());
    for (const auto& t : b.terms()) db = std::max(db, t.first.total());
    if (da + db > space_->degree()) fail(pos_, "polynomial degree too large");
    return a * b;
  }

  Series<GaussQ> expr() {
    skip_ws();
    Series<GaussQ> acc(space_);
    bool first = true;
    for (;;) {
      bool neg = false;
      if (peek('+') || peek('-')) {
        neg = text_[pos_] == '-';
        ++pos_;
      } else if (!first) {
        return acc;
      }
      Series<GaussQ> t = term();
      acc = neg ? acc - t : acc + t;
      first = false;
    }
  }

  bool starts_factor() {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    char c = text_[pos_];
    if (c == '|') return bar_depth_ == 0;
    return c == '(' || std::isalnum(static_cast<unsigned char>(c)) || c == '.';
  }

  Series<GaussQ> term() {
    Series<GaussQ> acc = power();
    for (;;) {
      if (peek('*')) {
        ++pos_;
        acc = mul(acc, power());
      } else if (peek('/')) {
        std::size_t at = ++pos_;
        Series<GaussQ> d = power();
        bool constant = true;
        for (const auto& t : d.terms()) constant = constant && t.first.total() == 0;
        if (!constant || d.is_zero()) fail(at, "division only by a nonzero constant");
        acc = acc.scaled(inverse(d.constant_term()));
      } else if (starts_factor()) {
        acc = mul(acc, power());
      } else {
        return acc;
      }
    }
  }

  int exponent() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail(start, "expected a non-negative integer exponent");
    if (pos_ - start > 4) fail(start, "exponent too large");
    return std::stoi(std::string(text_.substr(start, pos_ - start)));
  }

  Series<GaussQ> pow(const Series<GaussQ>& x, int e) {
    Series<GaussQ> r = Series<GaussQ>::constant(space_, GaussQ(1));
    for (int k = 0; k < e; ++k) r = mul(r, x);
    return r;
  }

  Series<GaussQ> power() {
    skip_ws();
    if (peek('-')) {
      ++pos_;
      return -power();
    }
    if (peek('|')) {
      std::size_t at = pos_++;
      ++bar_depth_;
      Series<GaussQ> inner = expr();
      --bar_depth_;
      expect('|');
      if (!peek('^')) fail(at, "|x| must be raised to an even power");
      ++pos_;
      int e = exponent();
      if (e % 2) fail(at, "|x| must be raised to an even power");
      return pow(mul(inner, conj_of(inner)), e / 2);
    }
    Series<GaussQ> base = primary();
    if (peek('^')) {
      ++pos_;
      base = pow(base, exponent());
    }
    return base;
  }

  Series<GaussQ> number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    mpz_class num(start == pos_ ? std::string("0") : std::string(text_.substr(start, pos_ - start)));
    mpz_class den = 1;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::size_t fs = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      for (std::size_t k = fs; k < pos_; ++k) {
        num = num * 10 + (text_[k] - '0');
        den *= 10;
      }
      if (fs == pos_ && start + 1 == pos_) fail(start, "malformed number");
    }
    mpq_class q(num, den);
    q.canonicalize();
    return Series<GaussQ>::constant(space_, GaussQ(q));
  }

  Series<GaussQ> primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail(pos_, "unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      int saved = bar_depth_;
      bar_depth_ = 0;
      Series<GaussQ> v = expr();
      bar_depth_ = saved;
      expect(')');
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    std::size_t at = pos_;
    std::string id = ident_at(pos_);
    if (id.empty()) fail(pos_, std::string("unexpected character '") + c + "'");
    pos_ += id.size();
    if (id == "i") return Series<GaussQ>::constant(space_, GaussQ::I());
    if (id == "conj" || id == "Re" || id == "Im" || id == "re" || id == "im") {
      Series<GaussQ> arg = peek('(') ? primary() : power();
      Series<GaussQ> cj = conj_of(arg);
      if (id == "conj") return cj;
      if (id == "Re" || id == "re") return (arg + cj).scaled(GaussQ(mpq_class(1, 2)));
      return (arg - cj).scaled(inverse(GaussQ(0, 2)));
    }
    if (auto v = space_->find(id); v && (id == coords_.w || std::find(coords_.z.begin(), coords_.z.end(), id) !=
                                                                 coords_.z.end()))
      return Series<GaussQ>::variable(space_, *v);
    fail(at, "unknown identifier '" + id + "'");
  }
};

inline Series<GaussQ> conj_swap(const Series<GaussQ>& f, const Coordinates& c) {
  return conjugate_series(f, c.swap()).rebase(f.space_ptr());
}

inline int polynomial_degree(const Series<GaussQ>& f) {
  int d = 0;
  for (const auto& t : f.terms()) d = std::max(d, t.first.total());
  return d;
}

}  // namespace detail

/// Parses one constant Gaussian-rational expression such as "1/2", "5i/16" or "1-i".
inline GaussQ parse_constant(std::string_view text) { return detail::DslParser(text, 1).constant(); }

/// Parses a point "(a, b)" or "a,b" with N coordinates.
inline std::vector<std::string> split_tuple(std::string_view text);

inline Point parse_point(std::string_view text, int N) {
  Point p;
  for (const auto& part : split_tuple(text)) p.push_back(parse_constant(part));
  if (static_cast<int>(p.size()) != N)
    throw parse_error("base point needs " + std::to_string(N) + " coordinates, got " + std::to_string(p.size()));
  return p;
}

/// Splits "(a, b, ...)" or "a, b, ..." at top-level commas.
inline std::vector<std::string> split_tuple(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    int depth = 0;
    bool outer = true;
    for (std::size_t k = 0; k + 1 < s.size() && outer; ++k) {
      depth += s[k] == '(' ? 1 : s[k] == ')' ? -1 : 0;
      outer = depth > 0;
    }
    if (outer) s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= s.size(); ++k) {
    if (k == s.size() || (s[k] == ',' && depth == 0)) {
      parts.push_back(s.substr(start, k - start));
      start = k + 1;
    } else if (s[k] == '(') {
      ++depth;
    } else if (s[k] == ')') {
      --depth;
    }
  }
  return parts;
}

/// Parses a holomorphic polynomial map "(f1, ..., g)" in (z.., w), truncated to degree D.
inline SeriesTuple<GaussQ> parse_map(std::string_view text, const Coordinates& C, int D) {
  auto parts = split_tuple(text);
  if (static_cast<int>(parts.size()) != C.N())
    throw parse_error("map needs " + std::to_string(C.N()) + " components, got " + std::to_string(parts.size()));
  auto hs = Space::make(C.holomorphic(), D);
  SeriesTuple<GaussQ> out;
  for (const auto& part : parts) {
    detail::DslParser parser(part, C.n);
    Series<GaussQ> f = parser.expression();
    for (const auto& [x, c] : f.terms())
      for (const auto& nm : C.antiholomorphic())
        if (x[parser.space()->index(nm)]) throw parse_error("map component '" + part + "' is not holomorphic");
    out.push_back(f.rebase(hs));
  }
  return out;
}

/// Parses "Im w = EXPR", "rho = EXPR" or any "LHS = RHS" and complexifies it.
/// The result is rescaled by a constant so that it is exactly real.
inline DefiningFunction parse_hypersurface(std::string_view text, int order, int n_hint = 0) {
  detail::DslParser parser(text, n_hint);
  Series<GaussQ> rho = parser.equation();
  const Coordinates& C = parser.coords();
  if (rho.is_zero()) throw parse_error("the equation is trivial");
  Series<GaussQ> rc = detail::conj_swap(rho, C);
  // rc == u * rho with |u| = 1 for a real equation; then (1 + u) rho, or i rho for u = -1, is real.
  const auto& [x0, c0] = rho.terms().front();
  GaussQ u = rc.coefficient(x0) / c0;
  if (u.norm() != 1 || rc != rho.scaled(u)) throw parse_error("not a real equation: conj(rho) is not a unit multiple");
  if (u != GaussQ(1)) rho = rho.scaled(u == GaussQ(-1) ? GaussQ::I() : GaussQ(1) + u);
  int deg = std::max(1, detail::polynomial_degree(rho));
  DefiningFunction df;
  df.coords = C;
  df.rho = rho.rebase(Space::make(C.all(), deg));
  df.order = order;
  df.origin = Point(C.N(), GaussQ(0));
  df.source = std::string(text);
  return df;
}

inline bool lies_on(const DefiningFunction& df, const Point& p) {
  if (static_cast<int>(p.size()) != df.coords.N()) throw precondition_error("point has the wrong dimension");
  Point full = p;
  for (const auto& c : p) full.push_back(conj(c));
  return is_zero(evaluate_point(df.rho, full));
}

/// Translates the defining function so that the point p becomes the origin.
inline DefiningFunction recenter(const DefiningFunction& df, const Point& p) {
  if (!lies_on(df, p)) throw precondition_error("base point does not lie on the hypersurface");
  const Coordinates& C = df.coords;
  const SpacePtr& sp = df.rho.space_ptr();
  std::map<std::string, Series<GaussQ>> shift;
  auto hol = C.holomorphic(), anti = C.antiholomorphic();
  for (int k = 0; k < C.N(); ++k) {
    shift.emplace(hol[k], Series<GaussQ>::variable(sp, hol[k]) + Series<GaussQ>::constant(sp, p[k]));
    shift.emplace(anti[k], Series<GaussQ>::variable(sp, anti[k]) + Series<GaussQ>::constant(sp, conj(p[k])));
  }
  DefiningFunction r = df;
  r.rho = substitute(df.rho, shift, sp, true);
  for (int k = 0; k < C.N(); ++k) r.origin[k] += p[k];
  return r;
}

/// M in normal coordinates: w = Q(z, chi, tau) with Q(z,0,tau) = Q(0,chi,tau) = tau.
struct NormalForm {
  Coordinates coords;
  Series<GaussQ> Q;             // in coords.q_vars(), degree D
  SeriesTuple<GaussQ> change;   // original (z.., w) as series in the normal (z.., w)
  Point base_point;             // original coordinates of the normal origin
  std::string source;
  bool polynomial = false;      // Q and the change are exact polynomials
  DefiningFunction input;       // what was normalized, and where
  Point input_point;

  int order() const { return Q.space().degree(); }

  /// Q truncated at another degree; recomputed unless Q is an exact polynomial.
  Series<GaussQ> Q_at(int degree) const;

  /// conj(Q)(chi, z, w), expressed in the (z, w, chi) chart.
  Series<GaussQ> conj_Q() const {
    auto m = coords.swap();
    auto c = conjugate_series(Q, m);
    return c.rebase(Space::make(coords.zwchi_vars(), order()));
  }
};

/// rho(change(z, Q), conj change(chi, tau)) in (z, chi, tau) at the given
/// degree; degree 0 picks the degree at which the composition is exact.
/// Vanishing certifies that w = Q describes M in the recorded coordinates.
inline Series<GaussQ> normal_form_residual(const DefiningFunction& df, const NormalForm& nf, int degree) {
  using S = Series<GaussQ>;
  const Coordinates& C = nf.coords;
  if (degree == 0) {
    int dq = detail::polynomial_degree(nf.Q), dc = 1;
    for (const auto& c : nf.change) dc = std::max(dc, detail::polynomial_degree(c));
    degree = std::min(127, detail::polynomial_degree(df.rho) * dc * std::max(1, dq));
  }
  auto qs = Space::make(C.q_vars(), degree);
  auto hs = Space::make(C.holomorphic(), degree);
  S Q = nf.Q.rebase(qs);
  std::map<std::string, S> a;
  auto hol = C.holomorphic(), anti = C.antiholomorphic();
  std::map<std::string, std::string> to_conj;
  for (int j = 0; j < C.n; ++j) to_conj[C.z[j]] = C.chi[j];
  to_conj[C.w] = C.tau;
  for (int i = 0; i < C.N(); ++i) {
    S ch = nf.change[i].rebase(hs);
    a.emplace(hol[i], substitute(ch, {{C.w, Q}}, qs, true));
    a.emplace(anti[i], conjugate_series(ch, to_conj).rebase(qs));
  }
  return substitute(df.rho, a, qs, true);
}

namespace detail {

/// Inverse of s -> f(s) for f = s + O(s^2) in one variable named `var`.
inline Series<GaussQ> invert_univariate(const Series<GaussQ>& f, const std::string& var) {
  int D = f.space().degree();
  auto sp = Space::make({var, "s_"}, D);
  auto fs = substitute(f, {{var, Series<GaussQ>::variable(sp, "s_")}}, sp);
  auto sol = solve_implicit(SeriesTuple<GaussQ>{fs - Series<GaussQ>::variable(sp, var)}, {"s_"});
  return sol[0];
}

}  // namespace detail

/// Normal coordinates at p. The construction is an affine change making the
/// linear part (w - tau)/(2i), a reparametrization of the w-line that makes
/// {z = 0} meet M along the real axis, the solution w = Q~(z, chi, tau) of
/// rho = 0, and finally the w-change inverting s -> Q~(z, 0, s).
inline NormalForm normal_coordinates(const DefiningFunction& df, const Point& p) {
  using S = Series<GaussQ>;
  const Coordinates& C = df.coords;
  const int N = C.N(), n = C.n, D = df.order;
  if (D < 1) throw precondition_error("truncation degree must be positive");
  DefiningFunction r = recenter(df, p);
  const SpacePtr& rs = r.rho.space_ptr();
  auto hol = C.holomorphic(), anti = C.antiholomorphic();

  // Affine step: old Z_i = sum_j lin[i][j] Z'_j with w' = 2i <grad, Z>.
  std::vector<GaussQ> grad(N);
  for (int k = 0; k < N; ++k) grad[k] = r.rho.coefficient(Exp::unit(rs->index(hol[k])));
  int pivot = -1;
  if (!is_zero(grad[n])) {
    pivot = n;
  } else {
    for (int k = 0; k < n && pivot < 0; ++k)
      if (!is_zero(grad[k])) pivot = k;
  }
  if (pivot < 0) throw precondition_error("degenerate gradient at the base point");
  Matrix<GaussQ> lin(N, std::vector<GaussQ>(N, GaussQ(0)));
  {
    int col = 0;
    std::vector<int> newcol(N, -1);
    for (int k = 0; k < N; ++k)
      if (k != pivot) newcol[k] = col++;
    GaussQ ip = inverse(grad[pivot]);
    for (int k = 0; k < N; ++k) {
      if (k == pivot) continue;
      lin[k][newcol[k]] = GaussQ(1);
      lin[pivot][newcol[k]] = -(grad[k] * ip);
    }
    lin[pivot][n] = ip * inverse(GaussQ(0, 2));
  }
  std::map<std::string, S> affine;
  for (int i = 0; i < N; ++i) {
    S a(rs), b(rs);
    for (int j = 0; j < N; ++j) {
      if (is_zero(lin[i][j])) continue;
      a += S::variable(rs, hol[j]).scaled(lin[i][j]);
      b += S::variable(rs, anti[j]).scaled(conj(lin[i][j]));
    }
    affine.emplace(hol[i], a);
    affine.emplace(anti[i], b);
  }
  auto all_space = Space::make(C.all(), D);
  S rho2 = substitute(r.rho, affine, rs).rebase(all_space);

  auto qs = Space::make(C.q_vars(), D);
  S Qt = solve_implicit(SeriesTuple<GaussQ>{rho2}, {C.w})[0].rebase(qs);
  std::vector<std::size_t> zidx, chiidx;
  for (const auto& s : C.z) zidx.push_back(qs->index(s));
  for (const auto& s : C.chi) chiidx.push_back(qs->index(s));
  auto tau = S::variable(qs, C.tau);

  // Straighten the w-line: find h(t) = t + i g(t), g real, with h = q0 o conj(h).
  std::optional<S> hline;
  S q0 = Qt.vanish(zidx).vanish(chiidx);
  if (q0 != tau) {
    auto tg = Space::make({"t_", "g_"}, D);
    S t = S::variable(tg, "t_"), g = S::variable(tg, "g_");
    S rest = q0 - tau;
    S G = g.scaled(GaussQ(0, 2)) - substitute(rest, {{C.tau, t - g.scaled(GaussQ::I())}}, tg);
    S gt = solve_implicit(SeriesTuple<GaussQ>{G}, {"g_"})[0];
    for (const auto& [x, c] : gt.terms())
      if (c.im() != 0) throw math_error("normal coordinates: the w-line is not a real curve");
    auto ts = Space::make({C.tau}, D);
    S gtau = substitute(gt, {{"t_", S::variable(ts, C.tau)}}, ts);
    S h = S::variable(ts, C.tau) + gtau.scaled(GaussQ::I());
    S hbar = S::variable(ts, C.tau) - gtau.scaled(GaussQ::I());
    S hinv = detail::invert_univariate(h, C.tau);
    S inner = substitute(Qt, {{C.tau, hbar.rebase(qs)}}, qs);
    Qt = substitute(hinv, {{C.tau, inner}}, qs);
    hline = h;
  }

  // w-change: hat w = H(z, w) where w = q(z, hat w), q(z, s) = Q~(z, 0, s).
  S q = Qt.vanish(chiidx);
  auto zws = Space::make([&] {
    auto v = C.z;
    v.push_back(C.w);
    v.push_back("s_");
    return v;
  }(), D);
  S qsub = substitute(q, {{C.tau, S::variable(zws, "s_")}}, zws);
  S H = solve_implicit(SeriesTuple<GaussQ>{qsub - S::variable(zws, C.w)}, {"s_"})[0];
  std::map<std::string, std::string> zchi;
  for (int j = 0; j < n; ++j) {
    zchi[C.z[j]] = C.chi[j];
    zchi[C.chi[j]] = C.z[j];
  }
  S qbar = conjugate_series(q, zchi).rebase(qs);
  S inner = substitute(Qt, {{C.tau, qbar}}, qs);
  S Q = substitute(H, {{C.w, inner}}, qs);

  NormalForm nf;
  nf.coords = C;
  nf.Q = Q;
  nf.source = df.source;
  nf.base_point = r.origin;

  auto hs = Space::make(C.holomorphic(), D);
  S w3 = substitute(q, {{C.tau, S::variable(hs, C.w)}}, hs);
  S w2 = hline ? substitute(*hline, {{C.tau, w3}}, hs) : w3;
  SeriesTuple<GaussQ> newc;
  for (int j = 0; j < n; ++j) newc.push_back(S::variable(hs, C.z[j]));
  newc.push_back(w2);
  for (int i = 0; i < N; ++i) {
    S zi = S::constant(hs, r.origin[i]);
    for (int j = 0; j < N; ++j)
      if (!is_zero(lin[i][j])) zi += newc[j].scaled(lin[i][j]);
    nf.change.push_back(zi);
  }

  nf.input = df;
  nf.input_point = p;
  // Terms at the truncation degree mean Q was cut off; otherwise test exactly.
  bool slack = detail::polynomial_degree(Q) < D;
  for (const auto& c : nf.change) slack = slack && detail::polynomial_degree(c) < D;
  nf.polynomial = slack && normal_form_residual(df, nf, 0).is_zero();

  if (Q.vanish(chiidx) != tau || Q.vanish(zidx) != tau)
    throw math_error("normal coordinates: normality identities failed");
  auto zwc = Space::make(C.zwchi_vars(), D);
  if (substitute(Q, {{C.tau, nf.conj_Q()}}, zwc) != S::variable(zwc, C.w))
    throw math_error("normal coordinates: involution identity failed");
  return nf;
}

inline Series<GaussQ> NormalForm::Q_at(int degree) const {
  if (degree <= order() || polynomial) return Q.rebase(Space::make(coords.q_vars(), degree));
  DefiningFunction d = input;
  d.order = degree;
  return normal_coordinates(d, input_point).Q;
}

/// The nondegeneracy order k0 with a grlex-minimal witness family.
struct NondegeneracyReport {
  std::optional<int> k0;                 // empty: degenerate up to k_max
  int k_max = 0;
  std::vector<std::vector<int>> witness;  // n multi-indices
  GaussQ witness_minor;                  // det[conj(Q)_{chi^alpha, z_k}(0)]
};

/// All multi-indices with n entries and total degree 1..k_max in grlex order.
inline std::vector<Exp> multi_indices(int n, int k_max) {
  std::vector<Exp> out;
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      a[pos] = left;
      out.push_back(Exp::from(a));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      a[pos] = e;
      rec(pos + 1, left - e);
    }
  };
  for (int k = 1; k <= k_max; ++k) rec(0, k);
  std::stable_sort(out.begin(), out.end(), grlex_less);
  return out;
}

inline GaussQ factorial_of(const Exp& a, std::size_t n) {
  mpz_class f = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 2; k <= a[i]; ++k) f *= k;
  return GaussQ(mpq_class(f));
}

/// The vector d/dz conj(Q)_{chi^alpha}(0) in C^n.
inline std::vector<GaussQ> nondegeneracy_vector(const NormalForm& nf, const Exp& alpha) {
  const Coordinates& C = nf.coords;
  const Space& qs = nf.Q.space();
  std::vector<GaussQ> v;
  for (int k = 0; k < C.n; ++k) {
    Exp x;
    for (int i = 0; i < C.n; ++i) x[qs.index(C.z[i])] = alpha[i];
    x[qs.index(C.chi[k])] += 1;
    v.push_back(conj(nf.Q.coefficient(x)) * factorial_of(alpha, C.n));
  }
  return v;
}

inline NondegeneracyReport nondegeneracy(const NormalForm& nf, int k_max) {
  const int n = nf.coords.n;
  if (k_max < 1 || k_max > nf.order() - 1) throw precondition_error("k_max must lie in 1..D-1");
  NondegeneracyReport rep;
  rep.k_max = k_max;
  Matrix<GaussQ> rows;
  std::vector<Exp> chosen;
  for (const Exp& a : multi_indices(n, k_max)) {
    auto v = nondegeneracy_vector(nf, a);
    rows.push_back(v);
    if (static_cast<int>(matrix_rank(rows)) < static_cast<int>(rows.size())) {
      rows.pop_back();
      continue;
    }
    chosen.push_back(a);
    if (static_cast<int>(chosen.size()) == n) {
      rep.k0 = 0;
      for (const auto& c : chosen) rep.k0 = std::max(*rep.k0, c.total());
      for (const auto& c : chosen) rep.witness.push_back(c.to_vector(n));
      rep.witness_minor = determinant(rows);
      return rep;
    }
  }
  return rep;
}

}  // namespace crjet
