#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "deltaflow/coeff.hpp"
#include "deltaflow/errors.hpp"

namespace deltaflow {

inline constexpr std::size_t kMaxVars = 32;

// Exponent vector. Unused trailing slots stay zero, so comparison and
// hashing never need the variable count.
struct Monomial {
  std::array<std::uint16_t, kMaxVars> e{};

  std::uint16_t operator[](std::size_t i) const { return e[i]; }
  std::uint16_t& operator[](std::size_t i) { return e[i]; }

  unsigned total_degree() const {
    unsigned d = 0;
    for (auto x : e) d += x;
    return d;
  }
  bool is_one() const {
    for (auto x : e)
      if (x) return false;
    return true;
  }
  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial r;
    for (std::size_t i = 0; i < kMaxVars; ++i) {
      const unsigned s = unsigned(a.e[i]) + b.e[i];
      if (s > 0xFFFFu) throw DomainError("exponent overflow");
      r.e[i] = static_cast<std::uint16_t>(s);
    }
    return r;
  }
  bool divides(const Monomial& o) const {
    for (std::size_t i = 0; i < kMaxVars; ++i)
      if (e[i] > o.e[i]) return false;
    return true;
  }
  friend bool operator==(const Monomial& a, const Monomial& b) { return a.e == b.e; }
  friend bool operator<(const Monomial& a, const Monomial& b) { return a.e < b.e; }
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept {
    std::uint64_t words[kMaxVars / 4];
    std::memcpy(words, m.e.data(), sizeof(words));
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (auto w : words) {
      h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Ordered, immutable list of variable names shared by polynomials.
class Variables {
 public:
  Variables() : names_(std::make_shared<const std::vector<std::string>>()) {}
  explicit Variables(std::vector<std::string> names);
  Variables(std::initializer_list<std::string> names)
      : Variables(std::vector<std::string>(names)) {}

  std::size_t size() const { return names_->size(); }
  const std::string& name(std::size_t i) const { return (*names_)[i]; }
  const std::vector<std::string>& names() const { return *names_; }
  std::optional<std::size_t> find(const std::string& n) const;
  // Throws VariableMismatch when the name is absent.
  std::size_t index(const std::string& n) const;

  friend bool operator==(const Variables& a, const Variables& b) {
    return a.names_ == b.names_ || *a.names_ == *b.names_;
  }

 private:
  std::shared_ptr<const std::vector<std::string>> names_;
};

inline Variables::Variables(std::vector<std::string> names) {
  if (names.size() > kMaxVars) {
    throw DomainError("at most " + std::to_string(kMaxVars) + " variables are supported");
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) throw DomainError("duplicate variable name " + names[i]);
  names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
}

inline std::optional<std::size_t> Variables::find(const std::string& n) const {
  for (std::size_t i = 0; i < names_->size(); ++i)
    if ((*names_)[i] == n) return i;
  return std::nullopt;
}

inline std::size_t Variables::index(const std::string& n) const {
  auto i = find(n);
  if (!i) throw VariableMismatch("unknown variable " + n);
  return *i;
}

// Sparse multivariate polynomial over a coefficient ring C.
//
// Terms are kept sorted by exponent vector with no zero coefficients.
template <class C>
class MultiPoly {
 public:
  using Term = std::pair<Monomial, C>;

  MultiPoly(Variables vars, CoeffRing<C> ring) : vars_(std::move(vars)), ring_(ring) {}

  static MultiPoly constant(Variables vars, CoeffRing<C> ring, const C& c) {
    MultiPoly r(std::move(vars), ring);
    if (!coeff_is_zero(c)) r.terms_.emplace_back(Monomial{}, c);
    return r;
  }
  static MultiPoly constant(Variables vars, CoeffRing<C> ring, long c) {
    return constant(vars, ring, ring.from_int(c));
  }
  static MultiPoly variable(Variables vars, CoeffRing<C> ring, std::size_t i) {
    MultiPoly r(std::move(vars), ring);
    Monomial m;
    m[i] = 1;
    r.terms_.emplace_back(m, ring.one());
    return r;
  }
  static MultiPoly variable(Variables vars, CoeffRing<C> ring, const std::string& name) {
    const std::size_t i = vars.index(name);
    return variable(std::move(vars), ring, i);
  }
  static MultiPoly monomial(Variables vars, CoeffRing<C> ring, const Monomial& m, const C& c) {
    MultiPoly r(std::move(vars), ring);
    if (!coeff_is_zero(c)) r.terms_.emplace_back(m, c);
    return r;
  }
  // Builds from unsorted terms, merging duplicates.
  static MultiPoly from_terms(Variables vars, CoeffRing<C> ring, std::vector<Term> terms);

  const Variables& vars() const { return vars_; }
  const CoeffRing<C>& ring() const { return ring_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_one()); }
  C constant_term() const;
  C coefficient(const Monomial& m) const;
  unsigned degree(std::size_t var) const;
  unsigned total_degree() const;

  MultiPoly zero() const { return MultiPoly(vars_, ring_); }
  MultiPoly one() const { return constant(vars_, ring_, ring_.one()); }
  MultiPoly constant_like(const C& c) const { return constant(vars_, ring_, c); }
  MultiPoly constant_like(long c) const { return constant(vars_, ring_, ring_.from_int(c)); }
  MultiPoly var(std::size_t i) const { return variable(vars_, ring_, i); }
  MultiPoly var(const std::string& n) const { return variable(vars_, ring_, n); }

  MultiPoly operator-() const;
  MultiPoly& operator+=(const MultiPoly& o) { return *this = *this + o; }
  MultiPoly& operator-=(const MultiPoly& o) { return *this = *this - o; }
  MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }
  template <class D>
  friend MultiPoly<D> operator+(const MultiPoly<D>& a, const MultiPoly<D>& b);
  template <class D>
  friend MultiPoly<D> operator-(const MultiPoly<D>& a, const MultiPoly<D>& b);
  template <class D>
  friend MultiPoly<D> operator*(const MultiPoly<D>& a, const MultiPoly<D>& b);

  MultiPoly scale(const C& c) const;
  MultiPoly pow(unsigned long e) const;
  MultiPoly partial(std::size_t var) const;
  // Multiply every exponent of every variable by k (f(x) -> f(x^k)).
  MultiPoly inflate(unsigned k) const;

  // Substitute values for all variables; T must provide +, * and a unit.
  template <class T, class CoeffMap>
  T evaluate_with(const std::vector<T>& values, const T& one, CoeffMap&& coeff) const;
  C evaluate(const std::vector<C>& point) const;
  // Composition with polynomials in another variable set.
  MultiPoly compose(const std::vector<MultiPoly>& images) const;

  template <class D, class F>
  MultiPoly<D> map_coefficients(CoeffRing<D> ring, F&& f) const;
  // Same terms over a new variable list of at least this size (appending).
  MultiPoly rename(Variables vars) const;

  std::string to_string() const;

  friend bool operator==(const MultiPoly& a, const MultiPoly& b) { return (a - b).is_zero(); }
  friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

 private:
  void check_compatible(const MultiPoly& o) const {
    if (!(vars_ == o.vars_)) throw VariableMismatch("polynomials over different variable lists");
  }

  Variables vars_;
  CoeffRing<C> ring_;
  std::vector<Term> terms_;
};

template <class C>
MultiPoly<C> MultiPoly<C>::from_terms(Variables vars, CoeffRing<C> ring, std::vector<Term> terms) {
  MultiPoly r(std::move(vars), ring);
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.first < b.first; });
  for (auto& t : terms) {
    if (!r.terms_.empty() && r.terms_.back().first == t.first) {
      r.terms_.back().second = r.terms_.back().second + t.second;
      if (coeff_is_zero(r.terms_.back().second)) r.terms_.pop_back();
    } else if (!coeff_is_zero(t.second)) {
      r.terms_.push_back(std::move(t));
    }
  }
  return r;
}

template <class C>
C MultiPoly<C>::constant_term() const {
  return coefficient(Monomial{});
}

template <class C>
C MultiPoly<C>::coefficient(const Monomial& m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const Monomial& k) { return t.first < k; });
  if (it != terms_.end() && it->first == m) return it->second;
  return ring_.zero();
}

template <class C>
unsigned MultiPoly<C>::degree(std::size_t var) const {
  unsigned d = 0;
  for (const auto& t : terms_) d = std::max<unsigned>(d, t.first[var]);
  return d;
}

template <class C>
unsigned MultiPoly<C>::total_degree() const {
  unsigned d = 0;
  for (const auto& t : terms_) d = std::max(d, t.first.total_degree());
  return d;
}

template <class C>
MultiPoly<C> MultiPoly<C>::operator-() const {
  MultiPoly r(vars_, ring_);
  r.terms_.reserve(terms_.size());
  for (const auto& t : terms_) r.terms_.emplace_back(t.first, -t.second);
  return r;
}

template <class C>
MultiPoly<C> operator+(const MultiPoly<C>& a, const MultiPoly<C>& b) {
  a.check_compatible(b);
  MultiPoly<C> r(a.vars_, a.ring_.meet(b.ring_));
  r.terms_.reserve(a.terms_.size() + b.terms_.size());
  auto i = a.terms_.begin(), j = b.terms_.begin();
  while (i != a.terms_.end() || j != b.terms_.end()) {
    if (j == b.terms_.end() || (i != a.terms_.end() && i->first < j->first)) {
      r.terms_.push_back(*i++);
    } else if (i == a.terms_.end() || j->first < i->first) {
      r.terms_.push_back(*j++);
    } else {
      C s = i->second + j->second;
      if (!coeff_is_zero(s)) r.terms_.emplace_back(i->first, std::move(s));
      ++i;
      ++j;
    }
  }
  // Mixed precision: a surviving term may vanish at the lower precision.
  if (!(a.ring_ == b.ring_)) {
    std::erase_if(r.terms_, [](const auto& t) { return coeff_is_zero(t.second); });
  }
  return r;
}

template <class C>
MultiPoly<C> operator-(const MultiPoly<C>& a, const MultiPoly<C>& b) {
  return a + (-b);
}

template <class C>
MultiPoly<C> operator*(const MultiPoly<C>& a, const MultiPoly<C>& b) {
  a.check_compatible(b);
  const CoeffRing<C> ring = a.ring_.meet(b.ring_);
  MultiPoly<C> r(a.vars_, ring);
  if (a.is_zero() || b.is_zero()) return r;
  const MultiPoly<C>& big = a.terms_.size() >= b.terms_.size() ? a : b;
  const MultiPoly<C>& small = a.terms_.size() >= b.terms_.size() ? b : a;
  if (small.terms_.size() == 1) {
    // Lexicographic order is compatible with multiplication by a monomial.
    const auto& [m, c] = small.terms_[0];
    r.terms_.reserve(big.terms_.size());
    for (const auto& t : big.terms_) {
      C v = t.second * c;
      if (!coeff_is_zero(v)) r.terms_.emplace_back(t.first * m, std::move(v));
    }
    return r;
  }
  std::unordered_map<Monomial, C, MonomialHash> acc;
  acc.reserve(a.terms_.size() * b.terms_.size() / 2 + 16);
  for (const auto& s : small.terms_) {
    for (const auto& t : big.terms_) {
      Monomial m = s.first * t.first;
      auto [it, inserted] = acc.try_emplace(m, s.second * t.second);
      if (!inserted) it->second = it->second + s.second * t.second;
    }
  }
  r.terms_.reserve(acc.size());
  for (auto& [m, c] : acc) {
    if (!coeff_is_zero(c)) r.terms_.emplace_back(m, std::move(c));
  }
  std::sort(r.terms_.begin(), r.terms_.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return r;
}

template <class C>
MultiPoly<C> MultiPoly<C>::scale(const C& c) const {
  MultiPoly r(vars_, ring_.meet(ring_of(c)));
  r.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    C v = t.second * c;
    if (!coeff_is_zero(v)) r.terms_.emplace_back(t.first, std::move(v));
  }
  return r;
}

template <class C>
MultiPoly<C> MultiPoly<C>::pow(unsigned long e) const {
  MultiPoly acc = one();
  MultiPoly b = *this;
  while (e) {
    if (e & 1) acc = acc * b;
    e >>= 1;
    if (e) b = b * b;
  }
  return acc;
}

template <class C>
MultiPoly<C> MultiPoly<C>::partial(std::size_t var) const {
  MultiPoly r(vars_, ring_);
  for (const auto& t : terms_) {
    const unsigned k = t.first[var];
    if (k == 0) continue;
    Monomial m = t.first;
    m[var] = static_cast<std::uint16_t>(k - 1);
    C v = t.second * ring_.from_int(static_cast<long>(k));
    if (!coeff_is_zero(v)) r.terms_.emplace_back(m, std::move(v));
  }
  // Decrementing one coordinate keeps lexicographic order.
  return r;
}

template <class C>
MultiPoly<C> MultiPoly<C>::inflate(unsigned k) const {
  MultiPoly r(vars_, ring_);
  r.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    Monomial m;
    for (std::size_t i = 0; i < kMaxVars; ++i) {
      const unsigned s = unsigned(t.first[i]) * k;
      if (s > 0xFFFFu) throw DomainError("exponent overflow");
      m[i] = static_cast<std::uint16_t>(s);
    }
    r.terms_.emplace_back(m, t.second);
  }
  return r;
}

template <class C>
template <class T, class CoeffMap>
T MultiPoly<C>::evaluate_with(const std::vector<T>& values, const T& one, CoeffMap&& coeff) const {
  if (values.size() != vars_.size()) throw VariableMismatch("wrong number of values");
  // Cache powers per variable, built on demand.
  std::vector<std::vector<T>> powers(values.size());
  auto power = [&](std::size_t i, unsigned k) -> const T& {
    auto& cache = powers[i];
    if (cache.empty()) cache.push_back(one);
    while (cache.size() <= k) cache.push_back(cache.back() * values[i]);
    return cache[k];
  };
  T acc = one * coeff(ring_.zero());
  for (const auto& t : terms_) {
    T term = coeff(t.second);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (t.first[i]) term = term * power(i, t.first[i]);
    }
    acc = acc + term;
  }
  return acc;
}

template <class C>
C MultiPoly<C>::evaluate(const std::vector<C>& point) const {
  if (point.size() != vars_.size()) throw VariableMismatch("wrong number of coordinates");
  C acc = ring_.zero();
  for (const auto& t : terms_) {
    C term = t.second;
    for (std::size_t i = 0; i < point.size(); ++i) {
      if (t.first[i]) term = term * coeff_pow(point[i], t.first[i], ring_);
    }
    acc = acc + term;
  }
  return acc;
}

template <class C>
MultiPoly<C> MultiPoly<C>::compose(const std::vector<MultiPoly>& images) const {
  if (images.empty()) throw VariableMismatch("composition needs images");
  const MultiPoly one_img = images.front().one();
  return evaluate_with<MultiPoly>(images, one_img, [&](const C& c) { return one_img.scale(c); });
}

template <class C>
template <class D, class F>
MultiPoly<D> MultiPoly<C>::map_coefficients(CoeffRing<D> ring, F&& f) const {
  std::vector<typename MultiPoly<D>::Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.emplace_back(t.first, f(t.second));
  return MultiPoly<D>::from_terms(vars_, ring, std::move(out));
}

template <class C>
MultiPoly<C> MultiPoly<C>::rename(Variables vars) const {
  if (vars.size() < vars_.size()) {
    for (const auto& t : terms_)
      for (std::size_t i = vars.size(); i < vars_.size(); ++i)
        if (t.first[i]) throw VariableMismatch("rename would drop a used variable");
  }
  MultiPoly r(std::move(vars), ring_);
  r.terms_ = terms_;
  return r;
}

template <class C>
std::string MultiPoly<C>::to_string() const {
  if (terms_.empty()) return "0";
  // Print by descending total degree, then descending lex order.
  std::vector<const Term*> order;
  order.reserve(terms_.size());
  for (const auto& t : terms_) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const Term* a, const Term* b) {
    const unsigned da = a->first.total_degree(), db = b->first.total_degree();
    if (da != db) return da > db;
    return b->first < a->first;
  });
  std::string out;
  for (const Term* t : order) {
    std::string c = coeff_to_string(t->second);
    bool negative = !c.empty() && c[0] == '-';
    if (negative) c.erase(0, 1);
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    std::string mono;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      const unsigned k = t->first[i];
      if (!k) continue;
      if (!mono.empty()) mono += "*";
      mono += vars_.name(i);
      if (k > 1) mono += "^" + std::to_string(k);
    }
    if (mono.empty()) {
      out += c;
    } else if (c == "1") {
      out += mono;
    } else {
      if (c.find('/') != std::string::npos) c = "(" + c + ")";
      out += c + "*" + mono;
    }
  }
  return out;
}

// Exact integers, rationals and truncated p-adics are the rings used here.
using ZPoly = MultiPoly<mpz_class>;
using QPoly = MultiPoly<mpq_class>;
using PPoly = MultiPoly<TruncatedPadic>;

// Reduce an integer polynomial into any coefficient ring.
template <class C>
MultiPoly<C> convert(const ZPoly& f, CoeffRing<C> ring) {
  return f.map_coefficients(ring, [&](const mpz_class& c) { return ring.from_mpz(c); });
}

// Change precision of a p-adic polynomial: reduce, or lift canonical
// representatives.
inline PPoly to_precision(const PPoly& f, unsigned precision) {
  PadicRing ring = f.ring().at_precision(precision);
  return f.map_coefficients(ring, [&](const TruncatedPadic& c) { return c.lift(precision); });
}

// Exact division of every coefficient by p; the result loses one digit.
inline PPoly divide_by_p(const PPoly& f) {
  PadicRing ring = f.ring().at_precision(f.ring().precision() - 1);
  return f.map_coefficients(ring, [](const TruncatedPadic& c) { return c.divide_by_p(); });
}

}  // namespace deltaflow
