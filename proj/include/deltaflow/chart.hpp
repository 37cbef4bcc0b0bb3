#pragma once

#include <concepts>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "deltaflow/poly.hpp"

namespace deltaflow {

// A localization R[x][1/f_1, ..., 1/f_m] of a polynomial ring. The unit
// factors f_k multiply to the chart denominator Q. Some variables may be
// flagged as parameters: they are constants for d and for flows, but are
// still polynomial variables (symbolic a_i, time t, matrix entries of M).
template <class C>
class Chart {
 public:
  struct Factor {
    std::string name;
    MultiPoly<C> poly;
  };

  Chart(Variables vars, CoeffRing<C> ring, std::vector<Factor> factors = {},
        std::vector<std::string> parameters = {});

  const Variables& vars() const { return data_->vars; }
  const CoeffRing<C>& ring() const { return data_->ring; }
  std::size_t factor_count() const { return data_->factors.size(); }
  const MultiPoly<C>& factor(std::size_t k) const { return data_->factors[k].poly; }
  const std::string& factor_name(std::size_t k) const { return data_->factors[k].name; }
  std::optional<std::size_t> find_factor(const std::string& name) const;
  bool is_parameter(std::size_t i) const { return data_->parameter[i]; }
  // Indices of non-parameter variables.
  std::vector<std::size_t> coordinates() const;

  MultiPoly<C> Q() const;
  MultiPoly<C> factor_power(std::size_t k, unsigned e) const;

  MultiPoly<C> poly_zero() const { return MultiPoly<C>(vars(), ring()); }
  MultiPoly<C> poly_var(std::size_t i) const { return MultiPoly<C>::variable(vars(), ring(), i); }
  MultiPoly<C> poly_var(const std::string& n) const {
    return MultiPoly<C>::variable(vars(), ring(), n);
  }
  MultiPoly<C> poly_const(const C& c) const { return MultiPoly<C>::constant(vars(), ring(), c); }
  MultiPoly<C> poly_const(long c) const { return MultiPoly<C>::constant(vars(), ring(), c); }

  // Same chart over the coefficient ring with another precision, always
  // derived from the chart as constructed so no factor digits are lost.
  Chart at_precision(unsigned precision) const
    requires std::same_as<C, TruncatedPadic>;

  friend bool operator==(const Chart& a, const Chart& b) {
    if (a.data_ == b.data_) return true;
    if (!(a.vars() == b.vars()) || !(a.ring() == b.ring())) return false;
    if (a.factor_count() != b.factor_count() || a.data_->parameter != b.data_->parameter)
      return false;
    for (std::size_t k = 0; k < a.factor_count(); ++k)
      if (a.factor(k) != b.factor(k)) return false;
    return true;
  }

 private:
  struct Data {
    Variables vars;
    CoeffRing<C> ring;
    std::vector<Factor> factors;
    std::vector<bool> parameter;
    mutable std::mutex mu;
    mutable std::map<std::pair<std::size_t, unsigned>, MultiPoly<C>> powers;
    // Rescaled copies live in the root's cache and keep the root alive.
    mutable std::map<unsigned, std::weak_ptr<const Data>> rescaled;
    std::shared_ptr<const Data> root;
  };
  explicit Chart(std::shared_ptr<const Data> d) : data_(std::move(d)) {}

  std::shared_ptr<const Data> data_;
};

template <class C>
Chart<C>::Chart(Variables vars, CoeffRing<C> ring, std::vector<Factor> factors,
                std::vector<std::string> parameters) {
  auto d = std::make_shared<Data>();
  d->vars = vars;
  d->ring = ring;
  d->parameter.assign(vars.size(), false);
  for (const auto& n : parameters) d->parameter[vars.index(n)] = true;
  for (auto& f : factors) {
    if (f.poly.is_zero()) throw DomainError("chart factor " + f.name + " is zero");
    if (!(f.poly.vars() == vars)) throw VariableMismatch("chart factor over other variables");
    d->factors.push_back({f.name, f.poly});
  }
  data_ = std::move(d);
}

template <class C>
std::optional<std::size_t> Chart<C>::find_factor(const std::string& name) const {
  for (std::size_t k = 0; k < factor_count(); ++k)
    if (factor_name(k) == name) return k;
  return std::nullopt;
}

template <class C>
std::vector<std::size_t> Chart<C>::coordinates() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < vars().size(); ++i)
    if (!is_parameter(i)) out.push_back(i);
  return out;
}

template <class C>
MultiPoly<C> Chart<C>::Q() const {
  MultiPoly<C> q = MultiPoly<C>::constant(vars(), ring(), ring().one());
  for (const auto& f : data_->factors) q = q * f.poly;
  return q;
}

template <class C>
MultiPoly<C> Chart<C>::factor_power(std::size_t k, unsigned e) const {
  if (e == 0) return MultiPoly<C>::constant(vars(), ring(), ring().one());
  if (e == 1) return factor(k);
  {
    std::lock_guard<std::mutex> lock(data_->mu);
    auto it = data_->powers.find({k, e});
    if (it != data_->powers.end()) return it->second;
  }
  MultiPoly<C> r = factor_power(k, e - 1) * factor(k);
  std::lock_guard<std::mutex> lock(data_->mu);
  data_->powers.emplace(std::make_pair(k, e), r);
  return r;
}

template <class C>
Chart<C> Chart<C>::at_precision(unsigned precision) const
  requires std::same_as<C, TruncatedPadic>
{
  if (precision == ring().precision()) return *this;
  const std::shared_ptr<const Data> root = data_->root ? data_->root : data_;
  if (precision == root->ring.precision()) return Chart(root);
  std::lock_guard<std::mutex> lock(root->mu);
  auto& slot = root->rescaled[precision];
  if (auto live = slot.lock()) return Chart(live);
  auto d = std::make_shared<Data>();
  d->vars = vars();
  d->ring = ring().at_precision(precision);
  d->parameter = root->parameter;
  for (const auto& f : root->factors) d->factors.push_back({f.name, to_precision(f.poly, precision)});
  d->root = root;
  slot = d;
  return Chart(std::shared_ptr<const Data>(std::move(d)));
}

// numerator / prod_k factor_k^{e_k}
template <class C>
class ChartElement {
 public:
  ChartElement(Chart<C> chart, MultiPoly<C> num, std::vector<unsigned> exps = {});

  static ChartElement constant(const Chart<C>& chart, const C& c) {
    return ChartElement(chart, chart.poly_const(c));
  }
  static ChartElement constant(const Chart<C>& chart, long c) {
    return ChartElement(chart, chart.poly_const(c));
  }
  static ChartElement variable(const Chart<C>& chart, const std::string& name) {
    return ChartElement(chart, chart.poly_var(name));
  }
  static ChartElement variable(const Chart<C>& chart, std::size_t i) {
    return ChartElement(chart, chart.poly_var(i));
  }
  // 1 / factor_k^e
  static ChartElement factor_inverse(const Chart<C>& chart, std::size_t k, unsigned e = 1);

  const Chart<C>& chart() const { return chart_; }
  const MultiPoly<C>& numerator() const { return num_; }
  const std::vector<unsigned>& exponents() const { return exps_; }
  MultiPoly<C> denominator() const;
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const;

  ChartElement zero() const { return ChartElement(chart_, num_.zero()); }
  ChartElement one() const { return ChartElement(chart_, num_.one()); }

  ChartElement operator-() const { return ChartElement(chart_, -num_, exps_); }
  friend ChartElement operator+(const ChartElement& a, const ChartElement& b) {
    return combine(a, b, false);
  }
  friend ChartElement operator-(const ChartElement& a, const ChartElement& b) {
    return combine(a, b, true);
  }
  friend ChartElement operator*(const ChartElement& a, const ChartElement& b) {
    return multiply(a, b);
  }
  ChartElement& operator+=(const ChartElement& o) { return *this = *this + o; }
  ChartElement& operator-=(const ChartElement& o) { return *this = *this - o; }
  ChartElement& operator*=(const ChartElement& o) { return *this = *this * o; }

  ChartElement scale(const C& c) const { return ChartElement(chart_, num_.scale(c), exps_); }
  ChartElement times(const MultiPoly<C>& f) const { return ChartElement(chart_, num_ * f, exps_); }
  ChartElement pow(unsigned long e) const;
  ChartElement divide_by_factor(std::size_t k, unsigned e = 1) const;
  ChartElement partial(std::size_t var) const;

  // Value at a point; every chart factor must be a unit there.
  C eval(const std::vector<C>& point) const;

  template <class F>
  ChartElement map_numerator(const Chart<C>& chart, F&& f) const {
    return ChartElement(chart, f(num_), exps_);
  }

  std::string to_string() const;

  // Cross-multiplied comparison.
  friend bool operator==(const ChartElement& a, const ChartElement& b) { return (a - b).is_zero(); }
  friend bool operator!=(const ChartElement& a, const ChartElement& b) { return !(a == b); }

 private:
  static ChartElement combine(const ChartElement& a, const ChartElement& b, bool subtract);
  static ChartElement multiply(const ChartElement& a, const ChartElement& b);
  void check_chart(const ChartElement& o) const {
    if (!(chart_ == o.chart_)) throw VariableMismatch("chart elements on different charts");
  }
  // Cancel powers of factors that are single variables.
  void cancel_monomial_factors();

  Chart<C> chart_;
  MultiPoly<C> num_;
  std::vector<unsigned> exps_;
};

template <class C>
ChartElement<C>::ChartElement(Chart<C> chart, MultiPoly<C> num, std::vector<unsigned> exps)
    : chart_(std::move(chart)), num_(std::move(num)), exps_(std::move(exps)) {
  if (!(num_.vars() == chart_.vars())) throw VariableMismatch("numerator over other variables");
  if (exps_.empty()) exps_.assign(chart_.factor_count(), 0);
  if (exps_.size() != chart_.factor_count()) throw VariableMismatch("exponent vector length");
  if (num_.is_zero()) {
    std::fill(exps_.begin(), exps_.end(), 0u);
  } else {
    cancel_monomial_factors();
  }
}

template <class C>
void ChartElement<C>::cancel_monomial_factors() {
  for (std::size_t k = 0; k < exps_.size(); ++k) {
    if (!exps_[k]) continue;
    const auto& f = chart_.factor(k);
    if (f.size() != 1 || f.terms()[0].first.total_degree() != 1 || f.terms()[0].second != chart_.ring().one())
      continue;
    std::size_t v = 0;
    while (f.terms()[0].first[v] == 0) ++v;
    unsigned common = exps_[k];
    for (const auto& t : num_.terms()) common = std::min<unsigned>(common, t.first[v]);
    if (!common) continue;
    std::vector<typename MultiPoly<C>::Term> terms = num_.terms();
    for (auto& t : terms) t.first[v] = static_cast<std::uint16_t>(t.first[v] - common);
    num_ = MultiPoly<C>::from_terms(num_.vars(), num_.ring(), std::move(terms));
    exps_[k] -= common;
  }
}

template <class C>
ChartElement<C> ChartElement<C>::factor_inverse(const Chart<C>& chart, std::size_t k, unsigned e) {
  std::vector<unsigned> exps(chart.factor_count(), 0);
  exps.at(k) = e;
  return ChartElement(chart, chart.poly_const(1), exps);
}

template <class C>
MultiPoly<C> ChartElement<C>::denominator() const {
  MultiPoly<C> d = num_.one();
  for (std::size_t k = 0; k < exps_.size(); ++k)
    if (exps_[k]) d = d * chart_.factor_power(k, exps_[k]);
  return d;
}

template <class C>
bool ChartElement<C>::is_polynomial() const {
  for (auto e : exps_)
    if (e) return false;
  return true;
}

template <class C>
ChartElement<C> ChartElement<C>::combine(const ChartElement& a, const ChartElement& b, bool subtract) {
  a.check_chart(b);
  if (a.exps_ == b.exps_) {
    return ChartElement(a.chart_, subtract ? a.num_ - b.num_ : a.num_ + b.num_, a.exps_);
  }
  if (b.is_zero()) return a;
  if (a.is_zero()) return subtract ? -b : b;
  std::vector<unsigned> e(a.exps_.size());
  MultiPoly<C> na = a.num_, nb = b.num_;
  for (std::size_t k = 0; k < e.size(); ++k) {
    e[k] = std::max(a.exps_[k], b.exps_[k]);
    if (e[k] > a.exps_[k]) na = na * a.chart_.factor_power(k, e[k] - a.exps_[k]);
    if (e[k] > b.exps_[k]) nb = nb * a.chart_.factor_power(k, e[k] - b.exps_[k]);
  }
  return ChartElement(a.chart_, subtract ? na - nb : na + nb, std::move(e));
}

template <class C>
ChartElement<C> ChartElement<C>::multiply(const ChartElement& a, const ChartElement& b) {
  a.check_chart(b);
  std::vector<unsigned> e(a.exps_.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = a.exps_[k] + b.exps_[k];
  return ChartElement(a.chart_, a.num_ * b.num_, std::move(e));
}

template <class C>
ChartElement<C> ChartElement<C>::pow(unsigned long e) const {
  std::vector<unsigned> ex(exps_.size());
  for (std::size_t k = 0; k < ex.size(); ++k) ex[k] = static_cast<unsigned>(exps_[k] * e);
  return ChartElement(chart_, num_.pow(e), std::move(ex));
}

template <class C>
ChartElement<C> ChartElement<C>::divide_by_factor(std::size_t k, unsigned e) const {
  std::vector<unsigned> ex = exps_;
  ex.at(k) += e;
  return ChartElement(chart_, num_, std::move(ex));
}

template <class C>
ChartElement<C> ChartElement<C>::partial(std::size_t var) const {
  // d(n/D) with D = prod f_k^e_k: raise each used exponent by one so the
  // quotient rule needs no further denominators.
  MultiPoly<C> rest = num_.one();
  std::vector<unsigned> ex = exps_;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    if (exps_[k]) {
      rest = rest * chart_.factor(k);
      ++ex[k];
    }
  }
  MultiPoly<C> out = num_.partial(var) * rest;
  for (std::size_t k = 0; k < exps_.size(); ++k) {
    if (!exps_[k]) continue;
    MultiPoly<C> df = chart_.factor(k).partial(var);
    if (df.is_zero()) continue;
    MultiPoly<C> others = num_.one();
    for (std::size_t l = 0; l < exps_.size(); ++l)
      if (l != k && exps_[l]) others = others * chart_.factor(l);
    out = out - (num_ * df * others).scale(chart_.ring().from_int(static_cast<long>(exps_[k])));
  }
  return ChartElement(chart_, std::move(out), std::move(ex));
}

template <class C>
C ChartElement<C>::eval(const std::vector<C>& point) const {
  C acc = num_.evaluate(point);
  for (std::size_t k = 0; k < chart_.factor_count(); ++k) {
    C f = chart_.factor(k).evaluate(point);
    if (!coeff_is_unit(f)) {
      throw ChartViolation("chart factor " + chart_.factor_name(k) + " is not a unit at the point");
    }
    if (exps_[k]) acc = acc * coeff_pow(coeff_inverse(f), exps_[k], chart_.ring());
  }
  return acc;
}

template <class C>
std::string ChartElement<C>::to_string() const {
  std::string den;
  for (std::size_t k = 0; k < exps_.size(); ++k) {
    if (!exps_[k]) continue;
    if (!den.empty()) den += "*";
    den += chart_.factor_name(k);
    if (exps_[k] > 1) den += "^" + std::to_string(exps_[k]);
  }
  if (den.empty()) return num_.to_string();
  return "(" + num_.to_string() + ")/(" + den + ")";
}

using PChart = Chart<TruncatedPadic>;
using PElement = ChartElement<TruncatedPadic>;

// Reduce (or lift representatives of) a p-adic chart element.
inline PElement to_precision(const PElement& e, unsigned precision) {
  PChart target = e.chart().at_precision(precision);
  return e.map_numerator(target, [&](const PPoly& f) { return to_precision(f, precision); });
}

inline PElement lift_poly(const PChart& chart, const PPoly& f) {
  return PElement(chart, to_precision(f, chart.ring().precision()));
}

// Exact division of the numerator by p; the result loses one digit.
inline PElement divide_by_p(const PElement& e) {
  PChart target = e.chart().at_precision(e.chart().ring().precision() - 1);
  return e.map_numerator(target, [](const PPoly& f) { return divide_by_p(f); });
}

// phi(x_i) = x_i^p + p u_i, identity on coefficients.
PElement phi_poly(const PPoly& f, const std::vector<PElement>& u);
// (phi(f) - f^p)/p; requires coefficients at precision >= target + 1.
PElement delta_poly(const PPoly& f, const std::vector<PElement>& u, unsigned target);
// phi of a chart element: inverts phi(factor) = factor^p (1 + p*...) by a
// truncated geometric series.
PElement phi_element(const PElement& e, const std::vector<PElement>& u);

}  // namespace deltaflow
