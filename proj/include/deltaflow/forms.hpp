#pragma once

#include <array>
#include <bit>
#include <map>
#include <string>
#include <vector>

#include "deltaflow/chart.hpp"
#include "deltaflow/normal_form.hpp"

namespace deltaflow {

// A derivation on a chart, given by the image of every variable. Parameter
// variables carry the base derivation (0 for constants, 1 for time).
template <class C>
class ClassicalFlow {
 public:
  using Elem = ChartElement<C>;

  ClassicalFlow(Chart<C> chart, std::vector<Elem> images) : chart_(std::move(chart)), images_(std::move(images)) {
    if (images_.size() != chart_.vars().size()) throw VariableMismatch("one image per chart variable");
    for (const auto& e : images_)
      if (!(e.chart() == chart_)) throw VariableMismatch("flow image on another chart");
  }

  const Chart<C>& chart() const { return chart_; }
  const std::vector<Elem>& images() const { return images_; }
  const Elem& image(std::size_t i) const { return images_[i]; }

  // Leibniz extension: sum_i image_i * d/dx_i.
  Elem apply(const Elem& f) const {
    if (!(f.chart() == chart_)) throw VariableMismatch("flow applied off its chart");
    Elem acc = f.zero();
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (images_[i].is_zero()) continue;
      Elem df = f.partial(i);
      if (!df.is_zero()) acc = acc + images_[i] * df;
    }
    return acc;
  }
  Elem apply(const MultiPoly<C>& f) const { return apply(Elem(chart_, f)); }

 private:
  Chart<C> chart_;
  std::vector<Elem> images_;
};

// phi(x_i) = x_i^p + p u_i. The images live at precision N + 1 and are
// meaningful mod p^N, so delta is exact at precision N.
struct ArithmeticFlow {
  PChart chart;
  std::vector<PElement> u;
  unsigned precision = 0;

  unsigned prime() const { return chart.ring().prime(); }
  PElement phi(const PPoly& f) const { return phi_poly(f, u); }
  PElement phi(const PElement& e) const { return phi_element(e, u); }
  PElement delta(const PPoly& f) const { return delta_poly(f, u, precision); }
};

// Graded element of the exterior algebra over a chart. Components are keyed
// by a bitmask of coordinate indices; only sorted wedges are stored.
template <class C>
class DiffForm {
 public:
  using Elem = ChartElement<C>;
  using Components = std::map<std::uint32_t, Elem>;

  DiffForm(Chart<C> chart, unsigned degree) : chart_(std::move(chart)), degree_(degree) {}

  static DiffForm function(const Elem& f) {
    DiffForm r(f.chart(), 0);
    r.add_component(0, f);
    return r;
  }
  static DiffForm dx(const Chart<C>& chart, std::size_t i) {
    check_coordinate(chart, i);
    DiffForm r(chart, 1);
    r.add_component(std::uint32_t{1} << i, Elem::constant(chart, 1));
    return r;
  }
  static DiffForm dx(const Chart<C>& chart, const std::string& name) {
    return dx(chart, chart.vars().index(name));
  }
  // d of a function: parameters are constants.
  static DiffForm d(const Elem& f) {
    DiffForm r(f.chart(), 1);
    for (std::size_t i : f.chart().coordinates()) r.add_component(std::uint32_t{1} << i, f.partial(i));
    return r;
  }
  static DiffForm d(const MultiPoly<C>& f, const Chart<C>& chart) { return d(Elem(chart, f)); }

  const Chart<C>& chart() const { return chart_; }
  unsigned degree() const { return degree_; }
  const Components& components() const { return comps_; }
  bool is_zero() const { return comps_.empty(); }
  Elem component(std::uint32_t mask) const {
    auto it = comps_.find(mask);
    return it == comps_.end() ? Elem(chart_, chart_.poly_zero()) : it->second;
  }
  // Coefficient of dx_{i1} ^ ... ^ dx_{ik} for an arbitrary index order.
  Elem coefficient(const std::vector<std::size_t>& idx) const;
  // The function of a 0-form.
  Elem value() const { return component(0); }

  DiffForm operator-() const {
    DiffForm r(chart_, degree_);
    for (const auto& [m, c] : comps_) r.comps_.emplace(m, -c);
    return r;
  }
  friend DiffForm operator+(const DiffForm& a, const DiffForm& b) {
    a.check_same(b);
    DiffForm r = a;
    for (const auto& [m, c] : b.comps_) r.add_component(m, c);
    return r;
  }
  friend DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }
  DiffForm times(const Elem& f) const {
    DiffForm r(chart_, degree_);
    for (const auto& [m, c] : comps_) r.add_component(m, c * f);
    return r;
  }
  friend DiffForm operator*(const Elem& f, const DiffForm& a) { return a.times(f); }

  DiffForm wedge(const DiffForm& o) const;
  DiffForm d() const;
  // Interior product with a vector field given by one component per variable.
  DiffForm interior(const std::vector<Elem>& field) const;

  friend bool operator==(const DiffForm& a, const DiffForm& b) { return (a - b).is_zero(); }
  std::string to_string() const;

  void add_component(std::uint32_t mask, const Elem& c) {
    if (static_cast<unsigned>(std::popcount(mask)) != degree_) throw InternalError("component degree");
    if (c.is_zero()) return;
    auto it = comps_.find(mask);
    if (it == comps_.end()) {
      comps_.emplace(mask, c);
    } else {
      it->second = it->second + c;
      if (it->second.is_zero()) comps_.erase(it);
    }
  }

 private:
  static void check_coordinate(const Chart<C>& chart, std::size_t i) {
    if (i >= chart.vars().size() || chart.is_parameter(i)) {
      throw VariableMismatch("dx of a parameter or unknown variable");
    }
  }
  void check_same(const DiffForm& o) const {
    if (!(chart_ == o.chart_)) throw VariableMismatch("forms on different charts");
    if (degree_ != o.degree_) throw DomainError("adding forms of different degree");
  }

  Chart<C> chart_;
  unsigned degree_;
  Components comps_;
};

// Sign of merging sorted index sets a and b (disjoint): parity of pairs
// (i in a, j in b) with i > j.
inline int wedge_sign(std::uint32_t a, std::uint32_t b) {
  int swaps = 0;
  for (std::uint32_t rest = b; rest; rest &= rest - 1) {
    const unsigned j = static_cast<unsigned>(std::countr_zero(rest));
    swaps += std::popcount(a >> (j + 1));
  }
  return swaps % 2 ? -1 : 1;
}

template <class C>
ChartElement<C> DiffForm<C>::coefficient(const std::vector<std::size_t>& idx) const {
  std::uint32_t mask = 0;
  int sign = 1;
  for (std::size_t i : idx) {
    const std::uint32_t bit = std::uint32_t{1} << i;
    if (mask & bit) return Elem(chart_, chart_.poly_zero());
    if (wedge_sign(mask, bit) < 0) sign = -sign;
    mask |= bit;
  }
  if (idx.size() != degree_) throw DomainError("index list does not match the degree");
  Elem c = component(mask);
  return sign < 0 ? -c : c;
}

template <class C>
DiffForm<C> DiffForm<C>::wedge(const DiffForm& o) const {
  if (!(chart_ == o.chart_)) throw VariableMismatch("forms on different charts");
  DiffForm r(chart_, degree_ + o.degree_);
  for (const auto& [ma, ca] : comps_) {
    for (const auto& [mb, cb] : o.comps_) {
      if (ma & mb) continue;
      Elem c = ca * cb;
      r.add_component(ma | mb, wedge_sign(ma, mb) < 0 ? -c : c);
    }
  }
  return r;
}

template <class C>
DiffForm<C> DiffForm<C>::d() const {
  if (degree_ >= chart_.coordinates().size()) throw DomainError("d of a top-degree form");
  DiffForm r(chart_, degree_ + 1);
  for (const auto& [m, c] : comps_) {
    for (std::size_t i : chart_.coordinates()) {
      const std::uint32_t bit = std::uint32_t{1} << i;
      if (m & bit) continue;
      Elem di = c.partial(i);
      if (di.is_zero()) continue;
      r.add_component(m | bit, wedge_sign(bit, m) < 0 ? -di : di);
    }
  }
  return r;
}

template <class C>
DiffForm<C> DiffForm<C>::interior(const std::vector<Elem>& field) const {
  if (degree_ == 0) throw DomainError("interior product of a function");
  DiffForm r(chart_, degree_ - 1);
  for (const auto& [m, c] : comps_) {
    int position = 0;
    for (std::uint32_t rest = m; rest; rest &= rest - 1, ++position) {
      const unsigned j = static_cast<unsigned>(std::countr_zero(rest));
      if (field[j].is_zero()) continue;
      Elem term = c * field[j];
      r.add_component(m & ~(std::uint32_t{1} << j), position % 2 ? -term : term);
    }
  }
  return r;
}

template <class C>
std::string DiffForm<C>::to_string() const {
  if (comps_.empty()) return "0";
  std::string out;
  for (const auto& [m, c] : comps_) {
    if (!out.empty()) out += " + ";
    out += "(" + c.to_string() + ")";
    for (std::uint32_t rest = m; rest; rest &= rest - 1) {
      out += (rest == m ? " " : "^");
      out += "d" + chart_.vars().name(static_cast<std::size_t>(std::countr_zero(rest)));
    }
  }
  return out;
}

// Sum of products of matching components: <alpha, v> for a 1-form against a
// vector (stored as a 1-form), <beta, pi> for a 2-form against a bivector.
template <class C>
ChartElement<C> pairing(const DiffForm<C>& a, const DiffForm<C>& b) {
  if (a.degree() != b.degree()) throw DomainError("pairing forms of different degree");
  ChartElement<C> acc(a.chart(), a.chart().poly_zero());
  for (const auto& [m, c] : a.components()) {
    auto it = b.components().find(m);
    if (it != b.components().end()) acc = acc + c * it->second;
  }
  return acc;
}

// L(f dx_J) = (delta f) dx_J + f sum_k dx_j1 ^ .. ^ d(delta x_jk) ^ .. ^ dx_jm
template <class C>
DiffForm<C> lie_derivative(const ClassicalFlow<C>& flow, const DiffForm<C>& alpha) {
  if (!(flow.chart() == alpha.chart())) throw VariableMismatch("flow and form on different charts");
  const Chart<C>& chart = alpha.chart();
  DiffForm<C> out(chart, alpha.degree());
  for (const auto& [mask, coeff] : alpha.components()) {
    std::vector<std::size_t> idx;
    for (std::uint32_t rest = mask; rest; rest &= rest - 1) idx.push_back(std::countr_zero(rest));
    DiffForm<C> basis = DiffForm<C>::function(ChartElement<C>::constant(chart, 1));
    for (std::size_t j : idx) basis = basis.wedge(DiffForm<C>::dx(chart, j));
    out = out + basis.times(flow.apply(coeff));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      DiffForm<C> term = DiffForm<C>::function(coeff);
      for (std::size_t l = 0; l < idx.size(); ++l) {
        term = term.wedge(l == k ? DiffForm<C>::d(flow.image(idx[l])) : DiffForm<C>::dx(chart, idx[l]));
      }
      out = out + term;
    }
  }
  return out;
}

// The pullback divided by p^deg, computed structurally: dx_j pulls back to
// p * theta_j with theta_j = x_j^(p-1) dx_j + du_j, so no digit is lost.
DiffForm<TruncatedPadic> phi_star_over_p(const DiffForm<TruncatedPadic>& alpha, const ArithmeticFlow& flow);
// theta_j at the given precision.
DiffForm<TruncatedPadic> theta(const ArithmeticFlow& flow, std::size_t j, unsigned precision);

// The Euler tangent vector v and Poisson bivector pi on a chart in x1, x2, x3.
template <class C>
class FiberFrame {
 public:
  using Elem = ChartElement<C>;

  FiberFrame(Chart<C> chart, std::array<C, 3> a) : chart_(std::move(chart)), a_(a), v_(chart_, 1), pi_(chart_, 2) {
    for (int i = 0; i < 3; ++i) idx_[i] = chart_.vars().index("x" + std::to_string(i + 1));
    auto x = [&](int i) { return chart_.poly_var(idx_[i]); };
    auto bit = [&](int i) { return std::uint32_t{1} << idx_[i]; };
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      v_.add_component(bit(i), Elem(chart_, (x(j) * x(k)).scale(a_[j] - a_[k])));
    }
    // pi_12 = x3, pi_23 = x1, pi_31 = x2
    add_pi(0, 1, x(2));
    add_pi(1, 2, x(0));
    add_pi(2, 0, x(1));
  }

  const Chart<C>& chart() const { return chart_; }
  const std::array<C, 3>& a() const { return a_; }
  std::size_t index(int i) const { return idx_[i]; }
  // v as a 1-form container (one component per dx_i).
  const DiffForm<C>& v() const { return v_; }
  const DiffForm<C>& pi() const { return pi_; }
  std::vector<Elem> v_field() const {
    std::vector<Elem> f(chart_.vars().size(), Elem(chart_, chart_.poly_zero()));
    for (int i = 0; i < 3; ++i) f[idx_[i]] = v_.component(std::uint32_t{1} << idx_[i]);
    return f;
  }

  MultiPoly<C> H1() const {
    MultiPoly<C> h = chart_.poly_zero();
    for (int i = 0; i < 3; ++i) h = h + chart_.poly_var(idx_[i]).pow(2).scale(a_[i]);
    return h;
  }
  MultiPoly<C> H2() const {
    MultiPoly<C> h = chart_.poly_zero();
    for (int i = 0; i < 3; ++i) h = h + chart_.poly_var(idx_[i]).pow(2);
    return h;
  }

  // omega_i = dx_i / ((a_j - a_k) x_j x_k), cyclic (i, j, k).
  DiffForm<C> omega(int i) const {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    Elem coeff = Elem::constant(chart_, coeff_inverse(C(a_[j] - a_[k])));
    coeff = coeff.divide_by_factor(factor_of(j)).divide_by_factor(factor_of(k));
    return DiffForm<C>::dx(chart_, idx_[i]).times(coeff);
  }
  // eta_i = dx_j ^ dx_k / x_i, cyclic.
  DiffForm<C> eta(int i) const {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    Elem coeff = Elem::constant(chart_, 1).divide_by_factor(factor_of(i));
    return DiffForm<C>::dx(chart_, idx_[j]).wedge(DiffForm<C>::dx(chart_, idx_[k])).times(coeff);
  }

  // The chart factor equal to x_i; ChartObstruction if x_i is not inverted.
  std::size_t factor_of(int i) const {
    auto k = chart_.find_factor("x" + std::to_string(i + 1));
    if (!k || chart_.factor(*k) != chart_.poly_var(idx_[i])) {
      throw ChartObstruction("x" + std::to_string(i + 1) + " is not a unit on this chart");
    }
    return *k;
  }

 private:
  void add_pi(int i, int j, const MultiPoly<C>& val) {
    Elem e(chart_, val);
    const std::uint32_t m = (std::uint32_t{1} << idx_[i]) | (std::uint32_t{1} << idx_[j]);
    pi_.add_component(m, idx_[i] < idx_[j] ? e : -e);
  }

  Chart<C> chart_;
  std::array<C, 3> a_;
  std::array<std::size_t, 3> idx_{};
  DiffForm<C> v_;
  DiffForm<C> pi_;
};

// h with alpha|E_c = h * omega_c: <alpha, v> in fiber normal form.
template <class C>
ChartElement<C> restrict_to_curve(const DiffForm<C>& alpha, const FiberFrame<C>& frame, const std::array<C, 2>& c) {
  if (alpha.degree() != 1) throw DomainError("curve restriction takes a 1-form");
  return normal_form_fiber(pairing(alpha, frame.v()), c, frame.a());
}

// h with beta|S = h * eta: <beta, pi> in sphere normal form.
template <class C>
ChartElement<C> restrict_to_sphere(const DiffForm<C>& beta, const FiberFrame<C>& frame, const C& c2) {
  if (beta.degree() != 2) throw DomainError("sphere restriction takes a 2-form");
  return normal_form_sphere(pairing(beta, frame.pi()), c2);
}

}  // namespace deltaflow
