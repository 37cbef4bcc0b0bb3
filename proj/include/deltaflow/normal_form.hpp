#pragma once

#include <array>
#include <map>

#include "deltaflow/chart.hpp"

namespace deltaflow {

// Replace var^2 by `sub` until var has degree <= 1. Terms are bucketed by
// the number of substitutions so each power of sub is multiplied once.
template <class C>
MultiPoly<C> reduce_square(const MultiPoly<C>& f, std::size_t var, const MultiPoly<C>& sub) {
  std::map<unsigned, std::vector<typename MultiPoly<C>::Term>> buckets;
  for (const auto& t : f.terms()) {
    Monomial m = t.first;
    const unsigned q = m[var] / 2;
    m[var] = static_cast<std::uint16_t>(m[var] % 2);
    buckets[q].emplace_back(m, t.second);
  }
  MultiPoly<C> out = f.zero();
  MultiPoly<C> power = f.one();
  unsigned have = 0;
  for (auto& [q, terms] : buckets) {
    while (have < q) {
      power = power * sub;
      ++have;
    }
    out = out + MultiPoly<C>::from_terms(f.vars(), f.ring(), std::move(terms)) * power;
  }
  return out;
}

// Euler fiber H1 = c1, H2 = c2 over a field: basis {1, x1, x2, x1 x2} over
// the x3-line.
template <class C>
MultiPoly<C> normal_form_fiber(const MultiPoly<C>& f, const std::array<C, 2>& c, const std::array<C, 3>& a) {
  const Variables& v = f.vars();
  const std::size_t i1 = v.index("x1"), i2 = v.index("x2"), i3 = v.index("x3");
  const C d21 = a[1] - a[0];
  if (!coeff_is_unit(d21)) throw DomainError("a2 - a1 must be a unit for the fiber normal form");
  const MultiPoly<C> x2 = f.var(i2), x3 = f.var(i3);
  const MultiPoly<C> s1 = f.constant_like(c[1]) - x2 * x2 - x3 * x3;
  const MultiPoly<C> s2 =
      (f.constant_like(c[0] - a[0] * c[1]) - (x3 * x3).scale(a[2] - a[0])).scale(coeff_inverse(d21));
  return reduce_square(reduce_square(f, i1, s1), i2, s2);
}

// Sphere H2 = c2: basis {1, x1} over the (x2, x3)-plane.
template <class C>
MultiPoly<C> normal_form_sphere(const MultiPoly<C>& f, const C& c2) {
  const Variables& v = f.vars();
  const std::size_t i1 = v.index("x1"), i2 = v.index("x2"), i3 = v.index("x3");
  const MultiPoly<C> x2 = f.var(i2), x3 = f.var(i3);
  return reduce_square(f, i1, f.constant_like(c2) - x2 * x2 - x3 * x3);
}

// Chart-element versions reduce the numerator; both ideals are prime and the
// chart factors are nonzero on them, so the element vanishes on the fiber iff
// the reduced numerator is zero.
template <class C>
ChartElement<C> normal_form_fiber(const ChartElement<C>& e, const std::array<C, 2>& c,
                                  const std::array<C, 3>& a) {
  return e.map_numerator(e.chart(), [&](const MultiPoly<C>& f) { return normal_form_fiber(f, c, a); });
}

template <class C>
ChartElement<C> normal_form_sphere(const ChartElement<C>& e, const C& c2) {
  return e.map_numerator(e.chart(), [&](const MultiPoly<C>& f) { return normal_form_sphere(f, c2); });
}

// Normal form of e - value: the witness of a failed congruence.
template <class C>
MultiPoly<C> fiber_residual(const ChartElement<C>& e, const C& value, const std::array<C, 2>& c,
                            const std::array<C, 3>& a) {
  return normal_form_fiber(e.numerator() - e.denominator().scale(value), c, a);
}

template <class C>
MultiPoly<C> sphere_residual(const ChartElement<C>& e, const ChartElement<C>& value, const C& c2) {
  const ChartElement<C> diff = e - value;
  return normal_form_sphere(diff.numerator(), c2);
}

}  // namespace deltaflow
