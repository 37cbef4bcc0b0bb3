#pragma once

#include <random>

#include "deltaflow/forms.hpp"

namespace testing_support {

using namespace deltaflow;

// Random polynomial with `terms` terms of total degree <= deg in the given
// variable indices, coefficients drawn by `coeff`.
template <class C, class F>
MultiPoly<C> random_poly(const Chart<C>& chart, const std::vector<std::size_t>& idx, unsigned deg,
                         unsigned terms, std::mt19937_64& rng, F&& coeff) {
  std::vector<typename MultiPoly<C>::Term> out;
  for (unsigned t = 0; t < terms; ++t) {
    Monomial m;
    unsigned left = static_cast<unsigned>(rng() % (deg + 1));
    while (left > 0) {
      m[idx[rng() % idx.size()]] += 1;
      --left;
    }
    out.emplace_back(m, coeff(rng));
  }
  return MultiPoly<C>::from_terms(chart.vars(), chart.ring(), std::move(out));
}

inline mpq_class small_rational(std::mt19937_64& rng) {
  mpq_class q(static_cast<long>(rng() % 11) - 5, static_cast<unsigned long>(rng() % 4 + 1));
  q.canonicalize();
  return q;
}

// Three pairwise distinct residues mod p.
inline std::array<long, 3> distinct_triple(unsigned p, std::mt19937_64& rng) {
  std::array<long, 3> a{};
  do {
    for (auto& x : a) x = static_cast<long>(rng() % p);
  } while (a[0] == a[1] || a[1] == a[2] || a[0] == a[2]);
  return a;
}

inline Chart<TruncatedPadic> sphere_chart_fp(unsigned p) {
  Variables v{"x1", "x2", "x3"};
  PadicRing R(p, 1);
  std::vector<Chart<TruncatedPadic>::Factor> f;
  for (int i = 0; i < 3; ++i) f.push_back({v.name(i), MultiPoly<TruncatedPadic>::variable(v, R, i)});
  return Chart<TruncatedPadic>(v, R, f);
}

inline Chart<mpq_class> sphere_chart_q() {
  Variables v{"x1", "x2", "x3"};
  CoeffRing<mpq_class> R;
  std::vector<Chart<mpq_class>::Factor> f;
  for (int i = 0; i < 3; ++i) f.push_back({v.name(i), QPoly::variable(v, R, i)});
  return Chart<mpq_class>(v, R, f);
}

// delta x_i = (a_j - a_k) x_j x_k
template <class C>
ClassicalFlow<C> euler_flow(const FiberFrame<C>& frame) {
  const auto field = frame.v_field();
  return ClassicalFlow<C>(frame.chart(), field);
}

}  // namespace testing_support
