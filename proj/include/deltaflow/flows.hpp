#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "deltaflow/forms.hpp"

namespace deltaflow {

// Residual of the prime-integral condition: delta H for a classical flow.
template <class C>
ChartElement<C> check_prime_integral(const ClassicalFlow<C>& flow, const MultiPoly<C>& H) {
  return flow.apply(H);
}

// phi(H) - H^p, which is p * delta H; zero iff H is a prime integral.
PElement check_prime_integral(const ArithmeticFlow& flow, const PPoly& H);

// Antisymmetric brackets of chart coordinates, extended as a biderivation.
template <class C>
class PoissonStructure {
 public:
  using Elem = ChartElement<C>;

  explicit PoissonStructure(Chart<C> chart) : chart_(std::move(chart)) {}

  const Chart<C>& chart() const { return chart_; }
  void set(std::size_t i, std::size_t j, const Elem& value) {
    if (i == j) throw DomainError("bracket of a coordinate with itself is zero");
    if (i < j) {
      table_.insert_or_assign({i, j}, value);
    } else {
      table_.insert_or_assign({j, i}, -value);
    }
  }
  Elem generator_bracket(std::size_t i, std::size_t j) const {
    if (i == j) return zero();
    auto it = table_.find({std::min(i, j), std::max(i, j)});
    if (it == table_.end()) return zero();
    return i < j ? it->second : -it->second;
  }

  Elem bracket(const Elem& f, const Elem& g) const {
    Elem acc = zero();
    const auto coords = chart_.coordinates();
    std::vector<Elem> dg;
    for (std::size_t j : coords) dg.push_back(g.partial(j));
    for (std::size_t a = 0; a < coords.size(); ++a) {
      Elem dfi = f.partial(coords[a]);
      if (dfi.is_zero()) continue;
      for (std::size_t b = 0; b < coords.size(); ++b) {
        if (a == b || dg[b].is_zero()) continue;
        Elem pij = generator_bracket(coords[a], coords[b]);
        if (!pij.is_zero()) acc = acc + dfi * dg[b] * pij;
      }
    }
    return acc;
  }
  Elem bracket(const MultiPoly<C>& f, const MultiPoly<C>& g) const {
    return bracket(Elem(chart_, f), Elem(chart_, g));
  }

  Elem jacobi_defect(const Elem& f, const Elem& g, const Elem& h) const {
    return bracket(f, bracket(g, h)) + bracket(g, bracket(h, f)) + bracket(h, bracket(f, g));
  }

  // delta f = {f, H}.
  ClassicalFlow<C> hamiltonian_flow(const Elem& H) const {
    std::vector<Elem> images;
    for (std::size_t i = 0; i < chart_.vars().size(); ++i) {
      images.push_back(chart_.is_parameter(i) ? zero() : bracket(Elem::variable(chart_, i), H));
    }
    return ClassicalFlow<C>(chart_, std::move(images));
  }

 private:
  Elem zero() const { return Elem(chart_, chart_.poly_zero()); }

  Chart<C> chart_;
  std::map<std::pair<std::size_t, std::size_t>, Elem> table_;
};

// Structure constants c[i][j][k] over an ordered list of coordinates:
// {x_i, x_j} = sum_k c_ijk x_k.
using StructureConstants = std::vector<std::vector<std::vector<long>>>;

template <class C>
PoissonStructure<C> lie_poisson(const Chart<C>& chart, const std::vector<std::size_t>& coords,
                                const StructureConstants& c) {
  PoissonStructure<C> ps(chart);
  const std::size_t n = coords.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      MultiPoly<C> v = chart.poly_zero();
      for (std::size_t k = 0; k < n; ++k) {
        if (c[i][j][k] != -c[j][i][k]) throw DomainError("structure constants are not antisymmetric");
        if (c[i][j][k]) v = v + chart.poly_var(coords[k]).scale(chart.ring().from_int(c[i][j][k]));
      }
      ps.set(coords[i], coords[j], ChartElement<C>(chart, v));
    }
  }
  return ps;
}

// {x1, x2} = x3 and cyclic.
StructureConstants so3_constants();
// gl_n in the basis e_ij ordered row-major: [e_ij, e_kl] = d_jk e_il - d_li e_kj.
StructureConstants gln_constants(std::size_t n);
// Names x11, x12, ..., xnn in row-major order.
std::vector<std::string> gl_names(std::size_t n);

// {f, g}_eta = (df ^ dg) / eta on the sphere H2 = c2.
template <class C>
ChartElement<C> poisson_from_symplectic(const FiberFrame<C>& frame, const ChartElement<C>& f,
                                        const ChartElement<C>& g, const C& c2) {
  return restrict_to_sphere(DiffForm<C>::d(f).wedge(DiffForm<C>::d(g)), frame, c2);
}

// The eta_i usable on the frame's chart (x_i inverted).
template <class C>
DiffForm<C> sphere_form(const FiberFrame<C>& frame) {
  for (int i = 0; i < 3; ++i) {
    try {
      return frame.eta(i);
    } catch (const ChartObstruction&) {
    }
  }
  throw ChartObstruction("no coordinate is inverted on this chart; eta is undefined");
}

template <class C>
bool is_symplectic_hamiltonian(const ClassicalFlow<C>& flow, const FiberFrame<C>& frame, const C& c2) {
  return restrict_to_sphere(lie_derivative(flow, sphere_form(frame)), frame, c2).is_zero();
}

// Dense square matrices over any commutative ring.
template <class T>
using Matrix = std::vector<std::vector<T>>;

template <class T>
Matrix<T> mat_mul(const Matrix<T>& a, const Matrix<T>& b, const T& zero) {
  const std::size_t n = a.size();
  Matrix<T> r(n, std::vector<T>(n, zero));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) r[i][j] = r[i][j] + a[i][k] * b[k][j];
  return r;
}

// Determinant by cofactor expansion along the first row; division free.
template <class T>
T determinant(const Matrix<T>& a, const T& zero, const T& one) {
  const std::size_t n = a.size();
  if (n == 0) return one;
  if (n == 1) return a[0][0];
  if (n == 2) return T(a[0][0] * a[1][1] - a[0][1] * a[1][0]);
  T acc = zero;
  for (std::size_t j = 0; j < n; ++j) {
    Matrix<T> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<T> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(a[i][k]);
      minor.push_back(std::move(row));
    }
    T term = a[0][j] * determinant(minor, zero, one);
    if (j % 2) {
      acc = acc - term;
    } else {
      acc = acc + term;
    }
  }
  return acc;
}

// P_1..P_n with det(s - x) = s^n - P_1 s^(n-1) + P_2 s^(n-2) - ...; P_j is
// the sum of the j x j principal minors.
template <class T>
std::vector<T> char_poly(const Matrix<T>& x, const T& zero, const T& one) {
  const std::size_t n = x.size();
  if (n > 8) throw DomainError("char_poly is meant for small matrices");
  std::vector<T> P(n, zero);
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) idx.push_back(i);
    Matrix<T> minor(idx.size(), std::vector<T>(idx.size(), zero));
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) minor[a][b] = x[idx[a]][idx[b]];
    P[idx.size() - 1] = P[idx.size() - 1] + determinant(minor, zero, one);
  }
  return P;
}

// Coordinates x_ij of a chart built from gl_names as a matrix.
template <class C>
Matrix<ChartElement<C>> coordinate_matrix(const Chart<C>& chart, std::size_t n) {
  Matrix<ChartElement<C>> x;
  const auto names = gl_names(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ChartElement<C>> row;
    for (std::size_t j = 0; j < n; ++j) row.push_back(ChartElement<C>::variable(chart, names[i * n + j]));
    x.push_back(std::move(row));
  }
  return x;
}

// delta x = [M, x] on a chart containing x11..xnn; other variables are
// parameters with zero derivative.
template <class C>
ClassicalFlow<C> lax_flow(const Chart<C>& chart, const Matrix<ChartElement<C>>& M) {
  const std::size_t n = M.size();
  const auto x = coordinate_matrix(chart, n);
  const ChartElement<C> zero(chart, chart.poly_zero());
  const auto Mx = mat_mul(M, x, zero), xM = mat_mul(x, M, zero);
  std::vector<ChartElement<C>> images(chart.vars().size(), zero);
  const auto names = gl_names(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) images[chart.vars().index(names[i * n + j])] = Mx[i][j] - xM[i][j];
  return ClassicalFlow<C>(chart, std::move(images));
}

template <class C>
ChartElement<C> isospectrality_defect(const Chart<C>& chart, const Matrix<ChartElement<C>>& M, std::size_t j) {
  const std::size_t n = M.size();
  if (j < 1 || j > n) throw DomainError("char_poly index out of range");
  const ChartElement<C> zero(chart, chart.poly_zero()), one = ChartElement<C>::constant(chart, 1);
  const auto P = char_poly(coordinate_matrix(chart, n), zero, one);
  return lax_flow(chart, M).apply(P[j - 1]);
}

// On a chart with coordinates (x, x'): delta x = x' for every base variable.
template <class C>
bool is_canonical_flow(const ClassicalFlow<C>& flow, const std::vector<std::string>& base,
                       const std::vector<std::string>& primed) {
  if (base.size() != primed.size()) throw DomainError("base and primed coordinate lists differ in length");
  const Chart<C>& chart = flow.chart();
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (flow.image(chart.vars().index(base[i])) != ChartElement<C>::variable(chart, primed[i])) return false;
  }
  return true;
}

// epsilon = delta(nu), the Lie derivative of nu.
template <class C>
DiffForm<C> euler_lagrange_form(const DiffForm<C>& nu, const ClassicalFlow<C>& flow) {
  return lie_derivative(flow, nu);
}

// delta(dL/dx') - dL/dx for each base coordinate. The defect is only
// meaningful for canonical flows; pass check_canonical = false to evaluate
// the expression anyway.
template <class C>
std::vector<ChartElement<C>> el_defect(const ChartElement<C>& L, const ClassicalFlow<C>& flow,
                                       const std::vector<std::string>& base, const std::vector<std::string>& primed,
                                       bool check_canonical = true) {
  if (check_canonical && !is_canonical_flow(flow, base, primed)) {
    throw DomainError("Euler-Lagrange defect needs a canonical flow");
  }
  const Chart<C>& chart = flow.chart();
  std::vector<ChartElement<C>> out;
  for (std::size_t i = 0; i < base.size(); ++i) {
    out.push_back(flow.apply(L.partial(chart.vars().index(primed[i]))) - L.partial(chart.vars().index(base[i])));
  }
  return out;
}

}  // namespace deltaflow
