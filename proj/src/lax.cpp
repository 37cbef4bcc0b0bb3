#include "deltaflow/lax.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace deltaflow {

PMatrix::PMatrix(std::size_t n, unsigned p, unsigned precision)
    : p_(p), n_(precision), rows_(n, std::vector<TruncatedPadic>(n, TruncatedPadic(p, precision, 0))) {}

PMatrix::PMatrix(Matrix<TruncatedPadic> rows) : p_(0), n_(0), rows_(std::move(rows)) {
  if (rows_.empty()) throw DomainError("empty matrix");
  p_ = rows_[0][0].prime();
  n_ = rows_[0][0].precision();
  for (const auto& r : rows_) {
    if (r.size() != rows_.size()) throw DomainError("matrix is not square");
    for (const auto& e : r)
      if (e.prime() != p_ || e.precision() != n_) throw VariableMismatch("matrix entries over different rings");
  }
}

PMatrix PMatrix::identity(std::size_t n, unsigned p, unsigned precision) {
  PMatrix m(n, p, precision);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = m.one();
  return m;
}

PMatrix PMatrix::diagonal(const std::vector<TruncatedPadic>& d) {
  if (d.empty()) throw DomainError("empty diagonal");
  PMatrix m(d.size(), d[0].prime(), d[0].precision());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

PMatrix PMatrix::from_ints(const std::vector<std::vector<long>>& rows, unsigned p, unsigned precision) {
  Matrix<TruncatedPadic> m;
  for (const auto& r : rows) {
    std::vector<TruncatedPadic> row;
    for (long v : r) row.emplace_back(p, precision, v);
    m.push_back(std::move(row));
  }
  return PMatrix(std::move(m));
}

PMatrix PMatrix::operator+(const PMatrix& o) const {
  PMatrix r = *this;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) r(i, j) = r(i, j) + o(i, j);
  return r;
}

PMatrix PMatrix::operator-(const PMatrix& o) const {
  PMatrix r = *this;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) r(i, j) = r(i, j) - o(i, j);
  return r;
}

PMatrix PMatrix::operator*(const PMatrix& o) const {
  if (o.size() != size()) throw DomainError("matrix sizes differ");
  return PMatrix(mat_mul(rows_, o.rows_, zero()));
}

PMatrix PMatrix::scale(const TruncatedPadic& c) const {
  PMatrix r = *this;
  for (auto& row : r.rows_)
    for (auto& e : row) e = e * c;
  return r;
}

PMatrix PMatrix::transpose() const {
  PMatrix r = *this;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) r(i, j) = (*this)(j, i);
  return r;
}

bool operator==(const PMatrix& a, const PMatrix& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (!(a(i, j) == b(i, j))) return false;
  return true;
}

TruncatedPadic PMatrix::det() const { return determinant(rows_, zero(), one()); }

PMatrix PMatrix::inverse() const {
  const std::size_t n = size();
  Matrix<TruncatedPadic> a = rows_;
  PMatrix inv = identity(n, p_, n_);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t r = c;
    while (r < n && !a[r][c].is_unit()) ++r;
    if (r == n) throw DomainError("matrix is not invertible over Z/p^N");
    std::swap(a[r], a[c]);
    std::swap(inv.rows_[r], inv.rows_[c]);
    const TruncatedPadic k = a[c][c].inverse();
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] = a[c][j] * k;
      inv(c, j) = inv(c, j) * k;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a[i][c].is_zero()) continue;
      const TruncatedPadic f = a[i][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] = a[i][j] - f * a[c][j];
        inv(i, j) = inv(i, j) - f * inv(c, j);
      }
    }
  }
  return inv;
}

std::vector<TruncatedPadic> PMatrix::char_poly() const { return deltaflow::char_poly(rows_, zero(), one()); }

PMatrix PMatrix::reduce(unsigned precision) const {
  Matrix<TruncatedPadic> m = rows_;
  for (auto& row : m)
    for (auto& e : row) e = e.reduce(precision);
  return PMatrix(std::move(m));
}

std::string PMatrix::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < size(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < size(); ++j) os << (j ? ", " : "") << rows_[i][j].value().get_str();
    os << "]";
  }
  os << "]";
  return os.str();
}

PMatrix conj(const TorusPoint& h, const PMatrix& g) { return g.inverse() * h.matrix() * g; }

PMatrix phi0_entrywise(const PMatrix& g) {
  PMatrix r = g;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) r(i, j) = g(i, j).pow(g.prime());
  return r;
}

TorusPoint phi0(const TorusPoint& h) {
  TorusPoint r = h;
  for (auto& t : r.t) t = t.pow(t.prime());
  return r;
}

namespace {

// Monic coefficients c_0..c_n of det(s - x).
std::vector<TruncatedPadic> monic_coefficients(const std::vector<TruncatedPadic>& P, const TruncatedPadic& one) {
  const std::size_t n = P.size();
  std::vector<TruncatedPadic> c(n + 1, one);
  for (std::size_t j = 1; j <= n; ++j) c[n - j] = j % 2 ? -P[j - 1] : P[j - 1];
  return c;
}

TruncatedPadic horner(const std::vector<TruncatedPadic>& c, const TruncatedPadic& s) {
  TruncatedPadic acc = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * s + c[k];
  return acc;
}

std::vector<TruncatedPadic> derivative(const std::vector<TruncatedPadic>& c) {
  std::vector<TruncatedPadic> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * TruncatedPadic(c[k].prime(), c[k].precision(), static_cast<long>(k)));
  return d;
}

// A nonzero w with B w = 0, for B of rank n - 1 mod p.
std::vector<TruncatedPadic> kernel_vector(Matrix<TruncatedPadic> B) {
  const std::size_t n = B.size();
  std::vector<std::size_t> col(n);
  std::iota(col.begin(), col.end(), 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    bool found = false;
    for (std::size_t r = k; r < n && !found; ++r)
      for (std::size_t c = k; c < n && !found; ++c)
        if (B[r][col[c]].is_unit()) {
          std::swap(B[r], B[k]);
          std::swap(col[c], col[k]);
          found = true;
        }
    if (!found) throw SpectrumError("eigenspace is not a line mod p");
    const TruncatedPadic inv = B[k][col[k]].inverse();
    for (auto& e : B[k]) e = e * inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || B[i][col[k]].is_zero()) continue;
      const TruncatedPadic f = B[i][col[k]];
      for (std::size_t j = 0; j < n; ++j) B[i][j] = B[i][j] - f * B[k][j];
    }
  }
  const TruncatedPadic one(B[0][0].prime(), B[0][0].precision(), 1);
  std::vector<TruncatedPadic> w(n, one - one);
  w[col[n - 1]] = one;
  for (std::size_t k = 0; k + 1 < n; ++k) w[col[k]] = -B[k][col[n - 1]];
  return w;
}

}  // namespace

EigenSplit eigen_split(const PMatrix& x) {
  const std::size_t n = x.size();
  const unsigned p = x.prime(), N = x.precision();
  const auto c = monic_coefficients(x.char_poly(), x.one());
  const auto dc = derivative(c);

  std::vector<TruncatedPadic> roots;
  for (unsigned r = 0; r < p; ++r) {
    const TruncatedPadic s(p, 1, static_cast<long>(r));
    std::vector<TruncatedPadic> c1, d1;
    for (const auto& e : c) c1.push_back(e.reduce(1));
    if (!horner(c1, s).is_zero()) continue;
    for (const auto& e : dc) d1.push_back(e.reduce(1));
    if (horner(d1, s).is_zero()) throw SpectrumError("repeated eigenvalue " + std::to_string(r) + " mod p");
    TruncatedPadic t(p, N, static_cast<long>(r));
    for (unsigned it = 0; it < N; ++it) t = t - horner(c, t) * horner(dc, t).inverse();
    roots.push_back(t);
  }
  if (roots.size() < n) throw SpectrumError("characteristic polynomial does not split over Z/p^N");

  // Row i of g is a left eigenvector for t_i: g x = h g.
  Matrix<TruncatedPadic> g;
  for (const auto& t : roots) {
    const PMatrix B = (x - PMatrix::identity(n, p, N).scale(t)).transpose();
    g.push_back(kernel_vector(B.rows()));
  }
  EigenSplit out{TorusPoint{roots}, PMatrix(std::move(g))};
  if (!out.g.is_invertible() || !(out.g * x == out.h.matrix() * out.g)) {
    throw InternalError("eigen decomposition failed to reconstruct x");
  }
  return out;
}

PMatrix frobenius_star(const TorusPoint& h, const PMatrix& g) { return conj(phi0(h), phi0_entrywise(g)); }

PMatrix frobenius_star(const PMatrix& x) {
  const EigenSplit e = eigen_split(x);
  return frobenius_star(e.h, e.g);
}

PMatrix companion(const std::vector<TruncatedPadic>& P) {
  if (P.empty()) throw DomainError("empty char poly");
  const std::size_t n = P.size();
  const unsigned p = P[0].prime(), N = P[0].precision();
  const auto c = monic_coefficients(P, TruncatedPadic(p, N, 1));
  PMatrix m(n, p, N);
  for (std::size_t i = 1; i < n; ++i) m(i, i - 1) = m.one();
  for (std::size_t k = 0; k < n; ++k) m(k, n - 1) = -c[k];
  return m;
}

namespace {

PMatrix krylov(const PMatrix& x, const std::vector<TruncatedPadic>& v) {
  const std::size_t n = x.size();
  PMatrix s(n, x.prime(), x.precision());
  std::vector<TruncatedPadic> col = v;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) s(i, j) = col[i];
    std::vector<TruncatedPadic> next(n, x.zero());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) next[i] = next[i] + x(i, k) * col[k];
    col = std::move(next);
  }
  return s;
}

}  // namespace

std::vector<TruncatedPadic> cyclic_vector(const PMatrix& x, std::uint64_t seed) {
  const std::size_t n = x.size();
  std::vector<TruncatedPadic> v(n, x.zero());
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = x.one();
    if (krylov(x, v).is_invertible()) return v;
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (auto& e : v) e = TruncatedPadic(x.prime(), x.precision(), static_cast<long>(rng() % x.prime()));
    if (krylov(x, v).is_invertible()) return v;
  }
  throw SpectrumError("no cyclic vector mod p; the matrix is not regular");
}

PMatrix frobenius_star_star(const PMatrix& x) {
  const PMatrix s = krylov(x, cyclic_vector(x));
  auto P = x.char_poly();
  for (auto& e : P) e = e.pow(x.prime());
  const PMatrix sp = phi0_entrywise(s);
  return sp * companion(P) * sp.inverse();
}

PMatrix conjugate_lift(const PMatrix& y, const PMatrix& alpha) {
  const PMatrix eps =
      PMatrix::identity(y.size(), y.prime(), y.precision()) + alpha.scale(TruncatedPadic(y.prime(), y.precision(), static_cast<long>(y.prime())));
  return eps.inverse() * y * eps;
}

PMatrix conjugate_lift(const PMatrix& y, const PMatrix& x, const std::function<PMatrix(const PMatrix&)>& alpha) {
  return conjugate_lift(y, alpha(x));
}

bool spectrum_delta_constant_check(const PMatrix& x) {
  if (!(frobenius_star(x) == x)) throw DomainError("x is not fixed by frobenius_star");
  for (const auto& t : eigen_split(x).h.t)
    if (!(t.pow(t.prime()) == t)) return false;
  return true;
}

PMatrix random_matrix(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng) {
  PMatrix m(n, p, precision);
  const mpz_class mod = m.zero().context().modulus;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      mpz_class v = static_cast<unsigned long>(rng());
      v = v * static_cast<unsigned long>(rng()) % mod;
      m(i, j) = TruncatedPadic(p, precision, v);
    }
  return m;
}

PMatrix random_invertible(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng) {
  for (;;) {
    PMatrix m = random_matrix(n, p, precision, rng);
    if (m.is_invertible()) return m;
  }
}

PMatrix random_teichmuller_invertible(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng) {
  for (;;) {
    PMatrix m(n, p, precision);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = teichmuller(p, static_cast<unsigned>(rng() % p), precision);
    if (m.is_invertible()) return m;
  }
}

TorusPoint random_torus(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng, bool teichmuller_lifts) {
  if (n > p - 1) throw DomainError("not enough distinct units mod p");
  std::vector<unsigned> res(p - 1);
  std::iota(res.begin(), res.end(), 1u);
  std::shuffle(res.begin(), res.end(), rng);
  TorusPoint h;
  const mpz_class mod = TruncatedPadic(p, precision, 0).context().modulus;
  for (std::size_t i = 0; i < n; ++i) {
    if (teichmuller_lifts) {
      h.t.push_back(teichmuller(p, res[i], precision));
    } else {
      // residue + p * random
      mpz_class v = mpz_class(static_cast<unsigned long>(rng())) * p + res[i];
      h.t.emplace_back(p, precision, mpz_class(v % mod));
    }
  }
  return h;
}

PMatrix random_regular(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng) {
  for (;;) {
    PMatrix m = random_matrix(n, p, precision, rng);
    try {
      cyclic_vector(m);
      return m;
    } catch (const SpectrumError&) {
    }
  }
}

}  // namespace deltaflow
