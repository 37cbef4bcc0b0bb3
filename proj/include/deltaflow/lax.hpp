#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "deltaflow/flows.hpp"

namespace deltaflow {

// Square matrix over Z/p^N.
class PMatrix {
 public:
  PMatrix(std::size_t n, unsigned p, unsigned precision);
  explicit PMatrix(Matrix<TruncatedPadic> rows);

  static PMatrix identity(std::size_t n, unsigned p, unsigned precision);
  static PMatrix diagonal(const std::vector<TruncatedPadic>& d);
  static PMatrix from_ints(const std::vector<std::vector<long>>& rows, unsigned p, unsigned precision);

  std::size_t size() const { return rows_.size(); }
  unsigned prime() const { return p_; }
  unsigned precision() const { return n_; }
  const TruncatedPadic& operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }
  TruncatedPadic& operator()(std::size_t i, std::size_t j) { return rows_[i][j]; }
  const Matrix<TruncatedPadic>& rows() const { return rows_; }

  TruncatedPadic zero() const { return TruncatedPadic(p_, n_, 0); }
  TruncatedPadic one() const { return TruncatedPadic(p_, n_, 1); }

  PMatrix operator+(const PMatrix& o) const;
  PMatrix operator-(const PMatrix& o) const;
  PMatrix operator*(const PMatrix& o) const;
  PMatrix scale(const TruncatedPadic& c) const;
  PMatrix transpose() const;
  friend bool operator==(const PMatrix& a, const PMatrix& b);

  TruncatedPadic det() const;
  // Membership in GL_n: det is a unit.
  bool is_invertible() const { return det().is_unit(); }
  // Gauss-Jordan with unit pivots; DomainError if det is not a unit.
  PMatrix inverse() const;
  // P_1..P_n with det(s - x) = s^n - P_1 s^(n-1) + ... + (-1)^n P_n.
  std::vector<TruncatedPadic> char_poly() const;
  PMatrix reduce(unsigned precision) const;

  std::string to_string() const;

 private:
  unsigned p_, n_;
  Matrix<TruncatedPadic> rows_;
};

struct TorusPoint {
  std::vector<TruncatedPadic> t;
  PMatrix matrix() const { return PMatrix::diagonal(t); }
};

// g^-1 h g
PMatrix conj(const TorusPoint& h, const PMatrix& g);
PMatrix phi0_entrywise(const PMatrix& g);
TorusPoint phi0(const TorusPoint& h);

struct EigenSplit {
  TorusPoint h;
  PMatrix g;
};

// x = g^-1 h g with eigenvalues ordered by residue. SpectrumError when the
// spectrum repeats mod p or is not in Z/p^N.
EigenSplit eigen_split(const PMatrix& x);

// phi0(g)^-1 diag(t^p) phi0(g) from eigen_split.
PMatrix frobenius_star(const PMatrix& x);
// The same lift computed through a given decomposition x = g^-1 h g.
PMatrix frobenius_star(const TorusPoint& h, const PMatrix& g);

// Companion matrix: ones on the subdiagonal, last column -c_k where c_k is
// the coefficient of s^k in the monic char poly with invariants P.
PMatrix companion(const std::vector<TruncatedPadic>& P);

// v, e1 + e2, ... then seeded random vectors; SpectrumError if none of them
// is cyclic mod p.
std::vector<TruncatedPadic> cyclic_vector(const PMatrix& x, std::uint64_t seed = 0x5eedULL);

// With s = [v, xv, ..., x^(n-1) v], x = s Comp(P) s^-1; returns
// phi0(s) Comp(P^p) phi0(s)^-1.
PMatrix frobenius_star_star(const PMatrix& x);

// eps^-1 y eps with eps = 1 + p alpha.
PMatrix conjugate_lift(const PMatrix& y, const PMatrix& alpha);
PMatrix conjugate_lift(const PMatrix& y, const PMatrix& x, const std::function<PMatrix(const PMatrix&)>& alpha);

// True iff every eigenvalue is Teichmuller. DomainError if x is not fixed by
// frobenius_star.
bool spectrum_delta_constant_check(const PMatrix& x);

// Random helpers for property checks.
PMatrix random_matrix(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng);
PMatrix random_invertible(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng);
PMatrix random_teichmuller_invertible(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng);
// Units pairwise distinct mod p; Teichmuller lifts if requested.
TorusPoint random_torus(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng, bool teichmuller_lifts);
// A matrix with a cyclic vector mod p.
PMatrix random_regular(std::size_t n, unsigned p, unsigned precision, std::mt19937_64& rng);

}  // namespace deltaflow
