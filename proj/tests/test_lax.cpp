#include <doctest.h>

#include <random>

#include "deltaflow/lax.hpp"

using namespace deltaflow;

namespace {

// Entrywise p-th power mod p of an integer matrix, computed on residues.
std::vector<std::vector<unsigned>> frobenius_mod_p(const PMatrix& x) {
  const unsigned p = x.prime();
  std::vector<std::vector<unsigned>> r(x.size(), std::vector<unsigned>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      unsigned long v = 1, b = x(i, j).residue();
      for (unsigned k = 0; k < p; ++k) v = v * b % p;
      r[i][j] = static_cast<unsigned>(v);
    }
  return r;
}

std::vector<std::vector<unsigned>> residues(const PMatrix& x) {
  std::vector<std::vector<unsigned>> r(x.size(), std::vector<unsigned>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) r[i][j] = x(i, j).residue();
  return r;
}

}  // namespace

TEST_CASE("matrix basics") {
  const PMatrix g = PMatrix::from_ints({{1, 1}, {0, 1}}, 5, 3);
  const TorusPoint h{{TruncatedPadic(5, 3, 1), TruncatedPadic(5, 3, 2)}};
  // g^-1 h g by hand: [[1, -1], [0, 1]] * [[1, 1], [0, 2]].
  CHECK(conj(h, g) == PMatrix::from_ints({{1, -1}, {0, 2}}, 5, 3));
  CHECK(conj(h, PMatrix::identity(2, 5, 3)) == h.matrix());
  CHECK(phi0_entrywise(PMatrix::from_ints({{1, 2}, {0, 1}}, 3, 3)) == PMatrix::from_ints({{1, 8}, {0, 1}}, 3, 3));
  CHECK(phi0_entrywise(PMatrix::identity(3, 7, 2)) == PMatrix::identity(3, 7, 2));
  CHECK_THROWS_AS(PMatrix::from_ints({{5, 1}, {0, 5}}, 5, 3).inverse(), DomainError);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const PMatrix m = random_invertible(3, 7, 4, rng);
    CHECK(m * m.inverse() == PMatrix::identity(3, 7, 4));
    const PMatrix t = random_teichmuller_invertible(3, 7, 4, rng);
    CHECK(phi0_entrywise(t) == t);
    // Similarity invariance of the char poly.
    const TorusPoint h = random_torus(3, 7, 4, rng, false);
    const auto P = conj(h, m).char_poly();
    const auto Q = h.matrix().char_poly();
    for (std::size_t j = 0; j < 3; ++j) CHECK(P[j] == Q[j]);
    // det(phi0 g) = det(g)^p mod p.
    CHECK(phi0_entrywise(m).det().residue() == m.det().pow(7).residue());
  }
}

TEST_CASE("eigen split") {
  const PMatrix d = PMatrix::diagonal({TruncatedPadic(5, 3, 1), TruncatedPadic(5, 3, 2)});
  const auto e = eigen_split(d);
  CHECK(e.h.matrix() == d);
  CHECK(e.g == PMatrix::identity(2, 5, 3));
  CHECK_THROWS_AS(eigen_split(PMatrix::from_ints({{0, 1}, {0, 0}}, 5, 3)), SpectrumError);
  // s^2 - 2 has no root mod 5.
  CHECK_THROWS_AS(eigen_split(PMatrix::from_ints({{0, 2}, {1, 0}}, 5, 3)), SpectrumError);

  std::mt19937_64 rng(5);
  for (unsigned p : {5u, 7u, 11u}) {
    for (std::size_t n : {2u, 3u}) {
      for (int trial = 0; trial < 10; ++trial) {
        const TorusPoint h = random_torus(n, p, 4, rng, false);
        const PMatrix x = conj(h, random_invertible(n, p, 4, rng));
        const auto s = eigen_split(x);
        CHECK(s.g.inverse() * s.h.matrix() * s.g == x);
        // Same multiset of eigenvalues.
        for (const auto& t : h.t) {
          bool hit = false;
          for (const auto& u : s.h.t) hit = hit || u == t;
          CHECK(hit);
        }
      }
    }
  }
}

TEST_CASE("frobenius star diagram") {
  std::mt19937_64 rng(7);
  for (unsigned p : {5u, 7u}) {
    for (std::size_t n : {2u, 3u}) {
      for (int trial = 0; trial < 20; ++trial) {
        const TorusPoint h = random_torus(n, p, 3, rng, trial % 2 == 0);
        const PMatrix g = random_invertible(n, p, 3, rng);
        const PMatrix x = conj(h, g);
        const PMatrix y = frobenius_star(x);
        CHECK(y == conj(phi0(h), phi0_entrywise(g)));
        CHECK(residues(y) == frobenius_mod_p(x));
        // A second decomposition: g' = d * perm * g with a random torus d.
        const TorusPoint d = random_torus(n, p, 3, rng, false);
        PMatrix perm(n, p, 3);
        for (std::size_t i = 0; i < n; ++i) perm(i, (i + 1) % n) = perm.one();
        TorusPoint hp;
        for (std::size_t i = 0; i < n; ++i) hp.t.push_back(h.t[(i + 1) % n]);
        const PMatrix g2 = d.matrix() * perm * g;
        REQUIRE(conj(hp, g2) == x);
        CHECK(frobenius_star(hp, g2) == y);
      }
    }
  }
  CHECK(frobenius_star(PMatrix::diagonal({TruncatedPadic(5, 3, 3), TruncatedPadic(5, 3, 4)})) ==
        PMatrix::diagonal({TruncatedPadic(5, 3, 243), TruncatedPadic(5, 3, 1024)}));
}

TEST_CASE("frobenius star star") {
  const unsigned p = 5, N = 3;
  const TruncatedPadic z1(p, N, 7), z2(p, N, 3);
  const PMatrix C = companion({z1, z2});
  CHECK(frobenius_star_star(C) == companion({z1.pow(p), z2.pow(p)}));

  std::mt19937_64 rng(9);
  for (unsigned q : {5u, 7u}) {
    for (std::size_t n : {2u, 3u}) {
      for (int trial = 0; trial < 20; ++trial) {
        const PMatrix x = random_regular(n, q, N, rng);
        const PMatrix y = frobenius_star_star(x);
        const auto P = x.char_poly(), Q = y.char_poly();
        for (std::size_t j = 0; j < n; ++j) CHECK(Q[j] == P[j].pow(q));
        CHECK(residues(y) == frobenius_mod_p(x));
        const PMatrix alpha = random_matrix(n, q, N, rng);
        const auto R = conjugate_lift(y, alpha).char_poly();
        for (std::size_t j = 0; j < n; ++j) CHECK(R[j] == Q[j]);
      }
    }
  }
  // Scalar matrices have no cyclic vector for n >= 2.
  CHECK_THROWS_AS(frobenius_star_star(PMatrix::identity(2, 5, 3)), SpectrumError);
}

TEST_CASE("conjugate lift") {
  std::mt19937_64 rng(10);
  const PMatrix y = random_matrix(3, 7, 3, rng);
  CHECK(conjugate_lift(y, PMatrix(3, 7, 3)) == y);
  const auto via = conjugate_lift(y, y, [](const PMatrix& x) { return x * x; });
  const auto P = y.char_poly(), Q = via.char_poly();
  for (std::size_t j = 0; j < 3; ++j) CHECK(P[j] == Q[j]);
}

TEST_CASE("spectrum of fixed points") {
  const unsigned p = 5, N = 3;
  CHECK(spectrum_delta_constant_check(PMatrix::diagonal({teichmuller(p, 2, N), teichmuller(p, 3, N)})));
  CHECK_THROWS_AS(spectrum_delta_constant_check(PMatrix::diagonal({TruncatedPadic(p, N, 1 + 5), TruncatedPadic(p, N, 2)})),
                  DomainError);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 2;
    const TorusPoint h = random_torus(n, 7, N, rng, true);
    const PMatrix g = random_teichmuller_invertible(n, 7, N, rng);
    const PMatrix x = conj(h, g);
    CHECK(frobenius_star(x) == x);
    CHECK(spectrum_delta_constant_check(x));
  }
}
