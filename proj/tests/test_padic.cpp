#include <doctest.h>

#include <random>

#include "deltaflow/padic.hpp"

using namespace deltaflow;

namespace {

// Plain mpz oracle for (a - a^p)/p mod p^n.
mpz_class oracle_delta(const mpz_class& a, unsigned p, unsigned n) {
  mpz_class mod, ap, big;
  mpz_ui_pow_ui(big.get_mpz_t(), p, n + 1);
  mpz_pow_ui(ap.get_mpz_t(), a.get_mpz_t(), p);
  mpz_class d = a - ap;
  mpz_fdiv_r(d.get_mpz_t(), d.get_mpz_t(), big.get_mpz_t());
  REQUIRE(mpz_divisible_ui_p(d.get_mpz_t(), p));
  d /= p;
  mpz_ui_pow_ui(mod.get_mpz_t(), p, n);
  mpz_fdiv_r(d.get_mpz_t(), d.get_mpz_t(), mod.get_mpz_t());
  return d;
}

}  // namespace

TEST_CASE("contexts reject even and composite primes") {
  CHECK_THROWS_AS(PadicContext::get(2, 3), DomainError);
  CHECK_THROWS_AS(PadicContext::get(9, 3), DomainError);
  CHECK_THROWS_AS(PadicContext::get(5, 0), PrecisionError);
  CHECK(&PadicContext::get(5, 3) == &PadicContext::get(5, 3));
}

TEST_CASE("ring arithmetic in Z/p^N") {
  TruncatedPadic a(5, 3, 57), b(5, 3, -1);
  CHECK(b.value() == 124);
  CHECK((a + b).value() == 56);
  CHECK((a * b).value() == 68);
  CHECK((-a).value() == 68);
  CHECK(a.is_unit());
  CHECK_FALSE(TruncatedPadic(5, 3, 10).is_unit());
  CHECK(TruncatedPadic(5, 3, 50).valuation() == 2);
  CHECK((a * a.inverse()).value() == 1);
  CHECK_THROWS_AS(TruncatedPadic(5, 3, 10).inverse(), DomainError);
}

TEST_CASE("mixed precision works at the smaller precision") {
  TruncatedPadic a(3, 4, 30), b(3, 2, 3);
  CHECK((a + b).precision() == 2);
  CHECK((a + b).value() == 6);
  CHECK(a == TruncatedPadic(3, 2, 3));
  CHECK_FALSE(a == TruncatedPadic(3, 4, 3));
}

TEST_CASE("big moduli stay exact") {
  TruncatedPadic a(7, 100, 3);
  TruncatedPadic x = a.pow(1000ul);
  mpz_class m, v;
  mpz_ui_pow_ui(m.get_mpz_t(), 7, 100);
  mpz_class three = 3, e = 1000;
  mpz_powm(v.get_mpz_t(), three.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
  CHECK(x.value() == v);
  CHECK((x * x.inverse()).value() == 1);
}

TEST_CASE("delta_base examples") {
  CHECK(delta_base(TruncatedPadic(5, 4, 0)).is_zero());
  CHECK(delta_base(TruncatedPadic(5, 4, 1)).is_zero());
  TruncatedPadic d = delta_base(TruncatedPadic(3, 4, 2));
  CHECK(d.precision() == 3);
  CHECK(d.value() == 25);
  CHECK_THROWS_AS(delta_base(TruncatedPadic(3, 3, 2), 3), PrecisionError);
  CHECK(delta_base(TruncatedPadic(3, 5, 2), 3).value() == 25);
}

TEST_CASE("teichmuller lifts") {
  CHECK(teichmuller(5, 0, 3).is_zero());
  CHECK(teichmuller(5, 1, 3).value() == 1);
  CHECK(teichmuller(5, 2, 3).value() == 57);
  for (unsigned p : {3u, 5u, 7u, 13u}) {
    for (unsigned r = 0; r < p; ++r) {
      TruncatedPadic t = teichmuller(p, r, 6);
      CHECK(t.residue() == r);
      CHECK(is_delta_constant(t));
      CHECK(delta_base(t).is_zero());
    }
  }
  CHECK_FALSE(is_delta_constant(TruncatedPadic(3, 3, 2)));
  CHECK_FALSE(is_delta_constant(TruncatedPadic(5, 3, 5)));
}

TEST_CASE("delta agrees with an mpz oracle") {
  std::mt19937_64 rng(7);
  for (unsigned p : {3u, 5u, 7u}) {
    mpz_class mod;
    mpz_ui_pow_ui(mod.get_mpz_t(), p, 7);
    for (int i = 0; i < 200; ++i) {
      mpz_class a = static_cast<unsigned long>(rng() % mod.get_ui());
      CHECK(delta_base(TruncatedPadic(p, 7, a)).value() == oracle_delta(a, p, 6));
    }
  }
}

TEST_CASE("sum and product laws") {
  std::mt19937_64 rng(11);
  for (unsigned p : {3u, 5u, 7u}) {
    const auto& ctx = PadicContext::get(p, 7);
    for (int i = 0; i < 300; ++i) {
      TruncatedPadic a(ctx, static_cast<long>(rng() % ctx.modulus.get_ui()));
      TruncatedPadic b(ctx, static_cast<long>(rng() % ctx.modulus.get_ui()));
      const unsigned long pp = p;
      TruncatedPadic carry = (a.pow(pp) + b.pow(pp) - (a + b).pow(pp)).divide_by_p();
      CHECK(delta_base(a + b) == delta_base(a) + delta_base(b) + carry);
      TruncatedPadic da = delta_base(a), db = delta_base(b);
      TruncatedPadic rhs = a.pow(pp) * db + b.pow(pp) * da + TruncatedPadic(p, 6, p) * da * db;
      CHECK(delta_base(a * b) == rhs);
    }
  }
}

TEST_CASE("nested delta loses one digit per application") {
  TruncatedPadic a(5, 6, 123);
  TruncatedPadic d2 = delta_base(delta_base(a));
  CHECK(d2.precision() == 4);
  mpz_class first = oracle_delta(123, 5, 5);
  CHECK(d2.value() == oracle_delta(first, 5, 4));
}
