#pragma once

#include <string>

#include <gmpxx.h>

#include "deltaflow/errors.hpp"
#include "deltaflow/padic.hpp"

namespace deltaflow {

// Coefficient ring descriptors. Polynomials carry one so that constants like
// zero and one can be manufactured without a sample coefficient at hand.
template <class C>
struct CoeffRing;

template <>
struct CoeffRing<mpz_class> {
  mpz_class zero() const { return 0; }
  mpz_class one() const { return 1; }
  mpz_class from_int(long v) const { return v; }
  mpz_class from_mpz(const mpz_class& v) const { return v; }
  CoeffRing meet(const CoeffRing&) const { return *this; }
  bool operator==(const CoeffRing&) const { return true; }
  std::string name() const { return "Z"; }
};

template <>
struct CoeffRing<mpq_class> {
  mpq_class zero() const { return 0; }
  mpq_class one() const { return 1; }
  mpq_class from_int(long v) const { return v; }
  mpq_class from_mpz(const mpz_class& v) const { return mpq_class(v); }
  CoeffRing meet(const CoeffRing&) const { return *this; }
  bool operator==(const CoeffRing&) const { return true; }
  std::string name() const { return "Q"; }
};

template <>
struct CoeffRing<TruncatedPadic> {
  const PadicContext* ctx = nullptr;

  CoeffRing() = default;
  explicit CoeffRing(const PadicContext& c) : ctx(&c) {}
  CoeffRing(unsigned p, unsigned precision) : ctx(&PadicContext::get(p, precision)) {}

  TruncatedPadic zero() const { return TruncatedPadic(*ctx, 0L); }
  TruncatedPadic one() const { return TruncatedPadic(*ctx, 1L); }
  TruncatedPadic from_int(long v) const { return TruncatedPadic(*ctx, v); }
  TruncatedPadic from_mpz(const mpz_class& v) const { return TruncatedPadic(*ctx, v); }
  unsigned prime() const { return ctx->prime; }
  unsigned precision() const { return ctx->precision; }
  CoeffRing at_precision(unsigned n) const { return CoeffRing(ctx->prime, n); }
  CoeffRing meet(const CoeffRing& o) const {
    if (o.ctx->prime != ctx->prime) throw DomainError("coefficient rings for different primes");
    return o.ctx->precision < ctx->precision ? o : *this;
  }
  bool operator==(const CoeffRing& o) const { return ctx == o.ctx; }
  std::string name() const {
    return "Z/" + std::to_string(ctx->prime) + "^" + std::to_string(ctx->precision);
  }
};

using PadicRing = CoeffRing<TruncatedPadic>;

inline bool coeff_is_zero(const mpz_class& c) { return sgn(c) == 0; }
inline bool coeff_is_zero(const mpq_class& c) { return sgn(c) == 0; }
inline bool coeff_is_zero(const TruncatedPadic& c) { return c.is_zero(); }

inline bool coeff_is_unit(const mpz_class& c) { return c == 1 || c == -1; }
inline bool coeff_is_unit(const mpq_class& c) { return sgn(c) != 0; }
inline bool coeff_is_unit(const TruncatedPadic& c) { return c.is_unit(); }

inline mpz_class coeff_inverse(const mpz_class& c) {
  if (!coeff_is_unit(c)) throw DomainError("integer " + c.get_str() + " is not a unit");
  return c;
}
inline mpq_class coeff_inverse(const mpq_class& c) {
  if (sgn(c) == 0) throw DomainError("division by zero");
  return 1 / c;
}
inline TruncatedPadic coeff_inverse(const TruncatedPadic& c) { return c.inverse(); }

inline std::string coeff_to_string(const mpz_class& c) { return c.get_str(); }
inline std::string coeff_to_string(const mpq_class& c) { return c.get_str(); }
// Balanced representative so small negative numbers print naturally.
inline std::string coeff_to_string(const TruncatedPadic& c) {
  mpz_class v = c.value();
  if (2 * v > c.context().modulus) v -= c.context().modulus;
  return v.get_str();
}

inline CoeffRing<mpz_class> ring_of(const mpz_class&) { return {}; }
inline CoeffRing<mpq_class> ring_of(const mpq_class&) { return {}; }
inline PadicRing ring_of(const TruncatedPadic& c) { return PadicRing(c.context()); }

// Convert an exact integer into any coefficient ring.
template <class C>
C coeff_from(const CoeffRing<C>& ring, const mpz_class& v) {
  return ring.from_mpz(v);
}

template <class C>
C coeff_pow(const C& base, unsigned long e, const CoeffRing<C>& ring) {
  C acc = ring.one();
  C b = base;
  while (e) {
    if (e & 1) acc = acc * b;
    e >>= 1;
    if (e) b = b * b;
  }
  return acc;
}

}  // namespace deltaflow
