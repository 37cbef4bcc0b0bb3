#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <gmpxx.h>

#include "deltaflow/errors.hpp"

namespace deltaflow {

bool is_prime(unsigned long n);

// Shared description of Z/p^N. Contexts are interned and live for the whole
// program, so values only carry a pointer.
struct PadicContext {
  unsigned prime = 0;
  unsigned precision = 0;
  mpz_class modulus;
  // Nonzero iff modulus < 2^32, in which case products fit in 64 bits.
  std::uint64_t modulus64 = 0;

  // Throws DomainError unless p is an odd prime and N >= 1.
  static const PadicContext& get(unsigned p, unsigned precision);
  bool small() const noexcept { return modulus64 != 0; }
};

// An element of Z/p^N, the base ring Z_p at finite precision.
//
// Values are immutable. Mixed-precision arithmetic and comparison happen at
// the smaller of the two precisions.
class TruncatedPadic {
 public:
  TruncatedPadic(const PadicContext& ctx, long value);
  TruncatedPadic(const PadicContext& ctx, const mpz_class& value);
  TruncatedPadic(unsigned p, unsigned precision, long value)
      : TruncatedPadic(PadicContext::get(p, precision), value) {}
  TruncatedPadic(unsigned p, unsigned precision, const mpz_class& value)
      : TruncatedPadic(PadicContext::get(p, precision), value) {}

  const PadicContext& context() const noexcept { return *ctx_; }
  unsigned prime() const noexcept { return ctx_->prime; }
  unsigned precision() const noexcept { return ctx_->precision; }
  // Canonical residue in [0, p^N).
  mpz_class value() const;
  // Residue mod p.
  unsigned residue() const;

  bool is_zero() const noexcept;
  bool is_unit() const { return residue() != 0; }
  // p-adic valuation of the residue; equals precision() for zero.
  unsigned valuation() const;

  TruncatedPadic reduce(unsigned precision) const;
  // Same canonical representative viewed at a higher precision.
  TruncatedPadic lift(unsigned precision) const;
  // Exact division by p; the result has precision N - 1.
  TruncatedPadic divide_by_p() const;
  TruncatedPadic inverse() const;
  TruncatedPadic pow(const mpz_class& e) const;
  TruncatedPadic pow(unsigned long e) const;

  TruncatedPadic operator-() const;
  friend TruncatedPadic operator+(const TruncatedPadic& a, const TruncatedPadic& b);
  friend TruncatedPadic operator-(const TruncatedPadic& a, const TruncatedPadic& b);
  friend TruncatedPadic operator*(const TruncatedPadic& a, const TruncatedPadic& b);
  TruncatedPadic& operator+=(const TruncatedPadic& o) { return *this = *this + o; }
  TruncatedPadic& operator-=(const TruncatedPadic& o) { return *this = *this - o; }
  TruncatedPadic& operator*=(const TruncatedPadic& o) { return *this = *this * o; }

  friend bool operator==(const TruncatedPadic& a, const TruncatedPadic& b);

  std::string to_string() const;

 private:
  TruncatedPadic(const PadicContext* ctx, std::uint64_t small,
                 std::shared_ptr<const mpz_class> big)
      : ctx_(ctx), small_(small), big_(std::move(big)) {}
  static TruncatedPadic make(const PadicContext& ctx, mpz_class v);

  const PadicContext* ctx_;
  std::uint64_t small_ = 0;
  std::shared_ptr<const mpz_class> big_;
};

// The Fermat-quotient p-derivation on Z_p: (a - a^p)/p, one digit lost.
TruncatedPadic delta_base(const TruncatedPadic& a);
// Same, but demands the result at precision `target`; throws PrecisionError
// unless a carries at least target + 1 digits.
TruncatedPadic delta_base(const TruncatedPadic& a, unsigned target);

// The unique x with x = r mod p and x^p = x at precision N.
TruncatedPadic teichmuller(unsigned p, unsigned residue, unsigned precision);

// True iff a^p = a at the carried precision.
bool is_delta_constant(const TruncatedPadic& a);

}  // namespace deltaflow
