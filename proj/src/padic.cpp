#include "deltaflow/padic.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace deltaflow {

bool is_prime(unsigned long n) {
  if (n < 2) return false;
  for (unsigned long d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

const PadicContext& PadicContext::get(unsigned p, unsigned precision) {
  static std::mutex mu;
  static std::map<std::pair<unsigned, unsigned>, std::unique_ptr<PadicContext>> registry;

  if (p == 2 || !is_prime(p)) {
    throw DomainError("prime must be an odd rational prime, got " + std::to_string(p));
  }
  if (precision == 0) throw PrecisionError("precision must be at least 1");

  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[{p, precision}];
  if (!slot) {
    auto ctx = std::make_unique<PadicContext>();
    ctx->prime = p;
    ctx->precision = precision;
    mpz_ui_pow_ui(ctx->modulus.get_mpz_t(), p, precision);
    if (mpz_sizeinbase(ctx->modulus.get_mpz_t(), 2) <= 32) {
      ctx->modulus64 = ctx->modulus.get_ui();
    }
    slot = std::move(ctx);
  }
  return *slot;
}

namespace {

const PadicContext& min_context(const PadicContext& a, const PadicContext& b) {
  if (a.prime != b.prime) {
    throw DomainError("mixing p-adic values for primes " + std::to_string(a.prime) +
                      " and " + std::to_string(b.prime));
  }
  return a.precision <= b.precision ? a : b;
}

}  // namespace

TruncatedPadic TruncatedPadic::make(const PadicContext& ctx, mpz_class v) {
  mpz_fdiv_r(v.get_mpz_t(), v.get_mpz_t(), ctx.modulus.get_mpz_t());
  if (ctx.small()) return TruncatedPadic(&ctx, v.get_ui(), nullptr);
  return TruncatedPadic(&ctx, 0, std::make_shared<const mpz_class>(std::move(v)));
}

TruncatedPadic::TruncatedPadic(const PadicContext& ctx, long value)
    : TruncatedPadic(make(ctx, mpz_class(value))) {}

TruncatedPadic::TruncatedPadic(const PadicContext& ctx, const mpz_class& value)
    : TruncatedPadic(make(ctx, value)) {}

mpz_class TruncatedPadic::value() const {
  if (ctx_->small()) return mpz_class(static_cast<unsigned long>(small_));
  return *big_;
}

unsigned TruncatedPadic::residue() const {
  if (ctx_->small()) return static_cast<unsigned>(small_ % ctx_->prime);
  return static_cast<unsigned>(mpz_fdiv_ui(big_->get_mpz_t(), ctx_->prime));
}

bool TruncatedPadic::is_zero() const noexcept {
  if (ctx_->small()) return small_ == 0;
  return sgn(*big_) == 0;
}

unsigned TruncatedPadic::valuation() const {
  if (is_zero()) return precision();
  mpz_class v = value();
  unsigned k = 0;
  while (mpz_divisible_ui_p(v.get_mpz_t(), prime())) {
    v /= prime();
    ++k;
  }
  return k;
}

TruncatedPadic TruncatedPadic::reduce(unsigned precision) const {
  if (precision > this->precision()) {
    throw PrecisionError("cannot reduce to a higher precision");
  }
  if (precision == this->precision()) return *this;
  return TruncatedPadic(PadicContext::get(prime(), precision), value());
}

TruncatedPadic TruncatedPadic::lift(unsigned precision) const {
  if (precision < this->precision()) return reduce(precision);
  return TruncatedPadic(PadicContext::get(prime(), precision), value());
}

TruncatedPadic TruncatedPadic::divide_by_p() const {
  if (precision() < 2) throw PrecisionError("division by p needs precision >= 2");
  mpz_class v = value();
  DELTAFLOW_ASSERT(mpz_divisible_ui_p(v.get_mpz_t(), prime()),
                   "division by p of a non-multiple of p");
  v /= prime();
  return TruncatedPadic(PadicContext::get(prime(), precision() - 1), v);
}

TruncatedPadic TruncatedPadic::inverse() const {
  if (!is_unit()) throw DomainError("inverse of non-unit " + to_string());
  mpz_class r;
  mpz_class v = value();
  mpz_invert(r.get_mpz_t(), v.get_mpz_t(), ctx_->modulus.get_mpz_t());
  return make(*ctx_, r);
}

TruncatedPadic TruncatedPadic::pow(const mpz_class& e) const {
  if (sgn(e) < 0) return inverse().pow(mpz_class(-e));
  mpz_class r;
  mpz_class v = value();
  mpz_powm(r.get_mpz_t(), v.get_mpz_t(), e.get_mpz_t(), ctx_->modulus.get_mpz_t());
  return make(*ctx_, r);
}

TruncatedPadic TruncatedPadic::pow(unsigned long e) const {
  if (ctx_->small()) {
    std::uint64_t base = small_, acc = 1 % ctx_->modulus64;
    const std::uint64_t m = ctx_->modulus64;
    while (e) {
      if (e & 1) acc = acc * base % m;
      base = base * base % m;
      e >>= 1;
    }
    return TruncatedPadic(ctx_, acc, nullptr);
  }
  return pow(mpz_class(e));
}

TruncatedPadic TruncatedPadic::operator-() const {
  if (ctx_->small()) {
    return TruncatedPadic(ctx_, small_ == 0 ? 0 : ctx_->modulus64 - small_, nullptr);
  }
  return make(*ctx_, -*big_);
}

TruncatedPadic operator+(const TruncatedPadic& a, const TruncatedPadic& b) {
  const PadicContext& ctx = min_context(*a.ctx_, *b.ctx_);
  if (ctx.small()) {
    const std::uint64_t m = ctx.modulus64;
    const std::uint64_t x = a.ctx_ == &ctx ? a.small_ : a.small_ % m;
    const std::uint64_t y = b.ctx_ == &ctx ? b.small_ : b.small_ % m;
    if (a.ctx_->small() && b.ctx_->small()) {
      std::uint64_t s = x + y;
      if (s >= m) s -= m;
      return TruncatedPadic(&ctx, s, nullptr);
    }
  }
  return TruncatedPadic::make(ctx, a.value() + b.value());
}

TruncatedPadic operator-(const TruncatedPadic& a, const TruncatedPadic& b) {
  return a + (-b);
}

TruncatedPadic operator*(const TruncatedPadic& a, const TruncatedPadic& b) {
  const PadicContext& ctx = min_context(*a.ctx_, *b.ctx_);
  if (ctx.small() && a.ctx_->small() && b.ctx_->small()) {
    const std::uint64_t m = ctx.modulus64;
    const std::uint64_t x = a.small_ % m;
    const std::uint64_t y = b.small_ % m;
    return TruncatedPadic(&ctx, x * y % m, nullptr);
  }
  return TruncatedPadic::make(ctx, a.value() * b.value());
}

bool operator==(const TruncatedPadic& a, const TruncatedPadic& b) {
  const PadicContext& ctx = min_context(*a.ctx_, *b.ctx_);
  if (a.ctx_ == b.ctx_ && ctx.small()) return a.small_ == b.small_;
  mpz_class d = a.value() - b.value();
  return mpz_divisible_p(d.get_mpz_t(), ctx.modulus.get_mpz_t()) != 0;
}

std::string TruncatedPadic::to_string() const { return value().get_str(); }

TruncatedPadic delta_base(const TruncatedPadic& a) {
  if (a.precision() < 2) {
    throw PrecisionError("delta needs at least 2 digits of precision");
  }
  // On Z_p the Frobenius lift is the identity, so delta(a) = (a - a^p)/p.
  return (a - a.pow(static_cast<unsigned long>(a.prime()))).divide_by_p();
}

TruncatedPadic delta_base(const TruncatedPadic& a, unsigned target) {
  if (a.precision() < target + 1) {
    throw PrecisionError("delta to precision " + std::to_string(target) + " needs " +
                         std::to_string(target + 1) + " digits, got " +
                         std::to_string(a.precision()));
  }
  return delta_base(a.reduce(target + 1));
}

TruncatedPadic teichmuller(unsigned p, unsigned residue, unsigned precision) {
  const PadicContext& ctx = PadicContext::get(p, precision);
  if (residue >= p) throw DomainError("Teichmuller residue out of range");
  // x -> x^p contracts towards the fixed point; each step fixes one digit.
  TruncatedPadic x(ctx, static_cast<long>(residue));
  for (unsigned i = 0; i < precision; ++i) x = x.pow(static_cast<unsigned long>(p));
  DELTAFLOW_ASSERT(x.pow(static_cast<unsigned long>(p)) == x, "Teichmuller iteration");
  return x;
}

bool is_delta_constant(const TruncatedPadic& a) {
  return a.pow(static_cast<unsigned long>(a.prime())) == a;
}

}  // namespace deltaflow
