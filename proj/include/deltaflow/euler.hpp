#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "deltaflow/flows.hpp"
#include "deltaflow/normal_form.hpp"

namespace deltaflow {

// The Euler top over Z_p: H1 = sum a_i x_i^2, H2 = sum x_i^2, on the chart
// inverting x1, x2, N(H1, H2) and A(H1, H2).
class EulerSystem {
 public:
  // With invert_axes = false the chart only inverts N and A; the flow cannot
  // be solved there.
  EulerSystem(unsigned p, unsigned precision, const std::array<long, 3>& a, bool invert_axes = true);
  EulerSystem(unsigned p, unsigned precision, const std::array<TruncatedPadic, 3>& a, bool invert_axes = true);

  unsigned prime() const { return p_; }
  // Prime integrals hold to this precision; u carries one more digit.
  unsigned precision() const { return n_; }
  const std::array<TruncatedPadic, 3>& a() const { return a_; }
  std::array<TruncatedPadic, 3> a_at(unsigned precision) const;

  // Built on first use; safe to call concurrently.
  const PChart& chart() const;
  PChart chart_at(unsigned precision) const { return chart().at_precision(precision); }
  const PPoly& H1() const { return h1_; }
  const PPoly& H2() const { return h2_; }

  // Polynomials in (z1, z2, x).
  const Variables& zvars() const { return zvars_; }
  const PPoly& N() const { return nz_; }
  const PPoly& F() const { return f_; }
  const PPoly& hasse() const { return hasse_; }

  bool inverts_axes() const { return axes_; }
  // ChartObstruction when the axes are not inverted.
  std::size_t factor_x1() const;
  std::size_t factor_x2() const;
  std::size_t factor_N() const { return axes_ ? 2 : 0; }
  std::size_t factor_A() const { return axes_ ? 3 : 1; }

  // Values at (c1, c2), reduced to the precision of c.
  TruncatedPadic N_at(const TruncatedPadic& c1, const TruncatedPadic& c2) const;
  TruncatedPadic A_at(const TruncatedPadic& c1, const TruncatedPadic& c2) const;

  // Frame on the chart at the given precision.
  FiberFrame<TruncatedPadic> frame(unsigned precision) const;

 private:
  void init();

  unsigned p_, n_;
  bool axes_;
  std::array<TruncatedPadic, 3> a_;
  struct LazyChart {
    std::once_flag once;
    std::optional<PChart> chart;
  };
  std::shared_ptr<LazyChart> chart_;
  Variables zvars_;
  PPoly h1_, h2_, nz_, f_, hasse_;
};

// Coefficient of x^(p-1) in F^((p-1)/2), as a polynomial in (z1, z2, x) with
// no x.
PPoly hasse_invariant(const EulerSystem& sys);

// c1, c2 Teichmuller lifts with N(c) and A(c) units.
struct AdmissibleFiber {
  TruncatedPadic c1, c2;
  std::array<TruncatedPadic, 2> at(unsigned precision) const { return {c1.reduce(precision), c2.reduce(precision)}; }
};

// InadmissibleFiber unless N and A are units at the Teichmuller lift of the
// residues.
AdmissibleFiber make_fiber(const EulerSystem& sys, unsigned r1, unsigned r2);
bool is_admissible(const EulerSystem& sys, unsigned r1, unsigned r2);
std::vector<std::array<unsigned, 2>> admissible_residues(const EulerSystem& sys);
AdmissibleFiber sample_fiber(const EulerSystem& sys, std::mt19937_64& rng);

// Pairwise distinct residues mod p drawn uniformly.
std::array<long, 3> sample_triple(unsigned p, std::mt19937_64& rng);

// phi(H_j) = H_j^p to precision N + 1 by staged linear solves along the
// rows (2 a_i x_i^p) and (2 x_i^p); the kernel direction is left at zero.
ArithmeticFlow build_flow(const EulerSystem& sys);

// v^(p) = ((a2-a3) x2^p x3^p, (a3-a1) x3^p x1^p, (a1-a2) x1^p x2^p).
std::vector<PElement> twisted_euler_vector(const EulerSystem& sys, unsigned precision);

// The u3 making the linearization congruence hold mod p:
// G^/A(H1, H2) where G = F^((p-1)/2) - A x^(p-1) and ^ is the x-antiderivative.
// Throws GaugeUnsolvable if some x^(mp-1) coefficient is nonzero mod p.
PElement gauge_target(const EulerSystem& sys);

struct GaugeResult {
  ArithmeticFlow flow;
  PElement t;  // mod p
  bool changed = false;
};

// u += t v^(p) with t mod p fixed by the target; higher stages are then
// re-solved so both prime integrals hold exactly again.
GaugeResult gauge_adjust(const ArithmeticFlow& flow, const EulerSystem& sys);

// Continue the staged solve from `stage` with the kernel direction fixed.
ArithmeticFlow refine_flow(const EulerSystem& sys, std::vector<PElement> u, unsigned stage);

// phi(H_j) - H_j^p for both prime integrals.
std::array<PElement, 2> prime_integral_residuals(const ArithmeticFlow& flow, const EulerSystem& sys);

// The flow reduced mod p^precision.
ArithmeticFlow truncate_flow(const ArithmeticFlow& flow, unsigned precision);

struct FiberFrobenius {
  ArithmeticFlow flow;
  AdmissibleFiber fiber;
  // Normal forms of phi(H_j) - c_j on the fiber.
  std::array<PPoly, 2> residuals;
  // phi(x_i) at a point with Q(P) a unit.
  std::vector<TruncatedPadic> apply(const std::vector<TruncatedPadic>& point) const;
};

FiberFrobenius fiber_frobenius(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber,
                               unsigned precision = 1);

// restrict_to_curve((phi/p) omega) - A(c)^-1 in fiber normal form mod p.
PElement verify_linearization(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber);

// The curve coefficient of (phi/p) omega mod p on the fiber.
PElement linearization_coefficient(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber);

// The sphere H2 = c2 carries the chart iff A(z1, c2) is not identically zero
// mod p; units always qualify, c2 = 0 only when A(1, 0) is a unit.
bool sphere_admissible(const EulerSystem& sys, unsigned r2);
std::vector<unsigned> admissible_levels(const EulerSystem& sys);

// restrict_to_sphere((phi/p^2) eta) - lambda, lambda = H1^(p-1)/A(H1, c2),
// in sphere normal form mod p. `shift` is added to lambda.
PElement verify_new1(const ArithmeticFlow& flow, const EulerSystem& sys, const TruncatedPadic& c2, long shift = 0);

// Restriction of -(1/2) H1^(p-1) dH1 ^ beta with beta = (phi/p) omega3 - A^-1 omega3.
PElement new1_decomposition(const ArithmeticFlow& flow, const EulerSystem& sys, const TruncatedPadic& c2);

struct PointCount {
  long count = 0;
  long ap = 0;
  long hasse_value = 0;  // A(c) mod p in [0, p)
  bool congruent = false;
  bool hasse_bound = false;
};

// Smooth-model count of y^2 = F(c1, c2, x) over F_p.
PointCount count_points_and_ap(const EulerSystem& sys, unsigned r1, unsigned r2);

// restrict_to_curve(-k (phi/p) omega + omega) mod p with k = A(c), or the
// given integer in its place.
PElement derive_new2_form(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber);
PElement derive_new2_form(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber, long k);

}  // namespace deltaflow
