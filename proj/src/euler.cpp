#include "deltaflow/euler.hpp"

#include <sstream>

namespace deltaflow {

namespace {

TruncatedPadic power_of_p(unsigned p, unsigned k, unsigned precision) {
  TruncatedPadic r(p, precision, 1);
  const TruncatedPadic pp(p, precision, static_cast<long>(p));
  for (unsigned i = 0; i < k; ++i) r = r * pp;
  return r;
}

PElement lift_element(const PElement& e, unsigned precision) { return to_precision(e, precision); }

PPoly z_to_x(const EulerSystem& sys, const PPoly& g, unsigned precision) {
  const PChart chart = sys.chart_at(precision);
  const PPoly h1 = to_precision(sys.H1(), precision), h2 = to_precision(sys.H2(), precision);
  return to_precision(g, precision).compose({h1, h2, chart.poly_var(2)});
}

}  // namespace

EulerSystem::EulerSystem(unsigned p, unsigned precision, const std::array<long, 3>& a, bool invert_axes)
    : EulerSystem(p, precision,
                  std::array<TruncatedPadic, 3>{TruncatedPadic(p, precision + 1, a[0]),
                                                TruncatedPadic(p, precision + 1, a[1]),
                                                TruncatedPadic(p, precision + 1, a[2])},
                  invert_axes) {}

EulerSystem::EulerSystem(unsigned p, unsigned precision, const std::array<TruncatedPadic, 3>& a, bool invert_axes)
    : p_(p),
      n_(precision),
      axes_(invert_axes),
      a_(a),
      chart_(std::make_shared<LazyChart>()),
      zvars_{"z1", "z2", "x"},
      h1_(PPoly::constant(Variables{"x1", "x2", "x3"}, PadicRing(p < 3 ? 3 : p, 1), 0L)),
      h2_(h1_),
      nz_(h1_),
      f_(h1_),
      hasse_(h1_) {
  if (p < 3 || p % 2 == 0) throw DomainError("the Euler system needs an odd prime");
  if (precision < 1) throw DomainError("precision must be at least 1");
  for (auto& x : a_) {
    if (x.prime() != p) throw VariableMismatch("parameters over a different prime");
    if (x.precision() < precision + 1) throw PrecisionError("parameters need precision N + 1");
    x = x.reduce(precision + 1);
  }
  for (int i = 0; i < 3; ++i) {
    if (!(a_[i] - a_[(i + 1) % 3]).is_unit()) {
      throw DomainError("the differences a_i - a_j must be units");
    }
  }
  init();
}

std::array<TruncatedPadic, 3> EulerSystem::a_at(unsigned precision) const {
  return {a_[0].reduce(precision), a_[1].reduce(precision), a_[2].reduce(precision)};
}

void EulerSystem::init() {
  const Variables xv{"x1", "x2", "x3"};
  const PadicRing R(p_, n_ + 1);
  std::vector<PPoly> x;
  for (std::size_t i = 0; i < 3; ++i) x.push_back(PPoly::variable(xv, R, i));
  h1_ = x[0] * x[0] * PPoly::constant(xv, R, a_[0]) + x[1] * x[1] * PPoly::constant(xv, R, a_[1]) +
        x[2] * x[2] * PPoly::constant(xv, R, a_[2]);
  h2_ = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];

  const PPoly z1 = PPoly::variable(zvars_, R, 0), z2 = PPoly::variable(zvars_, R, 1), t = PPoly::variable(zvars_, R, 2);
  nz_ = PPoly::constant(zvars_, R, 1L);
  for (const auto& ai : a_) nz_ = nz_ * (z1 - z2.scale(ai));
  f_ = ((t * t).scale(a_[1] - a_[2]) + z1 - z2.scale(a_[1])) * ((t * t).scale(a_[2] - a_[0]) - z1 + z2.scale(a_[0]));

  // F = (alpha t^2 + beta)(gamma t^2 + delta); the t^(2k) coefficient of F^k is
  // sum_i C(k,i)^2 alpha^i gamma^(k-i) beta^(k-i) delta^i.
  const unsigned k = (p_ - 1) / 2;
  const TruncatedPadic alpha = a_[1] - a_[2], gamma = a_[2] - a_[0];
  const PPoly beta = z1 - z2.scale(a_[1]), delta = z2.scale(a_[0]) - z1;
  std::vector<PPoly> bpow{PPoly::constant(zvars_, R, 1L)}, dpow{bpow[0]};
  std::vector<TruncatedPadic> apow{TruncatedPadic(p_, n_ + 1, 1L)}, gpow{apow[0]};
  for (unsigned i = 0; i < k; ++i) {
    bpow.push_back(bpow.back() * beta);
    dpow.push_back(dpow.back() * delta);
    apow.push_back(apow.back() * alpha);
    gpow.push_back(gpow.back() * gamma);
  }
  hasse_ = PPoly::constant(zvars_, R, 0L);
  for (unsigned i = 0; i <= k; ++i) {
    mpz_class binom;
    mpz_bin_uiui(binom.get_mpz_t(), k, i);
    const TruncatedPadic c = TruncatedPadic(p_, n_ + 1, mpz_class(binom * binom)) * apow[i] * gpow[k - i];
    hasse_ += (bpow[k - i] * dpow[i]).scale(c);
  }

}

// Composing N and A into x-space dominates construction; point counts never need it.
const PChart& EulerSystem::chart() const {
  std::call_once(chart_->once, [this] {
    const Variables& xv = h1_.vars();
    const PadicRing R(p_, n_ + 1);
    std::vector<PPoly> x;
    for (std::size_t i = 0; i < 3; ++i) x.push_back(PPoly::variable(xv, R, i));
    std::vector<PChart::Factor> factors;
    if (axes_) factors = {{"x1", x[0]}, {"x2", x[1]}};
    factors.push_back({"N", nz_.compose({h1_, h2_, x[2]})});
    factors.push_back({"A", hasse_.compose({h1_, h2_, x[2]})});
    chart_->chart.emplace(xv, R, std::move(factors));
  });
  return *chart_->chart;
}

std::size_t EulerSystem::factor_x1() const {
  if (!axes_) throw ChartObstruction("solving for u1 divides by x1^p, which is not a unit on this chart");
  return 0;
}

std::size_t EulerSystem::factor_x2() const {
  if (!axes_) throw ChartObstruction("solving for u2 divides by x2^p, which is not a unit on this chart");
  return 1;
}

TruncatedPadic EulerSystem::N_at(const TruncatedPadic& c1, const TruncatedPadic& c2) const {
  const unsigned n = std::min(c1.precision(), c2.precision());
  return to_precision(nz_, n).evaluate({c1.reduce(n), c2.reduce(n), TruncatedPadic(p_, n, 0)});
}

TruncatedPadic EulerSystem::A_at(const TruncatedPadic& c1, const TruncatedPadic& c2) const {
  const unsigned n = std::min(c1.precision(), c2.precision());
  return to_precision(hasse_, n).evaluate({c1.reduce(n), c2.reduce(n), TruncatedPadic(p_, n, 0)});
}

FiberFrame<TruncatedPadic> EulerSystem::frame(unsigned precision) const {
  return FiberFrame<TruncatedPadic>(chart_at(precision), a_at(precision));
}

PPoly hasse_invariant(const EulerSystem& sys) { return sys.hasse(); }

bool is_admissible(const EulerSystem& sys, unsigned r1, unsigned r2) {
  const unsigned p = sys.prime();
  const TruncatedPadic c1(p, 1, static_cast<long>(r1 % p)), c2(p, 1, static_cast<long>(r2 % p));
  return sys.N_at(c1, c2).is_unit() && sys.A_at(c1, c2).is_unit();
}

AdmissibleFiber make_fiber(const EulerSystem& sys, unsigned r1, unsigned r2) {
  if (!is_admissible(sys, r1, r2)) {
    throw InadmissibleFiber("N(c) A(c) is not a unit at c = (" + std::to_string(r1) + ", " + std::to_string(r2) + ")");
  }
  const unsigned p = sys.prime(), n = sys.precision() + 1;
  return {teichmuller(p, r1 % p, n), teichmuller(p, r2 % p, n)};
}

std::vector<std::array<unsigned, 2>> admissible_residues(const EulerSystem& sys) {
  std::vector<std::array<unsigned, 2>> out;
  for (unsigned r1 = 0; r1 < sys.prime(); ++r1)
    for (unsigned r2 = 0; r2 < sys.prime(); ++r2)
      if (is_admissible(sys, r1, r2)) out.push_back({r1, r2});
  return out;
}

AdmissibleFiber sample_fiber(const EulerSystem& sys, std::mt19937_64& rng) {
  const unsigned p = sys.prime();
  for (unsigned attempt = 0; attempt < 64 * p * p; ++attempt) {
    const unsigned r1 = static_cast<unsigned>(rng() % p), r2 = static_cast<unsigned>(rng() % p);
    if (is_admissible(sys, r1, r2)) return make_fiber(sys, r1, r2);
  }
  throw InadmissibleFiber("no admissible fiber found for p = " + std::to_string(p));
}

std::array<long, 3> sample_triple(unsigned p, std::mt19937_64& rng) {
  if (p < 3) throw DomainError("three distinct residues need p >= 3");
  std::array<long, 3> a{};
  do {
    for (auto& x : a) x = static_cast<long>(rng() % p);
  } while (a[0] == a[1] || a[1] == a[2] || a[0] == a[2]);
  return a;
}

std::vector<PElement> twisted_euler_vector(const EulerSystem& sys, unsigned precision) {
  const PChart chart = sys.chart_at(precision);
  const auto a = sys.a_at(precision);
  const unsigned p = sys.prime();
  std::vector<PPoly> xp;
  for (std::size_t i = 0; i < 3; ++i) xp.push_back(chart.poly_var(i).pow(p));
  std::vector<PElement> v;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    v.emplace_back(chart, (xp[j] * xp[k]).scale(a[j] - a[k]));
  }
  return v;
}

ArithmeticFlow refine_flow(const EulerSystem& sys, std::vector<PElement> u, unsigned stage) {
  const unsigned p = sys.prime(), n = sys.precision(), top = n + 1;
  const PChart chart = sys.chart_at(top);
  if (u.size() != 3) throw VariableMismatch("the Euler flow has three images");
  for (auto& ui : u) ui = lift_element(ui, top);
  const std::array<PPoly, 2> H{sys.H1(), sys.H2()};
  for (unsigned k = stage; k < n; ++k) {
    // E_j = phi(H_j) - H_j^p is divisible by p^(k+1); R_j = E_j / p^(k+1).
    std::array<PElement, 2> R{PElement(chart, chart.poly_zero()), PElement(chart, chart.poly_zero())};
    for (int j = 0; j < 2; ++j) {
      PElement e = phi_poly(H[j], u) - PElement(chart, H[j].pow(p));
      for (unsigned s = 0; s <= k; ++s) {
        try {
          e = divide_by_p(e);
        } catch (const Error&) {
          throw InternalError("stage " + std::to_string(k) + ": prime-integral residual is not divisible by p^" +
                              std::to_string(k + 1));
        }
      }
      R[j] = e;
    }
    if (R[0].is_zero() && R[1].is_zero()) continue;
    const unsigned m = n - k;
    const PChart cm = sys.chart_at(m);
    const auto a = sys.a_at(m);
    // 2 sum a_i x_i^p w_i = -R1, 2 sum x_i^p w_i = -R2 with w3 = 0.
    const PElement r1 = -to_precision(R[0], m), r2 = -to_precision(R[1], m);
    const TruncatedPadic inv = (TruncatedPadic(p, m, 2) * (a[0] - a[1])).inverse();
    const PElement w1 = (r1 - r2.scale(a[1])).scale(inv).divide_by_factor(sys.factor_x1(), p);
    const PElement w2 = (r2.scale(a[0]) - r1).scale(inv).divide_by_factor(sys.factor_x2(), p);
    const TruncatedPadic pk = power_of_p(p, k, top);
    u[0] = u[0] + lift_element(w1, top).scale(pk);
    u[1] = u[1] + lift_element(w2, top).scale(pk);
  }
  return ArithmeticFlow{chart, std::move(u), n};
}

ArithmeticFlow build_flow(const EulerSystem& sys) {
  const PChart chart = sys.chart_at(sys.precision() + 1);
  std::vector<PElement> u(3, PElement(chart, chart.poly_zero()));
  return refine_flow(sys, std::move(u), 0);
}

PElement gauge_target(const EulerSystem& sys) {
  const unsigned p = sys.prime();
  const PPoly F = to_precision(sys.F(), 1), A = to_precision(sys.hasse(), 1);
  const PPoly x = PPoly::variable(sys.zvars(), F.ring(), 2);
  const PPoly G = F.pow((p - 1) / 2) - A * x.pow(p - 1);
  std::vector<PPoly::Term> terms;
  for (const auto& [m, c] : G.terms()) {
    const unsigned e = m[2] + 1;
    if (e % p == 0) {
      std::ostringstream os;
      os << "coefficient of z1^" << m[0] << "*z2^" << m[1] << "*x^" << m[2] << " is " << c.residue();
      throw GaugeUnsolvable("the gauge primitive needs division by p", os.str());
    }
    Monomial mm = m;
    mm[2] = static_cast<std::uint16_t>(e);
    terms.emplace_back(mm, c * TruncatedPadic(p, 1, static_cast<long>(e)).inverse());
  }
  const PPoly Ghat = PPoly::from_terms(sys.zvars(), F.ring(), std::move(terms));
  const PChart chart = sys.chart_at(1);
  return PElement(chart, z_to_x(sys, Ghat, 1)).divide_by_factor(sys.factor_A());
}

GaugeResult gauge_adjust(const ArithmeticFlow& flow, const EulerSystem& sys) {
  const unsigned p = sys.prime(), top = sys.precision() + 1;
  const auto a = sys.a_at(1);
  const PElement u3 = to_precision(flow.u.at(2), 1);
  // u3 + t (a1 - a2) x1^p x2^p = target mod p.
  PElement t = (gauge_target(sys) - u3)
                   .scale((a[0] - a[1]).inverse())
                   .divide_by_factor(sys.factor_x1(), p)
                   .divide_by_factor(sys.factor_x2(), p);
  if (t.is_zero()) return {flow, t, false};
  const PElement tl = lift_element(t, top);
  const auto v = twisted_euler_vector(sys, top);
  std::vector<PElement> u;
  for (int i = 0; i < 3; ++i) u.push_back(lift_element(flow.u.at(i), top) + tl * v[i]);
  return {refine_flow(sys, std::move(u), 1), t, true};
}

std::array<PElement, 2> prime_integral_residuals(const ArithmeticFlow& flow, const EulerSystem& sys) {
  return {check_prime_integral(flow, sys.H1()), check_prime_integral(flow, sys.H2())};
}

ArithmeticFlow truncate_flow(const ArithmeticFlow& flow, unsigned precision) {
  std::vector<PElement> u;
  for (const auto& ui : flow.u) u.push_back(to_precision(ui, precision));
  return ArithmeticFlow{flow.chart.at_precision(precision), std::move(u), precision > 0 ? precision - 1 : 0};
}

std::vector<TruncatedPadic> FiberFrobenius::apply(const std::vector<TruncatedPadic>& point) const {
  const unsigned n = flow.chart.ring().precision();
  const unsigned p = flow.prime();
  std::vector<TruncatedPadic> P;
  for (const auto& x : point) P.push_back(x.reduce(n));
  std::vector<TruncatedPadic> out;
  const TruncatedPadic pp(p, n, static_cast<long>(p));
  for (std::size_t i = 0; i < P.size(); ++i) out.push_back(P[i].pow(p) + pp * flow.u.at(i).eval(P));
  return out;
}

FiberFrobenius fiber_frobenius(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber,
                               unsigned precision) {
  const unsigned top = flow.chart.ring().precision();
  if (precision < 1 || precision > top) throw PrecisionError("fiber check precision out of range");
  const ArithmeticFlow f = truncate_flow(flow, precision);
  const auto c = fiber.at(precision);
  const auto a = sys.a_at(precision);
  std::array<PPoly, 2> res{fiber_residual(f.phi(to_precision(sys.H1(), precision)), c[0], c, a),
                           fiber_residual(f.phi(to_precision(sys.H2(), precision)), c[1], c, a)};
  return {flow, fiber, std::move(res)};
}

PElement linearization_coefficient(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber) {
  const ArithmeticFlow f = truncate_flow(flow, 1);
  const auto frame = sys.frame(1);
  // omega3 avoids inverting x3.
  return restrict_to_curve(phi_star_over_p(frame.omega(2), f), frame, fiber.at(1));
}

PElement verify_linearization(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber) {
  const auto c = fiber.at(1);
  const TruncatedPadic A = sys.A_at(c[0], c[1]);
  if (!A.is_unit() || !sys.N_at(c[0], c[1]).is_unit()) throw InadmissibleFiber("fiber is not admissible");
  const PElement h = linearization_coefficient(flow, sys, fiber);
  return normal_form_fiber(h - PElement::constant(h.chart(), A.inverse()), c, sys.a_at(1));
}

namespace {

PElement new1_lambda(const EulerSystem& sys, long shift) {
  const PChart chart = sys.chart_at(1);
  const PPoly h1 = to_precision(sys.H1(), 1);
  return PElement(chart, h1.pow(sys.prime() - 1)).divide_by_factor(sys.factor_A()) + PElement::constant(chart, shift);
}

}  // namespace

bool sphere_admissible(const EulerSystem& sys, unsigned r2) {
  const unsigned p = sys.prime();
  const TruncatedPadic c2(p, 1, static_cast<long>(r2 % p));
  for (unsigned r1 = 0; r1 < p; ++r1)
    if (sys.A_at(TruncatedPadic(p, 1, static_cast<long>(r1)), c2).is_unit()) return true;
  // A(z1, c2) has degree (p-1)/2 < p, so vanishing at every residue means it is zero.
  return false;
}

std::vector<unsigned> admissible_levels(const EulerSystem& sys) {
  std::vector<unsigned> out;
  for (unsigned r2 = 0; r2 < sys.prime(); ++r2)
    if (sphere_admissible(sys, r2)) out.push_back(r2);
  return out;
}

PElement verify_new1(const ArithmeticFlow& flow, const EulerSystem& sys, const TruncatedPadic& c2, long shift) {
  if (!(c2.pow(sys.prime()) == c2)) throw DomainError("sphere level must be a Teichmuller lift");
  if (!sphere_admissible(sys, c2.residue())) {
    throw InadmissibleFiber("A(H1, c2) vanishes identically on the sphere H2 = " + std::to_string(c2.residue()));
  }
  const ArithmeticFlow f = truncate_flow(flow, 1);
  const auto frame = sys.frame(1);
  const TruncatedPadic c = c2.reduce(1);
  const PElement h = restrict_to_sphere(phi_star_over_p(frame.eta(0), f), frame, c);
  return normal_form_sphere(h - new1_lambda(sys, shift), c);
}

PElement new1_decomposition(const ArithmeticFlow& flow, const EulerSystem& sys, const TruncatedPadic& c2) {
  using Form = DiffForm<TruncatedPadic>;
  const ArithmeticFlow f = truncate_flow(flow, 1);
  const auto frame = sys.frame(1);
  const PChart& chart = frame.chart();
  const unsigned p = sys.prime();
  const Form w = frame.omega(2);
  const Form beta = phi_star_over_p(w, f) - w.times(PElement::factor_inverse(chart, sys.factor_A()));
  const PPoly h1 = to_precision(sys.H1(), 1);
  const TruncatedPadic half = TruncatedPadic(p, 1, 2).inverse();
  const PElement k = PElement(chart, h1.pow(p - 1)).scale(-half);
  return restrict_to_sphere(Form::d(PElement(chart, h1)).wedge(beta).times(k), frame, c2.reduce(1));
}

PointCount count_points_and_ap(const EulerSystem& sys, unsigned r1, unsigned r2) {
  const long p = sys.prime();
  auto md = [p](long v) { return ((v % p) + p) % p; };
  std::array<long, 3> a{};
  for (int i = 0; i < 3; ++i) a[i] = static_cast<long>(sys.a()[i].residue());
  const long c1 = md(r1), c2 = md(r2);
  long n = 1;
  for (long ai : a) n = md(n * md(c1 - ai * c2));
  if (n == 0) throw InadmissibleFiber("degenerate quartic: N(c) vanishes mod p");

  std::vector<int> chi(static_cast<std::size_t>(p), -1);
  chi[0] = 0;
  for (long y = 1; y < p; ++y) chi[static_cast<std::size_t>(md(y * y))] = 1;

  const long al = md(a[1] - a[2]), be = md(c1 - a[1] * c2), ga = md(a[2] - a[0]), de = md(a[0] * c2 - c1);
  long sum = 0;
  for (long x = 0; x < p; ++x) {
    const long x2 = md(x * x);
    sum += chi[static_cast<std::size_t>(md(md(al * x2 + be) * md(ga * x2 + de)))];
  }
  const long infinity = chi[static_cast<std::size_t>(md(al * ga))] == 1 ? 2 : 0;
  PointCount pc;
  pc.count = p + sum + infinity;
  pc.ap = p + 1 - pc.count;
  pc.hasse_value =
      static_cast<long>(sys.A_at(TruncatedPadic(sys.prime(), 1, c1), TruncatedPadic(sys.prime(), 1, c2)).residue());
  pc.congruent = md(pc.ap - pc.hasse_value) == 0;
  pc.hasse_bound = pc.ap * pc.ap <= 4 * p;
  return pc;
}

PElement derive_new2_form(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber, long k) {
  const auto c = fiber.at(1);
  const PElement h = linearization_coefficient(flow, sys, fiber);
  const TruncatedPadic kk(sys.prime(), 1, k);
  return normal_form_fiber(PElement::constant(h.chart(), 1) - h.scale(kk), c, sys.a_at(1));
}

PElement derive_new2_form(const ArithmeticFlow& flow, const EulerSystem& sys, const AdmissibleFiber& fiber) {
  const auto c = fiber.at(1);
  const TruncatedPadic A = sys.A_at(c[0], c[1]);
  if (!A.is_unit() || !sys.N_at(c[0], c[1]).is_unit()) throw InadmissibleFiber("fiber is not admissible");
  return derive_new2_form(flow, sys, fiber, static_cast<long>(A.residue()));
}

}  // namespace deltaflow
