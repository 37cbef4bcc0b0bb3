#include <doctest.h>

#include <chrono>
#include <random>

#include "deltaflow/euler.hpp"
#include "deltaflow/parse.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace deltaflow;
using testing_support::brute_count;
using testing_support::hasse_brute;

namespace {

// A_2 for p = 3 from the x^2 coefficient of F, expanded by hand.
PPoly hasse_p3(const EulerSystem& sys) {
  const auto a = sys.a();
  const PPoly z1 = PPoly::variable(sys.zvars(), sys.hasse().ring(), 0);
  const PPoly z2 = PPoly::variable(sys.zvars(), sys.hasse().ring(), 1);
  return (z2.scale(a[0]) - z1).scale(a[1] - a[2]) + (z1 - z2.scale(a[1])).scale(a[2] - a[0]);
}

std::array<long, 3> residues(const EulerSystem& sys) {
  return {static_cast<long>(sys.a()[0].residue()), static_cast<long>(sys.a()[1].residue()),
          static_cast<long>(sys.a()[2].residue())};
}

}  // namespace

TEST_CASE("hasse invariant") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = sample_triple(3, rng);
    const EulerSystem sys(3, 3, std::array<long, 3>{a[0] + 3 * (long)(rng() % 9), a[1] + 3, a[2] - 6});
    CHECK(sys.hasse() == hasse_p3(sys));
  }
  const EulerSystem sys(3, 2, std::array<long, 3>{0, 1, 2});
  CHECK(sys.hasse() == parse_polynomial("3*z1 - 2*z2", sys.zvars()).map_coefficients(
                           sys.hasse().ring(), [&](const mpz_class& c) { return sys.hasse().ring().from_mpz(c); }));
  for (unsigned p : {5u, 7u, 13u}) {
    const EulerSystem s(p, 1, sample_triple(p, rng));
    CHECK(s.hasse().total_degree() == (p - 1) / 2);
    for (const auto& [m, c] : s.hasse().terms()) CHECK(m[0] + m[1] == (p - 1) / 2);
    // Evaluations agree with an integer expansion.
    for (unsigned r1 = 0; r1 < p; r1 += 2)
      for (unsigned r2 = 0; r2 < p; r2 += 3) {
        const long A = static_cast<long>(s.A_at(TruncatedPadic(p, 1, r1), TruncatedPadic(p, 1, r2)).residue());
        CHECK(A == hasse_brute(p, residues(s), r1, r2));
      }
  }
}

TEST_CASE("invariants of the system") {
  CHECK_THROWS_AS(EulerSystem(5, 2, std::array<long, 3>{1, 6, 2}), DomainError);
  CHECK_THROWS_AS(EulerSystem(4, 2, std::array<long, 3>{1, 2, 3}), DomainError);
  const EulerSystem sys(5, 2, std::array<long, 3>{1, 2, 3});
  CHECK(sys.chart().factor_count() == 4);
  // F(H1, H2, x3) = ((a1 - a2) x1 x2)^2
  const PPoly x1 = sys.chart().poly_var(0), x2 = sys.chart().poly_var(1), x3 = sys.chart().poly_var(2);
  const PPoly y = (x1 * x2).scale(sys.a()[0] - sys.a()[1]);
  CHECK(sys.F().compose({sys.H1(), sys.H2(), x3}) == y * y);
}

TEST_CASE("flow needs the axes inverted") {
  const EulerSystem sys(5, 2, std::array<long, 3>{1, 2, 4}, false);
  CHECK(sys.chart().factor_count() == 2);
  CHECK_THROWS_AS(build_flow(sys), ChartObstruction);
}

TEST_CASE("staged flow construction") {
  std::mt19937_64 rng(3);
  for (unsigned p : {3u, 5u, 7u}) {
    const EulerSystem sys(p, 3, sample_triple(p, rng));
    // Stage-0 residual is divisible by p and equals sum (a_i - a_i^p) x_i^2p
    // mod p^2 minus the multinomial cross terms.
    const PElement e0 = phi_poly(sys.H1(), std::vector<PElement>(3, PElement(sys.chart_at(4), sys.chart_at(4).poly_zero())));
    const PPoly direct = [&] {
      PPoly s = sys.chart().poly_zero();
      for (std::size_t i = 0; i < 3; ++i) s = s + sys.chart().poly_var(i).pow(2 * p).scale(sys.a()[i]);
      return s;
    }();
    CHECK(e0 == PElement(sys.chart(), direct));
    CHECK_NOTHROW(divide_by_p(e0 - PElement(sys.chart(), sys.H1().pow(p))));

    const ArithmeticFlow flow = build_flow(sys);
    const auto res = prime_integral_residuals(flow, sys);
    CHECK(res[0].is_zero());
    CHECK(res[1].is_zero());
    CHECK(flow.delta(sys.H1()).is_zero());
    CHECK(flow.delta(sys.H2()).is_zero());

    // Both Jacobian rows annihilate v^(p).
    const auto v = twisted_euler_vector(sys, 4);
    PElement r1 = v[0].zero(), r2 = v[0].zero();
    for (std::size_t i = 0; i < 3; ++i) {
      const PElement xp(v[0].chart(), v[0].chart().poly_var(i).pow(p));
      r1 = r1 + (xp * v[i]).scale(sys.a()[i]);
      r2 = r2 + xp * v[i];
    }
    CHECK(r1.is_zero());
    CHECK(r2.is_zero());
  }
}

TEST_CASE("gauge direction") {
  // Adding t v^(p) alone keeps phi(H) = H^p mod p^2; the re-solve restores it exactly.
  std::mt19937_64 rng(8);
  const unsigned p = 5;
  const EulerSystem sys(p, 3, sample_triple(p, rng));
  const ArithmeticFlow flow = build_flow(sys);
  const auto v = twisted_euler_vector(sys, 4);
  const PChart chart = sys.chart_at(4);
  const PElement t(chart, parse_polynomial("x1*x3 + 2*x2^2 - 1", chart.vars())
                              .map_coefficients(chart.ring(), [&](const mpz_class& c) { return chart.ring().from_mpz(c); }));
  std::vector<PElement> u;
  for (int i = 0; i < 3; ++i) u.push_back(flow.u[i] + t * v[i]);
  const ArithmeticFlow moved{chart, u, 3};
  for (const auto& r : prime_integral_residuals(moved, sys)) {
    CHECK_NOTHROW(divide_by_p(divide_by_p(r)));
  }
  const ArithmeticFlow fixed = refine_flow(sys, u, 1);
  for (const auto& r : prime_integral_residuals(fixed, sys)) CHECK(r.is_zero());
  // The u3 component is untouched by the re-solve.
  CHECK(fixed.u[2] == u[2]);
}

TEST_CASE("gauge adjustment and linearization") {
  std::mt19937_64 rng(21);
  for (unsigned p : {5u, 7u}) {
    const EulerSystem sys(p, 2, sample_triple(p, rng));
    const ArithmeticFlow raw = build_flow(sys);
    const GaugeResult g = gauge_adjust(raw, sys);
    CHECK(g.changed);
    for (const auto& r : prime_integral_residuals(g.flow, sys)) CHECK(r.is_zero());
    // Already adjusted: t = 0 and the flow is returned as is.
    const GaugeResult again = gauge_adjust(g.flow, sys);
    CHECK_FALSE(again.changed);
    for (int i = 0; i < 3; ++i) CHECK(again.flow.u[i] == g.flow.u[i]);

    const auto fibers = admissible_residues(sys);
    REQUIRE(!fibers.empty());
    for (std::size_t k = 0; k < fibers.size(); k += 1 + fibers.size() / 6) {
      const auto fiber = make_fiber(sys, fibers[k][0], fibers[k][1]);
      CHECK(verify_linearization(g.flow, sys, fiber).is_zero());
      CHECK(derive_new2_form(g.flow, sys, fiber).is_zero());
      const auto pc = count_points_and_ap(sys, fibers[k][0], fibers[k][1]);
      CHECK(derive_new2_form(g.flow, sys, fiber, pc.ap).is_zero());
      const auto fr = fiber_frobenius(g.flow, sys, fiber);
      CHECK(fr.residuals[0].is_zero());
      CHECK(fr.residuals[1].is_zero());
    }
    // Without the gauge the congruence generally fails somewhere.
    bool some_nonzero = false;
    for (const auto& f : fibers) some_nonzero = some_nonzero || !verify_linearization(raw, sys, make_fiber(sys, f[0], f[1])).is_zero();
    CHECK(some_nonzero);
  }
}

TEST_CASE("perturbed flow is detected") {
  std::mt19937_64 rng(4);
  const unsigned p = 5;
  const EulerSystem sys(p, 2, sample_triple(p, rng));
  const ArithmeticFlow flow = gauge_adjust(build_flow(sys), sys).flow;
  ArithmeticFlow bad = flow;
  bad.u[0] = bad.u[0] + PElement::variable(bad.chart, 2);
  const auto res = prime_integral_residuals(bad, sys);
  CHECK_FALSE(res[0].is_zero());
  const auto f = admissible_residues(sys).front();
  const auto fiber = make_fiber(sys, f[0], f[1]);
  // Mod p every lift is Frobenius; the perturbation shows up mod p^2.
  CHECK(fiber_frobenius(bad, sys, fiber).residuals[0].is_zero());
  CHECK_FALSE(fiber_frobenius(bad, sys, fiber, 2).residuals[0].is_zero());
}

TEST_CASE("inadmissible fibers") {
  std::mt19937_64 rng(9);
  const unsigned p = 7;
  const EulerSystem sys(p, 1, sample_triple(p, rng));
  const auto flow = gauge_adjust(build_flow(sys), sys).flow;
  bool found = false;
  for (unsigned r1 = 0; r1 < p && !found; ++r1)
    for (unsigned r2 = 0; r2 < p && !found; ++r2) {
      const TruncatedPadic c1(p, 1, r1), c2(p, 1, r2);
      if (sys.N_at(c1, c2).is_unit() && !sys.A_at(c1, c2).is_unit()) {
        found = true;
        CHECK_THROWS_AS(make_fiber(sys, r1, r2), InadmissibleFiber);
        AdmissibleFiber forced{teichmuller(p, r1, 2), teichmuller(p, r2, 2)};
        CHECK_THROWS_AS(verify_linearization(flow, sys, forced), InadmissibleFiber);
        // Supersingular match on the enumeration side.
        CHECK(count_points_and_ap(sys, r1, r2).ap % static_cast<long>(p) == 0);
      }
    }
  CHECK_THROWS_AS(count_points_and_ap(sys, 0, 0), InadmissibleFiber);
}

TEST_CASE("new1 on spheres") {
  std::mt19937_64 rng(17);
  for (unsigned p : {5u, 7u}) {
    const EulerSystem sys(p, 2, sample_triple(p, rng));
    const auto flow = gauge_adjust(build_flow(sys), sys).flow;
    for (unsigned r2 = 0; r2 < p; ++r2) {
      const TruncatedPadic c2 = teichmuller(p, r2, 3);
      if (!sphere_admissible(sys, r2)) {
        CHECK(r2 == 0);
        CHECK_THROWS_AS(verify_new1(flow, sys, c2), InadmissibleFiber);
        continue;
      }
      const PElement res = verify_new1(flow, sys, c2);
      CHECK(res.is_zero());
      CHECK(sphere_residual(new1_decomposition(flow, sys, c2), res, c2.reduce(1)).is_zero());
      // lambda + 1 in place of lambda leaves -1.
      const PElement shifted = verify_new1(flow, sys, c2, 1);
      CHECK(sphere_residual(shifted, PElement::constant(shifted.chart(), -1), c2.reduce(1)).is_zero());
    }
  }
}

TEST_CASE("point counts") {
  std::mt19937_64 rng(1);
  for (unsigned p : {3u, 5u, 7u, 11u, 13u, 31u}) {
    for (int trial = 0; trial < 4; ++trial) {
      const EulerSystem sys(p, 1, sample_triple(p, rng));
      const auto a = residues(sys);
      for (unsigned r1 = 0; r1 < p; ++r1)
        for (unsigned r2 = 0; r2 < p; ++r2) {
          const TruncatedPadic c1(p, 1, r1), c2(p, 1, r2);
          if (!sys.N_at(c1, c2).is_unit()) continue;
          const auto pc = count_points_and_ap(sys, r1, r2);
          CHECK(pc.count == brute_count(p, a, r1, r2));
          CHECK(pc.hasse_bound);
          CHECK(pc.congruent);
          CHECK((pc.hasse_value == 0) == (pc.ap % static_cast<long>(p) == 0));
        }
    }
  }
}

TEST_CASE("fiber Frobenius at points") {
  std::mt19937_64 rng(6);
  const unsigned p = 5;
  const EulerSystem sys(p, 2, sample_triple(p, rng));
  const auto flow = gauge_adjust(build_flow(sys), sys).flow;
  const auto f = admissible_residues(sys).front();
  const auto fr = fiber_frobenius(flow, sys, make_fiber(sys, f[0], f[1]), 2);
  CHECK(fr.residuals[0].is_zero());
  int tried = 0;
  for (unsigned x1 = 1; x1 < p; ++x1)
    for (unsigned x2 = 1; x2 < p; ++x2)
      for (unsigned x3 = 0; x3 < p; ++x3) {
        std::vector<TruncatedPadic> P{TruncatedPadic(p, 3, x1), TruncatedPadic(p, 3, x2), TruncatedPadic(p, 3, x3)};
        bool unit = true;
        for (std::size_t k = 0; k < 4; ++k) unit = unit && sys.chart().factor(k).evaluate(P).is_unit();
        if (!unit) continue;
        ++tried;
        const auto img = fr.apply(P);
        for (int i = 0; i < 3; ++i) CHECK(img[i].residue() == P[i].pow(p).residue());
      }
  CHECK(tried > 0);
}
