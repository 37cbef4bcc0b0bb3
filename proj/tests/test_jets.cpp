#include <doctest.h>

#include <random>

#include "deltaflow/jets.hpp"
#include "deltaflow/parse.hpp"

using namespace deltaflow;

namespace {

ZPoly in(const JetPresentation& jet, const std::string& text) { return parse_polynomial(text, jet.vars); }

}  // namespace

TEST_CASE("classical prolongation") {
  const Variables v{"x"};
  const ZPoly x = ZPoly::variable(v, {}, 0);
  const auto j1 = prolong(x, 2, JetFlavor::classical);
  REQUIRE(j1.relations.size() == 3);
  CHECK(j1.relations[1] == ZPoly::variable(j1.vars, {}, 1));
  CHECK(j1.relations[2] == ZPoly::variable(j1.vars, {}, 2));
  const auto j2 = prolong(x * x, 2, JetFlavor::classical);
  CHECK(j2.relations[0] == in(j2, "x^2"));
  CHECK(j2.relations[1] == in(j2, "2*x*x'"));
  CHECK(j2.relations[2] == in(j2, "2*x'^2 + 2*x*x''"));
  // Re-applying delta to relation n-1 reproduces relation n.
  CHECK(universal_delta(j2.relations[1], j2) == j2.relations[2]);
}

TEST_CASE("arithmetic prolongation") {
  const Variables v{"x"};
  const ZPoly x = ZPoly::variable(v, {}, 0);
  const auto j1 = prolong(x, 1, JetFlavor::arithmetic, 3);
  CHECK(j1.relations[1] == in(j1, "x'"));
  const auto j2 = prolong(x * x, 1, JetFlavor::arithmetic, 3);
  CHECK(j2.relations[1] == in(j2, "2*x^3*x' + 3*x'^2"));
  const auto j5 = prolong(x * x, 1, JetFlavor::arithmetic, 5);
  CHECK(j5.relations[1] == in(j5, "2*x^5*x' + 5*x'^2"));
  // Constants restrict to delta on Z: delta(2) = (2 - 8)/3 = -2.
  const auto jc = prolong(x + ZPoly::constant(v, {}, 2), 1, JetFlavor::arithmetic, 3);
  // delta(x + 2) = x' + delta(2) + (x^3 + 8 - (x+2)^3)/3
  CHECK(jc.relations[1] == in(jc, "x' - 2 - 2*x^2 - 4*x"));
}

TEST_CASE("product rule at order one") {
  // delta(fg) = f^p delta g + g^p delta f + p delta f delta g
  const unsigned p = 5;
  const Variables v{"x", "y"};
  const ZPoly f = parse_polynomial("x^2 + 3*y", v), g = parse_polynomial("x*y - 1", v);
  const auto jf = prolong(f, 1, JetFlavor::arithmetic, p);
  const auto jg = prolong(g, 1, JetFlavor::arithmetic, p);
  const auto jfg = prolong(f * g, 1, JetFlavor::arithmetic, p);
  REQUIRE(jf.vars == jfg.vars);
  const ZPoly F = jf.relations[0], G = jg.relations[0], dF = jf.relations[1], dG = jg.relations[1];
  CHECK(jfg.relations[1] == F.pow(p) * dG + G.pow(p) * dF + (dF * dG).scale(p));
  const auto cf = prolong(f, 1, JetFlavor::classical);
  const auto cg = prolong(g, 1, JetFlavor::classical);
  const auto cfg = prolong(f * g, 1, JetFlavor::classical);
  CHECK(cfg.relations[1] == cf.relations[0] * cg.relations[1] + cg.relations[0] * cf.relations[1]);
}

TEST_CASE("jets of points") {
  const auto t = teichmuller(5, 3, 5);
  const auto J = jet_of_point(std::vector<TruncatedPadic>{t}, 1);
  CHECK(J[0][0] == t);
  CHECK(J[1][0].is_zero());
  const auto J2 = jet_of_point(std::vector<TruncatedPadic>{TruncatedPadic(3, 4, 2)}, 1);
  CHECK(J2[1][0].precision() == 3);
  CHECK(J2[1][0].value() == 25);
  CHECK_THROWS_AS(jet_of_point(std::vector<TruncatedPadic>{TruncatedPadic(3, 2, 2)}, 2), PrecisionError);

  const Variables tv{"t"};
  const QPoly c = QPoly::constant(tv, {}, 7);
  const auto Jc = jet_of_point(std::vector<QPoly>{c}, 3);
  for (unsigned k = 1; k <= 3; ++k) CHECK(Jc[k][0].is_zero());
}

TEST_CASE("solution checks") {
  const Variables v{"x"};
  const ZPoly x = ZPoly::variable(v, {}, 0);
  const auto jet = prolong(x, 1, JetFlavor::arithmetic, 5);
  const ZPoly xp = ZPoly::variable(jet.vars, {}, 1);
  const std::vector<TruncatedPadic> P{teichmuller(5, 2, 4)};
  CHECK(is_solution({xp}, jet, P));
  CHECK_FALSE(is_solution({xp - ZPoly::constant(jet.vars, {}, 1)}, jet, P));

  // f(P) = 0 implies every prolonged relation vanishes at J^n(P).
  std::mt19937_64 rng(5);
  for (unsigned p : {3u, 5u, 7u}) {
    const Variables xy{"x", "y"};
    for (int trial = 0; trial < 10; ++trial) {
      const unsigned N = 3, n = 2;
      const PadicRing R(p, N + n);
      const TruncatedPadic a = R.from_int(static_cast<long>(rng() % 1000)), b = R.from_int(static_cast<long>(rng() % 1000));
      // f = y - x^2 - c with c chosen so that (a, b) is a root.
      const TruncatedPadic cval = b - a * a;
      const ZPoly f = parse_polynomial("y - x^2", xy) - ZPoly::constant(xy, {}, cval.value());
      const auto pj = prolong(f, n, JetFlavor::arithmetic, p);
      CHECK(is_solution(pj.relations, pj, {a, b}));
      CHECK_FALSE(is_solution(pj.relations, pj, {a, b + R.one()}));
    }
  }

  // Classical: x^2 and its prolongations vanish on x(t) = 0 but not on x(t) = t.
  const Variables tv{"t"};
  const QPoly tt = QPoly::variable(tv, {}, 0);
  const auto cj = prolong(parse_polynomial("x^2", Variables{"x"}), 2, JetFlavor::classical);
  CHECK(is_solution(cj.relations, cj, std::vector<QPoly>{QPoly::constant(tv, {}, 0)}));
  CHECK_FALSE(is_solution(cj.relations, cj, std::vector<QPoly>{tt}));
}

TEST_CASE("canonical flows") {
  Chart<mpq_class> chart(Variables{"x", "x'"}, {});
  using E = ChartElement<mpq_class>;
  const E x = E::variable(chart, 0), xp = E::variable(chart, 1);
  CHECK(is_canonical_flow(ClassicalFlow<mpq_class>(chart, {xp, x * xp}), {"x"}, {"x'"}));
  CHECK_FALSE(is_canonical_flow(ClassicalFlow<mpq_class>(chart, {x.zero(), x}), {"x"}, {"x'"}));
  // x'' = g(x, x') as the flow (x', g).
  CHECK(is_canonical_flow(ClassicalFlow<mpq_class>(chart, {xp, -x + xp * xp}), {"x"}, {"x'"}));
}
