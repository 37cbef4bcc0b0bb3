#include "deltaflow/jets.hpp"

namespace deltaflow {

std::string jet_name(const std::string& base, unsigned level) {
  if (level <= 3) return base + std::string(level, '\'');
  return base + "^(" + std::to_string(level) + ")";
}

ZPoly universal_delta(const ZPoly& g, const JetPresentation& jet) {
  const std::size_t m = jet.base.size();
  ZPoly out(jet.vars, {});
  if (jet.flavor == JetFlavor::classical) {
    for (unsigned k = 0; k < jet.order; ++k) {
      for (std::size_t v = 0; v < m; ++v) {
        ZPoly dg = g.partial(jet.index(v, k));
        if (!dg.is_zero()) out = out + dg * ZPoly::variable(jet.vars, {}, jet.index(v, k + 1));
      }
    }
    for (std::size_t v = 0; v < m; ++v) {
      if (g.degree(jet.index(v, jet.order)) > 0) throw DomainError("delta leaves the jet order");
    }
    return out;
  }
  const unsigned p = jet.prime;
  std::vector<ZPoly> images;
  for (std::size_t i = 0; i < jet.vars.size(); ++i) {
    ZPoly x = ZPoly::variable(jet.vars, {}, i);
    const unsigned level = static_cast<unsigned>(i / m);
    if (level >= jet.order) {
      if (g.degree(i) > 0) throw DomainError("delta leaves the jet order");
      images.push_back(x.pow(p));
    } else {
      images.push_back(x.pow(p) + ZPoly::variable(jet.vars, {}, i + m).scale(p));
    }
  }
  ZPoly diff = g.compose(images) - g.pow(p);
  std::vector<ZPoly::Term> terms;
  for (const auto& [mono, c] : diff.terms()) {
    DELTAFLOW_ASSERT(mpz_divisible_ui_p(c.get_mpz_t(), p), "phi(g) - g^p not divisible by p");
    terms.emplace_back(mono, mpz_class(c / p));
  }
  return ZPoly::from_terms(jet.vars, {}, std::move(terms));
}

JetPresentation prolong(const ZPoly& f, unsigned n, JetFlavor flavor, unsigned p) {
  JetPresentation jet;
  jet.flavor = flavor;
  jet.order = n;
  if (flavor == JetFlavor::arithmetic) {
    if (p == 2 || !is_prime(p)) throw DomainError("arithmetic jets need an odd prime");
    jet.prime = p;
  }
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < f.vars().size(); ++i) {
    if (f.degree(i) > 0) {
      used.push_back(i);
      jet.base.push_back(f.vars().name(i));
    }
  }
  if (jet.base.empty()) jet.base.push_back("x");
  if (jet.base.size() * (n + 1) > kMaxVars) throw DomainError("too many jet variables");
  std::vector<std::string> names;
  for (unsigned k = 0; k <= n; ++k)
    for (const auto& b : jet.base) names.push_back(jet_name(b, k));
  jet.vars = Variables(names);
  // f in the level-0 variables.
  std::vector<ZPoly::Term> terms;
  for (const auto& [mono, c] : f.terms()) {
    Monomial m;
    for (std::size_t u = 0; u < used.size(); ++u) m[u] = mono[used[u]];
    terms.emplace_back(m, c);
  }
  ZPoly rel = ZPoly::from_terms(jet.vars, {}, std::move(terms));
  jet.relations.push_back(rel);
  for (unsigned k = 1; k <= n; ++k) {
    // Relation k only involves levels <= k; evaluate delta on a truncated view.
    JetPresentation view = jet;
    view.order = k;
    rel = universal_delta(rel, view);
    jet.relations.push_back(rel);
  }
  return jet;
}

std::vector<std::vector<TruncatedPadic>> jet_of_point(const std::vector<TruncatedPadic>& P, unsigned n) {
  std::vector<std::vector<TruncatedPadic>> levels{P};
  for (unsigned k = 1; k <= n; ++k) {
    std::vector<TruncatedPadic> next;
    for (const auto& x : levels.back()) {
      if (x.precision() < 2) {
        throw PrecisionError("jet of order " + std::to_string(n) + " needs " + std::to_string(n) +
                             " extra digits of precision");
      }
      next.push_back(delta_base(x));
    }
    levels.push_back(std::move(next));
  }
  return levels;
}

std::vector<std::vector<QPoly>> jet_of_point(const std::vector<QPoly>& P, unsigned n) {
  std::vector<std::vector<QPoly>> levels{P};
  for (unsigned k = 1; k <= n; ++k) {
    std::vector<QPoly> next;
    for (const auto& x : levels.back()) next.push_back(x.vars().size() ? x.partial(0) : x.zero());
    levels.push_back(std::move(next));
  }
  return levels;
}

namespace {

void check_arity(const JetPresentation& jet, std::size_t coords) {
  if (coords != jet.base.size()) throw VariableMismatch("point has the wrong number of coordinates");
}

}  // namespace

bool is_solution(const std::vector<ZPoly>& relations, const JetPresentation& jet,
                 const std::vector<TruncatedPadic>& P) {
  check_arity(jet, P.size());
  const auto levels = jet_of_point(P, jet.order);
  unsigned N = levels.back().front().precision();
  const PadicRing R(P.front().prime(), N);
  std::vector<TruncatedPadic> values;
  for (const auto& level : levels)
    for (const auto& x : level) values.push_back(x.reduce(N));
  for (const auto& rel : relations) {
    if (!(rel.vars() == jet.vars)) throw VariableMismatch("relation is not over the jet variables");
    const TruncatedPadic v = rel.evaluate_with<TruncatedPadic>(values, R.one(), [&](const mpz_class& c) { return R.from_mpz(c); });
    if (!v.is_zero()) return false;
  }
  return true;
}

bool is_solution(const std::vector<ZPoly>& relations, const JetPresentation& jet, const std::vector<QPoly>& P) {
  check_arity(jet, P.size());
  const auto levels = jet_of_point(P, jet.order);
  std::vector<QPoly> values;
  for (const auto& level : levels)
    for (const auto& x : level) values.push_back(x);
  const QPoly one = P.front().one();
  for (const auto& rel : relations) {
    if (!(rel.vars() == jet.vars)) throw VariableMismatch("relation is not over the jet variables");
    const QPoly v = rel.evaluate_with<QPoly>(values, one, [&](const mpz_class& c) { return one.scale(mpq_class(c)); });
    if (!v.is_zero()) return false;
  }
  return true;
}

}  // namespace deltaflow
