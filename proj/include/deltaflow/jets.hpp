#pragma once

#include <string>
#include <vector>

#include "deltaflow/flows.hpp"

namespace deltaflow {

enum class JetFlavor { classical, arithmetic };

// Generators x, x', ..., x^(n) for each base variable and the relations
// f, delta f, ..., delta^n f.
struct JetPresentation {
  JetFlavor flavor = JetFlavor::classical;
  unsigned order = 0;
  std::vector<std::string> base;
  // Ordered level by level: all x, then all x', ...
  Variables vars;
  std::vector<ZPoly> relations;
  unsigned prime = 0;

  std::size_t index(std::size_t var, unsigned level) const { return level * base.size() + var; }
  const std::string& name(std::size_t var, unsigned level) const { return vars.name(index(var, level)); }
};

std::string jet_name(const std::string& base, unsigned level);

// Universal derivation on a jet ring: x^(k) -> x^(k+1). Arithmetic flavor
// uses phi(x^(k)) = (x^(k))^p + p x^(k+1) and divides exactly by p.
ZPoly universal_delta(const ZPoly& g, const JetPresentation& jet);

// f is an integer polynomial; only the variables it mentions become base
// variables (in the order of f's variable list).
JetPresentation prolong(const ZPoly& f, unsigned n, JetFlavor flavor, unsigned p = 0);

// (P, delta P, ..., delta^n P); level k carries precision N + n - k.
std::vector<std::vector<TruncatedPadic>> jet_of_point(const std::vector<TruncatedPadic>& P, unsigned n);
// Classical jets of a point whose coordinates are polynomials in the time
// variable t, with delta = d/dt; constant points have zero jets.
std::vector<std::vector<QPoly>> jet_of_point(const std::vector<QPoly>& P, unsigned n);

// All relations vanish at J^n(P), at the lowest precision of the jet.
bool is_solution(const std::vector<ZPoly>& relations, const JetPresentation& jet,
                 const std::vector<TruncatedPadic>& P);
bool is_solution(const std::vector<ZPoly>& relations, const JetPresentation& jet, const std::vector<QPoly>& P);

}  // namespace deltaflow
