#include "deltaflow/forms.hpp"

#include <bit>

namespace deltaflow {

DiffForm<TruncatedPadic> theta(const ArithmeticFlow& flow, std::size_t j, unsigned precision) {
  const PChart chart = flow.chart.at_precision(precision);
  const unsigned p = flow.prime();
  DiffForm<TruncatedPadic> t =
      DiffForm<TruncatedPadic>::dx(chart, j).times(PElement(chart, chart.poly_var(j).pow(p - 1)));
  return t + DiffForm<TruncatedPadic>::d(to_precision(flow.u.at(j), precision));
}

DiffForm<TruncatedPadic> phi_star_over_p(const DiffForm<TruncatedPadic>& alpha, const ArithmeticFlow& flow) {
  const unsigned n = std::min(alpha.chart().ring().precision(), flow.chart.ring().precision());
  const PChart chart = flow.chart.at_precision(n);
  if (!(alpha.chart().at_precision(n) == chart)) throw VariableMismatch("form and flow on different charts");
  std::map<std::size_t, DiffForm<TruncatedPadic>> thetas;
  auto theta_of = [&](std::size_t j) -> const DiffForm<TruncatedPadic>& {
    auto it = thetas.find(j);
    if (it == thetas.end()) it = thetas.emplace(j, theta(flow, j, n)).first;
    return it->second;
  };
  DiffForm<TruncatedPadic> out(chart, alpha.degree());
  for (const auto& [mask, coeff] : alpha.components()) {
    DiffForm<TruncatedPadic> term = DiffForm<TruncatedPadic>::function(flow.phi(to_precision(coeff, n)));
    for (std::uint32_t rest = mask; rest; rest &= rest - 1) {
      term = term.wedge(theta_of(static_cast<std::size_t>(std::countr_zero(rest))));
    }
    out = out + term;
  }
  return out;
}

}  // namespace deltaflow
