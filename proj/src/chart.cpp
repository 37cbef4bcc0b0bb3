#include "deltaflow/chart.hpp"

namespace deltaflow {

namespace {

unsigned working_precision(const PPoly& f, const std::vector<PElement>& u) {
  if (u.size() != f.vars().size()) throw VariableMismatch("one flow image per variable is required");
  return std::min(f.ring().precision(), u.front().chart().ring().precision());
}

std::vector<PElement> generator_images(const std::vector<PElement>& u, unsigned precision) {
  const PChart chart = u.front().chart().at_precision(precision);
  const unsigned p = chart.ring().prime();
  const TruncatedPadic pp = chart.ring().from_int(p);
  std::vector<PElement> images;
  images.reserve(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i].chart() == u.front().chart())) throw VariableMismatch("flow images on different charts");
    PElement x = PElement(chart, chart.poly_var(i).pow(p));
    images.push_back(x + to_precision(u[i], precision).scale(pp));
  }
  return images;
}

PElement substitute(const PPoly& f, const std::vector<PElement>& images) {
  const PChart& chart = images.front().chart();
  const unsigned n = chart.ring().precision();
  const PElement one = PElement::constant(chart, 1);
  return f.evaluate_with<PElement>(images, one, [&](const TruncatedPadic& c) {
    return PElement::constant(chart, c.reduce(std::min(n, c.precision())).lift(n));
  });
}

}  // namespace

PElement phi_poly(const PPoly& f, const std::vector<PElement>& u) {
  const unsigned n = working_precision(f, u);
  return substitute(to_precision(f, n), generator_images(u, n));
}

PElement delta_poly(const PPoly& f, const std::vector<PElement>& u, unsigned target) {
  const unsigned have = working_precision(f, u);
  if (have < target + 1) {
    throw PrecisionError("delta to precision " + std::to_string(target) + " needs " +
                         std::to_string(target + 1) + " digits, got " + std::to_string(have));
  }
  const unsigned n = target + 1;
  const PChart chart = u.front().chart().at_precision(n);
  const PPoly g = to_precision(f, n);
  PElement diff = substitute(g, generator_images(u, n)) - PElement(chart, g.pow(chart.ring().prime()));
  // The cross-multiplied numerator of phi(f) - f^p is divisible by p.
  return divide_by_p(diff);
}

PElement phi_element(const PElement& e, const std::vector<PElement>& u) {
  const unsigned n = std::min(e.chart().ring().precision(), u.front().chart().ring().precision());
  if (!(e.chart().at_precision(n) == u.front().chart().at_precision(n))) {
    throw VariableMismatch("element and flow live on different charts");
  }
  const std::vector<PElement> images = generator_images(u, n);
  const PChart& chart = images.front().chart();
  const unsigned p = chart.ring().prime();
  PElement out = substitute(to_precision(e.numerator(), n), images);
  for (std::size_t k = 0; k < chart.factor_count(); ++k) {
    if (!e.exponents()[k]) continue;
    // 1/phi(f) = f^-p * sum_j r^j with r = -(phi(f) - f^p)/f^p, r = 0 mod p.
    const PPoly& f = chart.factor(k);
    PElement r = -(substitute(f, images) - PElement(chart, f.pow(p))).divide_by_factor(k, p);
    PElement series = PElement::constant(chart, 1);
    PElement power = series;
    for (unsigned j = 1; j < n; ++j) {
      power = power * r;
      series = series + power;
    }
    out = out * series.divide_by_factor(k, p).pow(e.exponents()[k]);
  }
  return out;
}

}  // namespace deltaflow
