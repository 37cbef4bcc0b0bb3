#include "deltaflow/flows.hpp"

namespace deltaflow {

PElement check_prime_integral(const ArithmeticFlow& flow, const PPoly& H) {
  const PElement image = flow.phi(H);
  const PChart& chart = image.chart();
  const PPoly h = to_precision(H, chart.ring().precision());
  return image - PElement(chart, h.pow(flow.prime()));
}

StructureConstants so3_constants() {
  StructureConstants c(3, std::vector<std::vector<long>>(3, std::vector<long>(3, 0)));
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    c[i][j][k] = 1;
    c[j][i][k] = -1;
  }
  return c;
}

StructureConstants gln_constants(std::size_t n) {
  const std::size_t m = n * n;
  StructureConstants c(m, std::vector<std::vector<long>>(m, std::vector<long>(m, 0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          auto& out = c[i * n + j][k * n + l];
          if (j == k) out[i * n + l] += 1;
          if (l == i) out[k * n + j] -= 1;
        }
  return c;
}

std::vector<std::string> gl_names(std::size_t n) {
  if (n < 1 || n > 9) throw DomainError("matrix size must be between 1 and 9");
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) names.push_back("x" + std::to_string(i) + std::to_string(j));
  return names;
}

}  // namespace deltaflow
