#pragma once

#include <array>
#include <vector>

namespace testing_support {

// Brute-force count of y^2 = F(x) with the leading-coefficient convention at
// infinity, by listing all (x, y) pairs.
inline long brute_count(long p, std::array<long, 3> a, long c1, long c2) {
  auto md = [p](long v) { return ((v % p) + p) % p; };
  long affine = 0;
  for (long x = 0; x < p; ++x) {
    const long f = md(md(md(a[1] - a[2]) * x * x + c1 - a[1] * c2) * md(md(a[2] - a[0]) * x * x - c1 + a[0] * c2));
    for (long y = 0; y < p; ++y)
      if (md(y * y) == f) ++affine;
  }
  const long lead = md((a[1] - a[2]) * (a[2] - a[0]));
  bool square = false;
  for (long y = 1; y < p; ++y) square = square || md(y * y) == lead;
  return affine + (square ? 2 : 0);
}

// A(c) mod p by expanding F^((p-1)/2) over plain integers.
inline long hasse_brute(long p, std::array<long, 3> a, long c1, long c2) {
  auto md = [p](long v) { return ((v % p) + p) % p; };
  // F = (al x^2 + be)(ga x^2 + de) as a coefficient vector in x^2.
  const long al = md(a[1] - a[2]), be = md(c1 - a[1] * c2), ga = md(a[2] - a[0]), de = md(a[0] * c2 - c1);
  std::vector<long> f{md(be * de), md(al * de + be * ga), md(al * ga)};
  std::vector<long> acc{1};
  for (long k = 0; k < (p - 1) / 2; ++k) {
    std::vector<long> nx(acc.size() + 2, 0);
    for (std::size_t i = 0; i < acc.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) nx[i + j] = md(nx[i + j] + acc[i] * f[j]);
    acc = nx;
  }
  return acc[static_cast<std::size_t>((p - 1) / 2)];
}

}  // namespace testing_support
