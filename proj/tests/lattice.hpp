#pragma once

// Exact solutions of (A^n - I) x = 0 mod Z^3 for the base matrix.

#include <array>
#include <cstdlib>
#include <set>
#include <vector>

#include "uulab/linalg.hpp"

namespace lattice {

using uulab::Scalar;
using uulab::Vec3;

using IMat = std::array<std::array<long, 3>, 3>;

inline IMat imul(const IMat& a, const IMat& b) {
  IMat c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Solutions of (A^n - I) x = 0 mod Z^3: x = adj(M) k / det(M) for integer k.
// Returned as exact points on the torus.
inline std::vector<Vec3<Scalar>> oracle(int period) {
  const IMat a{{{2, 1, 0}, {1, 2, 1}, {0, 1, 1}}};
  IMat m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int i = 0; i < period; ++i) m = imul(m, a);
  for (int i = 0; i < 3; ++i) m[i][i] -= 1;
  IMat adj{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    }
  const long det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
  const long d = std::labs(det);
  std::set<std::array<long, 3>> seen;
  std::vector<Vec3<Scalar>> pts;
  for (long k0 = 0; k0 < d; ++k0)
    for (long k1 = 0; k1 < d; ++k1)
      for (long k2 = 0; k2 < d; ++k2) {
        std::array<long, 3> num{};
        for (int i = 0; i < 3; ++i) {
          const long v = adj[i][0] * k0 + adj[i][1] * k1 + adj[i][2] * k2;
          num[static_cast<std::size_t>(i)] = ((v % d) + d) % d;
        }
        if (det < 0)
          for (auto& v : num) v = (d - v) % d;
        if (seen.insert(num).second) {
          pts.push_back({Scalar(num[0]) / d, Scalar(num[1]) / d, Scalar(num[2]) / d});
        }
      }
  return pts;
}

}  // namespace lattice
