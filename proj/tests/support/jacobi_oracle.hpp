#pragma once

namespace minsphere::oracle {

struct JacobiCounts {
  int index = 0;
  int nullity = 0;
};

// Second variation of the equator S^2 in S^n: on each of the n - 2 normal
// directions it is -Laplacian - 2, with eigenvalues l(l+1) - 2 of multiplicity
// 2l + 1; the tangential part vanishes exactly on the conformal vector fields,
// a space of dimension dim so(3,1) = 6.
inline JacobiCounts analytic_jacobi_counts(int n) {
  JacobiCounts c;
  for (int l = 0; l < 10; ++l) {
    const int value = l * (l + 1) - 2;
    if (value < 0) c.index += (2 * l + 1) * (n - 2);
    if (value == 0) c.nullity += (2 * l + 1) * (n - 2);
  }
  c.nullity += 6;
  return c;
}

}  // namespace minsphere::oracle
