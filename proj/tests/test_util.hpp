#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <vector>

#include "shadowval/matkernel.hpp"
#include "shadowval/rng.hpp"

namespace testutil {

using shadowval::ComplexMatrix;
using shadowval::cplx;
using shadowval::RngStream;

inline double gauss(RngStream& r) {
  double u1 = r.uniform(), u2 = r.uniform();
  u1 = std::max(u1, 1e-300);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline ComplexMatrix random_matrix(std::size_t n, RngStream& r) {
  ComplexMatrix m(n, n);
  for (auto& x : m.data()) x = cplx(gauss(r), gauss(r));
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, RngStream& r) {
  ComplexMatrix g = random_matrix(n, r);
  ComplexMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
  return h;
}

inline shadowval::DensityMatrix random_density(std::size_t n, RngStream& r) {
  ComplexMatrix g = random_matrix(n, r);
  ComplexMatrix rho = shadowval::matmul(g, g.adjoint());
  cplx tr = rho.trace();
  rho *= cplx(1.0 / tr.real(), 0.0);
  // symmetrize away roundoff
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      cplx v = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
  return shadowval::DensityMatrix(rho);
}

// Random Hermitian with operator norm <= maxnorm.
inline shadowval::Observable random_observable(std::size_t n, RngStream& r, double maxnorm = 1.0) {
  ComplexMatrix h = random_hermitian(n, r);
  auto e = shadowval::herm_eig(h);
  double top = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
  if (top > 0) h *= cplx(maxnorm / top, 0.0);
  return shadowval::Observable(h);
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline std::vector<cplx> random_unit_vector(std::size_t n, RngStream& r) {
  std::vector<cplx> v(n);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = cplx(gauss(r), gauss(r));
    norm2 += std::norm(x);
  }
  double s = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= s;
  return v;
}

}  // namespace testutil
