#include "shadowval/pauli.hpp"

#include <bit>

namespace shadowval {

SignedPauli SignedPauli::operator*(const SignedPauli& o) const {
  // (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{z1.x2} X^{x1^x2} Z^{z1^z2}
  SignedPauli r;
  r.n = n;
  r.x = x ^ o.x;
  r.z = z ^ o.z;
  r.phase = static_cast<std::uint8_t>((phase + o.phase + 2 * std::popcount(z & o.x)) & 3);
  return r;
}

bool SignedPauli::commutes_with(const SignedPauli& o) const {
  int anti = std::popcount(x & o.z) + std::popcount(z & o.x);
  return (anti & 1) == 0;
}

bool SignedPauli::is_hermitian() const {
  int canon = std::popcount(x & z) & 3;
  return phase == canon || phase == ((canon + 2) & 3);
}

int SignedPauli::sign() const {
  int canon = std::popcount(x & z) & 3;
  if (phase == canon) return +1;
  if (phase == ((canon + 2) & 3)) return -1;
  throw Error(ErrorKind::invalid_input, "sign() of non-Hermitian Pauli");
}

SignedPauli hermitian_pauli(int n, std::uint32_t x, std::uint32_t z, int sign) {
  SignedPauli p;
  p.n = n;
  p.x = x;
  p.z = z;
  p.phase = static_cast<std::uint8_t>((std::popcount(x & z) + (sign < 0 ? 2 : 0)) & 3);
  return p;
}

ComplexMatrix signed_pauli_matrix(const SignedPauli& p) {
  require(p.n <= 12, ErrorKind::invalid_input, "signed_pauli_matrix: n > 12");
  const std::size_t dim = std::size_t{1} << p.n;
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  ComplexMatrix m(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    int zsign = std::popcount(static_cast<std::uint32_t>(col) & p.z) & 1;
    m(col ^ p.x, col) = ipow[p.phase] * (zsign ? -1.0 : 1.0);
  }
  return m;
}

void apply_signed_pauli(const SignedPauli& p, const std::vector<cplx>& v, std::vector<cplx>& out) {
  const std::size_t dim = v.size();
  out.assign(dim, cplx(0.0, 0.0));
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx ph = ipow[p.phase];
  for (std::size_t col = 0; col < dim; ++col) {
    int zsign = std::popcount(static_cast<std::uint32_t>(col) & p.z) & 1;
    out[col ^ p.x] = ph * (zsign ? -v[col] : v[col]);
  }
}

}  // namespace shadowval
