#pragma once

#include <cstdint>
#include <vector>

#include "shadowval/matkernel.hpp"

namespace shadowval {

// n-qubit Pauli operator i^phase * prod_k X_k^{x_k} Z_k^{z_k}, phase mod 4.
// Bitmask layout: bit k of `x`/`z` refers to qubit k.
struct SignedPauli {
  int n = 0;
  std::uint32_t x = 0;
  std::uint32_t z = 0;
  std::uint8_t phase = 0;  // exponent of i

  static SignedPauli identity(int n) { return {n, 0, 0, 0}; }

  SignedPauli operator*(const SignedPauli& o) const;
  bool commutes_with(const SignedPauli& o) const;
  // Hermitian iff phase == popcount(x & z) mod 2 ... see implementation; the
  // canonical Hermitian string has phase = popcount(x&z) mod 4.
  bool is_hermitian() const;
  // +1 or -1 for a Hermitian operator: sign relative to the canonical string.
  int sign() const;

  bool operator==(const SignedPauli& o) const = default;
};

// Canonical Hermitian Pauli with the given bitmasks (Y = iXZ sitewise).
SignedPauli hermitian_pauli(int n, std::uint32_t x, std::uint32_t z, int sign = +1);

// Dense 2^n matrix (for tests and snapshot assembly).
ComplexMatrix signed_pauli_matrix(const SignedPauli& p);

// Apply to a state vector: out = P * v. Signed permutation, O(2^n).
void apply_signed_pauli(const SignedPauli& p, const std::vector<cplx>& v, std::vector<cplx>& out);

}  // namespace shadowval
