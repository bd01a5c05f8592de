#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "shadowval/pauli.hpp"
#include "shadowval/rng.hpp"

namespace shadowval {

// Symplectic vectors over F_2^{2n} as bitmasks: bit 2k = x_k, bit 2k+1 = z_k.
using SympVec = std::uint64_t;

int symplectic_form(SympVec u, SympVec v, int n);

// Stabilizer tableau of an n-qubit Clifford U: images of the generators under
// conjugation, U X_k U^dag and U Z_k U^dag, as signed Hermitian Paulis.
struct CliffordTableau {
  int n = 0;
  std::vector<SignedPauli> img_x;  // destabilizer rows
  std::vector<SignedPauli> img_z;  // stabilizer rows

  static CliffordTableau identity(int n);
  // Commutation relations + Hermitian phases.
  bool valid() const;
  CliffordTableau inverse() const;
  // Image of an arbitrary signed Pauli under conjugation by U.
  SignedPauli conjugate(const SignedPauli& p) const;
  // Canonical byte key, for frequency counting.
  std::string key() const;

  bool operator==(const CliffordTableau& o) const = default;
};

// Number of symplectic matrices / Clifford elements (phases mod global phase).
// Guarded to n <= 5 so the counts fit in 64 bits comfortably.
std::uint64_t symplectic_order(int n);
std::uint64_t clifford_order(int n);

// Bijection [0, symplectic_order(n)) -> Sp(2n, F_2); columns[i] is the image
// of basis vector e_i. Row-by-row canonical construction via transvections.
std::vector<SympVec> symplectic_from_index(std::uint64_t idx, int n);

// Uniformly random symplectic matrix for any n <= 12 (random bits, not an
// index, so group orders never overflow).
std::vector<SympVec> random_symplectic(int n, RngStream& rng);

CliffordTableau tableau_from_symplectic(const std::vector<SympVec>& cols,
                                        std::uint32_t phase_bits, int n);

CliffordTableau clifford_from_index(std::uint64_t idx, int n);
CliffordTableau sample_global_clifford_tableau(int n, RngStream& rng);

// |psi> = U^dag |b>: the stabilizer state picked out by outcome bits b
// (bit k of `outcome` = measurement result of qubit k).
std::vector<cplx> state_from_record(const CliffordTableau& u, std::uint32_t outcome);

nlohmann::json tableau_to_json(const CliffordTableau& t);
CliffordTableau tableau_from_json(const nlohmann::json& j);

}  // namespace shadowval
