#pragma once

#include <cstdint>

namespace shadowval {

// Central numeric tolerance record. Every module reads its thresholds from
// here so tests can tighten or relax a single knob.
struct Tolerances {
  double hermitian = 1e-10;        // max |A - A'| entry for Hermiticity checks
  double trace_one = 1e-10;        // |Tr(rho) - 1|
  double psd = 1e-10;              // eigenvalues >= -psd for density matrices
  double obs_norm = 1e-10;         // operator norm slack: ||O|| <= 1 + obs_norm
  double eig_residual = 1e-8;      // ||A - V L V'||_F <= eig_residual * dim
  double imag_part = 1e-8;         // asserted bound on spurious imaginary parts
  double lp_interval = 1e-7;       // +- relaxation on marginal equality rows
  double unitary = 1e-8;           // ||V'V - I|| for unitarity checks
  double stitch_float = 1e-12;     // stitching identity, float mode
};

inline Tolerances& tolerances() {
  static Tolerances t;
  return t;
}

// Resource ceilings ("budgets"). Exceeding one raises budget_exceeded.
struct Budgets {
  std::uint64_t dp_domain = 10'000'000;   // max enumerated weight matrices per edge
  std::uint64_t fkv_rows = 200;           // sketch row budget p
  std::uint64_t estimator_samples = 1'000'000'000;  // per estimator call
  int max_dim = 4096;                     // dense matrix dimension cap
};

inline Budgets& budgets() {
  static Budgets b;
  return b;
}

}  // namespace shadowval
