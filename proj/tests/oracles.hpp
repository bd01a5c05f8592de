#pragma once

// Independent oracles used by the unit and acceptance suites. These compute
// expected values by exhaustive enumeration or brute force, never through the
// code paths they are checking.

#include <vector>

#include "shadowval/clifford.hpp"
#include "shadowval/matkernel.hpp"
#include "shadowval/shadows.hpp"

namespace oracles {

using namespace shadowval;

// Exhaustive record-distribution expectation of local-Clifford snapshots:
// sum over all (basis, outcome)^n records of Born weight times snapshot.
inline ComplexMatrix exact_local_expectation(const DensityMatrix& rho, int n) {
  const std::size_t dim = std::size_t{1} << n;
  // own basis table, independent of the sampler's
  const double s = 1.0 / std::sqrt(2.0);
  const std::vector<std::vector<cplx>> eig = {
      {s, s}, {s, -s}, {s, cplx(0, s)}, {s, cplx(0, -s)}, {1, 0}, {0, 1}};
  std::size_t combos = 1;
  for (int i = 0; i < n; ++i) combos *= 6;
  ComplexMatrix acc(dim, dim);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rem = c;
    LocalRecord rec;
    std::vector<cplx> joint = {1.0};
    for (int site = 0; site < n; ++site) {
      int code = static_cast<int>(rem % 6);
      rem /= 6;
      rec.bases.push_back(static_cast<std::uint8_t>(code / 2));
      rec.outcomes.push_back(code % 2 == 0 ? 1 : -1);
      std::vector<cplx> next(joint.size() * 2);
      for (std::size_t i = 0; i < joint.size(); ++i)
        for (int k = 0; k < 2; ++k) next[i * 2 + k] = joint[i] * eig[code][k];
      joint = std::move(next);
    }
    // Born weight / 3^n
    auto rv = matvec(rho.mat, joint);
    cplx w = 0.0;
    for (std::size_t i = 0; i < dim; ++i) w += std::conj(joint[i]) * rv[i];
    double weight = w.real();
    for (int site = 0; site < n; ++site) weight /= 3.0;
    ComplexMatrix eta = local_snapshot_matrix(rec);
    eta *= cplx(weight, 0.0);
    acc += eta;
  }
  return acc;
}

// Same for the global-Clifford protocol, enumerating the whole Clifford
// group via the canonical index bijection.
inline ComplexMatrix exact_global_expectation(const DensityMatrix& rho, int n) {
  const std::size_t dim = std::size_t{1} << n;
  const std::uint64_t total = clifford_order(n);
  ComplexMatrix acc(dim, dim);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    CliffordTableau t = clifford_from_index(idx, n);
    for (std::uint32_t b = 0; b < dim; ++b) {
      GlobalRecord rec{t, b};
      auto psi = state_from_record(t, b);
      auto rv = matvec(rho.mat, psi);
      cplx w = 0.0;
      for (std::size_t i = 0; i < dim; ++i) w += std::conj(psi[i]) * rv[i];
      ComplexMatrix eta = global_snapshot_matrix(rec);
      eta *= cplx(w.real() / static_cast<double>(total), 0.0);
      acc += eta;
    }
  }
  return acc;
}

// Same for the MYZ protocol: all ((d+1) d)^n records with Born weights.
inline ComplexMatrix exact_myz_expectation(const DensityMatrix& rho, int n, int d) {
  std::size_t dim = 1;
  for (int i = 0; i < n; ++i) dim *= d;
  std::size_t combos = 1;
  for (int i = 0; i < n; ++i) combos *= static_cast<std::size_t>((d + 1) * d);
  ComplexMatrix acc(dim, dim);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rem = c;
    LocalRecord rec;
    std::vector<cplx> joint = {1.0};
    for (int site = 0; site < n; ++site) {
      int code = static_cast<int>(rem % ((d + 1) * d));
      rem /= (d + 1) * d;
      int mu = code / d, b = code % d;
      rec.bases.push_back(static_cast<std::uint8_t>(mu));
      rec.outcomes.push_back(static_cast<std::int16_t>(b));
      auto phi = mub_vector(d, mu, b);
      std::vector<cplx> next(joint.size() * d);
      for (std::size_t i = 0; i < joint.size(); ++i)
        for (int k = 0; k < d; ++k) next[i * d + k] = joint[i] * phi[k];
      joint = std::move(next);
    }
    auto rv = matvec(rho.mat, joint);
    cplx w = 0.0;
    for (std::size_t i = 0; i < dim; ++i) w += std::conj(joint[i]) * rv[i];
    double weight = w.real();
    for (int site = 0; site < n; ++site) weight /= static_cast<double>(d + 1);
    ComplexMatrix eta = myz_snapshot_matrix(rec, d);
    eta *= cplx(weight, 0.0);
    acc += eta;
  }
  return acc;
}

}  // namespace oracles
