#pragma once

#include <gmpxx.h>

#include <optional>
#include <vector>

#include "json.hpp"
#include "shadowval/decider.hpp"
#include "shadowval/shadows.hpp"

namespace shadowval {

// Per-site snapshot alphabet: the m possible single-site snapshots of the
// chosen protocol (qubit sites: tensor products of ell single-qubit
// snapshots, m = 6^ell; qudit sites: the d(d+1) MYZ snapshots).
struct SnapshotAlphabet {
  bool qudit = false;
  int ell = 1;       // qubits per site (qubit mode)
  int d = 2;         // site dimension (2^ell or odd prime)
  std::vector<ComplexMatrix> etas;            // d x d, trace 1 each
  std::vector<LocalRecord> site_records;      // measurement record per letter
  std::size_t size() const { return etas.size(); }
};

// Qubit-site alphabet; `restriction` lists allowed single-qubit letters
// (codes 0..5 = X+,X-,Y+,Y-,Z+,Z-), empty = all six.
SnapshotAlphabet enumerate_alphabet(int ell, const std::vector<int>& restriction = {});
// Qudit-site alphabet; `restriction` lists allowed (mu, b) codes
// mu*(d)+b ... codes 0..d(d+1)-1 taken as mu = code / d, b = code % d.
SnapshotAlphabet enumerate_alphabet_qudit(int d, const std::vector<int>& restriction = {});

// Nearest-neighbor marginal consistency instance on a chain.
struct CldmInstance {
  int d = 2;   // site dimension: power of two (qubit mode) or odd prime
  int n = 2;   // chain length
  std::vector<ComplexMatrix> sigmas;  // n-1 matrices of dimension d^2
  double alpha = 0.0;
  double beta = 0.0;
  void validate() const;
  bool qudit_mode() const;
  int ell() const;  // log2(d) in qubit mode
};

nlohmann::json cldm_to_json(const CldmInstance& inst);
CldmInstance cldm_from_json(const nlohmann::json& j);

// m x m nonnegative integer weights summing to L.
struct WeightMatrix {
  int m = 0;
  std::int64_t total = 0;
  std::vector<std::int32_t> counts;  // row-major, counts[j*m + k]

  std::vector<std::int64_t> row_sums() const;
  std::vector<std::int64_t> col_sums() const;
};

bool marginal_match(const WeightMatrix& a, const WeightMatrix& b);

struct LpSolution {
  int m = 0;
  int edges = 0;
  std::vector<mpq_class> p;  // p[(i*m + j)*m + k]
  double max_residual = 0.0;
};

enum class LpOutcomeStatus { feasible, infeasible };

struct LpOutcome {
  LpOutcomeStatus status = LpOutcomeStatus::infeasible;
  LpSolution solution;
  long pivots = 0;
};

// Eq-(4) system: exact rational simplex with the marginal-equality rows
// relaxed to +-tolerances().lp_interval and all structural rows exact.
LpOutcome solve_marginal_lp(const CldmInstance& inst, const SnapshotAlphabet& alphabet);

// Trace-norm residual || sigma - (1/L) sum N_{jk} eta_j (x) eta_k ||_Tr.
double edge_residual(const ComplexMatrix& sigma, const WeightMatrix& n,
                     const SnapshotAlphabet& alphabet);

// All weight matrices within the enumerated domain whose residual is <= eps.
// Domain: full balls-and-bars enumeration for m <= 3, else an l-infinity
// ball of radius `ball_radius` around `center` (required in that case).
std::vector<WeightMatrix> trace_filter(const ComplexMatrix& sigma, std::int64_t L, double eps,
                                       const SnapshotAlphabet& alphabet,
                                       const std::optional<WeightMatrix>& center = std::nullopt,
                                       int ball_radius = 2, int threads = 1);

// Number of m x m nonnegative integer matrices summing to L (balls and bars),
// saturating at 2^63-1.
std::uint64_t weight_domain_size(int m, std::int64_t L);

struct DpResult {
  bool accepted = false;
  std::vector<WeightMatrix> sequence;       // n-1 matrices when accepted
  std::vector<std::size_t> frontier_sizes;  // per edge
};

// Forward frontier pass over the chain + backtracking.
DpResult dp_solve(const std::vector<std::vector<WeightMatrix>>& filters);

// Assemble per-edge local shadows into L global records via greedy bucket
// matching on the shared-site labels.
Shadow stitch_global_shadow(const std::vector<WeightMatrix>& seq, const SnapshotAlphabet& alphabet,
                            std::int64_t L);

struct ReduceResult {
  bool trivial_no = false;
  ObsConInstance instance;
  std::optional<Shadow> shadow;
  nlohmann::json report;
};

// Full Theorem-4.3/4.5 pipeline: LP -> rounding -> filters -> DP -> stitch ->
// CSV instance with all pair-supported Pauli (or Hermitian Weyl) strings.
// LP infeasibility or DP rejection yields the canonical trivial NO-instance.
ReduceResult reduce(const CldmInstance& inst, std::int64_t L, double eps,
                    const SnapshotAlphabet& alphabet, int chi_bits = 24, int ball_radius = 2,
                    int threads = 1);

}  // namespace shadowval
