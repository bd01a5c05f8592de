#pragma once

#include <gmpxx.h>

#include <functional>
#include <string>
#include <vector>

#include "shadowval/decider.hpp"
#include "shadowval/shadows.hpp"

namespace shadowval {

// Exact rational from a plain decimal string ("0.05", "-1.25", "3").
mpq_class rational_from_decimal(const std::string& s);

// --- CLDM -> ObsCon (marginal sets to Pauli expectations) ------------------

struct CldmSet {
  std::vector<int> sites;  // subset of [n], |sites| <= k
  ComplexMatrix state;     // density matrix on the subset
};

struct RationalThresholds {
  mpq_class alpha;
  mpq_class beta;
};

struct CldmToObsConResult {
  ObsConInstance instance;
  RationalThresholds exact;
};

// All Pauli strings on each set (identity included), targets Tr(P rho_i),
// alpha = alpha', beta = beta'/4^k.
CldmToObsConResult cldm_to_obscon(const std::vector<CldmSet>& sets, int n,
                                  const mpq_class& alpha_prime, const mpq_class& beta_prime,
                                  int k);

// --- Super-verifier check -> observable pair (Prop. 3.5 parameters) --------

struct CheckTriple {
  ComplexMatrix v;  // unitary on p+q qubits; qubit 0 (leftmost) is the output
  mpq_class r;
  mpq_class s;
};

struct CheckPair {
  ComplexMatrix observable;  // t (V^dag Pi1 V)
  double target = 0.0;       // t r
  RationalThresholds exact;  // alpha = tau, beta = tau + tau eps'
  mpq_class scale;           // t
};

CheckPair check_to_pair(const CheckTriple& check, const mpq_class& eps);

// --- BLOC -> ObsCon flattening (Lemma 6.9) ----------------------------------

struct Block {
  std::vector<ObsHandle> observables;
  std::vector<double> targets;
  mpq_class alpha;
  mpq_class beta;
};

struct BlockInstance {
  int n = 1;  // sites
  int d = 2;
  std::size_t dim = 2;
  std::vector<Block> blocks;
};

struct FlattenResult {
  ObsConInstance instance;  // block-major flattened, scaled copies
  RationalThresholds exact;
  std::vector<mpq_class> scales;  // t_k per block
};

FlattenResult bloc_flatten(const BlockInstance& b);

// --- Sampled shadow -> explicit shadow (coupon collector) -------------------

struct SampledSource {
  Protocol protocol = Protocol::local_qubit;
  int n = 1;
  int d = 2;
  int K = 1;
  std::size_t label_space = 1;  // L: position labels are 0..L-1
  // Draw one (label, record) pair.
  std::function<std::pair<std::size_t, LocalRecord>(RngStream&)> draw;
};

struct ReconstructionResult {
  bool complete = false;
  Shadow shadow;             // valid when complete
  std::size_t missing = 0;   // labels never seen
  std::size_t draws = 0;
};

// Draws ceil(L (ln L + ln 1/delta)) samples and keeps the first record per
// label; incomplete reconstructions are flagged, never silently returned.
ReconstructionResult sampled_to_explicit(const SampledSource& source, double delta,
                                         std::uint64_t seed);

}  // namespace shadowval
