#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "shadowval/cldm.hpp"
#include "shadowval/decider.hpp"

namespace shadowval {

// Reproducible instance generators behind `gen-fixture`. Each kind maps to
// one or more JSON documents keyed by file stem.
std::map<std::string, nlohmann::json> gen_fixture(const std::string& kind, std::uint64_t seed);

// Typed access for the test suites.
CldmInstance make_cldm_yes(std::uint64_t seed);     // product-state marginals, m = 3 alphabet
CldmInstance make_cldm_infeasible();                // |00><00| vs site-2 = |1><1|
std::vector<int> cldm_yes_restriction();            // alphabet letters used by the fixture

struct LowRankFixture {
  std::vector<ComplexMatrix> observables;           // N x N Hermitian, rank 4, norm <= 1
  std::vector<std::vector<double>> lambdas;         // factorized form
  std::vector<ComplexMatrix> vectors;               // N x rank orthonormal columns
  std::vector<double> frob2;
  std::vector<double> targets;
  double alpha = 0.15;
  double beta = 0.45;
  bool planted_yes = false;
};
// Even seeds plant a consistent state (YES); odd seeds plant a contradictory
// observable pair (NO).
LowRankFixture make_lowrank_obs(std::uint64_t seed, std::size_t n = 256, int m_obs = 4,
                                int rank = 4);

ObsConInstance make_obscon_xyz();  // {(X,1),(Y,1),(Z,1)}, alpha .1, beta .3
ObsConInstance make_obscon_no();   // {(Z,1),(-Z,1)}: chi* = 1

nlohmann::json dequant_input_to_json(const LowRankFixture& f);

}  // namespace shadowval
