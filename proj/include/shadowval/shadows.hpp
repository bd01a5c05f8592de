#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "shadowval/clifford.hpp"
#include "shadowval/matkernel.hpp"
#include "shadowval/rng.hpp"

namespace shadowval {

enum class Protocol { local_qubit, global_qubit, local_qudit };

std::string protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& s);

// One round of a local protocol. Qubit: bases[j] in {0,1,2} = {X,Y,Z} and
// outcomes[j] in {+1,-1}. Qudit: bases[j] = mu in {0..d-1} u {d == infinity
// label, the Z eigenbasis} and outcomes[j] = b in {0..d-1}.
struct LocalRecord {
  std::vector<std::uint8_t> bases;
  std::vector<std::int16_t> outcomes;
};

struct GlobalRecord {
  CliffordTableau tableau;
  std::uint32_t outcome = 0;
};

struct Shadow {
  Protocol protocol = Protocol::local_qubit;
  int n = 0;
  int d = 2;
  int K = 1;
  std::vector<LocalRecord> local_records;
  std::vector<GlobalRecord> global_records;

  std::size_t size() const {
    return protocol == Protocol::global_qubit ? global_records.size() : local_records.size();
  }
};

// Observable handle for recovery: a Pauli/Weyl string (optionally the
// imaginary Hermitian part for qudit Weyl strings) or an explicit matrix.
struct WeylPart {
  PauliString string;
  bool imag = false;  // false: (W + W')/2, true: (W - W')/(2i)
};
using ObsHandle = std::variant<PauliString, WeylPart, ComplexMatrix>;

// MUB basis vector |phi_{mu,b}> for odd prime d: mu == d is the computational
// (Z) eigenbasis; mu = t in F_d is the eigenbasis of the Weyl operator X Z^t,
// with |phi_{t,b}> the eigenvector of eigenvalue w^b.
std::vector<cplx> mub_vector(int d, int mu, int b);
bool is_odd_prime(int d);

// --- Sampling -------------------------------------------------------------

// HKP local-Clifford (random Pauli) protocol. Exact Born sampling from rho.
Shadow sample_local_shadow(const DensityMatrix& rho, int n, std::size_t L, std::uint64_t seed,
                           int K = 1, int threads = 1);
// HKP global-Clifford protocol; tableaus uniform over the Clifford group.
Shadow sample_global_shadow(const DensityMatrix& rho, int n, std::size_t L, std::uint64_t seed,
                            int K = 1, int threads = 1);
// MYZ local-Clifford protocol on n qudits of odd prime dimension d.
Shadow sample_myz_shadow(const DensityMatrix& rho, int n, int d, std::size_t L, std::uint64_t seed,
                         int K = 1, int threads = 1);

CliffordTableau sample_global_clifford(int n, RngStream& rng);

// --- Snapshots ------------------------------------------------------------

// Tensor product over sites of 3|psi><psi| - I (qubit records only).
ComplexMatrix local_snapshot_matrix(const LocalRecord& r);
// (2^n+1) |psi><psi| - I with |psi> = U^dag |b>.
ComplexMatrix global_snapshot_matrix(const GlobalRecord& r);
// Tensor product over sites of (d+1)|phi_{mu,b}><phi_{mu,b}| - I_d.
ComplexMatrix myz_snapshot_matrix(const LocalRecord& r, int d);

ComplexMatrix snapshot_matrix(const Shadow& s, std::size_t idx);

// Per-record estimate Tr(O eta_hat); fast factorized paths for strings.
double snapshot_value(const Shadow& s, std::size_t idx, const ObsHandle& obs);

// --- Recovery -------------------------------------------------------------

// Median of means over K nearly-equal blocks taken in record order, rounded
// to chi fractional bits (half to even), clamped to [-1, 1].
double mom_recover(const Shadow& s, const ObsHandle& obs, int K, int chi_bits, int threads = 1);

// Default block count when the caller does not pin one.
int default_block_count(std::size_t m_obs);

// Tr(O eta) for an explicit snapshot; imaginary part is asserted small.
double observable_value(const Observable& o, const ComplexMatrix& eta);

// --- Serialization --------------------------------------------------------

nlohmann::json shadow_to_json(const Shadow& s);
Shadow shadow_from_json(const nlohmann::json& j);

}  // namespace shadowval
