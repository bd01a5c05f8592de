#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shadowval/shadows.hpp"

namespace shadowval {

// Observable-consistency instance: does some state reproduce every target
// within alpha (YES) or is every state beta-far on some observable (NO)?
struct ObsConInstance {
  int n = 0;          // number of sites
  int d = 2;          // local dimension
  std::size_t dim = 0;  // Hilbert space dimension d^n
  std::vector<ObsHandle> observables;
  std::vector<double> targets;
  double alpha = 0.0;
  double beta = 0.0;

  std::size_t size() const { return observables.size(); }
  void validate(double min_gap = 1e-9) const;
  // Dense expansions, cached on first use.
  const std::vector<ComplexMatrix>& expanded() const;

 private:
  mutable std::vector<ComplexMatrix> cache_;
};

struct Decision {
  std::string verdict;  // "YES" or "NO"
  double chi_star = 0.0;
  long iterations = 0;
  double residual = 0.0;  // certified optimality gap chi_upper - chi_lower
  std::optional<DensityMatrix> witness;
};

struct SolveOptions {
  long max_iters = 100000;
  int threads = 1;
  bool throw_on_nonconvergence = true;
  bool trace_le_one = false;  // optimize over Tr(rho) <= 1 instead of == 1
};

struct SolveResult {
  double chi_star = 0.0;      // best certified upper value f(rho_best)
  double lower_bound = 0.0;   // dual certificate
  ComplexMatrix witness;      // rho_best in the full input space
  long iterations = 0;
  long restarts = 0;
  bool converged = false;
  double residual() const { return chi_star - lower_bound; }
};

// Minimize max_i |Tr(O_i rho) - y_i| over density matrices by matrix
// exponentiated gradient with Polyak-style steps and a dual lower-bound
// certificate; converged means the certified gap is <= tol.
SolveResult min_max_violation(const ObsConInstance& inst, double tol,
                              const SolveOptions& opts = {});

// Accept iff chi* <= alpha + (beta-alpha)/2, resolved at tolerance
// (beta-alpha)/8; the midpoint rule applies verbatim even off promise.
Decision decide(const ObsConInstance& inst, const SolveOptions& opts = {});

// Grid oracle for single-qubit instances: spherical Fibonacci directions,
// exact radial minimization along each ray, the maximally mixed center, and
// a local refinement sweep around the best direction.
double brute_force_1q(const ObsConInstance& inst, std::size_t grid, int refine_rounds = 2,
                      int threads = 1);

// y_i := A(S, i) via median-of-means recovery.
ObsConInstance instance_from_shadow(const Shadow& s, std::vector<ObsHandle> obs, int K,
                                    int chi_bits, double alpha, double beta, int threads = 1);

nlohmann::json instance_to_json(const ObsConInstance& inst);
ObsConInstance instance_from_json(const nlohmann::json& j);
nlohmann::json decision_to_json(const Decision& d);

}  // namespace shadowval
