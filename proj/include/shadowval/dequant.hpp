#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "shadowval/decider.hpp"
#include "shadowval/matkernel.hpp"
#include "shadowval/rng.hpp"

namespace shadowval {

// Sampling-and-query access to a vector: queries, a cumulative-weight index
// over the (possibly oversampled) squared magnitudes, and the stored norms.
// Draws from the exact |v(i)|^2 / ||v||^2 law via rejection when phi > 1.
class SqVector {
 public:
  static SqVector build(std::vector<cplx> v, double phi_profile = 1.0);

  std::size_t size() const { return data_.size(); }
  cplx query(std::size_t i) const { return data_[i]; }
  double norm2() const { return norm2_; }
  double phi() const { return phi_; }
  std::size_t sample(RngStream& rng) const;  // exact distribution
  const std::vector<cplx>& data() const { return data_; }

 private:
  std::vector<cplx> data_;
  std::vector<double> cum_;                 // cumulative majorizer weights
  std::vector<std::uint32_t> alias_;        // alias table over the majorizer
  std::vector<double> alias_prob_;
  double norm2_ = 0.0, tilde_norm2_ = 0.0, phi_ = 1.0;
  std::size_t sample_tilde(RngStream& rng) const;
};

// Sampling-and-query access to a square matrix: SQ access to each row plus
// SQ access to the vector of row norms. Explicit (dense) or factorized
// O = sum_t lambda_t w_t w_t^dag with orthonormal factors; the factorized
// in-row law is oversampled with phi = rank and rejected down to exact.
class SqMatrix {
 public:
  static SqMatrix dense(ComplexMatrix m, double phi_profile = 1.0);
  static SqMatrix factorized(std::vector<double> lambdas, ComplexMatrix vectors);

  std::size_t size() const { return n_; }
  double frob2() const { return frob2_; }
  double phi() const { return phi_; }
  bool is_factorized() const { return !lambdas_.empty(); }

  cplx query(std::size_t i, std::size_t j) const;
  double row_norm2(std::size_t i) const { return row_norm2_[i]; }
  std::size_t sample_row(RngStream& rng) const;                   // ~ row norms^2
  std::size_t sample_in_row(std::size_t i, RngStream& rng) const;  // exact in-row law
  ComplexMatrix materialize() const;  // dense copy (guarded)

 private:
  std::size_t n_ = 0;
  double frob2_ = 0.0, phi_ = 1.0;
  std::vector<double> row_norm2_;
  SqVector row_index_;  // SQ over the row-norm vector
  // dense storage
  ComplexMatrix dense_;
  std::vector<SqVector> rows_;
  // factorized storage
  std::vector<double> lambdas_;
  ComplexMatrix factors_;  // N x r, orthonormal columns
  std::vector<SqVector> factor_cols_;
};

// [OP] build_sq entry points.
SqVector build_sq(std::vector<cplx> v, double phi_profile = 1.0);
SqMatrix build_sq(ComplexMatrix a, double phi_profile = 1.0);
SqMatrix build_sq_factorized(std::vector<double> lambdas, ComplexMatrix vectors);

// Estimator sample-count policy: blocks of ceil(block_factor * V / eps^2)
// samples, median over an odd number of blocks ~ ln(1/delta).
struct EstimatorPolicy {
  double block_factor = 10.0;
  double blocks_factor = 2.4;  // K = 2*ceil(blocks_factor*ln(1/delta)/2)+1
  std::uint64_t max_samples = 2'000'000'000;
};
EstimatorPolicy& estimator_policy();

// <u, v> with |result - <u,v>| <= eps w.p. >= 1 - delta; v is query-only with
// a declared squared-norm bound.
cplx estimate_inner(const SqVector& u, const std::function<cplx(std::size_t)>& v,
                    double v_norm2_bound, double eps, double delta, RngStream& rng);

// x^dag A y to additive error eps w.p. >= 1 - delta.
cplx estimate_bilinear(const SqMatrix& a, const std::function<cplx(std::size_t)>& x,
                       double x_norm2_bound, const std::function<cplx(std::size_t)>& y,
                       double y_norm2_bound, double eps, double delta, RngStream& rng);

// Normalized row submatrices X', Y' with ||X'^dag Y' - X^dag Y||_F <=
// eps ||X||_F ||Y||_F w.p. >= 1 - delta (rows importance-sampled from X).
struct SketchPair {
  ComplexMatrix xp;  // s x n
  ComplexMatrix yp;  // s x p
  std::vector<std::size_t> rows;
};
SketchPair sketch_product(const SqMatrix& x, const SqMatrix& y, double eps, double delta,
                          RngStream& rng);

// FKV row/column sketch of a Hermitian observable.
struct FkvSketch {
  std::vector<std::size_t> row_indices;  // p sampled rows of O
  std::vector<double> row_scales;        // S(k,.) = scale_k * O(i_k,.)
  ComplexMatrix w;                       // p x p column-sampled sketch
  ComplexMatrix u;                       // top singular vectors of W (columns)
  std::vector<double> sigma;             // matching singular values
  std::vector<int> surviving;            // T: indices into u/sigma past the cutoff
  double w_frob2 = 0.0;
  double cutoff = 0.0;                   // gamma * ||W||_F^2
  std::size_t n = 0;                     // ambient dimension

  // v_t = S^dag u_t / sigma_t, materialized against the source matrix.
  std::vector<cplx> v_vector(const SqMatrix& o, int t) const;
};

FkvSketch fkv_sketch(const SqMatrix& o, int r, double eps, double delta, RngStream& rng,
                     std::size_t p_budget = 0);

// || O - Pi O Pi ||_F^2 for Pi = sum_{t in T} v_t v_t^dag (exact, desk scale).
double fkv_error(const SqMatrix& o, const FkvSketch& sketch);

// ceil((F2 - eta') / l^2), clamped to >= 0.
long rank_cutoff_bound(double frob2, double eta_prime, double l);

// Orthonormalized span of all surviving sketch vectors, kept in coefficient
// form over the pool with the estimated pool Gram matrix.
struct EffectiveBasis {
  std::vector<std::pair<int, int>> pool;  // (sketch index, t)
  ComplexMatrix pool_gram;                // estimated pairwise inner products
  ComplexMatrix coeffs;                   // pool_size x basis_size
  std::size_t size() const { return coeffs.cols(); }
};

EffectiveBasis effective_basis(const std::vector<FkvSketch>& sketches,
                               const std::vector<const SqMatrix*>& sources, double tol,
                               double inner_eps, double delta, RngStream& rng,
                               bool exact_inner = false);

struct CompressedInstance {
  std::vector<ComplexMatrix> obs;  // |B| x |B| Hermitian
  std::vector<double> targets;
  double alpha = 0.0;
  double beta = 0.0;
};

CompressedInstance compress_observables(const std::vector<FkvSketch>& sketches,
                                        const std::vector<const SqMatrix*>& sources,
                                        const EffectiveBasis& basis,
                                        const std::vector<double>& targets, double alpha,
                                        double beta, double entry_eps, double delta,
                                        RngStream& rng, bool exact_entries = false);

struct DequantOptions {
  std::size_t p_budget = 0;       // 0: use budgets().fkv_rows
  double cutoff_level = 0.5;      // the singular-value floor l
  bool exact_estimates = false;   // skip sampling, use exact small contractions
  int threads = 1;
  std::uint64_t seed = 1;
};

struct DequantResult {
  Decision decision;
  nlohmann::json report;
};

// Full pipeline: rank cutoffs -> FKV sketches -> Gram-Schmidt basis ->
// compressed observables -> SDP over {rho >= 0, Tr rho <= 1} on the basis.
DequantResult dequantized_decide(const std::vector<const SqMatrix*>& obs,
                                 const std::vector<double>& frob2_bounds,
                                 const std::vector<double>& targets, double alpha, double beta,
                                 const DequantOptions& opts = {});

}  // namespace shadowval
