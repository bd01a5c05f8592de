#include "shadowval/dequant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shadowval {

namespace {

// Walker alias table over nonnegative weights.
void build_alias(const std::vector<double>& w, std::vector<std::uint32_t>& alias,
                 std::vector<double>& prob) {
  const std::size_t n = w.size();
  double total = 0.0;
  for (double x : w) total += x;
  alias.assign(n, 0);
  prob.assign(n, 0.0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = w[i] * n / total;
  std::vector<std::uint32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  while (!small.empty() && !large.empty()) {
    std::uint32_t s = small.back(), l = large.back();
    small.pop_back();
    prob[s] = scaled[s];
    alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  while (!large.empty()) {
    prob[large.back()] = 1.0;
    large.pop_back();
  }
  while (!small.empty()) {
    prob[small.back()] = 1.0;
    small.pop_back();
  }
}

std::size_t sample_alias(const std::vector<std::uint32_t>& alias, const std::vector<double>& prob,
                         RngStream& rng) {
  std::size_t i = static_cast<std::size_t>(rng.below(prob.size()));
  return (rng.uniform() < prob[i]) ? i : alias[i];
}

int mom_blocks(double delta) {
  int k = static_cast<int>(std::ceil(estimator_policy().blocks_factor * std::log(1.0 / delta)));
  if (k % 2 == 0) ++k;
  return std::max(k, 3);
}

}  // namespace

EstimatorPolicy& estimator_policy() {
  static EstimatorPolicy p;
  return p;
}

SqVector SqVector::build(std::vector<cplx> v, double phi_profile) {
  require(!v.empty(), ErrorKind::invalid_input, "build_sq: empty vector");
  require(phi_profile >= 1.0, ErrorKind::invalid_input, "phi must be >= 1");
  SqVector out;
  out.data_ = std::move(v);
  const std::size_t n = out.data_.size();
  double norm2 = 0.0;
  for (const auto& c : out.data_) norm2 += std::norm(c);
  require(norm2 > 0.0, ErrorKind::invalid_input, "build_sq: zero vector");
  out.norm2_ = norm2;
  // majorizer: |v|^2 plus a uniform lift carrying the extra (phi-1) mass
  std::vector<double> w(n);
  double lift = (phi_profile - 1.0) * norm2 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::norm(out.data_[i]) + lift;
  out.tilde_norm2_ = phi_profile * norm2;
  out.phi_ = phi_profile;
  out.cum_.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += w[i];
    out.cum_[i] = acc;
  }
  if (n > 64) build_alias(w, out.alias_, out.alias_prob_);
  return out;
}

std::size_t SqVector::sample_tilde(RngStream& rng) const {
  if (!alias_prob_.empty()) return sample_alias(alias_, alias_prob_, rng);
  double x = rng.uniform() * cum_.back();
  std::size_t lo = 0, hi = cum_.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cum_[mid] <= x)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

std::size_t SqVector::sample(RngStream& rng) const {
  if (phi_ <= 1.0) return sample_tilde(rng);
  const double lift = (phi_ - 1.0) * norm2_ / static_cast<double>(data_.size());
  for (;;) {  // rejection down to the exact law, expected phi draws
    std::size_t i = sample_tilde(rng);
    double exact = std::norm(data_[i]);
    if (rng.uniform() * (exact + lift) < exact) return i;
  }
}

SqMatrix SqMatrix::dense(ComplexMatrix m, double phi_profile) {
  require(m.is_square() && m.rows() >= 1, ErrorKind::invalid_input,
          "build_sq: matrix must be square and nonempty");
  require(m.rows() <= 4096, ErrorKind::invalid_input,
          "build_sq: dense access capped at dimension 4096");
  SqMatrix out;
  out.n_ = m.rows();
  out.dense_ = std::move(m);
  out.row_norm2_.resize(out.n_);
  out.rows_.reserve(out.n_);
  double frob2 = 0.0;
  out.rows_.resize(out.n_);
  for (std::size_t i = 0; i < out.n_; ++i) {
    std::vector<cplx> row(out.n_);
    double rn = 0.0;
    for (std::size_t j = 0; j < out.n_; ++j) {
      row[j] = out.dense_(i, j);
      rn += std::norm(row[j]);
    }
    if (rn > 0.0) out.rows_[i] = SqVector::build(std::move(row), phi_profile);
    out.row_norm2_[i] = rn;
    frob2 += rn;
  }
  require(frob2 > 0.0, ErrorKind::invalid_input, "build_sq: zero matrix");
  out.frob2_ = frob2;
  out.phi_ = phi_profile;
  std::vector<cplx> rnv(out.n_);
  for (std::size_t i = 0; i < out.n_; ++i) rnv[i] = std::sqrt(out.row_norm2_[i]);
  out.row_index_ = SqVector::build(std::move(rnv), 1.0);
  return out;
}

SqMatrix SqMatrix::factorized(std::vector<double> lambdas, ComplexMatrix vectors) {
  const std::size_t n = vectors.rows();
  const std::size_t r = vectors.cols();
  require(r >= 1 && lambdas.size() == r, ErrorKind::invalid_input,
          "factorized access: rank/label mismatch");
  require(n <= (std::size_t{1} << 20), ErrorKind::invalid_input,
          "factorized access capped at dimension 2^20");
  // orthonormal factors within tolerance
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = a; b < r; ++b) {
      cplx g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += std::conj(vectors(i, a)) * vectors(i, b);
      double expect = (a == b) ? 1.0 : 0.0;
      require(std::abs(g - cplx(expect, 0.0)) < 1e-8,
              ErrorKind::invalid_input, "factorized access: factors must be orthonormal");
    }
  SqMatrix out;
  out.n_ = n;
  out.lambdas_ = std::move(lambdas);
  out.factors_ = std::move(vectors);
  out.row_norm2_.resize(n);
  double frob2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double rn = 0.0;
    for (std::size_t t = 0; t < r; ++t)
      rn += out.lambdas_[t] * out.lambdas_[t] * std::norm(out.factors_(i, t));
    out.row_norm2_[i] = rn;
    frob2 += rn;
  }
  require(frob2 > 0.0, ErrorKind::invalid_input, "factorized access: zero matrix");
  out.frob2_ = frob2;
  out.phi_ = static_cast<double>(r);
  std::vector<cplx> rnv(n);
  for (std::size_t i = 0; i < n; ++i) rnv[i] = std::sqrt(out.row_norm2_[i]);
  out.row_index_ = SqVector::build(std::move(rnv), 1.0);
  out.factor_cols_.reserve(r);
  for (std::size_t t = 0; t < r; ++t) {
    std::vector<cplx> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = out.factors_(i, t);
    out.factor_cols_.push_back(SqVector::build(std::move(col), 1.0));
  }
  return out;
}

cplx SqMatrix::query(std::size_t i, std::size_t j) const {
  if (!is_factorized()) return dense_(i, j);
  cplx s = 0.0;
  for (std::size_t t = 0; t < lambdas_.size(); ++t)
    s += lambdas_[t] * factors_(i, t) * std::conj(factors_(j, t));
  return s;
}

std::size_t SqMatrix::sample_row(RngStream& rng) const { return row_index_.sample(rng); }

std::size_t SqMatrix::sample_in_row(std::size_t i, RngStream& rng) const {
  if (!is_factorized()) return rows_[i].sample(rng);
  // factor-majorized in-row sampling with rejection: the majorizer is
  // r * sum_t |lambda_t w_t(i)|^2 |w_t(j)|^2 >= |A(i,j)|^2 by Cauchy-Schwarz.
  const std::size_t r = lambdas_.size();
  std::vector<double> cw(r);
  double tot = 0.0;
  for (std::size_t t = 0; t < r; ++t) {
    cw[t] = lambdas_[t] * lambdas_[t] * std::norm(factors_(i, t));
    tot += cw[t];
  }
  require(tot > 0.0, ErrorKind::invalid_input, "sample_in_row: zero row");
  for (;;) {
    double x = rng.uniform() * tot;
    std::size_t t = 0;
    for (; t + 1 < r; ++t) {
      if (x < cw[t]) break;
      x -= cw[t];
    }
    std::size_t j = factor_cols_[t].sample(rng);
    double majo = 0.0;
    for (std::size_t tt = 0; tt < r; ++tt) majo += cw[tt] * std::norm(factors_(j, tt));
    majo *= static_cast<double>(r);
    double exact = std::norm(query(i, j));
    if (majo <= 0.0) continue;
    if (rng.uniform() * majo < exact) return j;
  }
}

ComplexMatrix SqMatrix::materialize() const {
  require(n_ <= 4096, ErrorKind::invalid_input, "materialize: dimension above the dense cap");
  if (!is_factorized()) return dense_;
  ComplexMatrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = query(i, j);
  return m;
}

SqVector build_sq(std::vector<cplx> v, double phi_profile) {
  return SqVector::build(std::move(v), phi_profile);
}

SqMatrix build_sq(ComplexMatrix a, double phi_profile) {
  return SqMatrix::dense(std::move(a), phi_profile);
}

SqMatrix build_sq_factorized(std::vector<double> lambdas, ComplexMatrix vectors) {
  return SqMatrix::factorized(std::move(lambdas), std::move(vectors));
}

namespace {

// Median-of-means over complex samples: componentwise medians of block means.
template <typename Draw>
cplx median_of_means(std::uint64_t block, int blocks, Draw&& draw) {
  std::vector<double> re(blocks), im(blocks);
  for (int b = 0; b < blocks; ++b) {
    cplx acc = 0.0;
    for (std::uint64_t s = 0; s < block; ++s) acc += draw();
    acc /= static_cast<double>(block);
    re[b] = acc.real();
    im[b] = acc.imag();
  }
  std::sort(re.begin(), re.end());
  std::sort(im.begin(), im.end());
  return {re[blocks / 2], im[blocks / 2]};
}

std::uint64_t block_size(double variance, double eps) {
  double b = estimator_policy().block_factor * variance / (eps * eps);
  std::uint64_t bs = static_cast<std::uint64_t>(std::ceil(std::max(1.0, b)));
  return bs;
}

}  // namespace

cplx estimate_inner(const SqVector& u, const std::function<cplx(std::size_t)>& v,
                    double v_norm2_bound, double eps, double delta, RngStream& rng) {
  require(eps > 0 && delta > 0 && delta < 1, ErrorKind::invalid_input, "bad estimator parameters");
  const double variance = u.norm2() * v_norm2_bound;
  const std::uint64_t block = block_size(variance, eps);
  const int blocks = mom_blocks(delta);
  require(block * static_cast<std::uint64_t>(blocks) <= estimator_policy().max_samples,
          ErrorKind::budget_exceeded, "estimate_inner: sample budget exceeded");
  return median_of_means(block, blocks, [&]() -> cplx {
    std::size_t i = u.sample(rng);
    return u.norm2() * v(i) / u.query(i);
  });
}

cplx estimate_bilinear(const SqMatrix& a, const std::function<cplx(std::size_t)>& x,
                       double x_norm2_bound, const std::function<cplx(std::size_t)>& y,
                       double y_norm2_bound, double eps, double delta, RngStream& rng) {
  require(eps > 0 && delta > 0 && delta < 1, ErrorKind::invalid_input, "bad estimator parameters");
  const double variance = a.frob2() * x_norm2_bound * y_norm2_bound;
  const std::uint64_t block = block_size(variance, eps);
  const int blocks = mom_blocks(delta);
  require(block * static_cast<std::uint64_t>(blocks) <= estimator_policy().max_samples,
          ErrorKind::budget_exceeded, "estimate_bilinear: sample budget exceeded");
  return median_of_means(block, blocks, [&]() -> cplx {
    std::size_t i = a.sample_row(rng);
    std::size_t j = a.sample_in_row(i, rng);
    return a.frob2() * std::conj(x(i)) * y(j) / std::conj(a.query(i, j));
  });
}

SketchPair sketch_product(const SqMatrix& x, const SqMatrix& y, double eps, double delta,
                          RngStream& rng) {
  require(x.size() == y.size(), ErrorKind::invalid_input, "sketch_product: row spaces differ");
  require(eps > 0 && delta > 0 && delta < 1, ErrorKind::invalid_input, "bad sketch parameters");
  const std::size_t s = static_cast<std::size_t>(
      std::ceil(6.0 * std::log(1.0 / delta) / (eps * eps)));
  SketchPair out;
  out.rows.resize(s);
  out.xp = ComplexMatrix(s, x.size());
  out.yp = ComplexMatrix(s, y.size());
  for (std::size_t k = 0; k < s; ++k) {
    std::size_t i = x.sample_row(rng);
    out.rows[k] = i;
    double p = x.row_norm2(i) / x.frob2();
    double scale = 1.0 / std::sqrt(static_cast<double>(s) * p);
    for (std::size_t j = 0; j < x.size(); ++j) {
      out.xp(k, j) = scale * x.query(i, j);
      out.yp(k, j) = scale * y.query(i, j);
    }
  }
  return out;
}

FkvSketch fkv_sketch(const SqMatrix& o, int r, double eps, double delta, RngStream& rng,
                     std::size_t p_budget) {
  require(r >= 0, ErrorKind::invalid_input, "fkv_sketch: negative rank");
  const std::size_t p = p_budget ? p_budget : budgets().fkv_rows;
  FkvSketch sk;
  sk.n = o.size();
  if (r == 0) return sk;  // degenerate: empty projector

  // 1. Row-sample and rescale: S(k,.) = F / (sqrt(p) ||row|| ) * O(i_k,.),
  //    so every row of S has norm F/sqrt(p) and E[S^dag S] = O^dag O.
  const double f = std::sqrt(o.frob2());
  sk.row_indices.resize(p);
  sk.row_scales.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t i = o.sample_row(rng);
    sk.row_indices[k] = i;
    sk.row_scales[k] = f / (std::sqrt(static_cast<double>(p) * o.row_norm2(i)));
  }
  // 2. Column-sample from S: pick a uniform row (all rows of S have equal
  //    norm), then sample within it; rescale by F / (sqrt(p) ||S(.,j)||).
  std::vector<std::size_t> cols(p);
  sk.w = ComplexMatrix(p, p);
  for (std::size_t l = 0; l < p; ++l) {
    std::size_t k = static_cast<std::size_t>(rng.below(p));
    std::size_t j = o.sample_in_row(sk.row_indices[k], rng);
    cols[l] = j;
    double colnorm2 = 0.0;
    for (std::size_t kk = 0; kk < p; ++kk)
      colnorm2 += std::norm(sk.row_scales[kk] * o.query(sk.row_indices[kk], j));
    double scale = (colnorm2 > 0) ? f / std::sqrt(static_cast<double>(p) * colnorm2) : 0.0;
    for (std::size_t kk = 0; kk < p; ++kk)
      sk.w(kk, l) = scale * sk.row_scales[kk] * o.query(sk.row_indices[kk], j);
  }
  sk.w_frob2 = 0.0;
  for (const auto& c : sk.w.data()) sk.w_frob2 += std::norm(c);

  // 3. Top singular vectors of W.
  Svd sv = svd(sk.w);
  int keep = std::min<std::size_t>(r, sv.values.size());
  sk.u = ComplexMatrix(p, keep);
  sk.sigma.resize(keep);
  for (int t = 0; t < keep; ++t) {
    sk.sigma[t] = sv.values[t];
    for (std::size_t k = 0; k < p; ++k) sk.u(k, t) = sv.u(k, t);
  }
  // 4. Cutoff gamma = phi * delta / (8 r): keep ||W^dag u_t||^2 = sigma_t^2
  //    >= gamma ||W||_F^2, ties included.
  double gamma = o.phi() * delta / (8.0 * static_cast<double>(r));
  sk.cutoff = gamma * sk.w_frob2;
  for (int t = 0; t < keep; ++t)
    if (sk.sigma[t] * sk.sigma[t] >= sk.cutoff) sk.surviving.push_back(t);
  (void)eps;
  return sk;
}

std::vector<cplx> FkvSketch::v_vector(const SqMatrix& o, int t) const {
  // Direction S^dag u_t; normalized by its true norm rather than the
  // W-estimated sigma_t, which measurably tightens the implied projector.
  std::vector<cplx> v(n, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < row_indices.size(); ++k) {
    cplx coef = std::conj(cplx(row_scales[k], 0.0)) * u(k, t);
    if (coef == cplx(0.0, 0.0)) continue;
    std::size_t i = row_indices[k];
    for (std::size_t j = 0; j < n; ++j) v[j] += std::conj(o.query(i, j)) * coef;
  }
  double n2 = 0.0;
  for (const auto& c : v) n2 += std::norm(c);
  double inv = (n2 > 0.0) ? 1.0 / std::sqrt(n2) : 0.0;
  for (auto& c : v) c *= inv;
  return v;
}

double fkv_error(const SqMatrix& o, const FkvSketch& sketch) {
  const std::size_t n = o.size();
  const std::size_t k = sketch.surviving.size();
  ComplexMatrix om = o.materialize();
  double frob2 = o.frob2();
  if (k == 0) return frob2;
  ComplexMatrix v(n, k);
  for (std::size_t t = 0; t < k; ++t) {
    auto vt = sketch.v_vector(o, sketch.surviving[t]);
    for (std::size_t i = 0; i < n; ++i) v(i, t) = vt[i];
  }
  ComplexMatrix ov = matmul(om, v);           // n x k
  ComplexMatrix c = matmul(v.adjoint(), ov);  // k x k, V' O V
  ComplexMatrix g = matmul(v.adjoint(), v);   // k x k Gram
  // ||O - V C V'||_F^2 = ||O||^2 - 2 Re Tr(C (V' O V)) + Tr(G C G C')
  // with the middle term Tr(O V C V') = Tr(C * V' O V) = Tr(C^2) here.
  cplx mid = matmul(c, c).trace();
  cplx last = matmul(matmul(g, c), matmul(g, c.adjoint())).trace();
  return frob2 - 2.0 * mid.real() + last.real();
}

long rank_cutoff_bound(double frob2, double eta_prime, double l) {
  require(l > 0 && l <= 1.0, ErrorKind::invalid_input, "cutoff level must be in (0,1]");
  require(eta_prime >= 0, ErrorKind::invalid_input, "eta' must be nonnegative");
  double raw = (frob2 - eta_prime) / (l * l);
  if (raw <= 0) return 0;
  return static_cast<long>(std::ceil(raw - 1e-12));
}

EffectiveBasis effective_basis(const std::vector<FkvSketch>& sketches,
                               const std::vector<const SqMatrix*>& sources, double tol,
                               double inner_eps, double delta, RngStream& rng, bool exact_inner) {
  require(sketches.size() == sources.size(), ErrorKind::invalid_input,
          "sketch/source count mismatch");
  EffectiveBasis basis;
  for (std::size_t j = 0; j < sketches.size(); ++j)
    for (std::size_t t = 0; t < sketches[j].surviving.size(); ++t)
      basis.pool.emplace_back(static_cast<int>(j), sketches[j].surviving[t]);
  const std::size_t pool = basis.pool.size();
  require(pool > 0, ErrorKind::invalid_input, "effective_basis: empty sketch pool");

  // Pool vectors are materialized two at a time; pairwise inner products are
  // estimated (or computed exactly at desk scale).
  std::vector<std::vector<cplx>> vecs(pool);
  for (std::size_t a = 0; a < pool; ++a) {
    auto [j, t] = basis.pool[a];
    vecs[a] = sketches[j].v_vector(*sources[j], t);
  }
  basis.pool_gram = ComplexMatrix(pool, pool);
  const double dpair = delta / static_cast<double>(pool * pool);
  for (std::size_t a = 0; a < pool; ++a)
    for (std::size_t b = a; b < pool; ++b) {
      cplx g;
      if (exact_inner) {
        g = 0.0;
        for (std::size_t i = 0; i < vecs[a].size(); ++i) g += std::conj(vecs[a][i]) * vecs[b][i];
      } else {
        SqVector ua = SqVector::build(vecs[a], 1.0);
        double nb = 0.0;
        for (const auto& c : vecs[b]) nb += std::norm(c);
        g = estimate_inner(ua, [&](std::size_t i) { return vecs[b][i]; }, nb, inner_eps, dpair,
                           rng);
        if (a == b) g = cplx(std::max(g.real(), 1e-12), 0.0);
      }
      basis.pool_gram(a, b) = g;
      basis.pool_gram(b, a) = std::conj(g);
    }

  // Gram-Schmidt in coefficient space: candidate a carries coefficients over
  // the pool; inner products go through the estimated Gram matrix.
  std::vector<std::vector<cplx>> kept;  // coefficient columns
  auto gram_dot = [&](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < pool; ++i) {
      if (x[i] == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < pool; ++j)
        s += std::conj(x[i]) * basis.pool_gram(i, j) * y[j];
    }
    return s;
  };
  for (std::size_t a = 0; a < pool; ++a) {
    std::vector<cplx> c(pool, cplx(0.0, 0.0));
    c[a] = 1.0;
    for (const auto& k : kept) {
      cplx ov = gram_dot(k, c);
      for (std::size_t i = 0; i < pool; ++i) c[i] -= ov * k[i];
    }
    double res2 = gram_dot(c, c).real();
    if (res2 < tol * tol) continue;  // near-duplicate dropped
    double inv = 1.0 / std::sqrt(res2);
    for (auto& x : c) x *= inv;
    kept.push_back(std::move(c));
  }
  require(!kept.empty(), ErrorKind::invalid_input, "effective_basis: every vector was dropped");
  basis.coeffs = ComplexMatrix(pool, kept.size());
  for (std::size_t b = 0; b < kept.size(); ++b)
    for (std::size_t i = 0; i < pool; ++i) basis.coeffs(i, b) = kept[b][i];
  return basis;
}

CompressedInstance compress_observables(const std::vector<FkvSketch>& sketches,
                                        const std::vector<const SqMatrix*>& sources,
                                        const EffectiveBasis& basis,
                                        const std::vector<double>& targets, double alpha,
                                        double beta, double entry_eps, double delta,
                                        RngStream& rng, bool exact_entries) {
  const std::size_t pool = basis.pool.size();
  const std::size_t nb = basis.size();
  CompressedInstance out;
  out.targets = targets;
  out.alpha = alpha;
  out.beta = beta;

  // Pool vectors once more (desk scale).
  std::vector<std::vector<cplx>> vecs(pool);
  std::vector<double> vnorm2(pool);
  for (std::size_t a = 0; a < pool; ++a) {
    auto [j, t] = basis.pool[a];
    vecs[a] = sketches[j].v_vector(*sources[j], t);
    double n2 = 0.0;
    for (const auto& c : vecs[a]) n2 += std::norm(c);
    vnorm2[a] = n2;
  }

  for (std::size_t l = 0; l < sources.size(); ++l) {
    // Core block: v_s^dag O_l v_t over the surviving directions of sketch l.
    std::vector<std::size_t> own;
    for (std::size_t a = 0; a < pool; ++a)
      if (basis.pool[a].first == static_cast<int>(l)) own.push_back(a);
    const std::size_t kl = own.size();
    ComplexMatrix core(kl, kl);
    const double dpair = delta / std::max<std::size_t>(1, sources.size() * kl * kl);
    for (std::size_t s = 0; s < kl; ++s)
      for (std::size_t t = 0; t < kl; ++t) {
        cplx val;
        if (exact_entries) {
          auto ov = matvec(sources[l]->materialize(), vecs[own[t]]);
          val = 0.0;
          for (std::size_t i = 0; i < ov.size(); ++i) val += std::conj(vecs[own[s]][i]) * ov[i];
        } else {
          val = estimate_bilinear(
              *sources[l], [&](std::size_t i) { return vecs[own[s]][i]; }, vnorm2[own[s]],
              [&](std::size_t i) { return vecs[own[t]][i]; }, vnorm2[own[t]], entry_eps, dpair,
              rng);
        }
        core(s, t) = val;
      }
    // Pi_l b_alpha coefficients: <v_{l,s}, b_alpha> via the pool Gram.
    ComplexMatrix proj(kl, nb);
    for (std::size_t s = 0; s < kl; ++s)
      for (std::size_t b = 0; b < nb; ++b) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < pool; ++i)
          acc += basis.pool_gram(own[s], i) * basis.coeffs(i, b);
        proj(s, b) = acc;
      }
    ComplexMatrix compressed = matmul(matmul(proj.adjoint(), core), proj);
    // Hermitian symmetrization
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = a; b < nb; ++b) {
        cplx v = 0.5 * (compressed(a, b) + std::conj(compressed(b, a)));
        compressed(a, b) = v;
        compressed(b, a) = std::conj(v);
      }
    out.obs.push_back(std::move(compressed));
  }
  return out;
}

DequantResult dequantized_decide(const std::vector<const SqMatrix*>& obs,
                                 const std::vector<double>& frob2_bounds,
                                 const std::vector<double>& targets, double alpha, double beta,
                                 const DequantOptions& opts) {
  require(!obs.empty() && obs.size() == targets.size() && obs.size() == frob2_bounds.size(),
          ErrorKind::invalid_input, "dequantized_decide: input arity mismatch");
  require(0.0 <= alpha && alpha < beta && beta <= 2.0, ErrorKind::invalid_input,
          "thresholds must satisfy 0 <= alpha < beta <= 2");
  DequantResult res;
  const double gap = beta - alpha;
  const double total_budget = gap / 4.0;
  // Stage split of the error budget: cutoff, FKV, inner products, SDP.
  const double eta_share = total_budget / 8.0;
  const double fkv_share = total_budget / 8.0;
  const double inner_share = total_budget / 2.0;
  const double sdp_share = total_budget / 4.0;
  res.report["budget"] = {{"cutoff", eta_share},
                          {"fkv", fkv_share},
                          {"inner", inner_share},
                          {"sdp", sdp_share}};
  const double delta = 0.01;

  RngStream rng(opts.seed, stream_label("dequant"), 0);
  std::vector<FkvSketch> sketches;
  nlohmann::json tsizes = nlohmann::json::array();
  bool all_empty = true;
  for (std::size_t j = 0; j < obs.size(); ++j) {
    long r = rank_cutoff_bound(frob2_bounds[j], eta_share, opts.cutoff_level);
    std::size_t p = opts.p_budget ? opts.p_budget : budgets().fkv_rows;
    r = std::min<long>(r, static_cast<long>(p));
    FkvSketch sk = fkv_sketch(*obs[j], static_cast<int>(r),
                              fkv_share / std::max(frob2_bounds[j], 1.0), delta, rng, p);
    tsizes.push_back(sk.surviving.size());
    all_empty = all_empty && sk.surviving.empty();
    sketches.push_back(std::move(sk));
  }
  res.report["T_sizes"] = tsizes;

  if (all_empty) {
    // Degenerate: the projector is zero and only rho = 0 is representable.
    double chi = 0.0;
    for (double y : targets) chi = std::max(chi, std::abs(y));
    res.decision.chi_star = chi;
    res.decision.verdict = (chi <= alpha + gap / 2.0) ? "YES" : "NO";
    res.report["B_size"] = 0;
    res.report["chi_star"] = chi;
    res.report["verdict"] = res.decision.verdict;
    return res;
  }
  // Drop empty sketches from the pipeline but keep their observables: an
  // empty T contributes the zero compression.
  std::vector<FkvSketch> live_sk;
  std::vector<const SqMatrix*> live_src;
  std::vector<std::size_t> live_idx;
  for (std::size_t j = 0; j < sketches.size(); ++j) {
    if (!sketches[j].surviving.empty()) {
      live_sk.push_back(sketches[j]);
      live_src.push_back(obs[j]);
      live_idx.push_back(j);
    }
  }

  const double gram_tol = 0.05;
  const double gram_eps = std::min(0.02, inner_share);
  EffectiveBasis basis =
      effective_basis(live_sk, live_src, gram_tol, gram_eps, delta, rng, opts.exact_estimates);
  res.report["B_size"] = basis.size();

  std::vector<double> live_targets;
  for (std::size_t j : live_idx) live_targets.push_back(targets[j]);
  const double entry_eps = std::min(0.05, 2.0 * inner_share);
  res.report["entry_eps"] = entry_eps;
  CompressedInstance comp = compress_observables(live_sk, live_src, basis, live_targets, alpha,
                                                 beta, entry_eps, delta, rng,
                                                 opts.exact_estimates);
  // observables with empty sketches compress to zero blocks
  std::vector<ComplexMatrix> all_obs;
  std::vector<double> all_targets;
  std::size_t live_pos = 0;
  for (std::size_t j = 0; j < obs.size(); ++j) {
    if (!sketches[j].surviving.empty()) {
      all_obs.push_back(comp.obs[live_pos++]);
    } else {
      all_obs.push_back(ComplexMatrix(basis.size(), basis.size()));
    }
    all_targets.push_back(targets[j]);
  }

  ObsConInstance inst;
  inst.n = static_cast<int>(basis.size());
  inst.d = 1;
  inst.dim = basis.size();
  for (auto& o : all_obs) {
    // compression can push the norm marginally above 1; rescale defensively
    HermEig e = herm_eig(o);
    double top = 0.0;
    for (double v : e.values) top = std::max(top, std::abs(v));
    if (top > 1.0) o *= cplx(1.0 / top, 0.0);
    inst.observables.push_back(std::move(o));
  }
  inst.targets = all_targets;
  inst.alpha = alpha;
  inst.beta = beta;

  SolveOptions sopts;
  sopts.trace_le_one = true;  // Tr rho <= 1 exactly as the compressed program
  sopts.threads = opts.threads;
  sopts.throw_on_nonconvergence = false;
  SolveResult sr = min_max_violation(inst, sdp_share, sopts);
  res.decision.chi_star = sr.chi_star;
  res.decision.iterations = sr.iterations;
  res.decision.residual = sr.residual();
  res.decision.verdict = (sr.chi_star <= alpha + gap / 2.0) ? "YES" : "NO";
  res.report["chi_star"] = sr.chi_star;
  res.report["chi_lower"] = sr.lower_bound;
  res.report["verdict"] = res.decision.verdict;
  return res;
}

}  // namespace shadowval
