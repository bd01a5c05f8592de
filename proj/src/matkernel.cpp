#include "shadowval/matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

namespace shadowval {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) m(c, r) = std::conj((*this)(r, c));
  return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) m(c, r) = (*this)(r, c);
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::invalid_input, "shape mismatch in +=");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::invalid_input, "shape mismatch in -=");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& x : a_) x *= s;
  return *this;
}

cplx ComplexMatrix::trace() const {
  require(is_square(), ErrorKind::invalid_input, "trace of non-square matrix");
  cplx t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& x : a_) s += std::norm(x);
  return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& x : a_) m = std::max(m, std::abs(x));
  return m;
}

bool ComplexMatrix::is_hermitian(double tol) const {
  if (!is_square()) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r; c < cols_; ++c)
      if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
  return true;
}

ComplexMatrix matmul_serial(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), ErrorKind::invalid_input, "shape mismatch in matmul");
  ComplexMatrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    cplx* crow = &c(i, 0);
    for (std::size_t l = 0; l < k; ++l) {
      const cplx ail = a(i, l);
      if (ail == cplx(0.0, 0.0)) continue;
      const cplx* brow = &b(l, 0);
      for (std::size_t j = 0; j < m; ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b, int threads) {
  require(a.cols() == b.rows(), ErrorKind::invalid_input, "shape mismatch in matmul");
  if (threads <= 1) return matmul_serial(a, b);
  ComplexMatrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    cplx* crow = &c(i, 0);
    for (std::size_t l = 0; l < k; ++l) {
      const cplx ail = a(i, l);
      if (ail == cplx(0.0, 0.0)) continue;
      const cplx* brow = &b(l, 0);
      for (std::size_t j = 0; j < m; ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac) {
      const cplx v = a(ar, ac);
      if (v == cplx(0.0, 0.0)) continue;
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          c(ar * b.rows() + br, ac * b.cols() + bc) = v * b(br, bc);
    }
  return c;
}

std::vector<cplx> matvec(const ComplexMatrix& a, const std::vector<cplx>& v) {
  require(a.cols() == v.size(), ErrorKind::invalid_input, "shape mismatch in matvec");
  std::vector<cplx> out(a.rows(), cplx(0.0, 0.0));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    cplx s = 0.0;
    const cplx* row = &a(r, 0);
    for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * v[c];
    out[r] = s;
  }
  return out;
}

namespace {

void check_hermitian_input(const ComplexMatrix& m, double herm_tol) {
  double tol = herm_tol < 0 ? tolerances().hermitian : herm_tol;
  // scale-aware: tolerance relative to the matrix magnitude, floored at tol
  double scale = std::max(1.0, m.max_abs());
  require(m.is_hermitian(tol * scale * 100 + tol), ErrorKind::invalid_input,
          "herm_eig: input is not Hermitian within tolerance");
}

void sort_descending(HermEig& e) {
  const std::size_t n = e.values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return e.values[a] > e.values[b]; });
  HermEig out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = e.values[idx[j]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = e.vectors(i, idx[j]);
  }
  e = std::move(out);
}

// Implicit-shift QL on a real symmetric tridiagonal (d = diagonal, e =
// subdiagonal with e[n-1] unused), rotating the complex columns of q.
void tridiag_ql(std::vector<double>& d, std::vector<double>& e, ComplexMatrix& q) {
  const std::size_t n = d.size();
  if (n == 0) return;
  e[n - 1] = 0.0;
  double anorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]));
  const double floor_eps = 2.3e-16 * std::max(anorm, 1e-300);
  auto negligible = [&](std::size_t m) {
    double dd = std::abs(d[m]) + std::abs(d[m + 1]);
    return std::abs(e[m]) <= 2.3e-16 * dd + floor_eps * 1e-2;
  };
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    for (;;) {
      std::size_t m = l;
      while (m + 1 < n && !negligible(m)) ++m;
      if (m == l) break;
      require(++iter <= 100, ErrorKind::solver_failure, "tridiagonal QL failed to converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
      double s = 1.0, c = 1.0, p = 0.0;
      bool interrupted = false;
      for (std::size_t i1 = m; i1-- > l;) {
        double f = s * e[i1];
        double b = c * e[i1];
        r = std::hypot(f, g);
        e[i1 + 1] = r;
        if (r == 0.0) {
          d[i1 + 1] -= p;
          e[m] = 0.0;
          interrupted = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i1 + 1] - p;
        r = (d[i1] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i1 + 1] = g + p;
        g = c * r - b;
        for (std::size_t k = 0; k < n; ++k) {
          cplx f1 = q(k, i1 + 1);
          q(k, i1 + 1) = s * q(k, i1) + c * f1;
          q(k, i1) = c * q(k, i1) - s * f1;
        }
      }
      if (interrupted) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

}  // namespace

HermEig herm_eig(const ComplexMatrix& m, double herm_tol) {
  require(m.is_square(), ErrorKind::invalid_input, "herm_eig: non-square input");
  check_hermitian_input(m, herm_tol);
  const std::size_t n = m.rows();
  HermEig out;
  if (n == 0) return out;

  ComplexMatrix a = m;
  ComplexMatrix q = ComplexMatrix::identity(n);

  // Householder reduction to tridiagonal form with complex subdiagonals.
  std::vector<cplx> subc(n, cplx(0.0, 0.0));
  std::vector<cplx> v(n), p(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    double xnorm2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) xnorm2 += std::norm(a(k + 1 + i, k));
    double xnorm = std::sqrt(xnorm2);
    cplx alpha = a(k + 1, k);
    if (xnorm == 0.0) {
      subc[k] = alpha;
      continue;
    }
    cplx phase = (std::abs(alpha) > 0.0) ? alpha / std::abs(alpha) : cplx(1.0, 0.0);
    cplx beta = -phase * xnorm;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      v[i] = a(k + 1 + i, k);
      if (i == 0) v[i] -= beta;
      vnorm2 += std::norm(v[i]);
    }
    if (vnorm2 <= 0.0) {
      subc[k] = alpha;
      continue;
    }
    double inv = 1.0 / std::sqrt(vnorm2);
    for (std::size_t i = 0; i < len; ++i) v[i] *= inv;

    // Rank-2 update of the trailing Hermitian block: B - 2(v w' + w v')
    for (std::size_t i = 0; i < len; ++i) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < len; ++j) s += a(k + 1 + i, k + 1 + j) * v[j];
      p[i] = s;
    }
    cplx kk = 0.0;
    for (std::size_t i = 0; i < len; ++i) kk += std::conj(v[i]) * p[i];
    for (std::size_t i = 0; i < len; ++i) w[i] = p[i] - kk * v[i];
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j)
        a(k + 1 + i, k + 1 + j) -=
            2.0 * (v[i] * std::conj(w[j]) + w[i] * std::conj(v[j]));

    subc[k] = beta;
    a(k + 1, k) = beta;
    a(k, k + 1) = std::conj(beta);
    for (std::size_t i = 1; i < len; ++i) {
      a(k + 1 + i, k) = 0.0;
      a(k, k + 1 + i) = 0.0;
    }
    // Q <- Q (I - 2 v v')
    for (std::size_t r = 0; r < n; ++r) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < len; ++j) s += q(r, k + 1 + j) * v[j];
      s *= 2.0;
      for (std::size_t j = 0; j < len; ++j) q(r, k + 1 + j) -= s * std::conj(v[j]);
    }
  }
  if (n >= 2) subc[n - 2] = a(n - 1, n - 2);

  // Absorb subdiagonal phases into a diagonal unitary so QL runs on reals.
  std::vector<double> d(n), e(n, 0.0);
  std::vector<cplx> dphase(n, cplx(1.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double mag = std::abs(subc[i]);
    e[i] = mag;
    cplx ph = (mag > 0.0) ? subc[i] / mag : cplx(1.0, 0.0);
    dphase[i + 1] = dphase[i] * ph;
  }
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) q(r, c) *= dphase[c];

  tridiag_ql(d, e, q);

  out.values = std::move(d);
  out.vectors = std::move(q);
  sort_descending(out);
  return out;
}

HermEig herm_eig_jacobi(const ComplexMatrix& m, double herm_tol) {
  require(m.is_square(), ErrorKind::invalid_input, "herm_eig_jacobi: non-square input");
  check_hermitian_input(m, herm_tol);
  const std::size_t n = m.rows();
  ComplexMatrix a = m;
  ComplexMatrix vmat = ComplexMatrix::identity(n);
  const double fnorm = std::max(a.frobenius_norm(), 1e-300);
  const double stop = 1e-14 * fnorm;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r + 1; c < n; ++c) off += std::norm(a(r, c));
    if (std::sqrt(2.0 * off) <= stop) break;
    for (std::size_t p1 = 0; p1 < n; ++p1)
      for (std::size_t q1 = p1 + 1; q1 < n; ++q1) {
        cplx apq = a(p1, q1);
        double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        cplx u = apq / mag;
        double app = a(p1, p1).real(), aqq = a(q1, q1).real();
        double tau = (aqq - app) / (2.0 * mag);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        // Columns: [p'] = c*[p] - s*conj(u)*[q]; [q'] = s*u*[p] + c*[q]
        for (std::size_t r = 0; r < n; ++r) {
          cplx arp = a(r, p1), arq = a(r, q1);
          a(r, p1) = c * arp - s * std::conj(u) * arq;
          a(r, q1) = s * u * arp + c * arq;
        }
        for (std::size_t cc = 0; cc < n; ++cc) {
          cplx apc = a(p1, cc), aqc = a(q1, cc);
          a(p1, cc) = c * apc - s * u * aqc;
          a(q1, cc) = s * std::conj(u) * apc + c * aqc;
        }
        for (std::size_t r = 0; r < n; ++r) {
          cplx vrp = vmat(r, p1), vrq = vmat(r, q1);
          vmat(r, p1) = c * vrp - s * std::conj(u) * vrq;
          vmat(r, q1) = s * u * vrp + c * vrq;
        }
      }
  }
  HermEig out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i).real();
  out.vectors = std::move(vmat);
  sort_descending(out);
  return out;
}

Svd svd(const ComplexMatrix& m) {
  const std::size_t p = m.rows(), q = m.cols(), n = p + q;
  ComplexMatrix h(n, n);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < q; ++c) {
      h(r, p + c) = m(r, c);
      h(p + c, r) = std::conj(m(r, c));
    }
  HermEig e = herm_eig(h);
  Svd out;
  const std::size_t k = std::min(p, q);
  out.values.resize(k);
  out.u = ComplexMatrix(p, k);
  out.v = ComplexMatrix(q, k);
  // Eigenvalues of the dilation come in +-sigma pairs (descending order puts
  // the positive ones first); eigenvector = (u; v)/sqrt(2).
  for (std::size_t j = 0; j < k; ++j) {
    out.values[j] = std::max(0.0, e.values[j]);
    double nu = 0.0, nv = 0.0;
    for (std::size_t r = 0; r < p; ++r) nu += std::norm(e.vectors(r, j));
    for (std::size_t r = 0; r < q; ++r) nv += std::norm(e.vectors(p + r, j));
    double su = nu > 0 ? 1.0 / std::sqrt(nu) : 0.0;
    double sv = nv > 0 ? 1.0 / std::sqrt(nv) : 0.0;
    for (std::size_t r = 0; r < p; ++r) out.u(r, j) = e.vectors(r, j) * su;
    for (std::size_t r = 0; r < q; ++r) out.v(r, j) = e.vectors(p + r, j) * sv;
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  require(m.is_square() && m.rows() == total, ErrorKind::invalid_input,
          "partial_trace: dims inconsistent with matrix size");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    require(keep[i] < dims.size(), ErrorKind::invalid_input, "partial_trace: keep out of range");
    if (i > 0)
      require(keep[i] > keep[i - 1], ErrorKind::invalid_input,
              "partial_trace: keep must be strictly increasing");
  }
  const std::size_t ns = dims.size();
  std::vector<bool> kept(ns, false);
  for (auto k : keep) kept[k] = true;
  std::size_t dkeep = 1, dtrace = 1;
  for (std::size_t s = 0; s < ns; ++s) (kept[s] ? dkeep : dtrace) *= dims[s];

  // Strides of each site in the full index.
  std::vector<std::size_t> stride(ns, 1);
  for (std::size_t s = ns; s-- > 1;) stride[s - 1] = stride[s] * dims[s];

  std::vector<std::size_t> keep_sites, trace_sites;
  for (std::size_t s = 0; s < ns; ++s) (kept[s] ? keep_sites : trace_sites).push_back(s);

  auto compose = [&](const std::vector<std::size_t>& sites, std::size_t idx) {
    std::size_t full = 0;
    for (std::size_t s = sites.size(); s-- > 0;) {
      std::size_t d = dims[sites[s]];
      full += (idx % d) * stride[sites[s]];
      idx /= d;
    }
    return full;
  };

  ComplexMatrix out(dkeep, dkeep);
  for (std::size_t kr = 0; kr < dkeep; ++kr) {
    std::size_t base_r = compose(keep_sites, kr);
    for (std::size_t kc = 0; kc < dkeep; ++kc) {
      std::size_t base_c = compose(keep_sites, kc);
      cplx s = 0.0;
      for (std::size_t t = 0; t < dtrace; ++t) {
        std::size_t off = compose(trace_sites, t);
        s += m(base_r + off, base_c + off);
      }
      out(kr, kc) = s;
    }
  }
  return out;
}

double trace_norm(const ComplexMatrix& m) {
  require(m.is_square(), ErrorKind::invalid_input, "trace_norm: non-square input");
  if (m.rows() == 0) return 0.0;
  double scale = std::max(1.0, m.max_abs());
  if (m.is_hermitian(tolerances().hermitian * scale * 100 + tolerances().hermitian)) {
    // Hermitize exactly, then sum |eigenvalues|.
    ComplexMatrix h = m;
    for (std::size_t r = 0; r < h.rows(); ++r)
      for (std::size_t c = 0; c < h.cols(); ++c)
        h(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
    HermEig e = herm_eig(h);
    double s = 0.0;
    for (double v : e.values) s += std::abs(v);
    return s;
  }
  Svd s = svd(m);
  double t = 0.0;
  for (double v : s.values) t += v;
  return t;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) {
  require(m.is_square(), ErrorKind::invalid_input, "density matrix must be square");
  const auto& tol = tolerances();
  require(m.is_hermitian(tol.hermitian), ErrorKind::invalid_input,
          "density matrix not Hermitian within 1e-10");
  require(std::abs(m.trace() - cplx(1.0, 0.0)) <= tol.trace_one, ErrorKind::invalid_input,
          "density matrix trace != 1 within 1e-10");
  HermEig e = herm_eig(m);
  require(e.values.back() >= -tol.psd, ErrorKind::invalid_input,
          "density matrix has eigenvalue below -1e-10");
  dim = m.rows();
  mat = std::move(m);
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t d) {
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0 / static_cast<double>(d);
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const std::vector<cplx>& psi) {
  double n2 = 0.0;
  for (auto& c : psi) n2 += std::norm(c);
  require(n2 > 0, ErrorKind::invalid_input, "pure state from zero vector");
  ComplexMatrix m(psi.size(), psi.size());
  for (std::size_t r = 0; r < psi.size(); ++r)
    for (std::size_t c = 0; c < psi.size(); ++c) m(r, c) = psi[r] * std::conj(psi[c]) / n2;
  return DensityMatrix(std::move(m));
}

Observable::Observable(ComplexMatrix m) {
  require(m.is_square(), ErrorKind::invalid_input, "observable must be square");
  const auto& tol = tolerances();
  require(m.is_hermitian(tol.hermitian), ErrorKind::invalid_input,
          "observable not Hermitian within 1e-10");
  HermEig e = herm_eig(m);
  double opnorm = 0.0;
  for (double v : e.values) opnorm = std::max(opnorm, std::abs(v));
  require(opnorm <= 1.0 + tol.obs_norm, ErrorKind::invalid_input,
          "observable operator norm exceeds 1");
  dim = m.rows();
  mat = std::move(m);
}

int PauliString::weight() const {
  int w = 0;
  if (is_qubit()) {
    for (char c : letters)
      if (c != 'I') ++w;
  } else {
    for (auto& [a, b] : weyl)
      if (a != 0 || b != 0) ++w;
  }
  return w;
}

PauliString PauliString::qubit(const std::string& s) {
  PauliString p;
  p.n = static_cast<int>(s.size());
  p.localdim = 2;
  for (char c : s)
    require(c == 'I' || c == 'X' || c == 'Y' || c == 'Z', ErrorKind::invalid_input,
            "Pauli letters must be in {I,X,Y,Z}");
  p.letters = s;
  return p;
}

PauliString PauliString::qudit(int d, std::vector<std::pair<int, int>> labels) {
  require(d >= 2, ErrorKind::invalid_input, "qudit dimension must be >= 2");
  PauliString p;
  p.n = static_cast<int>(labels.size());
  p.localdim = d;
  for (auto& [a, b] : labels)
    require(a >= 0 && a < d && b >= 0 && b < d, ErrorKind::invalid_input,
            "Weyl labels must lie in F_d^2");
  p.weyl = std::move(labels);
  return p;
}

namespace {

ComplexMatrix qubit_letter(char c) {
  ComplexMatrix m(2, 2);
  switch (c) {
    case 'I': m(0, 0) = 1; m(1, 1) = 1; break;
    case 'X': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1; m(1, 1) = -1; break;
    default: throw Error(ErrorKind::invalid_input, "bad Pauli letter");
  }
  return m;
}

ComplexMatrix weyl_xz(int d, int a, int b) {
  // X^a Z^b with X|j> = |j+1 mod d>, Z|j> = w^j |j>.
  ComplexMatrix m(d, d);
  for (int j = 0; j < d; ++j) {
    double ang = 2.0 * M_PI * ((static_cast<long long>(b) * j) % d) / d;
    m((j + a) % d, j) = cplx(std::cos(ang), std::sin(ang));
  }
  return m;
}

}  // namespace

ComplexMatrix pauli_to_matrix(const PauliString& p) {
  double bits = p.n * std::log2(static_cast<double>(p.localdim));
  require(bits <= 12.0 + 1e-9, ErrorKind::invalid_input,
          "pauli_to_matrix: dimension overflow (more than 12 qubit-equivalents)");
  ComplexMatrix acc(1, 1);
  acc(0, 0) = 1.0;
  for (int s = 0; s < p.n; ++s) {
    ComplexMatrix site =
        p.is_qubit() ? qubit_letter(p.letters[s]) : weyl_xz(p.localdim, p.weyl[s].first, p.weyl[s].second);
    acc = kron(acc, site);
  }
  return acc;
}

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> re, im;
  re.reserve(m.data().size());
  im.reserve(m.data().size());
  for (const auto& x : m.data()) {
    re.push_back(x.real());
    im.push_back(x.imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  require(j.contains("rows") && j.contains("cols") && j.contains("re") && j.contains("im"),
          ErrorKind::invalid_input, "matrix JSON must have rows/cols/re/im");
  std::size_t rows = j["rows"], cols = j["cols"];
  auto re = j["re"].get<std::vector<double>>();
  auto im = j["im"].get<std::vector<double>>();
  require(re.size() == rows * cols && im.size() == rows * cols, ErrorKind::invalid_input,
          "matrix JSON entry count mismatch");
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < re.size(); ++i) m.data()[i] = cplx(re[i], im[i]);
  return m;
}

}  // namespace shadowval
