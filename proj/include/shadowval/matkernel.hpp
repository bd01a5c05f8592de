#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "shadowval/error.hpp"
#include "shadowval/tolerances.hpp"

namespace shadowval {

using cplx = std::complex<double>;

// Dense complex matrix, row-major. Exact desk-scale kernel: dimensions are
// capped at 4096 and everything is stored densely.
class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, cplx(0.0, 0.0)) {
    require(rows <= 4096 && cols <= 4096, ErrorKind::invalid_input,
            "matrix dimension exceeds the 4096 cap");
  }
  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zero(std::size_t rows, std::size_t cols) { return ComplexMatrix(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  cplx& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
  const std::vector<cplx>& data() const { return a_; }
  std::vector<cplx>& data() { return a_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);
  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

  cplx trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool is_hermitian(double tol) const;
  bool is_square() const { return rows_ == cols_; }

 private:
  std::size_t rows_, cols_;
  std::vector<cplx> a_;
};

// C = A * B. The OpenMP kernel and the serial reference compute bitwise
// identical results (same loop order per output element).
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b, int threads = 1);
ComplexMatrix matmul_serial(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

std::vector<cplx> matvec(const ComplexMatrix& a, const std::vector<cplx>& v);

// Hermitian eigendecomposition, eigenvalues descending, eigenvectors as
// orthonormal columns of `vectors`.
struct HermEig {
  std::vector<double> values;
  ComplexMatrix vectors;
};

// Householder tridiagonalization + implicit-shift QL. Throws invalid_input if
// the matrix is not Hermitian within `herm_tol` (default from tolerances()).
HermEig herm_eig(const ComplexMatrix& m, double herm_tol = -1.0);
// Cyclic Jacobi reference implementation (slow, kept for cross-checking).
HermEig herm_eig_jacobi(const ComplexMatrix& m, double herm_tol = -1.0);

// Singular value decomposition via the Hermitian dilation [[0,M],[M',0]].
struct Svd {
  std::vector<double> values;  // descending
  ComplexMatrix u;             // left singular vectors (columns)
  ComplexMatrix v;             // right singular vectors (columns)
};
Svd svd(const ComplexMatrix& m);

// Partial trace over the complement of `keep`. `dims` lists the local
// dimension of each site; `keep` is a strictly increasing list of site
// indices to retain.
ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

// Sum of singular values; Hermitian inputs take the eigenvalue path.
double trace_norm(const ComplexMatrix& m);

// Validated quantum state: Hermitian, unit trace, PSD within tolerances().
struct DensityMatrix {
  std::size_t dim = 0;
  ComplexMatrix mat;
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix m);  // validates
  static DensityMatrix maximally_mixed(std::size_t dim);
  static DensityMatrix pure(const std::vector<cplx>& psi);
};

// Validated observable: Hermitian with operator norm <= 1 (+ slack).
struct Observable {
  std::size_t dim = 0;
  ComplexMatrix mat;
  Observable() = default;
  explicit Observable(ComplexMatrix m);  // validates
};

// Pauli / Weyl string. Qubit strings use letters 'I','X','Y','Z'; qudit
// strings carry per-site Weyl labels (a,b) meaning X^a Z^b on that site.
struct PauliString {
  int n = 0;
  int localdim = 2;
  std::string letters;                            // qubit case, length n
  std::vector<std::pair<int, int>> weyl;          // qudit case, length n
  bool is_qubit() const { return localdim == 2; }
  int weight() const;  // number of non-identity sites

  static PauliString qubit(const std::string& s);
  static PauliString qudit(int d, std::vector<std::pair<int, int>> labels);
};

// Dense d^n matrix of the string; Hermitian for qubit strings, unitary Weyl
// product X^a Z^b per site for qudits. Throws on dimension overflow.
ComplexMatrix pauli_to_matrix(const PauliString& p);

// JSON wire format: {"rows","cols","re":[...],"im":[...]} row-major.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace shadowval
