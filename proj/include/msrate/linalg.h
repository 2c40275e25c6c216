#pragma once

// Dense kernels for the small matrices (n up to a few dozen) that appear in
// the Riccati-type operators. Everything here is deterministic and pure.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace msrate {

/// Dense row-major real matrix. Constructors reject non-finite entries;
/// arithmetic results are not re-checked.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  Matrix(int rows, int cols, std::vector<double> row_major);

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
  static Matrix identity(int n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double operator()(int i, int j) const { return data_[index(i, j)]; }
  double& operator()(int i, int j) { return data_[index(i, j)]; }

  std::span<const double> data() const { return data_; }
  std::vector<std::vector<double>> to_rows() const;

  Matrix transpose() const;
  double frobenius_norm() const;
  bool is_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(j);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

/// Symmetric matrix with full storage; every write goes to (i, j) and (j, i),
/// so entries[i][j] == entries[j][i] holds bit for bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim);

  static SymMatrix identity(int n);
  static SymMatrix diagonal(std::span<const double> d);
  static SymMatrix diagonal(std::initializer_list<double> d);
  /// Symmetric part (M + Mᵀ)/2 of a square matrix.
  static SymMatrix symmetric_part(const Matrix& m);
  /// Rejects asymmetric or non-finite input.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// v·vᵀ.
  static SymMatrix outer(std::span<const double> v);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return full_(i, j); }
  void set(int i, int j, double v) {
    full_(i, j) = v;
    full_(j, i) = v;
  }

  double trace() const;
  double frobenius_norm() const;
  const Matrix& matrix() const { return full_; }

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.full_ == b.full_;
  }

 private:
  int dim_ = 0;
  // Full square storage so products can use it without copying.
  Matrix full_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(SymMatrix a, double s);
SymMatrix operator*(double s, SymMatrix a);

/// Xᵀ·P·X, symmetrized.
SymMatrix congruence(const Matrix& x, const SymMatrix& p);
/// Xᵀ·P·Y.
Matrix bilinear(const Matrix& x, const SymMatrix& p, const Matrix& y);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns are eigenvectors
};

/// Cyclic Jacobi. Throws NumericalFailure if the sweep cap is hit.
EigenDecomposition sym_eigen(const SymMatrix& m);

double lambda_min(const SymMatrix& m);
double lambda_max(const SymMatrix& m);

/// Pivot threshold used by cholesky(): pivots at or below
/// kPdRelativeTolerance · trace(M)/n are rejected.
inline constexpr double kPdRelativeTolerance = 1e-12;
inline constexpr double kDefaultRankTolerance = 1e-10;

/// Lower-triangular L with L·Lᵀ = M, or nullopt when M is not
/// (numerically) positive definite.
std::optional<Matrix> cholesky(const SymMatrix& m);

/// Throws NotPositiveDefinite.
SymMatrix inverse_spd(const SymMatrix& m);

/// Solves M·X = rhs for SPD M. Throws NotPositiveDefinite.
Matrix solve_spd(const SymMatrix& m, const Matrix& rhs);

/// Moore-Penrose inverse of a PSD matrix; eigenvalues below
/// rank_tol·λ_max are treated as zero.
SymMatrix pinv_psd(const SymMatrix& m, double rank_tol = kDefaultRankTolerance);

/// M^{-1/2}. Throws NotPositiveDefinite.
SymMatrix sym_sqrt_inv(const SymMatrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Numerical column rank from the eigenvalues of MᵀM, threshold tol·λ_max.
int column_rank(const Matrix& m, double tol = kDefaultRankTolerance);

/// [top; bottom].
Matrix vstack(const Matrix& top, const Matrix& bottom);

}  // namespace msrate
