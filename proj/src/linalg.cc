#include "msrate/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "msrate/errors.h"

namespace msrate {

namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kJacobiRelativeTolerance = 1e-12;

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + ": non-finite entry");
    }
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(op) + ": shape mismatch");
  }
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

double pd_threshold(const SymMatrix& m) {
  return kPdRelativeTolerance * m.trace() / m.dim();
}

}  // namespace

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw InvalidArgument("Matrix: negative dimension");
  data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows < 0 || cols < 0) throw InvalidArgument("Matrix: negative dimension");
  if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionMismatch("Matrix: data size does not match shape");
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.front().size());
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(r) * static_cast<std::size_t>(c));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw DimensionMismatch("Matrix: ragged rows");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> v;
  for (const auto& row : rows) v.emplace_back(row);
  return from_rows(v);
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(rows_));
  for (int i = 0; i < rows_; ++i) {
    auto first = data_.begin() + static_cast<std::ptrdiff_t>(index(i, 0));
    out[static_cast<std::size_t>(i)].assign(first, first + cols_);
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool Matrix::is_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("operator*: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
  if (static_cast<std::size_t>(a.cols()) != x.size()) {
    throw DimensionMismatch("operator*: vector length differs from column count");
  }
  std::vector<double> y(static_cast<std::size_t>(a.rows()), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

// ------------------------------------------------------------- SymMatrix

SymMatrix::SymMatrix(int dim) : dim_(dim), full_(dim, dim) {}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  require_finite(d, "SymMatrix::diagonal");
  SymMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m.set(i, i, d[static_cast<std::size_t>(i)]);
  return m;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> d) {
  return diagonal(std::span<const double>(d.begin(), d.size()));
}

SymMatrix SymMatrix::symmetric_part(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("symmetric_part: matrix is not square");
  SymMatrix s(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    s.set(i, i, m(i, i));
    for (int j = i + 1; j < m.cols(); ++j) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  }
  return s;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const Matrix m = Matrix::from_rows(rows);
  if (m.rows() != m.cols()) throw DimensionMismatch("SymMatrix: matrix is not square");
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) throw InvalidArgument("SymMatrix: input is not symmetric");
    }
  }
  return symmetric_part(m);
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> v;
  for (const auto& row : rows) v.emplace_back(row);
  return from_rows(v);
}

SymMatrix SymMatrix::outer(std::span<const double> v) {
  require_finite(v, "SymMatrix::outer");
  const int n = static_cast<int>(v.size());
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      m.set(i, j, v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)]);
    }
  }
  return m;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) t += full_(i, i);
  return t;
}

double SymMatrix::frobenius_norm() const { return full_.frobenius_norm(); }

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  full_ += other.full_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  full_ -= other.full_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  full_ *= s;
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

SymMatrix congruence(const Matrix& x, const SymMatrix& p) {
  if (x.rows() != p.dim()) throw DimensionMismatch("congruence: shape mismatch");
  return SymMatrix::symmetric_part(x.transpose() * (p.matrix() * x));
}

Matrix bilinear(const Matrix& x, const SymMatrix& p, const Matrix& y) {
  if (x.rows() != p.dim() || y.rows() != p.dim()) {
    throw DimensionMismatch("bilinear: shape mismatch");
  }
  return x.transpose() * (p.matrix() * y);
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) throw DimensionMismatch("vstack: column counts differ");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  for (int i = 0; i < top.rows(); ++i) {
    for (int j = 0; j < top.cols(); ++j) out(i, j) = top(i, j);
  }
  for (int i = 0; i < bottom.rows(); ++i) {
    for (int j = 0; j < bottom.cols(); ++j) out(top.rows() + i, j) = bottom(i, j);
  }
  return out;
}

// ----------------------------------------------------------- eigensolver

EigenDecomposition sym_eigen(const SymMatrix& m) {
  const int n = m.dim();
  if (n < 1) throw InvalidArgument("sym_eigen: empty matrix");
  if (!m.matrix().is_finite()) throw InvalidArgument("sym_eigen: non-finite entry");

  Matrix a = m.matrix();
  Matrix v = Matrix::identity(n);
  const double stop = kJacobiRelativeTolerance * m.frobenius_norm();

  int sweep = 0;
  while (off_diagonal_norm(a) > stop) {
    if (sweep++ == kMaxJacobiSweeps) {
      throw NumericalFailure("sym_eigen: Jacobi did not converge in " +
                             std::to_string(kMaxJacobiSweeps) + " sweeps");
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation zeroing a(p, q): t = tan(theta), smaller root.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) < a(j, j); });

  EigenDecomposition out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    out.values[static_cast<std::size_t>(k)] = a(src, src);
    for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, src);
  }
  return out;
}

double lambda_min(const SymMatrix& m) { return sym_eigen(m).values.front(); }
double lambda_max(const SymMatrix& m) { return sym_eigen(m).values.back(); }

// ------------------------------------------------------ factorizations

std::optional<Matrix> cholesky(const SymMatrix& m) {
  const int n = m.dim();
  if (n < 1) return std::nullopt;
  const double threshold = pd_threshold(m);
  if (!(threshold > 0.0)) return std::nullopt;

  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (int k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > threshold)) return std::nullopt;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix solve_spd(const SymMatrix& m, const Matrix& rhs) {
  if (rhs.rows() != m.dim()) throw DimensionMismatch("solve_spd: shape mismatch");
  const auto l = cholesky(m);
  if (!l) throw NotPositiveDefinite("solve_spd: matrix is not positive definite");
  const int n = m.dim();
  Matrix x = rhs;
  for (int c = 0; c < rhs.cols(); ++c) {
    for (int i = 0; i < n; ++i) {
      double s = x(i, c);
      for (int k = 0; k < i; ++k) s -= (*l)(i, k) * x(k, c);
      x(i, c) = s / (*l)(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x(i, c);
      for (int k = i + 1; k < n; ++k) s -= (*l)(k, i) * x(k, c);
      x(i, c) = s / (*l)(i, i);
    }
  }
  return x;
}

SymMatrix inverse_spd(const SymMatrix& m) {
  return SymMatrix::symmetric_part(solve_spd(m, Matrix::identity(m.dim())));
}

namespace {

// V·diag(f(λ))·Vᵀ over the eigenpairs selected by keep.
template <typename F, typename Keep>
SymMatrix spectral_function(const EigenDecomposition& e, F f, Keep keep) {
  const int n = static_cast<int>(e.values.size());
  SymMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        const double lam = e.values[static_cast<std::size_t>(k)];
        if (!keep(lam)) continue;
        s += e.vectors(i, k) * f(lam) * e.vectors(j, k);
      }
      out.set(i, j, s);
    }
  }
  return out;
}

}  // namespace

SymMatrix pinv_psd(const SymMatrix& m, double rank_tol) {
  const EigenDecomposition e = sym_eigen(m);
  const double cutoff = rank_tol * std::max(e.values.back(), 0.0);
  return spectral_function(
      e, [](double lam) { return 1.0 / lam; },
      [cutoff](double lam) { return lam > cutoff && lam > 0.0; });
}

SymMatrix sym_sqrt_inv(const SymMatrix& m) {
  const EigenDecomposition e = sym_eigen(m);
  const double threshold = pd_threshold(m);
  if (!(threshold > 0.0) || !(e.values.front() > threshold)) {
    throw NotPositiveDefinite("sym_sqrt_inv: matrix is not positive definite");
  }
  return spectral_function(
      e, [](double lam) { return 1.0 / std::sqrt(lam); }, [](double) { return true; });
}

double spectral_norm(const Matrix& m) {
  if (m.empty()) return 0.0;
  const SymMatrix gram = SymMatrix::symmetric_part(m.transpose() * m);
  return std::sqrt(std::max(lambda_max(gram), 0.0));
}

int column_rank(const Matrix& m, double tol) {
  if (m.empty()) return 0;
  const SymMatrix gram = SymMatrix::symmetric_part(m.transpose() * m);
  const EigenDecomposition e = sym_eigen(gram);
  const double top = e.values.back();
  if (!(top > 0.0)) return 0;
  return static_cast<int>(std::count_if(e.values.begin(), e.values.end(),
                                        [&](double lam) { return lam > tol * top; }));
}

}  // namespace msrate
