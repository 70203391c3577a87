#include "lyap/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "lyap/error.hpp"

namespace lyap {

namespace {

void checkDim(int dim) {
  require(dim >= 1 && dim <= kMaxMatrixDim, "matrix dimension " + std::to_string(dim) + " out of range");
}

double sq(double x) { return x * x; }

// Determinant of a dense n x n row-major block, LU with partial pivoting.
double luDeterminant(std::vector<double> a, int n) {
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    double best = std::abs(a[static_cast<std::size_t>(k * n + k)]);
    for (int r = k + 1; r < n; ++r) {
      double v = std::abs(a[static_cast<std::size_t>(r * n + k)]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (pivot != k) {
      for (int c = 0; c < n; ++c) std::swap(a[static_cast<std::size_t>(k * n + c)], a[static_cast<std::size_t>(pivot * n + c)]);
      det = -det;
    }
    const double diag = a[static_cast<std::size_t>(k * n + k)];
    det *= diag;
    for (int r = k + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r * n + k)] / diag;
      if (f == 0.0) continue;
      for (int c = k + 1; c < n; ++c) a[static_cast<std::size_t>(r * n + c)] -= f * a[static_cast<std::size_t>(k * n + c)];
    }
  }
  return det;
}

// One-sided (Hestenes) Jacobi: rotate column pairs of g until they are
// mutually orthogonal; the column norms are then the singular values.
std::vector<double> jacobiSingularValues(const Matrix& g) {
  const int n = g.dim();
  std::vector<double> a(g.data().begin(), g.data().end());
  // Work on g / max|g_ij| so the sums of squares cannot overflow.
  const double scale = g.maxAbs();
  if (scale == 0.0) return std::vector<double>(static_cast<std::size_t>(n), 0.0);
  for (double& v : a) v /= scale;
  auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r * n + c)]; };
  constexpr double tol = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (int r = 0; r < n; ++r) {
          alpha += sq(at(r, p));
          beta += sq(at(r, q));
          gamma += at(r, p) * at(r, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int r = 0; r < n; ++r) {
          const double xp = at(r, p);
          const double xq = at(r, q);
          at(r, p) = c * xp - s * xq;
          at(r, q) = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    double norm = 0;
    for (int r = 0; r < n; ++r) norm = std::hypot(norm, at(r, c));
    values[static_cast<std::size_t>(c)] = norm * scale;
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

}  // namespace

Matrix::Matrix(int dim) : dim_(dim) {
  checkDim(dim);
  data_.assign(static_cast<std::size_t>(dim * dim), 0.0);
}

Matrix::Matrix(int dim, std::vector<double> rowMajor) : dim_(dim), data_(std::move(rowMajor)) {
  checkDim(dim);
  require(data_.size() == static_cast<std::size_t>(dim * dim), "row-major data has wrong length for a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  require(allFinite(), "matrix entries must be finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  checkDim(n);
  dim_ = n;
  data_.reserve(static_cast<std::size_t>(n * n));
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == n, "matrix literal must be square");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  require(allFinite(), "matrix entries must be finite");
}

Matrix Matrix::identity(int dim) {
  Matrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(static_cast<int>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = values[i];
  require(m.allFinite(), "matrix entries must be finite");
  return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> values) {
  return diagonal(std::span<const double>(values.begin(), values.size()));
}

Matrix Matrix::rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return Matrix{{c, -s}, {s, c}};
}

Matrix Matrix::transposed() const {
  Matrix t(dim_);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::determinant() const {
  if (dim_ == 1) return data_[0];
  if (dim_ == 2) return data_[0] * data_[3] - data_[1] * data_[2];
  return luDeterminant(data_, dim_);
}

double Matrix::maxAbs() const {
  double m = 0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::allFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(dim_ == other.dim_, "dimension mismatch in matrix sum");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(dim_ == other.dim_, "dimension mismatch in matrix difference");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix operator*(double s, Matrix m) { return m *= s; }
Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

void multiplyInto(const Matrix& a, const Matrix& b, Matrix& out) {
  const int n = a.dim();
  require(n == b.dim(), "dimension mismatch in matrix product");
  if (out.dim() != n) out = Matrix(n);
  const double* x = a.data().data();
  const double* y = b.data().data();
  double* z = out.data().data();
  if (n == 2) {
    const double z0 = x[0] * y[0] + x[1] * y[2];
    const double z1 = x[0] * y[1] + x[1] * y[3];
    const double z2 = x[2] * y[0] + x[3] * y[2];
    const double z3 = x[2] * y[1] + x[3] * y[3];
    z[0] = z0, z[1] = z1, z[2] = z2, z[3] = z3;
    return;
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double acc = 0;
      for (int k = 0; k < n; ++k) acc += x[r * n + k] * y[k * n + c];
      z[r * n + c] = acc;
    }
  }
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.dim());
  multiplyInto(a, b, out);
  return out;
}

SingularSpectrum singularSpectrum(const Matrix& g) {
  require(!g.empty() && g.allFinite(), "singular spectrum needs a finite, non-empty matrix");
  SingularSpectrum s;
  s.values = jacobiSingularValues(g);
  if (s.values[0] == 0.0) {
    s.degenerate = true;
    s.gapRatio = 1.0;
  } else if (s.values.size() == 1) {
    s.gapRatio = std::numeric_limits<double>::infinity();
  } else {
    s.gapRatio = s.values[1] == 0.0 ? std::numeric_limits<double>::infinity() : s.values[0] / s.values[1];
  }
  return s;
}

double operatorNorm(const Matrix& g) {
  require(!g.empty(), "operator norm of an empty matrix");
  if (g.dim() == 1) return std::abs(g(0, 0));
  if (g.dim() == 2) {
    // s1 = (|(a+d, c-b)| + |(a-d, b+c)|) / 2
    const double a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
    return 0.5 * (std::hypot(a + d, c - b) + std::hypot(a - d, b + c));
  }
  return jacobiSingularValues(g)[0];
}

double logOperatorNorm(const Matrix& g) {
  const double n = operatorNorm(g);
  if (!(n > 0.0)) throw LabError(ErrorCode::NormUnderflow, "log of the operator norm of a zero matrix");
  return std::log(n);
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::vector<int>> exteriorBasis(int d, int j) {
  std::vector<std::vector<int>> basis;
  std::vector<int> idx(static_cast<std::size_t>(j));
  for (int i = 0; i < j; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    basis.push_back(idx);
    int pos = j - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == d - j + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < j; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
  }
  return basis;
}

Matrix exteriorPower(const Matrix& g, int j) {
  const int d = g.dim();
  require(j >= 1 && j <= d, "exterior power index " + std::to_string(j) + " out of range for dimension " + std::to_string(d));
  if (j == 1) return g;
  const auto basis = exteriorBasis(d, j);
  const int m = static_cast<int>(basis.size());
  require(m <= kMaxMatrixDim, "exterior power too large");
  Matrix out(m);
  std::vector<double> block(static_cast<std::size_t>(j * j));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      const auto& rows = basis[static_cast<std::size_t>(r)];
      const auto& cols = basis[static_cast<std::size_t>(c)];
      for (int a = 0; a < j; ++a)
        for (int b = 0; b < j; ++b)
          block[static_cast<std::size_t>(a * j + b)] = g(rows[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
      out(r, c) = j == 2 ? block[0] * block[3] - block[1] * block[2] : luDeterminant(block, j);
    }
  }
  return out;
}

std::string toString(const Matrix& g) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (int r = 0; r < g.dim(); ++r) {
    os << (r ? ", [" : "[");
    for (int c = 0; c < g.dim(); ++c) os << (c ? ", " : "") << g(r, c);
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace lyap
