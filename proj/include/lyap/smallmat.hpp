#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lyap {

/// Largest supported side: C(8,4), the middle exterior power of an 8x8 matrix.
inline constexpr int kMaxMatrixDim = 70;

/// Dense square real matrix, row-major. Cocycle fibers live in dimensions
/// 2..8; exterior powers of those can be 1x1 or up to kMaxMatrixDim.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int dim);
  Matrix(int dim, std::vector<double> rowMajor);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int dim);
  static Matrix diagonal(std::span<const double> values);
  static Matrix diagonal(std::initializer_list<double> values);
  static Matrix rotation(double theta);

  int dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  double operator()(int row, int col) const { return data_[static_cast<std::size_t>(row * dim_ + col)]; }
  double& operator()(int row, int col) { return data_[static_cast<std::size_t>(row * dim_ + col)]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transposed() const;
  double determinant() const;
  double maxAbs() const;
  bool allFinite() const;

  Matrix& operator*=(double s);
  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);

  bool operator==(const Matrix& other) const = default;

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
/// out = a * b without reallocating when out already has the right size.
/// out must not alias a or b.
void multiplyInto(const Matrix& a, const Matrix& b, Matrix& out);

inline Matrix operator*(const Matrix& a, const Matrix& b) { return multiply(a, b); }
Matrix operator*(double s, Matrix m);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);

struct SingularSpectrum {
  std::vector<double> values;  // descending
  double gapRatio = 1.0;       // s1/s2, +inf when s2 = 0 < s1
  bool degenerate = false;     // zero matrix
};

SingularSpectrum singularSpectrum(const Matrix& g);

/// Largest singular value.
double operatorNorm(const Matrix& g);
/// log s1(g); throws NormUnderflow for the zero matrix.
double logOperatorNorm(const Matrix& g);

/// Matrix of j x j minors on the lexicographic basis of j-subsets.
Matrix exteriorPower(const Matrix& g, int j);
/// Lexicographic j-subsets of {0, ..., d-1}; row/column labels of exteriorPower.
std::vector<std::vector<int>> exteriorBasis(int d, int j);

long long binomial(int n, int k);

std::string toString(const Matrix& g);

}  // namespace lyap
