#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "payofflab/game.hpp"

namespace payofflab::linalg {

// Error-free transformation a + b = s + e.
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

// Neumaier-compensated accumulator.
class CompensatedSum {
public:
  void add(double x) {
    double s, e;
    two_sum(sum_, x, s, e);
    sum_ = s;
    comp_ += e;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// 4x4 determinant by Laplace expansion over complementary 2x2 minors of the
// first two rows and last two rows.
inline double det4(const Mat4& m) {
  const double a01 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double a02 = m[0][0] * m[1][2] - m[0][2] * m[1][0];
  const double a03 = m[0][0] * m[1][3] - m[0][3] * m[1][0];
  const double a12 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  const double a13 = m[0][1] * m[1][3] - m[0][3] * m[1][1];
  const double a23 = m[0][2] * m[1][3] - m[0][3] * m[1][2];

  const double b01 = m[2][0] * m[3][1] - m[2][1] * m[3][0];
  const double b02 = m[2][0] * m[3][2] - m[2][2] * m[3][0];
  const double b03 = m[2][0] * m[3][3] - m[2][3] * m[3][0];
  const double b12 = m[2][1] * m[3][2] - m[2][2] * m[3][1];
  const double b13 = m[2][1] * m[3][3] - m[2][3] * m[3][1];
  const double b23 = m[2][2] * m[3][3] - m[2][3] * m[3][2];

  CompensatedSum acc;
  acc.add(a01 * b23);
  acc.add(-a02 * b13);
  acc.add(a03 * b12);
  acc.add(a12 * b03);
  acc.add(-a13 * b02);
  acc.add(a23 * b01);
  return acc.value();
}

// 3x3 determinant of rows/cols picked out of a 4x4 matrix.
inline double det3(const Mat4& m, const std::array<int, 3>& rows, const std::array<int, 3>& cols) {
  auto e = [&](int r, int c) { return m[rows[r]][cols[c]]; };
  CompensatedSum acc;
  acc.add(e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)));
  acc.add(-e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)));
  acc.add(e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)));
  return acc.value();
}

inline Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const double aik = a[i][k];
      if (aik == 0.0) continue;
      for (int j = 0; j < 4; ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

inline Vec4 row_times(const Vec4& v, const Mat4& m) {
  Vec4 out{};
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j) out[j] += v[k] * m[k][j];
  return out;
}

inline double dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
  return d;
}

inline Mat4 transpose(const Mat4& a) {
  Mat4 t;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t[i][j] = a[j][i];
  return t;
}

// Solves the leading n x n block of A x = b with partial pivoting.
// Returns nullopt when a pivot is exactly zero.
inline std::optional<Vec4> solve(Mat4 a, Vec4 b, int n = 4) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return std::nullopt;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec4 x{};
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

}  // namespace payofflab::linalg
