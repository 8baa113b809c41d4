// Exact geometric predicates on dyadic points: simplex volume, barycentric
// coordinates, closed-simplex membership, diameter. All decisions are made
// in rational arithmetic; floating point appears only in diagnostics.
#pragma once

#include "bisectd/dyadic.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bisectd {

// Determinant by fraction-free-ish Gaussian elimination over rationals.
inline BigRat det_rational(std::vector<std::vector<BigRat>> m) {
  const size_t n = m.size();
  BigRat det = 1;
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) return BigRat(0);
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (size_t row = col + 1; row < n; ++row) {
      if (m[row][col] == 0) continue;
      BigRat f = m[row][col] / m[col][col];
      for (size_t j = col; j < n; ++j) m[row][j] -= f * m[col][j];
    }
  }
  return det;
}

// |det(v1-v0, ..., vd-v0)| / d!, exact. Throws on degenerate input.
inline BigRat simplex_volume(const std::vector<DyadicPoint>& verts) {
  const int d = verts.at(0).dim();
  if (static_cast<int>(verts.size()) != d + 1)
    throw std::invalid_argument("simplex_volume: need d+1 points");
  std::vector<std::vector<BigRat>> m(static_cast<size_t>(d),
                                     std::vector<BigRat>(static_cast<size_t>(d)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          verts[static_cast<size_t>(i + 1)].coord(j) - verts[0].coord(j);
  BigRat det = det_rational(std::move(m));
  if (det == 0) throw std::invalid_argument("simplex_volume: degenerate simplex");
  if (det < 0) det = -det;
  BigInt fact = 1;
  for (int i = 2; i <= d; ++i) fact *= i;
  return det / BigRat(fact);
}

// Barycentric coordinates of p with respect to an m-simplex embedded in R^d,
// or nullopt if p is not in the affine hull. Solves the (d+1) x (m+1) system
// [verts^T; 1] lambda = [p; 1] by Gaussian elimination over rationals.
inline std::optional<std::vector<BigRat>> barycentric(
    const std::vector<DyadicPoint>& verts, const DyadicPoint& p) {
  const int d = p.dim();
  const size_t cols = verts.size();
  const size_t rows = static_cast<size_t>(d) + 1;
  // Augmented matrix [A | b].
  std::vector<std::vector<BigRat>> m(rows, std::vector<BigRat>(cols + 1));
  for (size_t j = 0; j < cols; ++j) {
    for (int i = 0; i < d; ++i)
      m[static_cast<size_t>(i)][j] = verts[j].coord(i);
    m[static_cast<size_t>(d)][j] = 1;
  }
  for (int i = 0; i < d; ++i) m[static_cast<size_t>(i)][cols] = p.coord(i);
  m[static_cast<size_t>(d)][cols] = 1;

  std::vector<size_t> pivot_col_of_row;
  size_t row = 0;
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t piv = row;
    while (piv < rows && m[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[row]);
    BigRat f0 = m[row][col];
    for (size_t j = col; j <= cols; ++j) m[row][j] /= f0;
    for (size_t r = 0; r < rows; ++r) {
      if (r == row || m[r][col] == 0) continue;
      BigRat f = m[r][col];
      for (size_t j = col; j <= cols; ++j) m[r][j] -= f * m[row][j];
    }
    pivot_col_of_row.push_back(col);
    ++row;
  }
  // Inconsistent rows mean p is outside the affine hull.
  for (size_t r = row; r < rows; ++r)
    if (m[r][cols] != 0) return std::nullopt;
  if (pivot_col_of_row.size() != cols)
    throw std::invalid_argument("barycentric: affinely dependent vertices");
  std::vector<BigRat> lambda(cols);
  for (size_t r = 0; r < cols; ++r) lambda[pivot_col_of_row[r]] = m[r][cols];
  return lambda;
}

// Membership in the closed simplex.
inline bool simplex_contains(const std::vector<DyadicPoint>& verts,
                             const DyadicPoint& p) {
  auto lambda = barycentric(verts, p);
  if (!lambda) return false;
  for (const BigRat& l : *lambda)
    if (l < 0) return false;
  return true;
}

// Euclidean diameter (longest edge), floating point: used only for h0 and
// the c1/c2 diagnostics, never for refinement decisions.
inline double diameter(const std::vector<DyadicPoint>& verts) {
  double best = 0.0;
  const int d = verts.at(0).dim();
  for (size_t a = 0; a < verts.size(); ++a) {
    for (size_t b = a + 1; b < verts.size(); ++b) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        double t = verts[a].coord_double(i) - verts[b].coord_double(i);
        s += t * t;
      }
      best = std::max(best, s);
    }
  }
  return std::sqrt(best);
}

}  // namespace bisectd
