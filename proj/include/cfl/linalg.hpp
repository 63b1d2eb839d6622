#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cfl/errors.hpp"
#include "cfl/rational.hpp"

namespace cfl::linalg {

inline RatMat zeros(std::size_t rows, std::size_t cols) {
  return RatMat(rows, RatVec(cols, Rat(0)));
}

inline RatVec matvec(const RatMat& a, const RatVec& x) {
  RatVec out(a.size(), Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rat acc(0);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (a[i][j] != 0 && x[j] != 0) acc += a[i][j] * x[j];
    out[i] = acc;
  }
  return out;
}

inline RatMat transpose(const RatMat& a) {
  if (a.empty()) return {};
  RatMat t = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Rat dot(const RatVec& a, const RatVec& b) {
  Rat acc(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0 && b[i] != 0) acc += a[i] * b[i];
  return acc;
}

struct Rref {
  RatMat m;
  std::vector<std::size_t> pivot_cols;  // one per pivot row, ascending
  std::size_t rank = 0;
};

/// Exact reduced row echelon form over the rationals.  There is no pivot
/// growth concern here: any nonzero pivot is exact, so the first nonzero
/// entry in each column is used.
inline Rref reduced_row_echelon(RatMat m) {
  Rref out;
  const std::size_t rows = m.size();
  const std::size_t cols = rows == 0 ? 0 : m[0].size();
  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < cols && pivot_row < rows; ++col) {
    std::size_t sel = pivot_row;
    while (sel < rows && m[sel][col] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[sel], m[pivot_row]);
    const Rat inv_pivot = Rat(1) / m[pivot_row][col];
    for (std::size_t j = col; j < cols; ++j) m[pivot_row][j] *= inv_pivot;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == pivot_row || m[i][col] == 0) continue;
      const Rat factor = m[i][col];
      for (std::size_t j = col; j < cols; ++j) m[i][j] -= factor * m[pivot_row][j];
    }
    out.pivot_cols.push_back(col);
    ++pivot_row;
  }
  out.rank = pivot_row;
  out.m = std::move(m);
  return out;
}

inline std::size_t rank(const RatMat& m) { return reduced_row_echelon(m).rank; }

/// Basis of {x : Ax = 0}; one vector per non-pivot column, with that free
/// coordinate set to 1.
inline std::vector<RatVec> kernel_basis(const RatMat& a) {
  if (a.empty()) return {};
  const std::size_t cols = a[0].size();
  const Rref r = reduced_row_echelon(a);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : r.pivot_cols) is_pivot[c] = true;

  std::vector<RatVec> basis;
  for (std::size_t free_col = 0; free_col < cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    RatVec v(cols, Rat(0));
    v[free_col] = 1;
    for (std::size_t pr = 0; pr < r.pivot_cols.size(); ++pr)
      v[r.pivot_cols[pr]] = -r.m[pr][free_col];
    basis.push_back(std::move(v));
  }
  return basis;
}

struct LinearSolve {
  bool consistent = false;
  RatVec particular;                 // free coordinates pinned to zero
  std::vector<std::size_t> free_cols;
  std::vector<RatVec> kernel;        // aligned with free_cols
};

/// General exact solve of Ax = b via RREF of the augmented system.
inline LinearSolve solve_general(const RatMat& a, const RatVec& b) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  RatMat aug = a;
  for (std::size_t i = 0; i < rows; ++i) aug[i].push_back(b[i]);
  const Rref r = reduced_row_echelon(std::move(aug));

  LinearSolve out;
  std::vector<std::size_t> pivot_cols;
  for (std::size_t pr = 0; pr < r.pivot_cols.size(); ++pr) {
    if (r.pivot_cols[pr] == cols) return out;  // pivot in the b column: inconsistent
    pivot_cols.push_back(r.pivot_cols[pr]);
  }
  out.consistent = true;
  out.particular.assign(cols, Rat(0));
  for (std::size_t pr = 0; pr < pivot_cols.size(); ++pr)
    out.particular[pivot_cols[pr]] = r.m[pr][cols];

  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivot_cols) is_pivot[c] = true;
  for (std::size_t free_col = 0; free_col < cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    RatVec v(cols, Rat(0));
    v[free_col] = 1;
    for (std::size_t pr = 0; pr < pivot_cols.size(); ++pr)
      v[pivot_cols[pr]] = -r.m[pr][free_col];
    out.free_cols.push_back(free_col);
    out.kernel.push_back(std::move(v));
  }
  return out;
}

/// Exact orthogonal projection of b onto im(A)^perp, via the normal
/// equations A^T A x = A^T b (always consistent).  The residual is zero
/// iff b lies in the image of A, and A^T r = 0 makes r a checkable
/// non-membership certificate.
inline RatVec image_residual(const RatMat& a, const RatVec& b) {
  const RatMat at = transpose(a);
  const std::size_t cols = at.size();
  RatMat gram = zeros(cols, cols);
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = 0; j < cols; ++j) gram[i][j] = dot(at[i], at[j]);
  RatVec rhs(cols, Rat(0));
  for (std::size_t i = 0; i < cols; ++i) rhs[i] = dot(at[i], b);
  const LinearSolve sol = solve_general(gram, rhs);
  // Normal equations are consistent by construction.
  RatVec fit = matvec(a, sol.particular);
  RatVec residual(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) residual[i] = b[i] - fit[i];
  return residual;
}

/// Solves the square system Ax = b; nullopt when A is singular.
inline std::optional<RatVec> solve_square(RatMat a, RatVec b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t sel = col;
    while (sel < n && a[sel][col] == 0) ++sel;
    if (sel == n) return std::nullopt;
    std::swap(a[sel], a[col]);
    std::swap(b[sel], b[col]);
    const Rat inv_pivot = Rat(1) / a[col][col];
    for (std::size_t j = col; j < n; ++j) a[col][j] *= inv_pivot;
    b[col] *= inv_pivot;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a[i][col] == 0) continue;
      const Rat factor = a[i][col];
      for (std::size_t j = col; j < n; ++j) a[i][j] -= factor * a[col][j];
      b[i] -= factor * b[col];
    }
  }
  return b;
}

/// Indices of a maximal linearly independent subset of rows.
inline std::vector<std::size_t> independent_rows(const RatMat& a) {
  // Row rank equals column rank; run elimination on the transpose so the
  // pivot columns name independent rows of the original matrix.
  const Rref r = reduced_row_echelon(transpose(a));
  return r.pivot_cols;
}

}  // namespace cfl::linalg
