// Small dense exact linear algebra, templated over the scalar field
// (Rat or QuadScalar).  Matrices are row-major vector<vector<F>>; every
// dimension in this project is tiny (d <= 10 or so), so clarity beats
// asymptotics throughout.

#pragma once

#include "qsurf/quadfield.hpp"
#include "qsurf/rational.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

namespace qsurf {

template <class F>
using Vec = std::vector<F>;
template <class F>
using Mat = std::vector<Vec<F>>;

inline int sign_of(const Rat& x) { return sgn(x); }
inline int sign_of(const QuadScalar& x) { return x.sign(); }
inline bool is_zero(const Rat& x) { return x == 0; }
inline bool is_zero(const QuadScalar& x) { return x.is_zero(); }

template <class F>
Mat<F> identity(size_t n) {
  Mat<F> I(n, Vec<F>(n, F(0)));
  for (size_t i = 0; i < n; ++i) I[i][i] = F(1);
  return I;
}

template <class F>
Mat<F> transpose(const Mat<F>& A) {
  if (A.empty()) return {};
  Mat<F> T(A[0].size(), Vec<F>(A.size(), F(0)));
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < A[0].size(); ++j) T[j][i] = A[i][j];
  return T;
}

template <class F>
Mat<F> matmul(const Mat<F>& A, const Mat<F>& B) {
  size_t n = A.size(), k = B.size(), m = B.empty() ? 0 : B[0].size();
  Mat<F> C(n, Vec<F>(m, F(0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t l = 0; l < k; ++l) {
      if (is_zero(A[i][l])) continue;
      for (size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
    }
  return C;
}

template <class F>
Vec<F> matvec(const Mat<F>& A, const Vec<F>& x) {
  Vec<F> y(A.size(), F(0));
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
  return y;
}

template <class F>
F dot(const Vec<F>& a, const Vec<F>& b) {
  F s(0);
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// v^T G v
template <class F>
F quad_eval(const Mat<F>& G, const Vec<F>& v) {
  return dot(v, matvec(G, v));
}

// In-place reduced row echelon form; returns pivot column indices.
template <class F>
std::vector<size_t> rref(Mat<F>& A) {
  std::vector<size_t> pivots;
  size_t rows = A.size(), cols = rows ? A[0].size() : 0, r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t p = r;
    while (p < rows && is_zero(A[p][c])) ++p;
    if (p == rows) continue;
    std::swap(A[p], A[r]);
    F inv = F(1) / A[r][c];
    for (size_t j = c; j < cols; ++j) A[r][j] = A[r][j] * inv;
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || is_zero(A[i][c])) continue;
      F f = A[i][c];
      for (size_t j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

template <class F>
size_t rank(Mat<F> A) {
  return rref(A).size();
}

// Basis of the right kernel {x : Ax = 0}, one vector per column.
template <class F>
std::vector<Vec<F>> kernel_basis(Mat<F> A) {
  size_t cols = A.empty() ? 0 : A[0].size();
  auto pivots = rref(A);
  std::vector<bool> is_pivot(cols, false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<Vec<F>> basis;
  for (size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    Vec<F> v(cols, F(0));
    v[free] = F(1);
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -A[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

// Solve Ax = b; empty optional if inconsistent (underdetermined systems get
// the particular solution with free variables = 0).
template <class F>
std::optional<Vec<F>> solve(Mat<F> A, Vec<F> b) {
  size_t rows = A.size(), cols = rows ? A[0].size() : 0;
  for (size_t i = 0; i < rows; ++i) A[i].push_back(b[i]);
  auto pivots = rref(A);
  if (!pivots.empty() && pivots.back() == cols) return std::nullopt;  // 0 = 1 row
  Vec<F> x(cols, F(0));
  for (size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = A[r][cols];
  return x;
}

template <class F>
std::optional<Mat<F>> inverse(const Mat<F>& A) {
  size_t n = A.size();
  Mat<F> W(n, Vec<F>(2 * n, F(0)));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) W[i][j] = A[i][j];
    W[i][n + i] = F(1);
  }
  auto pivots = rref(W);
  if (pivots.size() != n || pivots[n - 1] != n - 1) return std::nullopt;
  Mat<F> Inv(n, Vec<F>(n, F(0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) Inv[i][j] = W[i][n + j];
  return Inv;
}

template <class F>
F determinant(Mat<F> A) {
  size_t n = A.size();
  F det(1);
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && is_zero(A[p][c])) ++p;
    if (p == n) return F(0);
    if (p != c) {
      std::swap(A[p], A[c]);
      det = -det;
    }
    det = det * A[c][c];
    F inv = F(1) / A[c][c];
    for (size_t i = c + 1; i < n; ++i) {
      if (is_zero(A[i][c])) continue;
      F f = A[i][c] * inv;
      for (size_t j = c; j < n; ++j) A[i][j] -= f * A[c][j];
    }
  }
  return det;
}

struct Signature {
  int pos = 0, neg = 0, zero = 0;
  friend bool operator==(const Signature&, const Signature&) = default;
};

template <class F>
struct Diagonalization {
  Mat<F> basis;   // columns b_i with b_i^T G b_j = 0 for i != j
  Vec<F> diag;    // b_i^T G b_i
  Signature sig;
};

// Lagrange congruence diagonalization of a symmetric matrix: returns P with
// P^T G P diagonal.  Exact; the signature is read off the diagonal signs.
template <class F>
Diagonalization<F> diagonalize_symmetric(const Mat<F>& G) {
  size_t n = G.size();
  Mat<F> W = G;          // running P^T G P
  Mat<F> P = identity<F>(n);

  auto colop_add = [&](size_t i, size_t j, const F& c) {
    // b_i += c * b_j : W <- E^T W E with E = I + c e_j e_i^T
    for (size_t k = 0; k < n; ++k) W[k][i] += c * W[k][j];
    for (size_t k = 0; k < n; ++k) W[i][k] += c * W[j][k];
    for (size_t k = 0; k < n; ++k) P[k][i] += c * P[k][j];
  };
  auto colop_swap = [&](size_t i, size_t j) {
    for (size_t k = 0; k < n; ++k) std::swap(W[k][i], W[k][j]);
    for (size_t k = 0; k < n; ++k) std::swap(W[i][k], W[j][k]);
    for (size_t k = 0; k < n; ++k) std::swap(P[k][i], P[k][j]);
  };

  for (size_t k = 0; k < n; ++k) {
    if (is_zero(W[k][k])) {
      size_t j = k + 1;
      for (; j < n; ++j)
        if (!is_zero(W[j][j])) break;
      if (j < n) {
        colop_swap(k, j);
      } else {
        // all-zero diagonal in the trailing block: find any off-diagonal entry
        bool found = false;
        for (size_t a = k; a < n && !found; ++a)
          for (size_t b = a + 1; b < n && !found; ++b)
            if (!is_zero(W[a][b])) {
              colop_add(a, b, F(1));  // makes W[a][a] = 2 W[a][b] != 0
              if (a != k) colop_swap(k, a);
              found = true;
            }
        if (!found) break;  // trailing block identically zero
      }
    }
    F inv = F(1) / W[k][k];
    for (size_t j = k + 1; j < n; ++j)
      if (!is_zero(W[j][k])) colop_add(j, k, -W[j][k] * inv);
  }

  Diagonalization<F> out;
  out.basis = P;
  out.diag.resize(n, F(0));
  for (size_t i = 0; i < n; ++i) {
    out.diag[i] = W[i][i];
    int s = sign_of(W[i][i]);
    if (s > 0)
      ++out.sig.pos;
    else if (s < 0)
      ++out.sig.neg;
    else
      ++out.sig.zero;
  }
  return out;
}

// ---- integer (mpz) lattice normal forms -----------------------------------

// Smith decomposition of an integer matrix A (r x c): A = U' * S * Vinv with
// U' unimodular (not returned), S diagonal (s_1 | s_2 | ...), Vinv a c x c
// unimodular matrix.  Consequently the row lattice of A is spanned over Z by
// { diag[j] * row_j(Vinv) }, and its saturation (rational row span meet Z^c)
// by { row_j(Vinv) : diag[j] != 0 } -- which is what the lattice code needs.
struct SmithResult {
  std::vector<Int> diag;  // min(r, c) entries, some possibly zero
  Mat<Int> vinv;          // c x c unimodular
};
SmithResult smith_normal_form(Mat<Int> A);

// gcd of all k x k minors of A (k = min(rows, cols) by default).  Zero if all
// minors vanish.
Int minors_gcd(const Mat<Int>& A, size_t k);

}  // namespace qsurf
