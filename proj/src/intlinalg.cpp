#include "qsurf/linalg.hpp"

namespace qsurf {

// Textbook Smith normal form by alternating row/column gcd reduction.
// Matrices here are at most ~6x6 with small entries, so no care is taken to
// control coefficient growth.
SmithResult smith_normal_form(Mat<Int> A) {
  size_t r = A.size(), c = r ? A[0].size() : 0;
  SmithResult out;
  out.vinv = identity<Int>(c);

  auto col_add = [&](size_t i, size_t j, const Int& f) {  // col_i += f * col_j
    for (size_t k = 0; k < r; ++k) A[k][i] += f * A[k][j];
    for (size_t k = 0; k < c; ++k) out.vinv[j][k] -= f * out.vinv[i][k];
  };
  auto col_swap = [&](size_t i, size_t j) {
    for (size_t k = 0; k < r; ++k) std::swap(A[k][i], A[k][j]);
    std::swap(out.vinv[i], out.vinv[j]);
  };
  auto col_neg = [&](size_t i) {
    for (size_t k = 0; k < r; ++k) A[k][i] = -A[k][i];
    for (size_t k = 0; k < c; ++k) out.vinv[i][k] = -out.vinv[i][k];
  };
  auto row_add = [&](size_t i, size_t j, const Int& f) {  // row_i += f * row_j
    for (size_t k = 0; k < c; ++k) A[i][k] += f * A[j][k];
  };

  size_t n = std::min(r, c);
  for (size_t t = 0; t < n; ++t) {
    // Move a nonzero entry of the trailing block to (t, t).
    size_t pi = t, pj = t;
    bool found = false;
    for (size_t i = t; i < r && !found; ++i)
      for (size_t j = t; j < c && !found; ++j)
        if (A[i][j] != 0) {
          pi = i;
          pj = j;
          found = true;
        }
    if (!found) break;  // rest is zero
    if (pi != t) std::swap(A[pi], A[t]);
    if (pj != t) col_swap(pj, t);

    // Kill row t and column t outside the pivot; restart whenever a
    // remainder refreshes the pivot.
    for (bool dirty = true; dirty;) {
      dirty = false;
      for (size_t i = t + 1; i < r; ++i) {
        if (A[i][t] == 0) continue;
        Int q = A[i][t] / A[t][t];
        row_add(i, t, -q);
        if (A[i][t] != 0) {  // remainder becomes the new, smaller pivot
          std::swap(A[i], A[t]);
          dirty = true;
        }
      }
      for (size_t j = t + 1; j < c; ++j) {
        if (A[t][j] == 0) continue;
        Int q = A[t][j] / A[t][t];
        col_add(j, t, -q);
        if (A[t][j] != 0) {
          col_swap(j, t);
          dirty = true;
        }
      }
    }
    if (A[t][t] < 0) col_neg(t);

    // Divisibility fix-up: if some trailing entry is not divisible by the
    // pivot, fold its column in and redo this step.
    bool redo = false;
    for (size_t i = t + 1; i < r && !redo; ++i)
      for (size_t j = t + 1; j < c && !redo; ++j)
        if (A[i][j] % A[t][t] != 0) {
          col_add(t, j, 1);
          redo = true;
        }
    if (redo) --t;
  }

  for (size_t t = 0; t < n; ++t) out.diag.push_back(A[t][t]);
  return out;
}

Int minors_gcd(const Mat<Int>& A, size_t k) {
  size_t r = A.size(), c = r ? A[0].size() : 0;
  if (k == 0 || k > r || k > c) return 0;
  std::vector<size_t> ri(k), ci(k);
  Int g = 0;

  // enumerate k-subsets of [0, n)
  auto next_subset = [](std::vector<size_t>& s, size_t n) {
    size_t k2 = s.size();
    for (size_t i = k2; i-- > 0;) {
      if (s[i] < n - (k2 - i)) {
        ++s[i];
        for (size_t j = i + 1; j < k2; ++j) s[j] = s[j - 1] + 1;
        return true;
      }
    }
    return false;
  };

  for (size_t i = 0; i < k; ++i) ri[i] = i;
  do {
    for (size_t i = 0; i < k; ++i) ci[i] = i;
    do {
      Mat<Rat> sub(k, Vec<Rat>(k));
      for (size_t i = 0; i < k; ++i)
        for (size_t j = 0; j < k; ++j) sub[i][j] = Rat(A[ri[i]][ci[j]]);
      Rat d = determinant(sub);
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_num().get_mpz_t());
      if (g == 1) return g;
    } while (next_subset(ci, c));
  } while (next_subset(ri, r));
  return g;
}

}  // namespace qsurf
