// Quadratic forms with exact rational Gram matrices, linear maps with
// entries in a real quadratic field, and the exact classification of a pair
// (Q, M): dimension/rank conditions, the signature of Q restricted to
// ker(M), and irrationality of the row span.  A numeric canonicalization
// produces a real change of basis g taking (Q, M) to the reference pair
// (Q0, M0), certified a posteriori by residuals.

#pragma once

#include "qsurf/linalg.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace qsurf {

struct QuadraticForm {
  size_t dim = 0;
  Mat<Rat> gram;  // symmetric, Q(v) = v^T gram v

  bool nondegenerate() const;
};

struct LinearMap {
  size_t rows = 0, cols = 0;
  Int disc = 1;  // the D of Q(sqrt(D)); 1 when all entries rational
  Mat<QuadScalar> entries;
};

// --- construction helpers ---------------------------------------------------

// Gram matrix from the coefficients of a polynomial sum c_ij x_i x_j (i <= j):
// diagonal kept, cross coefficients split in half.
QuadraticForm form_from_poly(size_t d, const std::vector<std::tuple<size_t, size_t, Rat>>& coeffs);

// One-row map from QuadScalar coefficients.
LinearMap map_from_row(const Vec<QuadScalar>& row);

// --- exact operations --------------------------------------------------------

Rat evaluate_form(const QuadraticForm& Q, const std::vector<Int>& v);
QuadScalar evaluate_form_quad(const QuadraticForm& Q, const Vec<QuadScalar>& v);

// M applied to an integer vector, one QuadScalar per row.
Vec<QuadScalar> evaluate_map(const LinearMap& M, const std::vector<Int>& v);
Vec<QuadScalar> evaluate_map_quad(const LinearMap& M, const Vec<QuadScalar>& v);

Signature signature(const QuadraticForm& Q);

// Exact basis of ker(M), d - s vectors (throws if M is not full rank).
std::vector<Vec<QuadScalar>> kernel_basis(const LinearMap& M);

struct Restriction {
  Mat<QuadScalar> gram;  // Gram of Q pulled back to kernel_basis(M)
  Signature sig;
};
Restriction restrict_form(const QuadraticForm& Q, const LinearMap& M);

// --- classification ----------------------------------------------------------

enum class Regime { MainTheorem, Exceptional21, Exceptional22, Invalid };
enum class Nonempty { Unknown, Witnessed };

const char* regime_name(Regime r);

struct PairClass {
  bool cond1 = false;  // d > 2s and rank(Q|ker M) = d - s
  bool cond2 = false;  // kernel signature (r1, r2) with r1 >= 3, r2 >= 1 up to negation
  bool cond3 = false;  // no real combination of the rows of M is a rational covector
  Signature kernel_signature;  // as computed for Q itself (not negated)
  bool negated = false;        // true if -Q was used to order r1 >= r2 for naming
  Regime regime = Regime::Invalid;
  Nonempty nonempty = Nonempty::Unknown;
  std::vector<std::string> reasons;  // human-readable failure notes
};

PairClass classify_pair(const QuadraticForm& Q, const LinearMap& M, const Rat& a,
                        const std::optional<std::vector<Int>>& witness = std::nullopt);

// --- canonicalization ---------------------------------------------------------

// Change of basis to the reference pair: Q0(v) = q(v_1..v_s) + 2 v_{s+1} v_d
// + sum_{i=s+2}^{s+r1} v_i^2 - sum_{i=s+r1+1}^{d-1} v_i^2 with q an s x s
// block, and M0(v) = (v_1, ..., v_s).  The returned g satisfies
// Q(v) = Q0(g v) and M_i(v) = row_scale[i] * (g v)_i, det g = 1.
struct Canonicalization {
  Eigen::MatrixXd g;
  Eigen::MatrixXd qblock;          // the q of Q0 (s x s symmetric)
  std::vector<double> row_scale;   // per-row proportionality M_i = scale_i * M0_i(g .)
  int r1 = 0, r2 = 0;
  double residual = 0.0;           // || g^T Gram(Q0) g - Gram(Q) ||_inf
  bool exact_identity = false;     // input was already in reference shape
};

// Throws std::domain_error when conditions 1-2 fail (d <= 2s, degenerate
// restriction, or a definite kernel), std::runtime_error on numerical
// degeneracy.
Canonicalization canonicalize_pair(const QuadraticForm& Q, const LinearMap& M);

// Gram matrix of the reference form for a given q block and split (r1, r2).
Eigen::MatrixXd canonical_gram(const Eigen::MatrixXd& qblock, int r1, int r2);

// --- plain-text pair files -----------------------------------------------------
//
//   # comment lines and blank lines are ignored
//   Q <d>
//   <d rows of d whitespace-separated rationals p/q>   (Gram matrix, symmetric)
//   M <s> <d> <D>
//   <s rows of d tokens "p/q", "p/q+r/t*sqrtD", "p/q-r/t*sqrtD", "r/t*sqrtD">
//
// D must be a squarefree integer >= 1; D = 1 forbids radicals.

struct Pair {
  QuadraticForm Q;
  LinearMap M;
};

Pair parse_pair_text(const std::string& text);
Pair load_pair_file(const std::string& path);

}  // namespace qsurf
