// Numeric change of basis carrying (Q, M) to the reference pair (Q0, M0).
//
// Construction: split off ker(M); exact Lagrange diagonalization of Q|ker
// yields an orthogonal frame with values +-1 after scaling, from which one
// positive/negative pair is recombined into the isotropic hyperbolic pair
// (u, w) with B_Q(u, w) = 1 carrying the 2 v_{s+1} v_d term.  The first s
// columns solve M(c_i) = e_i subject to Q-orthogonality against ker(M)
// (uniquely solvable because Q|ker is nondegenerate).  Everything before the
// final inversion is exact; the result is certified by the Gram residual.

#include "qsurf/forms.hpp"

#include <cmath>

namespace qsurf {

Eigen::MatrixXd canonical_gram(const Eigen::MatrixXd& qblock, int r1, int r2) {
  int s = static_cast<int>(qblock.rows());
  int d = s + r1 + r2;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
  G.topLeftCorner(s, s) = qblock;
  G(s, d - 1) = G(d - 1, s) = 1.0;             // 2 v_{s+1} v_d
  for (int i = 0; i < r1 - 1; ++i) G(s + 1 + i, s + 1 + i) = 1.0;
  for (int i = 0; i < r2 - 1; ++i) G(s + r1 + i, s + r1 + i) = -1.0;
  return G;
}

namespace {

bool exactly_canonical(const QuadraticForm& Q, const LinearMap& M, int r1, int r2) {
  size_t d = Q.dim, s = M.rows;
  for (size_t i = 0; i < s; ++i)
    for (size_t j = 0; j < d; ++j) {
      QuadScalar want(i == j ? Rat(1) : Rat(0));
      if (M.entries[i][j] != want) return false;
    }
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) {
      if (i < s && j < s) continue;  // q block is free
      Rat want(0);
      if ((i == s && j == d - 1) || (i == d - 1 && j == s))
        want = 1;
      else if (i == j && i > s && i < s + static_cast<size_t>(r1))
        want = 1;
      else if (i == j && i >= s + static_cast<size_t>(r1) && i < d - 1)
        want = -1;
      if (Q.gram[i][j] != want) return false;
    }
  return true;
}

}  // namespace

Canonicalization canonicalize_pair(const QuadraticForm& Q, const LinearMap& M) {
  size_t d = Q.dim, s = M.rows;
  if (M.cols != d) throw std::domain_error("dimension mismatch");
  if (d <= 2 * s) throw std::domain_error("requires d > 2s");

  auto ker = kernel_basis(M);
  auto restr = restrict_form(Q, M);
  if (restr.sig.zero != 0) throw std::domain_error("restriction to ker(M) is degenerate");
  int r1 = restr.sig.pos, r2 = restr.sig.neg;
  if (r1 < 1 || r2 < 1) throw std::domain_error("restriction to ker(M) is definite");

  Canonicalization out;
  out.r1 = r1;
  out.r2 = r2;

  if (exactly_canonical(Q, M, r1, r2)) {
    out.g = Eigen::MatrixXd::Identity(d, d);
    out.qblock.resize(s, s);
    for (size_t i = 0; i < s; ++i)
      for (size_t j = 0; j < s; ++j) out.qblock(i, j) = to_double(Q.gram[i][j]);
    out.row_scale.assign(s, 1.0);
    out.residual = 0.0;
    out.exact_identity = true;
    return out;
  }

  // Exact diagonal frame for Q|ker, then +-1 normalization in doubles.
  auto dg = diagonalize_symmetric(restr.gram);
  std::vector<Eigen::VectorXd> pos, neg;
  for (size_t i = 0; i < ker.size(); ++i) {
    // ambient vector of the i-th diagonal direction: sum_j P[j][i] * ker[j]
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    for (size_t j = 0; j < ker.size(); ++j) {
      double c = dg.basis[j][i].to_double();
      if (c == 0.0) continue;
      for (size_t k = 0; k < d; ++k) v[k] += c * ker[j][k].to_double();
    }
    double delta = dg.diag[i].to_double();
    if (delta > 0)
      pos.push_back(v / std::sqrt(delta));
    else
      neg.push_back(v / std::sqrt(-delta));
  }

  // First s columns: M(c_i) = e_i and B_Q(c_i, ker) = 0, solved exactly.
  Mat<QuadScalar> G(d, Vec<QuadScalar>(d));
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) G[i][j] = QuadScalar(Q.gram[i][j]);
  Mat<QuadScalar> A(d, Vec<QuadScalar>(d, QuadScalar(0)));
  for (size_t i = 0; i < s; ++i) A[i] = M.entries[i];
  for (size_t j = 0; j < ker.size(); ++j) A[s + j] = matvec(G, ker[j]);

  std::vector<Eigen::VectorXd> cq(s);
  for (size_t i = 0; i < s; ++i) {
    Vec<QuadScalar> rhs(d, QuadScalar(0));
    rhs[i] = QuadScalar(1);
    auto x = solve(A, rhs);
    if (!x) throw std::runtime_error("singular system while splitting off ker(M)");
    cq[i] = Eigen::VectorXd::Zero(d);
    for (size_t k = 0; k < d; ++k) cq[i][k] = (*x)[k].to_double();
  }

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::VectorXd u = (pos[0] + neg[0]) * inv_sqrt2;   // isotropic, B(u,w)=1
  Eigen::VectorXd w = (pos[0] - neg[0]) * inv_sqrt2;

  Eigen::MatrixXd C(d, d);
  for (size_t i = 0; i < s; ++i) C.col(i) = cq[i];
  C.col(s) = u;
  for (int i = 1; i < r1; ++i) C.col(s + i) = pos[i];
  for (int i = 1; i < r2; ++i) C.col(s + r1 - 1 + i) = neg[i];
  C.col(d - 1) = w;

  double det = C.determinant();
  if (std::abs(det) < 1e-12) throw std::runtime_error("numerically degenerate change of basis");
  double tau = std::pow(std::abs(det), -1.0 / static_cast<double>(s));
  for (size_t i = 0; i < s; ++i) C.col(i) *= tau;
  if (det < 0) C.col(s).swap(C.col(d - 1));  // u <-> w leaves Q0 invariant, flips det

  Eigen::MatrixXd Gd(d, d);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) Gd(i, j) = to_double(Q.gram[i][j]);

  out.qblock = C.leftCols(s).transpose() * Gd * C.leftCols(s);
  out.qblock = 0.5 * (out.qblock + out.qblock.transpose().eval());
  out.row_scale.assign(s, tau);
  out.g = C.inverse();

  Eigen::MatrixXd G0 = canonical_gram(out.qblock, r1, r2);
  out.residual = (out.g.transpose() * G0 * out.g - Gd).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace qsurf
