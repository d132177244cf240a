#pragma once

// Shared lattice workhorses: Fincke-Pohst sphere enumeration on an arbitrary
// real basis and a floating-point LLL reduction transform.  Internal to the
// library; not installed.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qsurf/errors.hpp"

namespace qsurf {
namespace detail {

// Visits every nonzero integer coefficient vector x with ||B x|| <= radius
// (both signs).  The callback receives the coefficient vector and the exact
// squared norm threshold is honoured up to a small relative slack; callers
// needing a sharp cut recheck the norm themselves.  Throws BudgetExceeded
// when more than `budget` search nodes are expanded.
template <class Visit>
inline void fp_enumerate(const Eigen::MatrixXd& B, double radius,
                         uint64_t budget, Visit&& visit) {
  const int d = (int)B.cols();
  Eigen::MatrixXd A = B.transpose() * B;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("lattice basis is singular");
  Eigen::MatrixXd R = llt.matrixU();
  const double rho2 = radius * radius * (1.0 + 1e-12) + 1e-15;

  std::vector<long long> x(d, 0);
  uint64_t nodes = 0;

  std::function<void(int, double)> rec = [&](int i, double rem) {
    if (i < 0) {
      for (long long c : x)
        if (c != 0) {
          visit((const std::vector<long long>&)x);
          return;
        }
      return;
    }
    double c = 0;
    for (int j = i + 1; j < d; ++j) c += R(i, j) * (double)x[j];
    double center = -c / R(i, i);
    double half = std::sqrt(std::max(0.0, rem)) / R(i, i);
    long long lo = (long long)std::ceil(center - half - 1e-9);
    long long hi = (long long)std::floor(center + half + 1e-9);
    for (long long t = lo; t <= hi; ++t) {
      if (++nodes > budget)
        throw BudgetExceeded("short-vector enumeration budget exceeded");
      x[i] = t;
      double term = R(i, i) * (double)t + c;
      rec(i - 1, rem - term * term);
    }
    x[i] = 0;
  };
  rec(d - 1, rho2);
}

// Floating LLL (delta = 0.99) returning the unimodular transform columns;
// used to precondition skew bases before enumeration and to seed candidate
// subspaces.  Bounded iteration guard keeps it strictly best-effort.
inline std::vector<std::vector<long long>> lll_transform(
    const Eigen::MatrixXd& B) {
  using Eigen::MatrixXd;
  const int d = (int)B.cols();
  MatrixXd b = B;
  std::vector<std::vector<long long>> U(d, std::vector<long long>(d, 0));
  for (int i = 0; i < d; ++i) U[i][i] = 1;

  int k = 1, guard = 0;
  while (k < d && ++guard < 5000) {
    MatrixXd bs = b;
    MatrixXd mu = MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < j; ++l) {
        double den = bs.col(l).squaredNorm();
        mu(j, l) = den > 0 ? b.col(j).dot(bs.col(l)) / den : 0.0;
        bs.col(j) -= mu(j, l) * bs.col(l);
      }
    for (int j = k - 1; j >= 0; --j) {
      double m = mu(k, j);
      if (std::fabs(m) > 0.5) {
        long long q = llround(m);
        b.col(k) -= (double)q * b.col(j);
        for (int r = 0; r < d; ++r) U[r][k] -= q * U[r][j];
        for (int l = 0; l < j; ++l) mu(k, l) -= (double)q * mu(j, l);
        mu(k, j) -= (double)q;
      }
    }
    double lhs = bs.col(k).squaredNorm();
    double rhs = (0.99 - mu(k, k - 1) * mu(k, k - 1)) * bs.col(k - 1).squaredNorm();
    if (lhs >= rhs) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      for (int r = 0; r < d; ++r) std::swap(U[r][k], U[r][k - 1]);
      k = std::max(1, k - 1);
    }
  }
  return U;
}

}  // namespace detail
}  // namespace qsurf
