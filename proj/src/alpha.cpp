#include "qsurf/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "qsurf/linalg.hpp"
#include "lattice_internal.hpp"

namespace qsurf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ShortVec {
  std::vector<long long> coeff;
  double norm2 = 0;
};

void primitivize(std::vector<long long>& v) {
  long long g = 0;
  for (long long c : v) g = std::gcd(g, c < 0 ? -c : c);
  if (g > 1)
    for (long long& c : v) c /= g;
  for (long long c : v) {
    if (c > 0) break;
    if (c < 0) {
      for (long long& e : v) e = -e;
      break;
    }
  }
}

// All primitive nonzero lattice vectors of Euclidean norm <= radius, by
// standard enumeration on the Cholesky factor of B^T B; ascending by norm.
std::vector<ShortVec> short_vectors(const MatrixXd& B, double radius,
                                    uint64_t budget) {
  const int d = (int)B.cols();
  MatrixXd A = B.transpose() * B;
  const double rho2 = radius * radius * (1.0 + 1e-12) + 1e-15;

  std::set<std::vector<long long>> seen;
  detail::fp_enumerate(B, radius, budget,
                       [&](const std::vector<long long>& x) {
                         std::vector<long long> v = x;
                         primitivize(v);
                         seen.insert(std::move(v));
                       });

  std::vector<ShortVec> out;
  out.reserve(seen.size());
  for (const auto& v : seen) {
    VectorXd w(d);
    for (int i = 0; i < d; ++i) w[i] = (double)v[i];
    double n2 = w.dot(A * w);
    if (n2 > rho2) continue;  // primitivization cannot grow the norm, but be safe
    out.push_back({v, n2});
  }
  std::sort(out.begin(), out.end(), [](const ShortVec& a, const ShortVec& b) {
    if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
    return a.coeff < b.coeff;
  });
  return out;
}

// Saturation of the span: primitive basis of (Q-span of rows) intersected
// with Z^d, read off the Smith decomposition.  Empty result signals entries
// outside 64-bit range (candidate is then skipped).
std::vector<std::vector<long long>> saturate_rows(
    const std::vector<std::vector<long long>>& rows, size_t d) {
  Mat<Int> A(rows.size(), std::vector<Int>(d));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < d; ++j) A[i][j] = Int((long)rows[i][j]);
  SmithResult s = smith_normal_form(A);
  std::vector<std::vector<long long>> out;
  for (size_t j = 0; j < s.diag.size(); ++j) {
    if (sgn(s.diag[j]) == 0) continue;
    std::vector<long long> row(d);
    for (size_t c = 0; c < d; ++c) {
      if (!s.vinv[j][c].fits_slong_p()) return {};
      row[c] = (long long)s.vinv[j][c].get_si();
    }
    primitivize(row);
    out.push_back(std::move(row));
  }
  return out;
}

double unit_ball_volume(int i) {
  return std::pow(M_PI, 0.5 * i) / std::tgamma(0.5 * i + 1.0);
}

double covolume_or_zero(const MatrixXd& B,
                        const std::vector<std::vector<long long>>& vecs) {
  MatrixXd V((int)B.cols(), (int)vecs.size());
  for (size_t c = 0; c < vecs.size(); ++c)
    for (int r = 0; r < B.cols(); ++r) V(r, (int)c) = (double)vecs[c][r];
  MatrixXd G = B * V;
  double det = (G.transpose() * G).determinant();
  if (!(det > 1e-20)) return 0.0;
  return std::sqrt(det);
}

AlphaResult single_pass(const MatrixXd& B, double rho,
                        const AlphaOptions& opts) {
  const int d = (int)B.cols();
  std::vector<ShortVec> sv = short_vectors(B, rho, opts.vector_budget);

  AlphaResult res;
  res.search_radius = rho;
  res.per_degree.assign(d + 1, 0.0);
  res.witnesses.assign(d + 1, SubspaceWitness{});
  res.per_degree[0] = 1.0;
  res.per_degree[d] = 1.0 / std::fabs(B.determinant());

  std::vector<double> bestD(d + 1, std::numeric_limits<double>::infinity());

  auto consider = [&](int deg, const std::vector<std::vector<long long>>& rows) {
    if ((int)rows.size() != deg) return;
    std::vector<std::vector<long long>> sat = saturate_rows(rows, (size_t)d);
    if ((int)sat.size() != deg) return;
    double cv = covolume_or_zero(B, sat);
    if (cv <= 0) return;
    if (cv < bestD[deg]) {
      bestD[deg] = cv;
      res.per_degree[deg] = 1.0 / cv;
      res.witnesses[deg] = SubspaceWitness{deg, sat, cv};
    }
  };

  // degree-1 candidates: every primitive short vector
  for (const ShortVec& v : sv) consider(1, {v.coeff});

  // subsets of the shortest K_i vectors, K_i capped so the subset count
  // stays inside the configured budget
  for (int deg = 2; deg < d; ++deg) {
    size_t K = std::min<size_t>(sv.size(), 64);
    while (K > (size_t)deg) {
      double cnt = 1;
      for (int j = 0; j < deg; ++j) cnt *= (double)(K - j) / (double)(j + 1);
      if (cnt <= (double)opts.subset_cap) break;
      --K;
    }
    if (K < (size_t)deg) continue;
    std::vector<size_t> idx(deg);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::vector<std::vector<long long>> rows;
      rows.reserve(deg);
      for (int j = 0; j < deg; ++j) rows.push_back(sv[idx[j]].coeff);
      if (covolume_or_zero(B, rows) > 0) consider(deg, rows);
      int p = deg - 1;
      while (p >= 0 && idx[p] == K - deg + p) --p;
      if (p < 0) break;
      ++idx[p];
      for (int q = p + 1; q < deg; ++q) idx[q] = idx[q - 1] + 1;
    }
  }

  // reduced-basis prefixes as extra candidates
  if (d >= 2) {
    auto U = detail::lll_transform(B);
    for (int deg = 1; deg < d; ++deg) {
      std::vector<std::vector<long long>> rows;
      for (int c = 0; c < deg; ++c) {
        std::vector<long long> row(d);
        for (int r = 0; r < d; ++r) row[r] = U[r][c];
        rows.push_back(std::move(row));
      }
      consider(deg, rows);
    }
  }

  res.alpha = 0;
  for (double a : res.per_degree) res.alpha = std::max(res.alpha, a);

  // successive-minima lower bounds from the enumeration (missing minima are
  // conservatively set to the search radius)
  std::vector<double> lam(d + 1, rho);
  {
    MatrixXd chosen(d, 0);
    int cnt = 0;
    for (const ShortVec& v : sv) {
      if (cnt == d) break;
      VectorXd w(d);
      for (int i = 0; i < d; ++i) w[i] = (double)v.coeff[i];
      VectorXd real = B * w;
      bool indep = true;
      if (cnt > 0) {
        VectorXd sol = chosen.leftCols(cnt).colPivHouseholderQr().solve(real);
        indep = (real - chosen.leftCols(cnt) * sol).norm() > 1e-7 * real.norm();
      }
      if (!indep) continue;
      chosen.conservativeResize(d, cnt + 1);
      chosen.col(cnt) = real;
      lam[++cnt] = std::sqrt(v.norm2);
    }
  }

  // Minkowski second theorem: a subspace of degree i with covolume below the
  // incumbent must be spanned by vectors of norm at most R_i; certified once
  // the search radius dominates every R_i.
  bool cert = true;
  for (int i = 1; i < d && cert; ++i) {
    if (!std::isfinite(bestD[i])) {
      cert = false;
      break;
    }
    double prod = 1;
    for (int j = 1; j < i; ++j) prod *= lam[j];
    double Ri = std::pow(2.0, i) * bestD[i] / (unit_ball_volume(i) * prod);
    if (rho < Ri) cert = false;
  }
  res.certified = cert;
  return res;
}

}  // namespace

double covolume(const MatrixXd& B,
                const std::vector<std::vector<long long>>& vectors) {
  if (B.rows() != B.cols() || B.rows() < 1)
    throw std::invalid_argument("basis matrix must be square");
  if (vectors.empty()) return 1.0;
  for (const auto& v : vectors)
    if ((Eigen::Index)v.size() != B.cols())
      throw std::invalid_argument("coefficient vector has wrong dimension");
  double cv = covolume_or_zero(B, vectors);
  if (cv <= 0) throw std::invalid_argument("dependent vectors in covolume");
  return cv;
}

AlphaResult alpha_of(const MatrixXd& B, double radius,
                     const AlphaOptions& opts) {
  if (B.rows() != B.cols() || B.rows() < 1)
    throw std::invalid_argument("basis matrix must be square");
  if (!(radius > 0) || !std::isfinite(radius))
    throw std::invalid_argument("search radius must be positive");
  double det = std::fabs(B.determinant());
  if (std::fabs(det - 1.0) > opts.det_tol)
    throw std::invalid_argument("lattice basis must be unimodular");

  double rho = radius;
  AlphaResult last;
  bool have_last = false;
  for (int iter = 0; iter < 60; ++iter) {
    AlphaResult res;
    try {
      res = single_pass(B, rho, opts);
    } catch (const BudgetExceeded&) {
      if (!have_last) throw;
      return last;  // growth stopped by the budget: report uncertified
    }
    if (res.certified || !opts.adaptive) return res;
    last = res;
    have_last = true;
    rho *= 1.5;
  }
  return last;
}

SurfacePointCache build_surface_cache(const QuadraticForm& Q, const Rat& a,
                                      double radius, const EnumOptions& opts) {
  EnumOptions o = opts;
  o.collect = true;
  SurfacePointCache cache;
  cache.points = enumerate_surface(Q, a, Annulus::ball(radius), nullptr,
                                   nullptr, o)
                     .points;
  cache.radius = radius;
  return cache;
}

double F_of_lattice(const std::function<double(const VectorXd&)>& f,
                    double support_radius, const MatrixXd& x,
                    const SurfacePointCache& cache) {
  const int d = (int)x.rows();
  if (x.rows() != x.cols())
    throw std::invalid_argument("group element must be a square matrix");
  if ((size_t)d != cache.points.dim)
    throw std::invalid_argument("cache dimension mismatch");
  if (!(support_radius > 0) || !std::isfinite(support_radius))
    throw std::invalid_argument("support radius must be positive");
  double det = x.determinant();
  if (std::fabs(det) < 1e-12)
    throw std::invalid_argument("group element must be invertible");
  double required = x.inverse().norm() * support_radius;
  if (cache.radius + 1e-9 < required) {
    std::ostringstream msg;
    msg << "surface cache radius " << cache.radius
        << " is insufficient; need at least " << required;
    throw std::invalid_argument(msg.str());
  }
  double sum = 0;
  VectorXd v(d);
  for (size_t i = 0; i < cache.points.count(); ++i) {
    const long long* row = cache.points.row(i);
    for (int j = 0; j < d; ++j) v[j] = (double)row[j];
    VectorXd y = x * v;
    if (y.norm() <= support_radius) sum += f(y);
  }
  return sum;
}

}  // namespace qsurf
