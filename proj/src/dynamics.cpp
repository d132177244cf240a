#include "qsurf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "lattice_internal.hpp"
#include "rng_internal.hpp"

namespace qsurf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using detail::sub_gaussian;
using detail::sub_uniform;

// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the recurrence).
void gauss_legendre(int n, std::vector<double>& xs, std::vector<double>& ws) {
  xs.assign(n, 0.0);
  ws.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    xs[i] = -x;
    xs[n - 1 - i] = x;
    ws[i] = w;
    ws[n - 1 - i] = w;
  }
}

// Uniform direction on S^{r-1}, r >= 2; consumes Gaussian draws from ctr.
VectorXd sphere_dir(int r, uint64_t seed, uint64_t stream, uint64_t& ctr) {
  VectorXd g(r);
  double nrm = 0.0;
  do {
    for (int i = 0; i < r; ++i) g[i] = sub_gaussian(seed, stream, ctr++);
    nrm = g.norm();
  } while (nrm < 1e-12);
  return g / nrm;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / (double)xs.size();
}

double stderr_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / ((double)xs.size() - 1.0) / (double)xs.size());
}

}  // namespace

MatrixXd DiagonalFlow::matrix(double t) const {
  if (s < 0 || d < s + 2)
    throw std::invalid_argument("flow needs d >= s + 2 and s >= 0");
  MatrixXd m = MatrixXd::Identity(d, d);
  m(s, s) = std::exp(-t);
  m(d - 1, d - 1) = std::exp(t);
  return m;
}

MatrixXd conjugated_flow(const MatrixXd& g, const DiagonalFlow& flow,
                         double t) {
  if (g.rows() != g.cols() || (int)g.rows() != flow.d)
    throw std::invalid_argument("change of basis must be d x d");
  return g.partialPivLu().solve(flow.matrix(t) * g);
}

CompactSampler make_compact_sampler(int r1, int r2, int s, uint64_t seed) {
  if (r1 < 1 || r2 < 1 || s < 0)
    throw std::invalid_argument("block sizes must satisfy r1, r2 >= 1, s >= 0");
  CompactSampler K;
  K.r1 = r1;
  K.r2 = r2;
  K.s = s;
  K.d = s + r1 + r2;
  K.seed = seed;
  const int d = K.d;
  const double isq = M_SQRT1_2;
  MatrixXd F = MatrixXd::Identity(d, d);
  F(s, s) = isq;
  F(d - 1, s) = isq;
  F(s, d - 1) = isq;
  F(d - 1, d - 1) = -isq;
  K.f_basis = F;
  return K;
}

MatrixXd haar_sample_at(const CompactSampler& K, uint64_t index) {
  const int d = K.d;
  uint64_t ctr = 0;
  auto so_block = [&](int r) -> MatrixXd {
    if (r == 1) return MatrixXd::Ones(1, 1);
    MatrixXd G(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) G(i, j) = sub_gaussian(K.seed, index, ctr++);
    Eigen::HouseholderQR<MatrixXd> qr(G);
    MatrixXd Q = qr.householderQ();
    MatrixXd R = qr.matrixQR();
    for (int j = 0; j < r; ++j)
      if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    if (Q.determinant() < 0) Q.col(r - 1) = -Q.col(r - 1);
    return Q;
  };
  MatrixXd blk = MatrixXd::Identity(d, d);
  blk.block(K.s, K.s, K.r1, K.r1) = so_block(K.r1);
  blk.block(K.s + K.r1, K.s + K.r1, K.r2, K.r2) = so_block(K.r2);
  return K.f_basis * blk * K.f_basis.transpose();
}

std::vector<MatrixXd> haar_sample(const CompactSampler& K, size_t n) {
  std::vector<MatrixXd> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(haar_sample_at(K, i));
  return out;
}

double PlateauBump::operator()(const VectorXd& y) const {
  if (y.size() != center.size())
    throw std::invalid_argument("bump evaluated at wrong dimension");
  if (!(0.0 <= plateau_radius && plateau_radius < support_radius))
    throw std::invalid_argument("bump needs 0 <= plateau < support radius");
  double u = (y - center).norm();
  if (u <= plateau_radius) return 1.0;
  if (u >= support_radius) return 0.0;
  double x = (u - plateau_radius) / (support_radius - plateau_radius);
  return 1.0 - x * x * (3.0 - 2.0 * x);
}

AlphaOptions spherical_alpha_defaults() {
  AlphaOptions o;
  o.subset_cap = 400;
  return o;
}

std::vector<SphericalSeriesRow> spherical_alpha_average(
    const MatrixXd& B, const DiagonalFlow& flow, const CompactSampler& K,
    const std::vector<double>& t_grid, double delta, size_t n,
    const AlphaOptions& opts) {
  if (!(delta > 0.0 && delta <= 2.0))
    throw std::invalid_argument("exponent must lie in (0, 2]");
  if (B.rows() != B.cols() || (int)B.rows() != flow.d || K.d != flow.d)
    throw std::invalid_argument("dimension mismatch in spherical average");
  if (n == 0) throw std::invalid_argument("need at least one sample");

  std::vector<MatrixXd> ks = haar_sample(K, n);
  std::vector<SphericalSeriesRow> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    MatrixXd at = flow.matrix(t);
    std::vector<double> vals;
    vals.reserve(n);
    size_t excluded = 0;
    for (size_t j = 0; j < n; ++j) {
      MatrixXd M = at * ks[j] * B;
      try {
        AlphaResult r = alpha_of(M, 1.0, opts);
        if (!r.certified) {
          ++excluded;
          continue;
        }
        vals.push_back(std::pow(r.alpha, delta));
      } catch (const BudgetExceeded&) {
        ++excluded;
      }
    }
    SphericalSeriesRow row;
    row.t = t;
    row.value = mean_of(vals);
    row.std_error = stderr_of(vals, row.value);
    row.excluded_fraction = (double)excluded / (double)n;
    rows.push_back(row);
  }
  return rows;
}

double j_integral(const std::function<double(const VectorXd&)>& f,
                  const CanonicalSurface& surf, const VectorXd& ell, double r,
                  double half_width, int nodes_per_dim) {
  if (surf.s != 1)
    throw std::invalid_argument("radial integral requires a 1 x 1 q block");
  if (ell.size() != 1)
    throw std::invalid_argument("ell must have one entry per q-block row");
  if (!(r > 0.0)) throw std::invalid_argument("radial slot must be positive");
  if (!(half_width > 0.0) || nodes_per_dim < 1)
    throw std::invalid_argument("invalid quadrature parameters");
  const int r1 = surf.r1, r2 = surf.r2;
  if (r1 < 1 || r2 < 1) throw std::invalid_argument("invalid block sizes");
  const int d = 1 + r1 + r2;
  const int m = d - 3;  // number of middle coordinates

  std::vector<double> xs, ws;
  gauss_legendre(nodes_per_dim, xs, ws);

  const double qval = (double)surf.q_sign * ell[0] * ell[0];
  VectorXd y(d);
  y[0] = ell[0];
  y[1] = r;

  std::vector<int> idx(m, 0);
  double sum = 0.0;
  while (true) {
    double wprod = 1.0;
    double quad = qval;
    for (int i = 0; i < m; ++i) {
      double vi = half_width * xs[idx[i]];
      int coord = 2 + i;  // canonical coordinates 2..d-2
      y[coord] = vi;
      wprod *= half_width * ws[idx[i]];
      quad += (coord <= r1 ? 1.0 : -1.0) * vi * vi;
    }
    y[d - 1] = (surf.a - quad) / (2.0 * r);
    sum += wprod * f(y);

    int i = 0;
    for (; i < m; ++i) {
      if (++idx[i] < nodes_per_dim) break;
      idx[i] = 0;
    }
    if (i == m) break;
  }
  return sum / std::pow(r, m);
}

JApproxResult j_approximation_error(const PlateauBump& f,
                                    const CanonicalSurface& surf,
                                    const VectorXd& v, double t, size_t n,
                                    uint64_t seed, bool importance) {
  if (surf.s != 1)
    throw std::invalid_argument("approximation check requires a 1 x 1 q block");
  const int r1 = surf.r1, r2 = surf.r2;
  const int d = 1 + r1 + r2;
  if ((int)v.size() != d || (int)f.center.size() != d)
    throw std::invalid_argument("dimension mismatch");
  if (n == 0) throw std::invalid_argument("need at least one sample");

  // The vector must lie on the canonical surface.
  double quad = (double)surf.q_sign * v[0] * v[0] + 2.0 * v[1] * v[d - 1];
  for (int i = 2; i <= d - 2; ++i)
    quad += (i <= r1 ? 1.0 : -1.0) * v[i] * v[i];
  if (std::fabs(quad - surf.a) >
      1e-7 * (1.0 + std::fabs(surf.a) + v.squaredNorm()))
    throw std::invalid_argument("vector is not on the canonical surface");

  const double isq = M_SQRT1_2;
  // Block components of v in the rotated orthonormal basis.
  VectorXd u2(r1), u3(r2);
  u2[0] = (v[1] + v[d - 1]) * isq;
  for (int i = 1; i < r1; ++i) u2[i] = v[1 + i];
  for (int i = 0; i + 1 < r2; ++i) u3[i] = v[r1 + 1 + i];
  u3[r2 - 1] = (v[1] - v[d - 1]) * isq;
  const double rho2 = u2.norm(), rho3 = u3.norm();

  const int m = d - 3;
  const double amp = c1_constant(r1, r2, 1, d) * std::exp((double)m * t);
  const double et = std::exp(t), emt = std::exp(-t);

  // Radial-integral side.
  double half_width = 0.0;
  for (int i = 2; i <= d - 2; ++i)
    half_width = std::max(half_width, std::fabs(f.center[i]));
  half_width += f.support_radius + 1e-9;
  JApproxResult res;
  res.j_value = j_integral(
      [&](const VectorXd& y) { return f(y); }, surf, v.head(1),
      v.norm() * emt, half_width, 48);

  // Orbit point for block directions ap (on S^{r1-1}) and bp (on S^{r2-1}),
  // already pushed through the flow.
  auto flowed_orbit_point = [&](const VectorXd& ap, const VectorXd& bp) {
    VectorXd w = VectorXd::Zero(d);
    w[0] = v[0];
    double a0 = rho2 * ap[0];
    w[1] += a0 * isq;
    w[d - 1] += a0 * isq;
    for (int i = 1; i < r1; ++i) w[1 + i] = rho2 * ap[i];
    for (int i = 0; i + 1 < r2; ++i) w[r1 + 1 + i] = rho3 * bp[i];
    double b_last = rho3 * bp[r2 - 1];
    w[1] += b_last * isq;
    w[d - 1] -= b_last * isq;
    w[1] *= emt;
    w[d - 1] *= et;
    return w;
  };
  VectorXd a_fixed = rho2 > 1e-12 ? (u2 / rho2).eval()
                                  : VectorXd::Unit(r1, 0).eval();
  VectorXd b_fixed = rho3 > 1e-12 ? (u3 / rho3).eval()
                                  : VectorXd::Unit(r2, 0).eval();

  const bool use_is =
      importance && r2 == 1 && (r1 == 2 || r1 == 3) && rho2 > 1e-12;

  std::vector<double> xs;
  xs.reserve(n);
  size_t hits = 0;
  if (use_is) {
    // The integrand vanishes unless the expanded coordinate of the image
    // stays inside the support of f: |rho2 z - c3| <= sqrt(2) Bd e^{-t},
    // where z is the cosine along the distinguished block axis.  Sampling z
    // uniformly from that window (Archimedes projection for r1 = 3, arc
    // angle for r1 = 2) and reweighting by window measure / full measure
    // keeps the estimator unbiased.
    const double c3v = u3[0];  // signed block coefficient, fixed by SO(1)
    const double Bd = std::fabs(f.center[d - 1]) + f.support_radius;
    const double wband = std::sqrt(2.0) * Bd * emt;
    double zlo = std::max(-1.0, (c3v - wband) / rho2);
    double zhi = std::min(1.0, (c3v + wband) / rho2);
    if (!(zlo < zhi)) {
      res.samples = n;
      res.error = std::fabs(res.j_value);
      return res;
    }
    VectorXd bp(1);
    bp[0] = rho3 > 1e-12 ? c3v / rho3 : 0.0;
    for (size_t i = 0; i < n; ++i) {
      double u = sub_uniform(seed, i, 0);
      double x = 0.0;
      VectorXd ap(r1);
      if (r1 == 3) {
        double z = zlo + u * (zhi - zlo);
        double phi = 2.0 * M_PI * sub_uniform(seed, i, 1);
        double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
        ap << z, rr * std::cos(phi), rr * std::sin(phi);
        double weight = (zhi - zlo) / 2.0;
        x = f(flowed_orbit_point(ap, bp)) * weight;
      } else {  // r1 == 2: two symmetric arcs of the circle
        double tlo = std::acos(std::min(1.0, std::max(-1.0, zhi)));
        double thi = std::acos(std::min(1.0, std::max(-1.0, zlo)));
        double th = tlo + u * (thi - tlo);
        double sgn = sub_uniform(seed, i, 1) < 0.5 ? 1.0 : -1.0;
        ap << std::cos(th), sgn * std::sin(th);
        double weight = (thi - tlo) / M_PI;
        x = f(flowed_orbit_point(ap, bp)) * weight;
      }
      if (x != 0.0) ++hits;
      xs.push_back(x);
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      uint64_t ctr = 0;
      VectorXd ap = r1 >= 2 ? sphere_dir(r1, seed, i, ctr) : a_fixed;
      VectorXd bp = r2 >= 2 ? sphere_dir(r2, seed, i, ctr) : b_fixed;
      double x = f(flowed_orbit_point(ap, bp));
      if (x != 0.0) ++hits;
      xs.push_back(x);
    }
  }
  double mean = mean_of(xs);
  res.average = amp * mean;
  res.std_error = amp * stderr_of(xs, mean);
  res.samples = n;
  res.acceptance = (double)hits / (double)n;
  res.error = std::fabs(res.average - res.j_value);
  return res;
}

std::vector<SphericalSeriesRow> spherical_F_average(
    const std::function<double(const VectorXd&)>& f, double support_radius,
    const QuadraticForm& Q, const Rat& a, const MatrixXd& g,
    const DiagonalFlow& flow, const CompactSampler& K,
    const std::vector<double>& t_grid, size_t n, uint64_t node_budget) {
  const int d = (int)Q.dim;
  if (g.rows() != g.cols() || (int)g.rows() != d || flow.d != d || K.d != d)
    throw std::invalid_argument("dimension mismatch in spherical average");
  if (!(support_radius > 0.0))
    throw std::invalid_argument("support radius must be positive");
  if (n == 0) throw std::invalid_argument("need at least one sample");

  std::vector<MatrixXd> ks = haar_sample(K, n);
  std::vector<SphericalSeriesRow> rows;
  rows.reserve(t_grid.size());
  std::vector<Int> vint(d);
  for (double t : t_grid) {
    MatrixXd at = flow.matrix(t);
    std::vector<double> vals;
    vals.reserve(n);
    for (size_t j = 0; j < n; ++j) {
      MatrixXd A = at * ks[j] * g;
      // Precondition the skew basis so the sphere enumeration stays cheap.
      auto U = detail::lll_transform(A);
      MatrixXd Um(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) Um(r, c) = (double)U[r][c];
      MatrixXd Ared = A * Um;
      double F = 0.0;
      detail::fp_enumerate(
          Ared, support_radius, node_budget,
          [&](const std::vector<long long>& mc) {
            for (int r = 0; r < d; ++r) {
              long long acc = 0;
              for (int c = 0; c < d; ++c) acc += U[r][c] * mc[c];
              vint[r] = Int((long)acc);
            }
            if (evaluate_form(Q, vint) != a) return;
            VectorXd mv(d);
            for (int c = 0; c < d; ++c) mv[c] = (double)mc[c];
            F += f(Ared * mv);
          });
      vals.push_back(F);
    }
    SphericalSeriesRow row;
    row.t = t;
    row.value = mean_of(vals);
    row.std_error = stderr_of(vals, row.value);
    row.excluded_fraction = 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string spherical_series_to_csv(
    const std::vector<SphericalSeriesRow>& rows) {
  std::ostringstream out;
  out << "t,value,stderr,excluded_fraction\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.t, r.value,
                  r.std_error, r.excluded_fraction);
    out << buf;
  }
  return out.str();
}

}  // namespace qsurf
