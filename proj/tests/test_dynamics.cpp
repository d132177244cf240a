#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsurf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsurf/enumerate.hpp"

using namespace qsurf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Pair canonical31() {
  return load_pair_file(std::string(QSURF_FIXTURES) + "/canonical31.txt");
}

Pair main_pair() {
  return load_pair_file(std::string(QSURF_FIXTURES) + "/main_pair.txt");
}

CanonicalSurface surf31() { return CanonicalSurface{3, 1, 1, +1, 1.0}; }

MatrixXd gram_double(const QuadraticForm& Q) {
  MatrixXd G((int)Q.dim, (int)Q.dim);
  for (size_t i = 0; i < Q.dim; ++i)
    for (size_t j = 0; j < Q.dim; ++j) G((int)i, (int)j) = to_double(Q.gram[i][j]);
  return G;
}

std::vector<VectorXd> map_rows_double(const LinearMap& M) {
  std::vector<VectorXd> rows;
  for (size_t i = 0; i < M.rows; ++i) {
    VectorXd r((int)M.cols);
    for (size_t j = 0; j < M.cols; ++j) r[(int)j] = M.entries[i][j].to_double();
    rows.push_back(r);
  }
  return rows;
}

// 1-D plateau bump: 1 on [c-p, c+p], 0 outside [c-s, c+s], smoothstep edges.
double bump1(double x, double c, double p, double s) {
  double u = std::fabs(x - c);
  if (u <= p) return 1.0;
  if (u >= s) return 0.0;
  double z = (u - p) / (s - p);
  return 1.0 - z * z * (3.0 - 2.0 * z);
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double dmax = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    double fa = (double)i / (double)a.size();
    double fb = (double)j / (double)b.size();
    dmax = std::max(dmax, std::fabs(fa - fb));
  }
  return dmax;
}

// A vector on the canonical (3,1) surface v1^2 + 2 v2 v5 + v3^2 + v4^2 = 1
// deep in the positive half-space, with |v| ~ scale.
VectorXd surface_vector(double ell, double v3, double v4, double scale) {
  VectorXd v(5);
  v[0] = ell;
  v[1] = scale;
  v[2] = v3;
  v[3] = v4;
  v[4] = (1.0 - ell * ell - v3 * v3 - v4 * v4) / (2.0 * scale);
  return v;
}

}  // namespace

TEST_CASE("diagonal flow: shape, determinant, group law") {
  DiagonalFlow flow{5, 1};

  CHECK(flow.matrix(0.0).isIdentity(1e-15));

  MatrixXd a1 = flow.matrix(1.0);
  VectorXd e1 = VectorXd::Unit(5, 1);
  CHECK((a1 * e1 - std::exp(-1.0) * e1).norm() == doctest::Approx(0.0));
  CHECK(a1(4, 4) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(a1(0, 0) == 1.0);
  CHECK(a1(2, 2) == 1.0);

  for (double t : {-5.0, -1.0, 1.0, 5.0})
    CHECK(flow.matrix(t).determinant() == doctest::Approx(1.0).epsilon(1e-12));

  for (auto [t, u] : std::vector<std::pair<double, double>>{
           {0.5, 1.25}, {-2.0, 3.0}, {1.0, -1.0}}) {
    MatrixXd lhs = flow.matrix(t) * flow.matrix(u);
    MatrixXd rhs = flow.matrix(t + u);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.cwiseAbs().maxCoeff());
  }

  CHECK_THROWS_AS(DiagonalFlow{2, 1}.matrix(0.0), std::invalid_argument);
}

TEST_CASE("conjugated flow preserves the pair it came from") {
  Pair mp = main_pair();
  Canonicalization can = canonicalize_pair(mp.Q, mp.M);
  REQUIRE(can.r1 + can.r2 + 1 == 5);
  DiagonalFlow flow{5, 1};
  MatrixXd G = gram_double(mp.Q);
  auto rows = map_rows_double(mp.M);

  uint64_t st = 1;
  auto next = [&] {
    st = st * 6364136223846793005ull + 1442695040888963407ull;
    return (double)(st >> 35) / (double)(1u << 29) * 4.0 - 2.0;
  };
  for (double t : {0.7, 2.0}) {
    MatrixXd ahat = conjugated_flow(can.g, flow, t);
    CHECK(ahat.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    for (int rep = 0; rep < 20; ++rep) {
      VectorXd v(5);
      for (int i = 0; i < 5; ++i) v[i] = next();
      VectorXd w = ahat * v;
      double scale = 1.0 + v.squaredNorm() + w.squaredNorm();
      CHECK(std::fabs(w.dot(G * w) - v.dot(G * v)) <= 1e-9 * scale);
      for (const auto& r : rows)
        CHECK(std::fabs(r.dot(w) - r.dot(v)) <= 1e-9 * std::sqrt(scale));
    }
  }
}

TEST_CASE("compact sampler: group structure and invariances") {
  CompactSampler K = make_compact_sampler(3, 1, 1, 20240822);
  REQUIRE(K.d == 5);
  MatrixXd G0 = canonical_gram(MatrixXd::Identity(1, 1), 3, 1);

  // trivial blocks: SO(1) x SO(1) forces the identity
  CompactSampler Kt = make_compact_sampler(1, 1, 1, 7);
  CHECK(haar_sample_at(Kt, 3).isIdentity(1e-12));

  for (uint64_t idx : {0ull, 1ull, 17ull}) {
    MatrixXd k = haar_sample_at(K, idx);
    // orthogonal, determinant one
    CHECK((k.transpose() * k - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK(k.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    // preserves the canonical form
    CHECK((k.transpose() * G0 * k - G0).cwiseAbs().maxCoeff() <= 1e-9);
    // fixes the first coordinate functional exactly up to roundoff
    CHECK(std::fabs(k(0, 0) - 1.0) <= 1e-12);
    CHECK(k.row(0).tail(4).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(k.col(0).tail(4).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // deterministic in (seed, index)
  CHECK((haar_sample_at(K, 5) - haar_sample_at(K, 5)).cwiseAbs().maxCoeff() ==
        0.0);

  // Haar mean of k u vanishes for a block vector
  size_t n = 10000;
  VectorXd u = VectorXd::Unit(5, 2);
  VectorXd acc = VectorXd::Zero(5);
  for (size_t i = 0; i < n; ++i) acc += haar_sample_at(K, i) * u;
  CHECK((acc / (double)n).norm() <= 4.0 / std::sqrt((double)n));
}

TEST_CASE("haar samples are invariant under left translation (KS test)") {
  CompactSampler K = make_compact_sampler(3, 1, 1, 91);
  CompactSampler Kg = make_compact_sampler(3, 1, 1, 4242);
  MatrixXd g0 = haar_sample_at(Kg, 0);

  const size_t n = 10000;
  std::vector<double> plain, moved;
  plain.reserve(n);
  moved.reserve(n);
  for (size_t i = 0; i < n; ++i)
    plain.push_back(haar_sample_at(K, i)(1, 1));
  for (size_t i = n; i < 2 * n; ++i)
    moved.push_back((g0 * haar_sample_at(K, i))(1, 1));

  double d = ks_statistic(plain, moved);
  // two-sample threshold at significance 0.01
  double crit = 1.628 * std::sqrt(2.0 / (double)n);
  CHECK(d <= crit);
}

TEST_CASE("plateau bump is C1 with the recorded support radius") {
  PlateauBump f;
  f.center = VectorXd::Zero(2);
  f.plateau_radius = 1.0;
  f.support_radius = 2.0;

  CHECK(f(VectorXd::Zero(2)) == 1.0);
  VectorXd y(2);
  y << 0.7, 0.7;  // norm < 1
  CHECK(f(y) == 1.0);
  y << 2.0, 0.1;
  CHECK(f(y) == 0.0);
  y << 1.5, 0.0;
  CHECK(f(y) == doctest::Approx(0.5).epsilon(1e-12));

  // numerical radial derivative is continuous across both edges (C1)
  auto radial = [&](double r) {
    VectorXd p(2);
    p << r, 0.0;
    return f(p);
  };
  double h = 1e-5;
  for (double edge : {1.0, 2.0}) {
    double inner = (radial(edge - h) - radial(edge - 3 * h)) / (2 * h);
    double outer = (radial(edge + 3 * h) - radial(edge + h)) / (2 * h);
    CHECK(std::fabs(inner - outer) <= 1e-3);
  }
}

TEST_CASE("spherical alpha average: unit value at t = 0 for the standard lattice") {
  DiagonalFlow flow{5, 1};
  CompactSampler K = make_compact_sampler(3, 1, 1, 11);
  auto rows = spherical_alpha_average(MatrixXd::Identity(5, 5), flow, K, {0.0},
                                      1.0, 30);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rows[0].excluded_fraction == 0.0);
  CHECK(rows[0].std_error <= 1e-9);

  CHECK_THROWS_AS(spherical_alpha_average(MatrixXd::Identity(5, 5), flow, K,
                                          {0.0}, 2.5, 4),
                  std::invalid_argument);
}

TEST_CASE("spherical alpha average stays bounded along the flow: (3,1)") {
  DiagonalFlow flow{5, 1};
  CompactSampler K = make_compact_sampler(3, 1, 1, 20240822);
  std::vector<double> grid = {0, 1, 2, 3, 4, 5, 6};
  auto rows = spherical_alpha_average(MatrixXd::Identity(5, 5), flow, K, grid,
                                      1.0, 80);
  REQUIRE(rows.size() == grid.size());
  double lo = 1e300, hi = 0;
  for (const auto& r : rows) {
    CHECK(r.value > 0);
    CHECK(r.excluded_fraction >= 0.0);
    CHECK(r.excluded_fraction <= 0.2);
    lo = std::min(lo, r.value);
    hi = std::max(hi, r.value);
  }
  CHECK(hi / lo <= 5.0);

  std::string csv = spherical_series_to_csv(rows);
  CHECK(csv.substr(0, 33) == "t,value,stderr,excluded_fraction\n");
}

TEST_CASE("spherical alpha average grows at most linearly: (2,1) signature") {
  // pair: x1 x2 + x3^2 - x4^2 with the irrational form x1 - sqrt(2) x2
  QuadraticForm Q = form_from_poly(
      4, {{0, 1, Rat(1)}, {2, 2, Rat(1)}, {3, 3, Rat(-1)}});
  LinearMap M = map_from_row({QuadScalar(Rat(1)),
                              QuadScalar(Rat(0), Rat(-1), Int(2)),
                              QuadScalar(Rat(0)), QuadScalar(Rat(0))});
  Canonicalization can = canonicalize_pair(Q, M);
  REQUIRE(can.r1 == 2);
  REQUIRE(can.r2 == 1);

  DiagonalFlow flow{4, 1};
  CompactSampler K = make_compact_sampler(2, 1, 1, 5);
  std::vector<double> grid = {1, 2, 3, 4, 5, 6};
  auto rows = spherical_alpha_average(can.g, flow, K, grid, 1.0, 80);
  for (const auto& r : rows) {
    CHECK(r.value > 0);
    CHECK(r.value / (1.0 + r.t) <= 10.0);
  }
}

TEST_CASE("radial integral: zero, linearity, error cases") {
  CanonicalSurface surf = surf31();
  VectorXd ell(1);
  ell << 0.3;

  auto zero = [](const VectorXd&) { return 0.0; };
  CHECK(j_integral(zero, surf, ell, 2.0, 3.0) == 0.0);

  auto fplus = [](const VectorXd& y) {
    return bump1(y[2], 0.2, 0.5, 1.0) * bump1(y[3], -0.1, 0.5, 1.0);
  };
  double base = j_integral(fplus, surf, ell, 2.0, 3.0);
  auto scaled = [&](const VectorXd& y) { return 2.5 * fplus(y); };
  CHECK(j_integral(scaled, surf, ell, 2.0, 3.0) ==
        doctest::Approx(2.5 * base).epsilon(1e-12));

  CHECK_THROWS_AS(j_integral(zero, surf, ell, 0.0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(j_integral(zero, surf, ell, -1.0, 3.0),
                  std::invalid_argument);
}

TEST_CASE("radial integral matches the separable product oracle") {
  CanonicalSurface surf = surf31();
  VectorXd ell(1);
  ell << 0.4;
  double r = 1.7;

  // product of 1-D plateau bumps in the first four slots, constant in the
  // last; each middle factor integrates to plateau + support analytically
  auto f = [](const VectorXd& y) {
    return bump1(y[0], 0.4, 0.3, 0.8) * bump1(y[1], 1.7, 0.4, 0.9) *
           bump1(y[2], 0.7, 0.5, 1.0) * bump1(y[3], -0.2, 0.25, 0.75);
  };
  double got = j_integral(f, surf, ell, r, 3.0, 64);
  double expect = bump1(0.4, 0.4, 0.3, 0.8) * bump1(1.7, 1.7, 0.4, 0.9) *
                  (0.5 + 1.0) * (0.25 + 0.75) / (r * r);
  CHECK(got == doctest::Approx(expect).epsilon(1e-3));

  // no middle coordinates at all: the integral degenerates to one evaluation
  CanonicalSurface tiny{1, 1, 1, +1, 1.0};
  VectorXd l2(1);
  l2 << 0.5;
  auto sum3 = [](const VectorXd& y) { return y[0] + y[1] + y[2]; };
  double rr = 1.3;
  double expect3 = 0.5 + rr + (1.0 - 0.25) / (2.0 * rr);
  CHECK(j_integral(sum3, tiny, l2, rr, 1.0) ==
        doctest::Approx(expect3).epsilon(1e-12));
}

TEST_CASE("flow average of a bump approaches the radial integral") {
  CanonicalSurface surf = surf31();
  PlateauBump f;
  f.center = VectorXd(5);
  f.center << 0.3, 3.0, 0.4, 0.2, 0.0;
  f.plateau_radius = 0.8;
  f.support_radius = 2.0;

  const double r0 = 3.0;

  // importance sampling agrees with plain Haar sampling while the latter is
  // still affordable (t = 1)
  {
    VectorXd v = surface_vector(0.3, 0.45, -0.25, r0 * std::exp(1.0));
    JApproxResult is = j_approximation_error(f, surf, v, 1.0, 200000, 77, true);
    JApproxResult pl =
        j_approximation_error(f, surf, v, 1.0, 200000, 78, false);
    CHECK(is.acceptance > 0.0);
    CHECK(pl.acceptance > 0.0);
    double tol = 4.0 * std::sqrt(is.std_error * is.std_error +
                                 pl.std_error * pl.std_error) +
                 1e-9;
    CHECK(std::fabs(is.average - pl.average) <= tol);
  }

  // the approximation error decays from t = 2 to t = 4 (dyadic step), with
  // vectors scaled along the flow so the radial slot stays near r0
  std::vector<double> err2, err4, rel4;
  for (int rep = 0; rep < 5; ++rep) {
    double ell = 0.2 + 0.1 * rep;
    double v3 = 0.35 + 0.05 * rep;
    double v4 = -0.3 + 0.07 * rep;
    for (double t : {2.0, 4.0}) {
      VectorXd v = surface_vector(ell, v3, v4, r0 * std::exp(t));
      JApproxResult res =
          j_approximation_error(f, surf, v, t, 120000, 900 + rep, true);
      CHECK(res.samples == 120000);
      if (t == 2.0)
        err2.push_back(res.error);
      else {
        err4.push_back(res.error);
        rel4.push_back(res.j_value != 0 ? res.error / std::fabs(res.j_value)
                                        : 0.0);
      }
    }
  }
  auto median = [](std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return xs[xs.size() / 2];
  };
  CHECK(median(err4) < median(err2));
  // at t = 4 the renormalized average reproduces the radial integral closely
  CHECK(median(rel4) <= 0.15);
}

TEST_CASE("spherical count average: exactness against direct enumeration") {
  Pair cp = canonical31();
  DiagonalFlow flow{5, 1};
  CompactSampler K = make_compact_sampler(3, 1, 1, 31);

  PlateauBump f;
  f.center = VectorXd(5);
  f.center << 0.0, 1.0, 0.0, 0.0, 0.0;
  f.plateau_radius = 1.0;
  f.support_radius = 2.2;
  auto fn = [&](const VectorXd& y) { return f(y); };

  double t = 1.0;
  auto rows = spherical_F_average(fn, f.support_radius, cp.Q, Rat(1),
                                  MatrixXd::Identity(5, 5), flow, K, {t}, 1);
  REQUIRE(rows.size() == 1);

  // direct method: enumerate a covering ball, filter by the ellipsoid
  MatrixXd A = flow.matrix(t) * haar_sample_at(K, 0);
  double cover = std::exp(t) * f.support_radius * 1.0001 + 1e-9;
  SurfaceCount sc = enumerate_surface(cp.Q, Rat(1), Annulus::ball(cover));
  double direct = 0;
  for (size_t i = 0; i < sc.points.count(); ++i) {
    VectorXd v(5);
    for (int j = 0; j < 5; ++j) v[j] = (double)sc.points.row(i)[j];
    VectorXd y = A * v;
    if (y.norm() <= f.support_radius) direct += f(y);
  }
  CHECK(rows[0].value == doctest::Approx(direct).epsilon(1e-9));

  // zero function gives identically zero series
  auto zero = [](const VectorXd&) { return 0.0; };
  auto zrows = spherical_F_average(zero, 1.5, cp.Q, Rat(1),
                                   MatrixXd::Identity(5, 5), flow, K,
                                   {0.0, 1.0}, 3);
  for (const auto& r : zrows) {
    CHECK(r.value == 0.0);
    CHECK(r.std_error == 0.0);
  }
}

TEST_CASE("spherical count average stabilizes along the flow") {
  Pair mp = main_pair();
  Canonicalization can = canonicalize_pair(mp.Q, mp.M);
  REQUIRE(can.r1 == 3);
  REQUIRE(can.r2 == 1);
  DiagonalFlow flow{5, 1};
  CompactSampler K = make_compact_sampler(can.r1, can.r2, 1, 20240822);

  PlateauBump f;
  f.center = VectorXd(5);
  f.center << 0.0, 1.2, 0.0, 0.0, 0.0;
  f.plateau_radius = 1.2;
  f.support_radius = 2.5;
  auto fn = [&](const VectorXd& y) { return f(y); };

  std::vector<double> grid = {2, 3, 4, 5, 6};
  auto rows = spherical_F_average(fn, f.support_radius, mp.Q, Rat(1), can.g,
                                  flow, K, grid, 200);
  REQUIRE(rows.size() == grid.size());
  for (const auto& r : rows) CHECK(r.value >= 0.0);
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    double a = rows[i].value, b = rows[i + 1].value;
    CHECK(a > 0);
    CHECK(b > 0);
    CHECK(std::fabs(b - a) <= 0.15 * std::max(a, b));
  }

  std::string csv = spherical_series_to_csv(rows);
  size_t lines = (size_t)std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == grid.size() + 1);
}
