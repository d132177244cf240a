#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsurf/enumerate.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

using namespace qsurf;

namespace {

QuadScalar QS(long r) { return QuadScalar(Rat(r)); }

// -x1 x2 + x3^2 + x4^2
QuadraticForm Q1() {
  return form_from_poly(4, {{0, 1, Rat(-1)}, {2, 2, Rat(1)}, {3, 3, Rat(1)}});
}

// x1 - x2, the slice used by the hand-counted examples
LinearMap L_diff() { return map_from_row({QS(1), QS(-1), QS(0), QS(0)}); }

std::vector<std::vector<long long>> rows_of(const PointList& pts) {
  std::vector<std::vector<long long>> out;
  for (size_t i = 0; i < pts.count(); ++i)
    out.emplace_back(pts.row(i), pts.row(i) + pts.dim);
  return out;
}

void check_exactness(const QuadraticForm& Q, const Rat& a, const Annulus& ann,
                     const LinearMap* M, const Region* R,
                     const SurfaceCount& res) {
  for (size_t i = 0; i < res.points.count(); ++i) {
    std::vector<Int> v = res.points.as_int_vector(i);
    CHECK(evaluate_form(Q, v) == a);
    Int nsq = 0;
    for (const Int& c : v) nsq += c * c;
    CHECK(ann.norm_sq_inside(nsq));
    if (M != nullptr) CHECK(R->contains(evaluate_map(*M, v)));
  }
}

}  // namespace

TEST_CASE("rational literals: fractions, decimals, malformed text") {
  CHECK(rat_from_text("3/7") == Rat(3, 7));
  CHECK(rat_from_text("-3/7") == Rat(-3, 7));
  CHECK(rat_from_text("4") == Rat(4));
  CHECK(rat_from_text(" 0.25 ") == Rat(1, 4));
  CHECK(rat_from_text("-2.5") == Rat(-5, 2));
  CHECK(rat_from_text("10.00") == Rat(10));
  CHECK(rat_from_text(".5") == Rat(1, 2));
  CHECK(rat_from_text("2.") == Rat(2));
  CHECK_THROWS_AS(rat_from_text(""), std::invalid_argument);
  CHECK_THROWS_AS(rat_from_text("0.2.5"), std::invalid_argument);
  CHECK_THROWS_AS(rat_from_text("abc"), std::invalid_argument);
  CHECK_THROWS_AS(rat_from_text("1/0"), std::invalid_argument);
}

TEST_CASE("regions: parsing, volume, exact membership, disjointness") {
  Region r1 = Region::parse("0:1", 1);
  CHECK(r1.box_count() == 1);
  CHECK(r1.volume_exact() == Rat(1));

  Region r2 = Region::parse("-1:1,0:2|3:4,0:2", 2);
  CHECK(r2.box_count() == 2);
  CHECK(r2.volume_exact() == Rat(6));
  CHECK(r2.min_lo(0) == Rat(-1));
  CHECK(r2.max_hi(0) == Rat(4));

  // decimals and fractions in interval endpoints
  Region r3 = Region::parse("-0.5:1/2", 1);
  CHECK(r3.volume_exact() == Rat(1));

  // exact membership with an irrational coordinate: 1 + sqrt(2) vs bounds
  QuadScalar root2(Rat(0), Rat(1), Int(2));
  Vec<QuadScalar> p{QS(1) + root2};
  CHECK(Region::interval(Rat(0), Rat(5, 2)).contains(p));        // 2.414 <= 2.5
  CHECK(!Region::interval(Rat(0), Rat(12, 5)).contains(p));      // 2.414 > 2.4
  CHECK(Region::interval(Rat(1) + Rat(1), Rat(3)).contains(p));  // tight lower

  // touching boxes are fine, overlapping interiors are rejected
  Region touch = Region::parse("0:1|1:2", 1);
  CHECK(touch.volume_exact() == Rat(2));
  CHECK_THROWS_AS(Region::parse("0:2|1:3", 1), std::invalid_argument);
  CHECK_THROWS_AS(Region::parse("1:0", 1), std::invalid_argument);
  CHECK_THROWS_AS(Region::parse("0:1,0:1", 1), std::invalid_argument);
  CHECK_THROWS_AS(Region::parse("0:1:2", 1), std::invalid_argument);
  CHECK_THROWS_AS(Region::parse("0:1", 0), std::invalid_argument);

  // boundary membership is closed on both sides
  Vec<QuadScalar> edge{QS(1)};
  CHECK(Region::interval(Rat(0), Rat(1)).contains(edge));
  CHECK(Region::interval(Rat(1), Rat(2)).contains(edge));
}

TEST_CASE("annuli: construction and exact norm tests") {
  Annulus b2 = Annulus::ball(2);
  CHECK(b2.norm_sq_inside(Int(4)));
  CHECK(!b2.norm_sq_inside(Int(5)));
  CHECK(b2.norm_sq_inside(Int(0)));
  CHECK(b2.outer_radius() == doctest::Approx(2.0));

  Annulus sh = Annulus::shell_exact(Rat(4), Rat(9), true);
  CHECK(!sh.norm_sq_inside(Int(4)));  // strict lower bound
  CHECK(sh.norm_sq_inside(Int(5)));
  CHECK(sh.norm_sq_inside(Int(9)));

  Annulus closed = Annulus::shell(2, 3);
  CHECK(closed.norm_sq_inside(Int(4)));  // closed lower bound

  CHECK_THROWS_AS(Annulus::ball(-1), std::invalid_argument);
  CHECK_THROWS_AS(Annulus::shell(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(Annulus::shell_exact(Rat(9), Rat(4), false),
                  std::invalid_argument);
}

TEST_CASE("small spheres are listed exactly, in lexicographic order") {
  QuadraticForm q = Q1();
  SurfaceCount r = enumerate_surface(q, Rat(1), Annulus::ball(1));
  CHECK(r.count == 4);
  std::vector<std::vector<long long>> expect = {
      {0, 0, -1, 0}, {0, 0, 0, -1}, {0, 0, 0, 1}, {0, 0, 1, 0}};
  CHECK(rows_of(r.points) == expect);

  // nothing fits in a ball of radius 1/2
  CHECK(enumerate_surface(q, Rat(1), Annulus::ball(0.5)).count == 0);

  // the zero vector is the unique point of the zero sphere at level 0
  SurfaceCount z = enumerate_surface(q, Rat(0), Annulus::ball(0));
  CHECK(z.count == 1);
  CHECK(rows_of(z.points) == std::vector<std::vector<long long>>{{0, 0, 0, 0}});

  // matching independent oracle values
  CHECK(brute_force_oracle(q, Rat(1), Annulus::ball(1)) == 4);
  CHECK(brute_force_oracle(q, Rat(0), Annulus::ball(0)) == 1);
  CHECK(enumerate_surface(q, Rat(1), Annulus::ball(2)).count ==
        brute_force_oracle(q, Rat(1), Annulus::ball(2)));
}

TEST_CASE("slice through x1 = x2 reproduces the hand count of 12") {
  QuadraticForm q = Q1();
  LinearMap m = L_diff();
  Region zero = Region::interval(Rat(0), Rat(0));

  SurfaceCount r = enumerate_surface(q, Rat(1), Annulus::ball(2), &m, &zero);
  CHECK(r.count == 12);
  CHECK(brute_force_oracle(q, Rat(1), Annulus::ball(2), &m, &zero) == 12);
  check_exactness(q, Rat(1), Annulus::ball(2), &m, &zero, r);

  // filtering a full listing afterwards gives the same set
  SurfaceCount full = enumerate_surface(q, Rat(1), Annulus::ball(2));
  PointList kept = filter_points(full.points, m, zero);
  CHECK(kept.count() == 12);
  CHECK(kept.flat == r.points.flat);
}

TEST_CASE("filter keeps kernel points and drops off-region points") {
  QuadraticForm q = Q1();
  LinearMap m = L_diff();
  SurfaceCount base = enumerate_surface(q, Rat(1), Annulus::ball(1));
  REQUIRE(base.count == 4);

  Region half = Region::interval(Rat(-1, 2), Rat(1, 2));
  CHECK(filter_points(base.points, m, half).count() == 4);  // M(v) = 0 on all

  Region off = Region::interval(Rat(1), Rat(2));
  CHECK(filter_points(base.points, m, off).count() == 0);

  Region none;  // zero boxes: empty set
  none.dim = 1;
  CHECK(filter_points(base.points, m, none).count() == 0);
  CHECK(enumerate_surface(q, Rat(1), Annulus::ball(1), &m, &none).count == 0);
}

TEST_CASE("reference pair at radius 20 agrees with the exhaustive oracle") {
  Pair pair = load_pair_file(std::string(QSURF_FIXTURES) + "/main_pair.txt");
  Region r01 = Region::interval(Rat(0), Rat(1));
  Annulus ball = Annulus::ball(20);

  SurfaceCount fast =
      enumerate_surface(pair.Q, Rat(1), ball, &pair.M, &r01);
  uint64_t oracle = brute_force_oracle(pair.Q, Rat(1), ball, &pair.M, &r01);
  CHECK(fast.count == oracle);
  CHECK(fast.count > 0);
  check_exactness(pair.Q, Rat(1), ball, &pair.M, &r01, fast);

  // unfiltered listing + filter agrees with the filtered enumeration
  SurfaceCount full = enumerate_surface(pair.Q, Rat(1), ball);
  PointList kept = filter_points(full.points, pair.M, r01);
  CHECK(kept.count() == fast.count);
  CHECK(kept.flat == fast.points.flat);
}

TEST_CASE("count series: pinned values, grid validation, CSV shape") {
  QuadraticForm q = Q1();

  std::vector<SeriesRow> one = count_series(q, Rat(1), {1.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].T == 1.0);
  CHECK(one[0].count_ball == 4);
  CHECK(one[0].count_annulus == 4);  // nothing inside radius 1/2

  CHECK(count_series(q, Rat(1), {}).empty());

  LinearMap m = L_diff();
  Region zero = Region::interval(Rat(0), Rat(0));
  std::vector<SeriesRow> sliced = count_series(q, Rat(1), {2.0}, &m, &zero);
  REQUIRE(sliced.size() == 1);
  CHECK(sliced[0].count_ball == 12);
  // the four radius-1 points sit on the x1 = x2 slice, so the dyadic
  // annulus (1, 2] holds the remaining eight
  CHECK(sliced[0].count_annulus == 8);

  CHECK_THROWS_AS(count_series(q, Rat(1), {2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(count_series(q, Rat(1), {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(count_series(q, Rat(1), {-1.0}), std::invalid_argument);

  std::string csv = series_to_csv(sliced);
  CHECK(csv.rfind("T,count_ball,count_annulus,seconds\n", 0) == 0);
  CHECK(csv.find("\n2,12,8,") != std::string::npos);

  // ball counts are consistent across a longer grid
  std::vector<SeriesRow> series = count_series(q, Rat(1), {1.0, 2.0, 3.0, 4.0});
  for (size_t i = 0; i + 1 < series.size(); ++i)
    CHECK(series[i].count_ball <= series[i + 1].count_ball);
  for (const SeriesRow& row : series) {
    uint64_t direct =
        enumerate_surface(q, Rat(1), Annulus::ball(row.T)).count;
    CHECK(row.count_ball == direct);
  }
}

TEST_CASE("dyadic additivity: ball = half ball + strict outer shell") {
  QuadraticForm q = Q1();
  for (double T : {2.0, 3.0, 4.0, 5.0}) {
    Rat t(T);
    uint64_t ball = enumerate_surface(q, Rat(1), Annulus::ball(T)).count;
    uint64_t half = enumerate_surface(q, Rat(1), Annulus::ball(T / 2)).count;
    uint64_t shell =
        enumerate_surface(
            q, Rat(1),
            Annulus::shell_exact(Rat(t * t / 4), Rat(t * t), true))
            .count;
    CHECK(ball == half + shell);
  }
}

TEST_CASE("symmetry: counts are even except for the zero vector") {
  QuadraticForm q = Q1();
  LinearMap m = L_diff();
  Region sym = Region::interval(Rat(-1), Rat(1));

  uint64_t c1 = enumerate_surface(q, Rat(1), Annulus::ball(3), &m, &sym).count;
  CHECK(c1 % 2 == 0);  // a = 1 excludes v = 0

  uint64_t c0 = enumerate_surface(q, Rat(0), Annulus::ball(3), &m, &sym).count;
  CHECK(c0 % 2 == 1);  // v = 0 plus symmetric pairs
}

TEST_CASE("random forms agree with the exhaustive oracle") {
  std::mt19937 rng(20260822);
  std::uniform_int_distribution<int> coeff(-3, 3);
  std::uniform_int_distribution<int> rhs(-5, 5);
  std::uniform_int_distribution<int> dim(2, 4);
  std::uniform_int_distribution<int> pick(0, 2);

  for (int trial = 0; trial < 60; ++trial) {
    size_t d = (size_t)dim(rng);
    std::vector<std::tuple<size_t, size_t, Rat>> coeffs;
    for (size_t i = 0; i < d; ++i)
      for (size_t j = i; j < d; ++j) {
        int c = coeff(rng);
        if (c != 0) coeffs.push_back({i, j, Rat(c)});
      }
    QuadraticForm q = form_from_poly(d, coeffs);
    Rat a(rhs(rng));
    double T = (trial % 2 == 0) ? 2.5 : 4.0;
    Annulus ann = (pick(rng) == 0)
                      ? Annulus::shell(1.0, T)
                      : Annulus::ball(T);

    uint64_t fast = enumerate_surface(q, a, ann).count;
    uint64_t slow = brute_force_oracle(q, a, ann);
    CAPTURE(trial);
    CAPTURE(d);
    CHECK(fast == slow);

    // spot-check exactness of the listing
    SurfaceCount listed = enumerate_surface(q, a, ann);
    check_exactness(q, a, ann, nullptr, nullptr, listed);
    // lexicographic emission
    auto rows = rows_of(listed.points);
    CHECK(std::is_sorted(rows.begin(), rows.end()));
  }
}

TEST_CASE("random filtered instances agree with the exhaustive oracle") {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> coeff(-2, 2);
  std::uniform_int_distribution<int> rhs(-4, 4);

  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::tuple<size_t, size_t, Rat>> coeffs;
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = i; j < 4; ++j) {
        int c = coeff(rng);
        if (c != 0) coeffs.push_back({i, j, Rat(c)});
      }
    QuadraticForm q = form_from_poly(4, coeffs);
    Rat a(rhs(rng));
    Vec<QuadScalar> row(4, QS(0));
    for (size_t j = 0; j < 4; ++j) row[j] = QS(coeff(rng));
    bool nonzero = false;
    for (size_t j = 0; j < 4; ++j) nonzero = nonzero || !row[j].is_zero();
    if (!nonzero) row[0] = QS(1);
    LinearMap m = map_from_row(row);
    Region r = Region::interval(Rat(-1), Rat(2));

    uint64_t fast = enumerate_surface(q, a, Annulus::ball(4), &m, &r).count;
    uint64_t slow = brute_force_oracle(q, a, Annulus::ball(4), &m, &r);
    CAPTURE(trial);
    CHECK(fast == slow);
  }
}

TEST_CASE("thread count never changes results") {
  QuadraticForm q = Q1();
  EnumOptions one;
  EnumOptions three;
  three.threads = 3;

  SurfaceCount a1 =
      enumerate_surface(q, Rat(1), Annulus::ball(6), nullptr, nullptr, one);
  SurfaceCount a3 =
      enumerate_surface(q, Rat(1), Annulus::ball(6), nullptr, nullptr, three);
  CHECK(a1.count == a3.count);
  CHECK(a1.points.flat == a3.points.flat);

  Pair pair = load_pair_file(std::string(QSURF_FIXTURES) + "/main_pair.txt");
  Region r01 = Region::interval(Rat(0), Rat(1));
  EnumOptions two;
  two.threads = 2;
  SurfaceCount b1 = enumerate_surface(pair.Q, Rat(1), Annulus::ball(10),
                                      &pair.M, &r01, one);
  SurfaceCount b2 = enumerate_surface(pair.Q, Rat(1), Annulus::ball(10),
                                      &pair.M, &r01, two);
  CHECK(b1.count == b2.count);
  CHECK(b1.points.flat == b2.points.flat);
}

TEST_CASE("huge coefficients fall back to exact big-integer arithmetic") {
  // Q = x1^2 + K x2^2 with K = 2^130: far beyond any 128-bit intermediate
  Rat K = Rat(Int(1) << 130);
  QuadraticForm q = form_from_poly(2, {{0, 0, Rat(1)}, {1, 1, K}});

  SurfaceCount r = enumerate_surface(q, K, Annulus::ball(1.5));
  CHECK(r.count == 2);
  std::vector<std::vector<long long>> expect = {{0, -1}, {0, 1}};
  CHECK(rows_of(r.points) == expect);
  CHECK(brute_force_oracle(q, K, Annulus::ball(1.5)) == 2);

  CHECK(enumerate_surface(q, Rat(1), Annulus::ball(1.5)).count == 2);

  // hyperbolic equation with an enormous level and a narrow ball
  QuadraticForm h = form_from_poly(2, {{0, 1, Rat(1)}});
  Rat big = Rat(Int(1) << 100);
  CHECK(enumerate_surface(h, big, Annulus::ball(3)).count == 0);
  CHECK(enumerate_surface(h, Rat(4), Annulus::ball(3)).count == 2);  // (2,2),(-2,-2)
}

TEST_CASE("degenerate residual equations: full planes and point families") {
  // Q = x1^2 depends on x1 alone: for a = 1 every (x2, x3) pair inside the
  // ball extends x1 = +-1
  QuadraticForm q = form_from_poly(3, {{0, 0, Rat(1)}});
  uint64_t fast = enumerate_surface(q, Rat(1), Annulus::ball(3)).count;
  uint64_t slow = brute_force_oracle(q, Rat(1), Annulus::ball(3));
  CHECK(fast == slow);

  // x1 x2 = 0 inside a ball: the two coordinate hyperplane families, with
  // the shared origin counted once
  QuadraticForm h = form_from_poly(2, {{0, 1, Rat(1)}});
  SurfaceCount r = enumerate_surface(h, Rat(0), Annulus::ball(2));
  CHECK(r.count == 9);
  CHECK(brute_force_oracle(h, Rat(0), Annulus::ball(2)) == 9);

  // the identically-zero form
  QuadraticForm z = form_from_poly(2, {});
  CHECK(enumerate_surface(z, Rat(0), Annulus::ball(1)).count == 5);
  CHECK(enumerate_surface(z, Rat(1), Annulus::ball(1)).count == 0);
}

TEST_CASE("input validation and resource budgets") {
  QuadraticForm q = Q1();
  LinearMap m = L_diff();
  Region r = Region::interval(Rat(0), Rat(1));

  CHECK_THROWS_AS(enumerate_surface(q, Rat(1), Annulus::ball(1), &m, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      enumerate_surface(q, Rat(1), Annulus::ball(1), nullptr, &r),
      std::invalid_argument);

  Region r2 = Region::parse("0:1,0:1", 2);  // wrong dimension for one form
  CHECK_THROWS_AS(enumerate_surface(q, Rat(1), Annulus::ball(1), &m, &r2),
                  std::invalid_argument);

  LinearMap m5 = map_from_row({QS(1), QS(0), QS(0), QS(0), QS(0)});
  CHECK_THROWS_AS(enumerate_surface(q, Rat(1), Annulus::ball(1), &m5, &r),
                  std::invalid_argument);

  QuadraticForm tiny = form_from_poly(1, {{0, 0, Rat(1)}});
  CHECK_THROWS_AS(enumerate_surface(tiny, Rat(1), Annulus::ball(1)),
                  std::invalid_argument);

  EnumOptions strangled;
  strangled.node_budget = 10;
  CHECK_THROWS_AS(
      enumerate_surface(q, Rat(1), Annulus::ball(6), nullptr, nullptr,
                        strangled),
      BudgetExceeded);

  CHECK_THROWS_AS(
      brute_force_oracle(q, Rat(1), Annulus::ball(6), nullptr, nullptr, 100),
      BudgetExceeded);
}

TEST_CASE("count-only mode matches collection mode") {
  QuadraticForm q = Q1();
  EnumOptions quiet;
  quiet.collect = false;
  SurfaceCount counted =
      enumerate_surface(q, Rat(1), Annulus::ball(5), nullptr, nullptr, quiet);
  SurfaceCount listed = enumerate_surface(q, Rat(1), Annulus::ball(5));
  CHECK(counted.count == listed.count);
  CHECK(counted.points.count() == 0);
  CHECK(listed.points.count() == counted.count);
}
