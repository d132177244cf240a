#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsurf/errors.hpp"
#include "qsurf/forms.hpp"
#include "qsurf/linalg.hpp"
#include "qsurf/quadfield.hpp"
#include "qsurf/rational.hpp"

namespace qsurf {

// ---------------------------------------------------------------------------
// Target regions
// ---------------------------------------------------------------------------

// A finite union of pairwise disjoint closed axis-aligned boxes with rational
// endpoints, living in the codomain of a linear map (dimension = number of
// linear forms).  Membership tests are exact.
struct Region {
  size_t dim = 0;
  // One entry per box; lo[b][i] <= hi[b][i] for every coordinate i.
  std::vector<std::vector<Rat>> lo;
  std::vector<std::vector<Rat>> hi;

  size_t box_count() const { return lo.size(); }
  bool empty() const { return lo.empty(); }

  // Appends a box.  Throws std::invalid_argument on dimension mismatch,
  // inverted intervals, or interior overlap with an existing box.
  void add_box(std::vector<Rat> box_lo, std::vector<Rat> box_hi);

  // Exact membership of a point with coordinates in a real quadratic field.
  bool contains(const Vec<QuadScalar>& y) const;

  // Total Lebesgue volume (sum of box volumes), exact and as double.
  Rat volume_exact() const;
  double volume() const;

  // Per-coordinate bounding interval over all boxes (requires nonempty).
  Rat min_lo(size_t i) const;
  Rat max_hi(size_t i) const;

  // Parses "lo1:hi1,lo2:hi2" with '|' separating multiple boxes, e.g.
  // "0:1" or "-1:1,0:2|3:4,0:2".  Endpoints are decimal or fraction
  // literals ("0.25", "-3/7").  Throws std::invalid_argument on malformed
  // text or a box count/dimension mismatch.
  static Region parse(const std::string& text, size_t dim);

  // Single interval [a, b] in dimension 1.
  static Region interval(const Rat& a, const Rat& b);
};

// Parses a rational number written as "p/q", a decimal like "-2.5", or an
// integer.  Decimal literals convert exactly.
Rat rat_from_text(const std::string& text);

// ---------------------------------------------------------------------------
// Norm annuli
// ---------------------------------------------------------------------------

// The set { v : t1 < |v| <= t2 } (or t1 <= |v| <= t2 when lower_strict is
// false), stored via exact squared radii so integer points can be tested
// without rounding.
struct Annulus {
  Rat t1sq = 0;
  Rat t2sq = 0;
  bool lower_strict = false;

  // Closed ball of radius T >= 0.
  static Annulus ball(double T);
  // Closed shell t1 <= |v| <= t2 (0 <= t1 <= t2).
  static Annulus shell(double t1, double t2);
  // Exact squared radii; lower bound strict when requested.
  static Annulus shell_exact(Rat t1sq, Rat t2sq, bool lower_strict);

  bool norm_sq_inside(const Int& nsq) const;
  double outer_radius() const;
};

// ---------------------------------------------------------------------------
// Point collections
// ---------------------------------------------------------------------------

// Dense row-major storage for integer points of a fixed dimension.
struct PointList {
  size_t dim = 0;
  std::vector<long long> flat;

  explicit PointList(size_t d = 0) : dim(d) {}
  size_t count() const { return dim == 0 ? 0 : flat.size() / dim; }
  const long long* row(size_t i) const { return flat.data() + i * dim; }
  void push(const long long* v) { flat.insert(flat.end(), v, v + dim); }
  void append(const PointList& other);
  std::vector<Int> as_int_vector(size_t i) const;
};

// ---------------------------------------------------------------------------
// Surface enumeration
// ---------------------------------------------------------------------------

struct EnumOptions {
  unsigned threads = 1;        // worker count; results are thread-invariant
  bool collect = true;         // false: count only, no point storage
  uint64_t node_budget = 1ull << 33;  // search-node limit before BudgetExceeded
};

struct SurfaceCount {
  uint64_t count = 0;
  PointList points;  // populated when EnumOptions::collect is true, in
                     // lexicographic order
};

// Lists/counts integer points v with Q(v) = a and |v| in the annulus,
// optionally restricted to M(v) in R (M and R must be both present or both
// absent).  Points come out in lexicographic order.  Exact: every emitted
// point satisfies all constraints exactly, and none are missed.
// Throws std::invalid_argument on dimension mismatches and BudgetExceeded
// when the node budget is exhausted.
SurfaceCount enumerate_surface(const QuadraticForm& Q, const Rat& a,
                               const Annulus& ann,
                               const LinearMap* M = nullptr,
                               const Region* R = nullptr,
                               const EnumOptions& opts = EnumOptions{});

// Keeps the points with M(v) in R, preserving order.
PointList filter_points(const PointList& pts, const LinearMap& M,
                        const Region& R);

// Independent exhaustive check: scans every integer cell in the bounding box
// of the annulus and applies the same exact tests.  Throws BudgetExceeded if
// the box has more than cell_budget cells.
uint64_t brute_force_oracle(const QuadraticForm& Q, const Rat& a,
                            const Annulus& ann, const LinearMap* M = nullptr,
                            const Region* R = nullptr,
                            uint64_t cell_budget = 1000000000ull);

// ---------------------------------------------------------------------------
// Counting series over a radius grid
// ---------------------------------------------------------------------------

struct SeriesRow {
  double T = 0;
  uint64_t count_ball = 0;     // points with |v| <= T
  uint64_t count_annulus = 0;  // points with T/2 < |v| <= T
  double seconds = 0;          // enumeration time attributed to this row
};

// Counts solutions in balls/annuli for each radius in grid (ascending grids
// are fastest; shells between consecutive radii are enumerated once).
std::vector<SeriesRow> count_series(const QuadraticForm& Q, const Rat& a,
                                    const std::vector<double>& grid,
                                    const LinearMap* M = nullptr,
                                    const Region* R = nullptr,
                                    const EnumOptions& opts = EnumOptions{});

// CSV with header "T,count_ball,count_annulus,seconds".
std::string series_to_csv(const std::vector<SeriesRow>& rows);

}  // namespace qsurf
