#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qsurf/enumerate.hpp"
#include "qsurf/errors.hpp"
#include "qsurf/forms.hpp"

namespace qsurf {

// ---------------------------------------------------------------------------
// The alpha function on unimodular lattices: for a lattice \Delta = B Z^d,
// alpha_i is the supremum of 1/covolume over rational subspaces of dimension
// i, and alpha = max_i alpha_i.  The supremum is located by short-vector
// enumeration with a Minkowski-type certificate for the search radius.
// ---------------------------------------------------------------------------

struct SubspaceWitness {
  int dim = 0;
  // Integer coefficient vectors with respect to the basis columns; primitive
  // (saturated) basis of the witness subspace's intersection lattice.
  std::vector<std::vector<long long>> vectors;
  double covolume = 0;
};

struct AlphaOptions {
  uint64_t vector_budget = 4000000;  // enumeration node cap per radius
  size_t subset_cap = 5000;          // candidate subspaces per degree
  bool adaptive = true;              // grow the radius until certified
  double det_tol = 1e-6;             // |det B| must be within this of 1
};

struct AlphaResult {
  double alpha = 0;
  std::vector<double> per_degree;          // alpha_i for 0 <= i <= d
  std::vector<SubspaceWitness> witnesses;  // best witness per degree 1..d-1
  bool certified = false;
  double search_radius = 0;
};

// Covolume of the sublattice spanned by integer combinations `vectors` of the
// basis columns: sqrt(det(G^T G)) for G = B * V.  Throws std::invalid_argument
// if the vectors are dependent (Gram determinant at the numeric floor).
double covolume(const Eigen::MatrixXd& B,
                const std::vector<std::vector<long long>>& vectors);

// Computes alpha via enumeration of all lattice vectors up to `radius`
// (Fincke-Pohst on B^T B), candidate subspaces spanned by subsets of short
// vectors (saturated to primitive sublattices), and reduced-basis prefixes.
// `certified` is set when Minkowski's second theorem guarantees that any
// subspace improving some alpha_i must be spanned by vectors inside the
// final search radius.  With opts.adaptive the radius grows geometrically
// until certification succeeds or the vector budget stops the growth (the
// last uncertified result is returned); with adaptive off, a single pass at
// the given radius is made.  Throws BudgetExceeded if even the initial
// radius exceeds the vector budget, std::invalid_argument for a singular or
// non-unimodular basis.
AlphaResult alpha_of(const Eigen::MatrixXd& B, double radius,
                     const AlphaOptions& opts = AlphaOptions{});

// ---------------------------------------------------------------------------
// Sums of a compactly supported function over the integer points of a level
// surface, transported by a group element.
// ---------------------------------------------------------------------------

struct SurfacePointCache {
  PointList points;   // every integer solution of Q(v) = a with |v| <= radius
  double radius = 0;  // Euclidean radius covered by `points`
};

// Precomputes the cache by exact enumeration.
SurfacePointCache build_surface_cache(const QuadraticForm& Q, const Rat& a,
                                      double radius,
                                      const EnumOptions& opts = EnumOptions{});

// F(x) = sum over cached surface points v of f(x v), restricted to
// ||x v|| <= support_radius.  The cache must cover the back-transported
// support ball: radius >= ||x^{-1}||_F * support_radius (a conservative
// bound); otherwise std::invalid_argument reports the required radius.
double F_of_lattice(const std::function<double(const Eigen::VectorXd&)>& f,
                    double support_radius, const Eigen::MatrixXd& x,
                    const SurfacePointCache& cache);

}  // namespace qsurf
