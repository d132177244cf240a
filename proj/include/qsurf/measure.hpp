#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsurf/enumerate.hpp"
#include "qsurf/errors.hpp"
#include "qsurf/forms.hpp"

namespace qsurf {

// ---------------------------------------------------------------------------
// Surface-measure volumes.  The level surface {Q = a} carries the measure
// obtained by disintegrating Lebesgue measure over the level sets of Q
// (coarea with weight 1/|grad Q|).  Two independent realizations are
// provided: a Monte Carlo shell estimator valid for any nondegenerate form,
// and exact quadrature in the polar parametrization of the reference pair.
// ---------------------------------------------------------------------------

enum class VolumeMethod { shell_mc, polar_closed_form };

const char* volume_method_name(VolumeMethod m);

struct VolumeEstimate {
  double value = 0;      // >= 0
  double std_error = 0;  // Monte Carlo standard error; 0 for closed form
  VolumeMethod method = VolumeMethod::shell_mc;
  uint64_t samples = 0;
};

// Surface area of the unit n-sphere: 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double sphere_surface_area(int n);

// Leading polar constant: gamma_{r1-1} * gamma_{r2-1} * 2^{(2-d+s)/2}.
// Requires r1, r2 >= 1 and r1 + r2 = d - s.
double c1_constant(int r1, int r2, int s, int d);

// Estimates the surface-measure volume of {v : Q(v) = a, M(v) in R, |v| in
// ann} as (1/2h) * Leb{ |Q(v) - a| <= h, ... }.  Directions are sampled
// uniformly on the sphere; along each ray the admissible radii form a finite
// union of intervals that is integrated exactly, so only the direction is
// random.  Deterministic for a fixed seed (counter-based per-sample
// substreams).  M and R must be both present or both absent.
// Throws std::invalid_argument when n = 0, when h <= 0, or when the band
// [a-h, a+h] contains 0 (the coarea weight degenerates at the cone).
// Zero acceptance returns value 0 (with a note on stderr).
VolumeEstimate shell_volume_mc(const QuadraticForm& Q, const Rat& a,
                               const LinearMap* M, const Region* R,
                               const Annulus& ann, double h, uint64_t n,
                               uint64_t seed);

// Reference-pair data for the polar method: the form
//   q_sign * v_1^2 + 2 v_2 v_d + v_3^2 + ... - ...   (r1 - 1 plus squares,
// r2 - 1 minus squares) at level a > 0, with the linear form v_1.  Only the
// single-form case s = 1 with unit q block is supported.
struct CanonicalSurface {
  int r1 = 0;
  int r2 = 0;
  int s = 1;
  int q_sign = 1;  // sign of the 1 x 1 q block: +1 or -1
  double a = 1.0;
};

struct PolarVolume {
  VolumeEstimate estimate;  // exact quadrature; method = polar_closed_form
  double leading_order = 0; // C1/(2m) * Vol(R) * (T2^m - T1^m), m = d - s - 2
};

// Computes the same volume as shell_volume_mc for the reference pair, by
// exact integration over the product-of-spheres polar parametrization
// (1-D adaptive quadrature over the hyperbolic angle; sphere slices in
// closed form).  Also reports the large-T leading-order value.  Throws
// std::invalid_argument for unsupported canonical data (s != 1, |q_sign|
// != 1, a <= 0, r1 or r2 < 1) or a region dimension mismatch.
PolarVolume polar_volume(const CanonicalSurface& surf, const Region& R,
                         const Annulus& ann);

// Predicted point count from a volume: volume / c_of_g when the constant is
// supplied, the bare volume otherwise.  Throws std::invalid_argument when
// c_of_g <= 0.
double predicted_count(const VolumeEstimate& volume,
                       std::optional<double> c_of_g = std::nullopt);

// CSV with header "T,volume,stderr,method".
std::string volumes_to_csv(
    const std::vector<std::pair<double, VolumeEstimate>>& rows);

}  // namespace qsurf
