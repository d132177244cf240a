#pragma once

// Homogeneous-dynamics side of the toolkit: the singular diagonal flow in
// canonical coordinates, Haar sampling on the compact block-rotation group
// that preserves the canonical form, spherical averages of the lattice
// alpha function and of surface-point counting functions along the flow,
// and the radial integral that the averages converge to.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qsurf/alpha.hpp"
#include "qsurf/forms.hpp"
#include "qsurf/measure.hpp"

namespace qsurf {

// One-parameter diagonal flow a_t in canonical coordinates: it contracts
// coordinate s+1 by e^{-t}, expands coordinate d by e^{t}, and fixes the
// rest, so it preserves the canonical form (whose cross term pairs those
// two coordinates) and the first s coordinates.
struct DiagonalFlow {
  int d = 0;  // ambient dimension
  int s = 0;  // number of fixed leading coordinates

  Eigen::MatrixXd matrix(double t) const;
};

// g^{-1} a_t g: the same flow transported to the original coordinates of a
// pair whose canonical change of variables is g.
Eigen::MatrixXd conjugated_flow(const Eigen::MatrixXd& g,
                                const DiagonalFlow& flow, double t);

// Sampler for the compact group K = SO(r1) x SO(r2) of block rotations.
// The blocks act in an orthonormal basis f_1..f_d obtained from the
// canonical basis by rotating the hyperbolic pair: f_{s+1} and f_d are the
// normalized sum and difference of canonical basis vectors b_{s+1} and b_d,
// all other f_i = b_i.  In the f-basis the canonical form becomes
// q(v_1..v_s) + |pi_2 v|^2 - |pi_3 v|^2, so block rotations preserve it and
// fix the first s coordinates pointwise.
struct CompactSampler {
  int r1 = 0;
  int r2 = 0;
  int s = 0;
  int d = 0;                // = s + r1 + r2
  Eigen::MatrixXd f_basis;  // columns: f-basis in canonical coordinates
  uint64_t seed = 0;
};

CompactSampler make_compact_sampler(int r1, int r2, int s, uint64_t seed);

// Haar-distributed element of K (as a d x d matrix in canonical
// coordinates), deterministic in (sampler.seed, index).
Eigen::MatrixXd haar_sample_at(const CompactSampler& K, uint64_t index);

// Samples with indices 0..n-1.
std::vector<Eigen::MatrixXd> haar_sample(const CompactSampler& K, size_t n);

// C^1 bump: 1 on the closed ball of radius `plateau_radius` around center,
// 0 outside radius `support_radius`, cubic smoothstep in between.
struct PlateauBump {
  Eigen::VectorXd center;
  double plateau_radius = 0;
  double support_radius = 0;

  double operator()(const Eigen::VectorXd& y) const;
};

// One grid point of a spherical-average series along the flow.
struct SphericalSeriesRow {
  double t = 0;
  double value = 0;
  double std_error = 0;
  double excluded_fraction = 0;
};

// Options tuned for alpha evaluations inside spherical averages (smaller
// candidate-subset caps than standalone calls; still certified).
AlphaOptions spherical_alpha_defaults();

// S(t) = (1/n) sum_j alpha(a_t k_j B)^delta over Haar samples k_j, with
// per-sample certification: samples whose alpha search cannot be certified
// within the vector budget are excluded and reported in excluded_fraction.
// delta must lie in (0, 2].
std::vector<SphericalSeriesRow> spherical_alpha_average(
    const Eigen::MatrixXd& B, const DiagonalFlow& flow,
    const CompactSampler& K, const std::vector<double>& t_grid, double delta,
    size_t n, const AlphaOptions& opts = spherical_alpha_defaults());

// Radial integral J_f(ell, r): the integral of
//   f(ell_1..ell_s, r, v_{s+2}, ..., v_{d-1}, v_d)
// over the middle coordinates, divided by r^{d-s-2}, where the last
// coordinate is eliminated by the surface constraint:
//   v_d = (a - Q0(ell, 0, v_{s+2..d-1}, 0)) / (2 r).
// The middle coordinates are integrated over [-half_width, half_width]^m,
// which must contain the support of f in those coordinates; tensor
// Gauss-Legendre quadrature with nodes_per_dim points per axis.
// Throws std::invalid_argument for r <= 0.
double j_integral(const std::function<double(const Eigen::VectorXd&)>& f,
                  const CanonicalSurface& surf, const Eigen::VectorXd& ell,
                  double r, double half_width, int nodes_per_dim = 32);

// Monte Carlo check of the flow/radial-integral approximation at a single
// surface vector v and time t.
struct JApproxResult {
  double average = 0;     // C1 e^{(d-s-2)t} x (MC average of f(a_t k v))
  double std_error = 0;   // standard error of `average`
  double j_value = 0;     // J_f(M0(v), |v| e^{-t})
  double error = 0;       // |average - j_value|
  uint64_t samples = 0;
  double acceptance = 0;  // fraction of samples with nonzero integrand
};

// Averages f(a_t k v) over Haar k in K for a vector v on the canonical
// surface, rescales by C1 e^{(d-s-2)t}, and compares against the radial
// integral.  When importance is true and the group geometry allows it
// (r2 = 1, r1 in {2,3}), samples are drawn from the orbit band that
// provably contains the support of the integrand and reweighted, keeping
// the estimator unbiased while taming the e^{(d-s-2)t} variance blowup;
// otherwise plain Haar orbit sampling is used.
JApproxResult j_approximation_error(const PlateauBump& f,
                                    const CanonicalSurface& surf,
                                    const Eigen::VectorXd& v, double t,
                                    size_t n, uint64_t seed,
                                    bool importance = true);

// S(t) = (1/n) sum_j F(a_t k_j g) where F(x) sums f(x w) over integer
// points w of the surface {Q = a}.  For each sample the finitely many
// integer points with |a_t k_j g w| <= support_radius are enumerated
// directly (sphere enumeration on the transported basis; the transported
// ball contains the support of f), then filtered by the exact surface
// equation.  g is the canonical change of variables of the pair (identity
// when Q is already canonical).  Throws BudgetExceeded if a per-sample
// enumeration expands more than node_budget search nodes.
std::vector<SphericalSeriesRow> spherical_F_average(
    const std::function<double(const Eigen::VectorXd&)>& f,
    double support_radius, const QuadraticForm& Q, const Rat& a,
    const Eigen::MatrixXd& g, const DiagonalFlow& flow,
    const CompactSampler& K, const std::vector<double>& t_grid, size_t n,
    uint64_t node_budget = (uint64_t)1 << 22);

// CSV with header t,value,stderr,excluded_fraction (max-precision floats).
std::string spherical_series_to_csv(
    const std::vector<SphericalSeriesRow>& rows);

}  // namespace qsurf
