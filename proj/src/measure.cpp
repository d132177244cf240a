#include "qsurf/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>

#include <Eigen/Dense>

#include "rng_internal.hpp"

namespace qsurf {

namespace {

using detail::sub_gaussian;

// --- interval helpers for the ray estimator ----------------------------------

struct Ival {
  double lo = 0, hi = -1;
  bool empty() const { return !(lo <= hi); }
};

Ival meet(const Ival& a, const Ival& b) {
  return Ival{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

// integral of r^{d-1} over [lo, hi]: (hi^d - lo^d)/d
double radial_mass(const Ival& iv, int d) {
  if (iv.empty()) return 0;
  return (std::pow(iv.hi, d) - std::pow(iv.lo, d)) / (double)d;
}

// --- closed-form sphere slices ------------------------------------------------

// J_m(x) = int_0^x (1-u^2)^{m/2} du for integer m >= -1
double slice_primitive(int m, double x) {
  x = std::clamp(x, -1.0, 1.0);
  if (m == -1) return std::asin(x);
  if (m == 0) return x;
  double w = 1.0 - x * x;
  return (x * std::pow(w, 0.5 * m) + m * slice_primitive(m - 2, x)) /
         (double)(m + 1);
}

// surface measure of {alpha in S^{p-1} : alpha_1 in [u_lo, u_hi]}
double sphere_slice(int p, double u_lo, double u_hi) {
  if (u_hi < u_lo) return 0;
  if (p == 1) {  // S^0 = {-1, +1}, unit point masses
    double m = 0;
    if (u_lo <= 1.0 && 1.0 <= u_hi) m += 1.0;
    if (u_lo <= -1.0 && -1.0 <= u_hi) m += 1.0;
    return m;
  }
  int m = p - 3;
  return sphere_surface_area(p - 2) *
         (slice_primitive(m, u_hi) - slice_primitive(m, u_lo));
}

// --- adaptive Simpson ----------------------------------------------------------

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm, double whole, double tol,
               int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (!(b > a)) return 0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, fa, b, fb, fm, whole, tol, 48);
}

double annulus_inner_radius(const Annulus& ann) {
  double t1 = Rat(ann.t1sq).get_d();
  return t1 <= 0 ? 0.0 : std::sqrt(t1);
}

}  // namespace

const char* volume_method_name(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::shell_mc: return "shell_mc";
    case VolumeMethod::polar_closed_form: return "polar_closed_form";
  }
  return "?";
}

double sphere_surface_area(int n) {
  if (n < 0) throw std::invalid_argument("sphere dimension must be >= 0");
  return 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

double c1_constant(int r1, int r2, int s, int d) {
  if (r1 < 1 || r2 < 1 || s < 0 || r1 + r2 != d - s)
    throw std::invalid_argument(
        "signature split must satisfy r1, r2 >= 1 and r1 + r2 = d - s");
  return sphere_surface_area(r1 - 1) * sphere_surface_area(r2 - 1) *
         std::pow(2.0, 0.5 * (2 - d + s));
}

VolumeEstimate shell_volume_mc(const QuadraticForm& Q, const Rat& a,
                               const LinearMap* M, const Region* R,
                               const Annulus& ann, double h, uint64_t n,
                               uint64_t seed) {
  const int d = (int)Q.dim;
  if (d < 2) throw std::invalid_argument("dimension must be at least 2");
  if ((M == nullptr) != (R == nullptr))
    throw std::invalid_argument("restriction map and region must be paired");
  if (M != nullptr) {
    if (M->cols != Q.dim) throw std::invalid_argument("map dimension mismatch");
    if (R->dim != M->rows)
      throw std::invalid_argument("region dimension mismatch");
  }
  if (!(h > 0) || !std::isfinite(h))
    throw std::invalid_argument("shell half-width must be positive");
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  const double ad = a.get_d();
  if (ad - h <= 0 && 0 <= ad + h)
    throw std::invalid_argument(
        "shell band may not contain 0 (choose h < |a|)");

  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = Q.gram[i][j].get_d();
  Eigen::MatrixXd Md;
  int s = 0;
  if (M != nullptr) {
    s = (int)M->rows;
    Md.resize(s, d);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < d; ++j) Md(i, j) = M->entries[i][j].to_double();
  }

  const double T1 = annulus_inner_radius(ann);
  const double T2 = ann.outer_radius();
  const double sphere = sphere_surface_area(d - 1);

  double sum = 0, sumsq = 0;
  uint64_t accepted = 0;
  Eigen::VectorXd w(d);
  for (uint64_t i = 0; i < n; ++i) {
    double norm2 = 0;
    do {
      for (int j = 0; j < d; ++j) w[j] = sub_gaussian(seed, i, (uint64_t)j);
      norm2 = w.squaredNorm();
    } while (!(norm2 > 0));
    w /= std::sqrt(norm2);

    double qw = w.dot(G * w);
    Ival base{T1, T2};
    // |q(w) r^2 - a| <= h
    bool reachable = qw > 0 ? ad + h > 0 : (qw < 0 && ad - h < 0);
    if (!reachable) {
      base = Ival{};  // band unreachable along this ray
    } else {
      double lo2 = (qw > 0 ? ad - h : ad + h) / qw;
      double hi2 = (qw > 0 ? ad + h : ad - h) / qw;
      base = meet(base, Ival{lo2 > 0 ? std::sqrt(lo2) : 0.0,
                             hi2 > 0 ? std::sqrt(hi2)
                                     : std::numeric_limits<double>::lowest()});
    }

    double mass = 0;
    if (base.empty()) {
      mass = 0;
    } else if (M == nullptr) {
      mass = radial_mass(base, d);
    } else {
      Eigen::VectorXd mw = Md * w;
      bool degenerate = mw.lpNorm<Eigen::Infinity>() == 0;
      for (size_t b = 0; b < R->box_count(); ++b) {
        Ival iv = base;
        bool ok = true;
        for (int j = 0; j < s && ok; ++j) {
          double lo = R->lo[b][(size_t)j].get_d();
          double hi = R->hi[b][(size_t)j].get_d();
          if (degenerate || mw[j] == 0) {
            ok = lo <= 0 && 0 <= hi;
          } else if (mw[j] > 0) {
            iv = meet(iv, Ival{lo / mw[j], hi / mw[j]});
          } else {
            iv = meet(iv, Ival{hi / mw[j], lo / mw[j]});
          }
        }
        if (ok) mass += radial_mass(iv, d);
        if (degenerate && ok) break;  // containment is r-independent
      }
    }

    double x = sphere * mass / (2.0 * h);
    if (mass > 0) ++accepted;
    sum += x;
    sumsq += x * x;
  }

  VolumeEstimate est;
  est.method = VolumeMethod::shell_mc;
  est.samples = n;
  est.value = sum / (double)n;
  if (n >= 2) {
    double var = std::max(0.0, (sumsq - sum * sum / (double)n) / (double)(n - 1));
    est.std_error = std::sqrt(var / (double)n);
  }
  if (accepted == 0) {
    std::cerr << "shell_volume_mc: zero acceptance over " << n
              << " samples; returning 0\n";
    est.value = 0;
    est.std_error = 0;
  }
  return est;
}

PolarVolume polar_volume(const CanonicalSurface& surf, const Region& R,
                         const Annulus& ann) {
  if (surf.s != 1)
    throw std::invalid_argument(
        "polar method supports a single linear form (s = 1)");
  if (surf.q_sign != 1 && surf.q_sign != -1)
    throw std::invalid_argument("q block must be +1 or -1");
  if (surf.r1 < 1 || surf.r2 < 1)
    throw std::invalid_argument("kernel split must have r1, r2 >= 1");
  if (!(surf.a > 0) || !std::isfinite(surf.a))
    throw std::invalid_argument("level must be positive");
  if (R.dim != 1) throw std::invalid_argument("region dimension mismatch");

  const int d = surf.r1 + surf.r2 + 1;
  const int s1 = surf.q_sign > 0 ? 1 : 0;
  const int p = s1 + surf.r1;       // plus-block dimension
  const int q = (1 - s1) + surf.r2; // minus-block dimension
  const double a = surf.a;
  const double ra = std::sqrt(a);
  const int m = d - 3;  // growth exponent d - s - 2 for s = 1

  PolarVolume out;
  out.estimate.method = VolumeMethod::polar_closed_form;
  out.estimate.samples = 0;
  out.estimate.std_error = 0;

  double volR = R.volume();
  const double C1 = c1_constant(surf.r1, surf.r2, 1, d);
  const double T1 = annulus_inner_radius(ann);
  const double T2 = ann.outer_radius();
  if (m >= 1) {
    out.leading_order =
        C1 / (2.0 * m) * volR * (std::pow(T2, m) - std::pow(T1, m));
  } else {
    out.leading_order =
        T1 > 0 ? C1 / 2.0 * volR * std::log(T2 / T1)
               : std::numeric_limits<double>::infinity();
  }

  if (R.box_count() == 0 || !(T2 > 0)) {
    out.leading_order = 0;
    return out;
  }

  // hyperbolic angle range: |v|^2 = a cosh 2t in (T1^2, T2^2]
  auto t_of = [&](double T) {
    double c = T * T / a;
    return c <= 1.0 ? 0.0 : 0.5 * std::acosh(c);
  };
  double t_lo = t_of(T1), t_hi = t_of(T2);
  if (!(t_hi > t_lo)) return out;

  // the (v_1 in box)-slice lives on the plus sphere when q_sign = +1
  // (v_1 = sqrt(a) alpha_1 cosh t) and on the minus sphere otherwise
  // (v_1 = sqrt(a) beta_1 sinh t)
  const int p_slice = s1 == 1 ? p : q;
  const double full_other = sphere_surface_area((s1 == 1 ? q : p) - 1);
  const double front = std::pow(a, 0.5 * (d - 2)) / 2.0;

  auto integrand = [&](double t) {
    double scale = ra * (s1 == 1 ? std::cosh(t) : std::sinh(t));
    double slices = 0;
    for (size_t b = 0; b < R.box_count(); ++b) {
      double lo = R.lo[b][0].get_d(), hi = R.hi[b][0].get_d();
      if (scale == 0) {
        // measure-zero endpoint unless 0 is interior; value irrelevant there
        slices += (lo <= 0 && 0 <= hi) ? sphere_surface_area(p_slice - 1) : 0;
      } else {
        slices += sphere_slice(p_slice, lo / scale, hi / scale);
      }
    }
    return front * std::pow(std::cosh(t), p - 1) *
           std::pow(std::sinh(t), q - 1) * full_other * slices;
  };

  // split at slice kinks: box endpoints crossing the sphere edge
  std::vector<double> cuts{t_lo, t_hi};
  for (size_t b = 0; b < R.box_count(); ++b)
    for (double e : {R.lo[b][0].get_d(), R.hi[b][0].get_d()}) {
      double u = std::fabs(e) / ra;
      double t = s1 == 1 ? (u >= 1 ? std::acosh(u) : -1) : std::asinh(u);
      if (t > t_lo && t < t_hi) cuts.push_back(t);
    }
  std::sort(cuts.begin(), cuts.end());

  double total = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double span = cuts[i + 1] - cuts[i];
    if (span <= 0) continue;
    double scale_guess =
        std::fabs(integrand(0.5 * (cuts[i] + cuts[i + 1]))) * span + 1e-300;
    total += integrate(integrand, cuts[i], cuts[i + 1], 1e-10 * scale_guess);
  }
  out.estimate.value = total;
  return out;
}

double predicted_count(const VolumeEstimate& volume,
                       std::optional<double> c_of_g) {
  if (!c_of_g.has_value()) return volume.value;
  if (!(*c_of_g > 0))
    throw std::invalid_argument("normalization constant must be positive");
  return volume.value / *c_of_g;
}

std::string volumes_to_csv(
    const std::vector<std::pair<double, VolumeEstimate>>& rows) {
  std::string out = "T,volume,stderr,method\n";
  char buf[160];
  for (const auto& [T, est] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s\n", T, est.value,
                  est.std_error, volume_method_name(est.method));
    out += buf;
  }
  return out;
}

}  // namespace qsurf
