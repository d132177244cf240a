#include "qsurf/enumerate.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>
#include <utility>

namespace qsurf {

namespace {

std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t p = s.find(sep, start);
    if (p == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
  return out;
}

Int floor_rat(const Rat& r) {
  Int n = r.get_num(), d = r.get_den(), q;
  mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  return q;
}

Int ceil_rat(const Rat& r) {
  Int n = r.get_num(), d = r.get_den(), q;
  mpz_cdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  return q;
}

__int128 w128_from_int(const Int& x) {
  bool neg = sgn(x) < 0;
  Int m = abs(x);
  Int hi = m >> 64;
  Int lo = m - (hi << 64);
  unsigned long long hu = hi.get_ui();
  unsigned long long lu = lo.get_ui();
  __int128 w = (__int128)(((unsigned __int128)hu << 64) | lu);
  return neg ? -w : w;
}

// ---------------------------------------------------------------------------
// Integer kernels, templated over machine words (__int128 intermediates) and
// arbitrary precision.  The machine path is selected only when a conservative
// a-priori bound shows every intermediate fits.
// ---------------------------------------------------------------------------

struct LLOps {
  using S = long long;
  using W = __int128;
  static W widen(S x) { return (W)x; }
  static S narrow(W x) { return (S)x; }
  static S sqrt_floor_w(W x) {
    if (x <= 0) return 0;
    long long r = (long long)sqrtl((long double)x);
    if (r < 0) r = 0;
    while ((W)r * r > x) --r;
    while (((W)r + 1) * ((W)r + 1) <= x) ++r;
    return r;
  }
  static double to_double_w(W x) { return (double)x; }
  static double to_double_s(S x) { return (double)x; }
  static S from_double_floor(double x) { return (S)std::floor(x); }
  static long long to_ll(S x) { return x; }
  static Int to_int(S x) { return Int((long)x); }
  static W w_from_int(const Int& x) { return w128_from_int(x); }
  static S s_from_int(const Int& x) { return (S)x.get_si(); }
};

struct BigOps {
  using S = Int;
  using W = Int;
  static W widen(const S& x) { return x; }
  static S narrow(const W& x) { return x; }
  static S sqrt_floor_w(const W& x) {
    if (sgn(x) <= 0) return Int(0);
    Int r;
    mpz_sqrt(r.get_mpz_t(), x.get_mpz_t());
    return r;
  }
  static double to_double_w(const W& x) { return x.get_d(); }
  static double to_double_s(const S& x) { return x.get_d(); }
  static S from_double_floor(double x) { return Int(std::floor(x)); }
  static long long to_ll(const S& x) {
    if (!x.fits_slong_p())
      throw std::overflow_error("point coordinate exceeds 64-bit storage");
    return (long long)x.get_si();
  }
  static Int to_int(const S& x) { return x; }
  static W w_from_int(const Int& x) { return x; }
  static S s_from_int(const Int& x) { return x; }
};

// Shared exact preprocessing: scaled integer Gram matrix and right-hand side,
// integer norm-square bounds, and the machine-word admissibility test.
struct Prepared {
  size_t d = 0;
  Mat<Int> Gz;
  Int az = 0;
  Int hi_floor = 0;  // largest admissible |v|^2
  Int lo_int = 0;    // smallest admissible |v|^2
  bool has_lower = false;
  bool use_ll = false;
};

Prepared prepare(const QuadraticForm& Q, const Rat& a, const Annulus& ann) {
  Prepared P;
  P.d = Q.dim;
  if (P.d < 2) throw std::invalid_argument("form dimension must be at least 2");
  if (ann.t1sq < 0 || ann.t2sq < ann.t1sq)
    throw std::invalid_argument("annulus radii must satisfy 0 <= t1 <= t2");

  P.hi_floor = floor_rat(ann.t2sq);
  P.lo_int = ann.lower_strict ? Int(floor_rat(ann.t1sq) + 1) : ceil_rat(ann.t1sq);
  P.has_lower = P.lo_int > 0;

  std::vector<Rat> vals;
  vals.reserve(P.d * P.d + 1);
  for (size_t i = 0; i < P.d; ++i)
    for (size_t j = 0; j < P.d; ++j) vals.push_back(Q.gram[i][j]);
  vals.push_back(a);
  Int L = common_denominator(vals);

  P.Gz.assign(P.d, std::vector<Int>(P.d));
  Int gmax = 1;
  for (size_t i = 0; i < P.d; ++i)
    for (size_t j = 0; j < P.d; ++j) {
      Rat v = Q.gram[i][j] * L;
      P.Gz[i][j] = v.get_num();
      if (abs(P.Gz[i][j]) > gmax) gmax = abs(P.Gz[i][j]);
    }
  {
    Rat v = a * L;
    P.az = v.get_num();
  }

  // Conservative word-size bound covering every intermediate the machine
  // kernel forms (discriminants of the residual conic included).
  if (P.hi_floor >= 0) {
    Int t = isqrt(P.hi_floor) + 2;
    Int dd((unsigned long)P.d);
    Int eb = 512 * gmax * gmax * gmax * gmax * dd * dd * t * t +
             128 * gmax * gmax * gmax * (abs(P.az) + 1);
    Int lim = Int(1) << 125;
    P.use_ll = eb < lim && gmax.fits_slong_p() && P.az.fits_slong_p();
  }
  return P;
}

template <class Ops>
class Engine {
 public:
  using S = typename Ops::S;
  using W = typename Ops::W;

  size_t d = 0;
  std::vector<std::vector<S>> G;
  S a2{};
  W lo_nsq{}, hi_nsq{};
  bool has_lower = false;
  const LinearMap* M = nullptr;
  const Region* R = nullptr;
  const QuadraticForm* Qorig = nullptr;
  Rat a_orig;
  uint64_t budget = 0;
  bool collect = true;

  // Double-precision subtree pruning for the linear-map restriction; always
  // padded outward so exact final checks see every candidate.
  bool prune = false;
  std::vector<std::vector<double>> mc;     // rows x d coefficients
  std::vector<std::vector<double>> mtail;  // rows x (d+1) suffix norms
  std::vector<double> mlo, mhi;            // relaxed bounding interval

  struct Worker {
    std::vector<S> v;
    std::vector<std::vector<W>> lin;  // lin[k][j] = sum_{i<k} G[j][i] v_i
    std::vector<W> quad;              // Q restricted to chosen prefix
    std::vector<W> nsq;               // squared length of prefix
    std::vector<std::vector<double>> mdot;
    std::vector<std::pair<S, S>> sols;
    std::vector<long long> row;
    std::vector<Int> pt;
    uint64_t nodes = 0;
    uint64_t cnt = 0;
    PointList pts;
  };

  void init(const Prepared& P, const QuadraticForm& Q, const Rat& a,
            const LinearMap* m, const Region* r, const EnumOptions& opts) {
    d = P.d;
    G.assign(d, std::vector<S>(d));
    for (size_t i = 0; i < d; ++i)
      for (size_t j = 0; j < d; ++j) G[i][j] = Ops::s_from_int(P.Gz[i][j]);
    a2 = Ops::s_from_int(P.az);
    hi_nsq = Ops::w_from_int(P.hi_floor);
    lo_nsq = Ops::w_from_int(P.lo_int);
    has_lower = P.has_lower;
    M = m;
    R = r;
    Qorig = &Q;
    a_orig = a;
    budget = opts.node_budget;
    collect = opts.collect;
    if (M && R && R->box_count() > 0) {
      size_t s = M->rows;
      prune = true;
      mc.assign(s, std::vector<double>(d, 0.0));
      mtail.assign(s, std::vector<double>(d + 1, 0.0));
      mlo.assign(s, 0.0);
      mhi.assign(s, 0.0);
      for (size_t i = 0; i < s; ++i) {
        for (size_t j = 0; j < d; ++j) mc[i][j] = M->entries[i][j].to_double();
        double acc = 0;
        for (size_t j = d; j-- > 0;) {
          acc += mc[i][j] * mc[i][j];
          mtail[i][j] = std::sqrt(acc);
        }
        double l = to_double(R->min_lo(i));
        double h = to_double(R->max_hi(i));
        mlo[i] = l - 1e-9 * (1.0 + std::fabs(l));
        mhi[i] = h + 1e-9 * (1.0 + std::fabs(h));
      }
    }
  }

  Worker make_worker() const {
    Worker w;
    w.v.assign(d, S{});
    w.lin.assign(d + 1, std::vector<W>(d, W{}));
    w.quad.assign(d + 1, W{});
    w.nsq.assign(d + 1, W{});
    size_t s = prune ? M->rows : 0;
    w.mdot.assign(d + 1, std::vector<double>(s, 0.0));
    w.row.assign(d, 0);
    w.pt.assign(d, Int(0));
    w.pts.dim = d;
    return w;
  }

  void bump(Worker& w) const {
    if (++w.nodes > budget)
      throw BudgetExceeded("enumeration node budget exceeded");
  }

  void step_into(Worker& w, size_t k, const S& x) const {
    w.v[k] = x;
    W wx = Ops::widen(x);
    for (size_t j = 0; j < d; ++j)
      w.lin[k + 1][j] = W(w.lin[k][j] + Ops::widen(G[j][k]) * wx);
    w.quad[k + 1] =
        W(w.quad[k] + Ops::widen(G[k][k]) * wx * wx + 2 * w.lin[k][k] * wx);
    w.nsq[k + 1] = W(w.nsq[k] + wx * wx);
    if (prune) {
      double xd = Ops::to_double_s(x);
      for (size_t i = 0; i < mc.size(); ++i)
        w.mdot[k + 1][i] = w.mdot[k][i] + mc[i][k] * xd;
    }
  }

  // Range of admissible values for coordinate k given the current prefix:
  // the exact norm bound intersected with padded linear-map bounds.
  bool range_for(size_t k, const W& rem, const Worker& w, S& out_lo,
                 S& out_hi) const {
    S b = Ops::sqrt_floor_w(rem);
    out_lo = S(-b);
    out_hi = b;
    if (!prune) return out_lo <= out_hi;
    double rd = std::sqrt(std::max(0.0, Ops::to_double_w(rem)));
    for (size_t i = 0; i < mc.size(); ++i) {
      double c = mc[i][k];
      double p = w.mdot[k][i];
      double tau = mtail[i][k + 1] * rd;
      if (std::fabs(c) <= 1e-12) {
        double eps = 1e-9 * (1.0 + std::fabs(p) + tau) + 1e-12;
        if (p - tau > mhi[i] + eps || p + tau < mlo[i] - eps) return false;
        continue;
      }
      double r1 = (mlo[i] - p - tau) / c;
      double r2 = (mhi[i] - p + tau) / c;
      if (r1 > r2) std::swap(r1, r2);
      double pad1 = 1e-9 * (1.0 + std::fabs(r1));
      double pad2 = 1e-9 * (1.0 + std::fabs(r2));
      double cl = std::floor(r1 - pad1) - 1.0;
      double ch = std::ceil(r2 + pad2) + 1.0;
      if (cl > Ops::to_double_s(out_lo)) out_lo = Ops::from_double_floor(cl);
      if (ch < Ops::to_double_s(out_hi))
        out_hi = Ops::from_double_floor(ch + 0.5);
      if (out_lo > out_hi) return false;
    }
    return out_lo <= out_hi;
  }

  // Records a solution candidate of the residual two-variable equation after
  // exact norm screening; region membership is checked at flush time.
  void push_candidate(Worker& w, const W& xw, const W& yw, const S& nb) const {
    W wb = Ops::widen(nb);
    if (xw > wb || xw < -wb || yw > wb || yw < -wb) return;
    W tot = W(w.nsq[d - 2] + xw * xw + yw * yw);
    if (tot > hi_nsq) return;
    if (has_lower && tot < lo_nsq) return;
    w.sols.emplace_back(Ops::narrow(xw), Ops::narrow(yw));
  }

  void free_y_family(Worker& w, const W& xw, const W& rem, const S& nb) const {
    W wb = Ops::widen(nb);
    if (xw > wb || xw < -wb) return;
    W remy = W(rem - xw * xw);
    if (remy < 0) return;
    S yb = Ops::sqrt_floor_w(remy);
    for (S y = S(-yb); y <= yb; ++y) {
      bump(w);
      push_candidate(w, xw, Ops::widen(y), nb);
    }
  }

  // Solves the residual equation  al*x^2 + bet*x*y + ga*y^2 + del*x + eps*y
  // + zet = 0  over the integers within the norm budget, by discriminant
  // (ga != 0), factorization into linear factors (ga = 0, bet != 0), or
  // divisibility in the remaining linear variable.
  void solve_tail(Worker& w) const {
    size_t k = d - 2;
    W rem = W(hi_nsq - w.nsq[k]);
    if (rem < 0) return;
    S nb = Ops::sqrt_floor_w(rem);

    S al = G[k][k];
    S ga = G[k + 1][k + 1];
    S b2 = G[k][k + 1];
    W bet = W(2 * Ops::widen(b2));
    W del = W(2 * w.lin[k][k]);
    W eps = W(2 * w.lin[k][k + 1]);
    W zet = W(w.quad[k] - Ops::widen(a2));

    w.sols.clear();

    if (ga != 0) {
      S xlo, xhi;
      if (!range_for(k, rem, w, xlo, xhi)) {
        flush_tail(w, bet, del, eps, zet, al, ga, b2);
        return;
      }
      W wal = Ops::widen(al), wga = Ops::widen(ga);
      W A_ = W(bet * bet - 4 * wal * wga);
      if (A_ < 0) {
        // Negative discriminant in x: real solutions confined between the
        // roots of the x-discriminant polynomial.
        W B_ = W(2 * bet * eps - 4 * wga * del);
        W C_ = W(eps * eps - 4 * wga * zet);
        W lhs = W(B_ * B_);
        W rhs = W(4 * A_ * C_);
        W Dd = W(lhs - rhs);
        if (Dd < 0) {
          flush_tail(w, bet, del, eps, zet, al, ga, b2);
          return;
        }
        double rd = std::sqrt(std::max(0.0, Ops::to_double_w(Dd)));
        double den = 2.0 * Ops::to_double_w(A_);
        double bd = Ops::to_double_w(B_);
        double r1 = (-bd + rd) / den;
        double r2 = (-bd - rd) / den;
        if (r1 > r2) std::swap(r1, r2);
        double cl = std::floor(r1) - 2.0;
        double ch = std::ceil(r2) + 2.0;
        if (cl > Ops::to_double_s(xlo)) xlo = Ops::from_double_floor(cl);
        if (ch < Ops::to_double_s(xhi)) xhi = Ops::from_double_floor(ch + 0.5);
      }
      for (S x = xlo; x <= xhi; ++x) {
        bump(w);
        W wx = Ops::widen(x);
        W u = W(bet * wx + eps);
        W q = W((wal * wx + del) * wx + zet);
        W Dx = W(u * u - 4 * wga * q);
        if (Dx < 0) continue;
        S rt = Ops::sqrt_floor_w(Dx);
        W wrt = Ops::widen(rt);
        if (wrt * wrt != Dx) continue;
        W dn = W(2 * wga);
        int variants = (rt == 0) ? 1 : 2;
        for (int v = 0; v < variants; ++v) {
          W num = v == 0 ? W(-u + wrt) : W(-u - wrt);
          if (num % dn != 0) continue;
          push_candidate(w, wx, W(num / dn), nb);
        }
      }
    } else if (b2 != 0) {
      if (al == 0) {
        // bet*x*y + del*x + eps*y + zet = 0, i.e.
        // (bet*x + eps)(bet*y + del) = eps*del - bet*zet.
        W N = W(eps * del - bet * zet);
        bool have_x0 = (eps % bet == 0);
        W x0w = have_x0 ? W(-(eps / bet)) : W{};
        if (N == 0) {
          if (have_x0) free_y_family(w, x0w, rem, nb);
          if (del % bet == 0) {
            W y0w = W(-(del / bet));
            S xlo, xhi;
            if (range_for(k, rem, w, xlo, xhi)) {
              for (S x = xlo; x <= xhi; ++x) {
                bump(w);
                W wx = Ops::widen(x);
                if (have_x0 && wx == x0w) continue;  // covered above
                push_candidate(w, wx, y0w, nb);
              }
            }
          }
        } else {
          W Na = W(N < 0 ? -N : N);
          S xlo, xhi;
          if (range_for(k, rem, w, xlo, xhi)) {
            W width = W(Ops::widen(xhi) - Ops::widen(xlo) + 1);
            S rtn = Ops::sqrt_floor_w(Na);
            if (width <= Ops::widen(rtn)) {
              // Narrow admissible x-range: test divisibility per x instead
              // of walking the divisors of a potentially huge product.
              for (S x = xlo; x <= xhi; ++x) {
                bump(w);
                W wx = Ops::widen(x);
                W u = W(bet * wx + eps);
                if (u == 0 || N % u != 0) continue;
                W vv = W(N / u);
                if ((vv - del) % bet != 0) continue;
                push_candidate(w, wx, W((vv - del) / bet), nb);
              }
            } else {
              for (W j = W(1); j * j <= Na; j = W(j + 1)) {
                bump(w);
                if (Na % j != 0) continue;
                W other = W(Na / j);
                for (int half = 0; half < (j == other ? 1 : 2); ++half) {
                  W base = half == 0 ? j : other;
                  for (int sign = 0; sign < 2; ++sign) {
                    W u = sign == 0 ? base : W(-base);
                    W vv = W(N / u);
                    if ((u - eps) % bet != 0) continue;
                    if ((vv - del) % bet != 0) continue;
                    push_candidate(w, W((u - eps) / bet), W((vv - del) / bet),
                                   nb);
                  }
                }
              }
            }
          }
        }
      } else {
        // y enters linearly with x-dependent coefficient bet*x + eps.
        S xlo, xhi;
        if (range_for(k, rem, w, xlo, xhi)) {
          W wal = Ops::widen(al);
          for (S x = xlo; x <= xhi; ++x) {
            bump(w);
            W wx = Ops::widen(x);
            W ex = W(bet * wx + eps);
            W nx = W(-((wal * wx + del) * wx + zet));
            if (ex == 0) {
              if (nx == 0) free_y_family(w, wx, rem, nb);
              continue;
            }
            if (nx % ex != 0) continue;
            push_candidate(w, wx, W(nx / ex), nb);
          }
        }
      }
    } else if (eps != 0) {
      // y determined by divisibility: y = -(al*x^2 + del*x + zet)/eps.
      S xlo, xhi;
      if (range_for(k, rem, w, xlo, xhi)) {
        W wal = Ops::widen(al);
        for (S x = xlo; x <= xhi; ++x) {
          bump(w);
          W wx = Ops::widen(x);
          W nx = W(-((wal * wx + del) * wx + zet));
          if (nx % eps != 0) continue;
          push_candidate(w, wx, W(nx / eps), nb);
        }
      }
    } else {
      // y absent: al*x^2 + del*x + zet = 0, y free within the norm budget.
      if (al == 0) {
        if (del == 0) {
          if (zet == 0) {
            S xlo, xhi;
            if (range_for(k, rem, w, xlo, xhi))
              for (S x = xlo; x <= xhi; ++x) {
                bump(w);
                free_y_family(w, Ops::widen(x), rem, nb);
              }
          }
        } else if (zet % del == 0) {
          free_y_family(w, W(-(zet / del)), rem, nb);
        }
      } else {
        W wal = Ops::widen(al);
        W disc = W(del * del - 4 * wal * zet);
        if (disc >= 0) {
          S rt = Ops::sqrt_floor_w(disc);
          W wrt = Ops::widen(rt);
          if (wrt * wrt == disc) {
            W dn = W(2 * wal);
            int variants = (rt == 0) ? 1 : 2;
            for (int v = 0; v < variants; ++v) {
              W num = v == 0 ? W(-del + wrt) : W(-del - wrt);
              if (num % dn == 0) free_y_family(w, W(num / dn), rem, nb);
            }
          }
        }
      }
    }
    flush_tail(w, bet, del, eps, zet, al, ga, b2);
  }

  void flush_tail(Worker& w, const W& bet, const W& del, const W& eps,
                  const W& zet, const S& al, const S& ga, const S& b2) const {
    (void)bet;
    if (w.sols.empty()) return;
    std::sort(w.sols.begin(), w.sols.end());
    w.sols.erase(std::unique(w.sols.begin(), w.sols.end()), w.sols.end());
    for (const auto& xy : w.sols) {
      W wx = Ops::widen(xy.first), wy = Ops::widen(xy.second);
      // Hard exact recheck of the residual equation; a failure would mean a
      // kernel bug, not bad input.
      W lhs = W(Ops::widen(al) * wx * wx + 2 * Ops::widen(b2) * wx * wy +
                Ops::widen(ga) * wy * wy + del * wx + eps * wy + zet);
      if (lhs != 0)
        throw std::logic_error("residual conic solver emitted a non-solution");
      if (M != nullptr) {
        for (size_t i = 0; i + 2 < d; ++i) w.pt[i] = Ops::to_int(w.v[i]);
        w.pt[d - 2] = Ops::to_int(xy.first);
        w.pt[d - 1] = Ops::to_int(xy.second);
        if (!R->contains(evaluate_map(*M, w.pt))) continue;
#ifndef NDEBUG
        assert(evaluate_form(*Qorig, w.pt) == a_orig);
#endif
      }
      ++w.cnt;
      if (collect) {
        for (size_t i = 0; i + 2 < d; ++i) w.row[i] = Ops::to_ll(w.v[i]);
        w.row[d - 2] = Ops::to_ll(xy.first);
        w.row[d - 1] = Ops::to_ll(xy.second);
        w.pts.push(w.row.data());
      }
    }
  }

  void recurse(Worker& w, size_t k) const {
    if (k == d - 2) {
      solve_tail(w);
      return;
    }
    W rem = W(hi_nsq - w.nsq[k]);
    if (rem < 0) return;
    S xlo, xhi;
    if (!range_for(k, rem, w, xlo, xhi)) return;
    for (S x = xlo; x <= xhi; ++x) {
      bump(w);
      step_into(w, k, x);
      recurse(w, k + 1);
    }
  }

  void run_top_range(Worker& w, const S& lo0, const S& hi0) const {
    for (S x = lo0; x <= hi0; ++x) {
      bump(w);
      step_into(w, 0, x);
      recurse(w, 1);
    }
  }

  SurfaceCount run(const EnumOptions& opts) const {
    SurfaceCount out;
    out.points.dim = d;
    if (hi_nsq < 0) return out;
    if (d == 2) {
      Worker w = make_worker();
      solve_tail(w);
      out.count = w.cnt;
      if (collect) out.points = std::move(w.pts);
      return out;
    }
    Worker probe = make_worker();
    S lo0, hi0;
    if (!range_for(0, hi_nsq, probe, lo0, hi0)) return out;
    W span = W(Ops::widen(hi0) - Ops::widen(lo0) + 1);
    unsigned nt = std::max(1u, opts.threads);
    if (Ops::widen(S((long)nt)) > span)
      nt = (unsigned)Ops::to_ll(Ops::narrow(span));
    if (nt <= 1) {
      Worker w = make_worker();
      run_top_range(w, lo0, hi0);
      out.count = w.cnt;
      if (collect) out.points = std::move(w.pts);
      return out;
    }
    // Contiguous leading-coordinate stripes, merged in order: results are
    // identical for every thread count.
    std::vector<Worker> ws;
    ws.reserve(nt);
    for (unsigned i = 0; i < nt; ++i) ws.push_back(make_worker());
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errs(nt);
    for (unsigned i = 0; i < nt; ++i) {
      S c_lo = S(lo0 + Ops::narrow(W(span * (long)i / (long)nt)));
      S c_hi = S(lo0 + Ops::narrow(W(span * ((long)i + 1) / (long)nt)) - 1);
      threads.emplace_back([this, &ws, &errs, i, c_lo, c_hi]() {
        try {
          run_top_range(ws[i], c_lo, c_hi);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
    for (auto& w : ws) {
      out.count += w.cnt;
      if (collect) out.points.append(w.pts);
    }
    return out;
  }
};

template <class Ops>
SurfaceCount run_engine(const Prepared& P, const QuadraticForm& Q, const Rat& a,
                        const LinearMap* M, const Region* R,
                        const EnumOptions& opts) {
  Engine<Ops> eng;
  eng.init(P, Q, a, M, R, opts);
  return eng.run(opts);
}

// Exhaustive scan over every integer cell in the bounding box; used as an
// independent correctness oracle for the structured enumerator.
template <class Ops>
uint64_t brute_run(const Prepared& P, const QuadraticForm& Q, const Rat& a,
                   const LinearMap* M, const Region* R) {
  using S = typename Ops::S;
  using W = typename Ops::W;
  size_t d = P.d;
  std::vector<std::vector<S>> G(d, std::vector<S>(d));
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) G[i][j] = Ops::s_from_int(P.Gz[i][j]);
  W wa2 = Ops::w_from_int(P.az);
  W hi = Ops::w_from_int(P.hi_floor);
  W lo = Ops::w_from_int(P.lo_int);
  if (hi < 0) return 0;
  S C = Ops::sqrt_floor_w(hi);

  std::vector<std::vector<W>> lin(d + 1, std::vector<W>(d, W{}));
  std::vector<W> quad(d + 1, W{}), nsq(d + 1, W{});
  std::vector<S> v(d, S{});
  std::vector<Int> pt(d, Int(0));
  uint64_t cnt = 0;

  auto accept = [&](const S& last) {
    v[d - 1] = last;
    if (M != nullptr) {
      for (size_t i = 0; i < d; ++i) pt[i] = Ops::to_int(v[i]);
      if (!R->contains(evaluate_map(*M, pt))) return;
    }
#ifndef NDEBUG
    for (size_t i = 0; i < d; ++i) pt[i] = Ops::to_int(v[i]);
    assert(evaluate_form(Q, pt) == a);
#endif
    ++cnt;
  };

  // Plain nested loops via recursion; only the exact norm constraint skips
  // cells early, so every admissible cell is still visited.
  auto rec = [&](auto&& self, size_t k) -> void {
    if (k == d - 1) {
      S g = G[k][k];
      for (S x = S(-C); x <= C; ++x) {
        W wx = Ops::widen(x);
        W tot = W(nsq[k] + wx * wx);
        if (tot > hi) continue;
        if (P.has_lower && tot < lo) continue;
        W q = W(quad[k] + (Ops::widen(g) * wx + 2 * lin[k][k]) * wx);
        if (q == wa2) accept(x);
      }
      return;
    }
    for (S x = S(-C); x <= C; ++x) {
      W wx = Ops::widen(x);
      if (nsq[k] + wx * wx > hi) continue;
      v[k] = x;
      for (size_t j = 0; j < d; ++j)
        lin[k + 1][j] = W(lin[k][j] + Ops::widen(G[j][k]) * wx);
      quad[k + 1] =
          W(quad[k] + Ops::widen(G[k][k]) * wx * wx + 2 * lin[k][k] * wx);
      nsq[k + 1] = W(nsq[k] + wx * wx);
      self(self, k + 1);
    }
  };
  rec(rec, 0);
  return cnt;
}

void validate_restriction(const QuadraticForm& Q, const LinearMap* M,
                          const Region* R) {
  if ((M == nullptr) != (R == nullptr))
    throw std::invalid_argument(
        "linear map and region must be supplied together");
  if (M != nullptr) {
    if (M->cols != Q.dim)
      throw std::invalid_argument("linear map dimension mismatch");
    if (R->dim != M->rows)
      throw std::invalid_argument("region dimension mismatch");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Region
// ---------------------------------------------------------------------------

void Region::add_box(std::vector<Rat> box_lo, std::vector<Rat> box_hi) {
  if (dim == 0) throw std::invalid_argument("region dimension must be positive");
  if (box_lo.size() != dim || box_hi.size() != dim)
    throw std::invalid_argument("region box has wrong dimension");
  for (size_t i = 0; i < dim; ++i)
    if (box_lo[i] > box_hi[i])
      throw std::invalid_argument("region box interval is inverted");
  for (size_t b = 0; b < lo.size(); ++b) {
    bool overlap = true;
    for (size_t i = 0; i < dim && overlap; ++i) {
      const Rat& l = box_lo[i] > lo[b][i] ? box_lo[i] : lo[b][i];
      const Rat& h = box_hi[i] < hi[b][i] ? box_hi[i] : hi[b][i];
      if (!(l < h)) overlap = false;
    }
    if (overlap)
      throw std::invalid_argument("region boxes must have disjoint interiors");
  }
  lo.push_back(std::move(box_lo));
  hi.push_back(std::move(box_hi));
}

bool Region::contains(const Vec<QuadScalar>& y) const {
  if (y.size() != dim)
    throw std::invalid_argument("point dimension mismatch in region test");
  for (size_t b = 0; b < lo.size(); ++b) {
    bool in = true;
    for (size_t i = 0; i < dim && in; ++i) {
      if ((y[i] - QuadScalar(lo[b][i])).sign() < 0) in = false;
      else if ((QuadScalar(hi[b][i]) - y[i]).sign() < 0) in = false;
    }
    if (in) return true;
  }
  return false;
}

Rat Region::volume_exact() const {
  Rat total = 0;
  for (size_t b = 0; b < lo.size(); ++b) {
    Rat vol = 1;
    for (size_t i = 0; i < dim; ++i) vol *= hi[b][i] - lo[b][i];
    total += vol;
  }
  return total;
}

double Region::volume() const { return to_double(volume_exact()); }

Rat Region::min_lo(size_t i) const {
  if (lo.empty()) throw std::invalid_argument("region has no boxes");
  Rat m = lo[0][i];
  for (size_t b = 1; b < lo.size(); ++b)
    if (lo[b][i] < m) m = lo[b][i];
  return m;
}

Rat Region::max_hi(size_t i) const {
  if (hi.empty()) throw std::invalid_argument("region has no boxes");
  Rat m = hi[0][i];
  for (size_t b = 1; b < hi.size(); ++b)
    if (hi[b][i] > m) m = hi[b][i];
  return m;
}

Region Region::parse(const std::string& text, size_t dim) {
  if (dim == 0) throw std::invalid_argument("region dimension must be positive");
  Region r;
  r.dim = dim;
  for (const std::string& box_text : split_on(text, '|')) {
    std::vector<std::string> parts = split_on(box_text, ',');
    if (parts.size() != dim)
      throw std::invalid_argument("region box needs one interval per form");
    std::vector<Rat> blo, bhi;
    for (const std::string& part : parts) {
      std::string p = trim_copy(part);
      size_t colon = p.find(':');
      if (colon == std::string::npos || p.find(':', colon + 1) != std::string::npos)
        throw std::invalid_argument("region interval must be written lo:hi");
      blo.push_back(rat_from_text(p.substr(0, colon)));
      bhi.push_back(rat_from_text(p.substr(colon + 1)));
    }
    r.add_box(std::move(blo), std::move(bhi));
  }
  return r;
}

Region Region::interval(const Rat& a, const Rat& b) {
  Region r;
  r.dim = 1;
  r.add_box({a}, {b});
  return r;
}

Rat rat_from_text(const std::string& text) {
  std::string s = trim_copy(text);
  if (s.empty()) throw std::invalid_argument("empty number literal");
  size_t dot = s.find('.');
  if (s.find('/') != std::string::npos || dot == std::string::npos)
    return parse_rational(s);
  bool neg = false;
  size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = (s[0] == '-');
    pos = 1;
  }
  std::string ip = s.substr(pos, dot - pos);
  std::string fp = s.substr(dot + 1);
  if (ip.empty() && fp.empty())
    throw std::invalid_argument("malformed decimal literal: " + text);
  for (char c : ip + fp)
    if (c < '0' || c > '9')
      throw std::invalid_argument("malformed decimal literal: " + text);
  Int num = ip.empty() ? Int(0) : Int(ip);
  Int den = 1;
  for (char c : fp) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  Rat v(num, den);
  v.canonicalize();
  return neg ? Rat(-v) : v;
}

// ---------------------------------------------------------------------------
// Annulus
// ---------------------------------------------------------------------------

Annulus Annulus::ball(double T) {
  if (!std::isfinite(T) || T < 0)
    throw std::invalid_argument("ball radius must be finite and nonnegative");
  Rat t(T);
  return shell_exact(Rat(0), Rat(t * t), false);
}

Annulus Annulus::shell(double t1, double t2) {
  if (!std::isfinite(t1) || !std::isfinite(t2) || t1 < 0 || t2 < t1)
    throw std::invalid_argument("shell radii must satisfy 0 <= t1 <= t2");
  Rat r1(t1), r2(t2);
  return shell_exact(Rat(r1 * r1), Rat(r2 * r2), false);
}

Annulus Annulus::shell_exact(Rat t1sq, Rat t2sq, bool lower_strict) {
  if (t1sq < 0 || t2sq < t1sq)
    throw std::invalid_argument("annulus bounds must satisfy 0 <= t1^2 <= t2^2");
  Annulus a;
  a.t1sq = std::move(t1sq);
  a.t2sq = std::move(t2sq);
  a.lower_strict = lower_strict;
  return a;
}

bool Annulus::norm_sq_inside(const Int& nsq) const {
  Rat n(nsq);
  if (n > t2sq) return false;
  if (lower_strict) return n > t1sq;
  return n >= t1sq;
}

double Annulus::outer_radius() const { return std::sqrt(to_double(t2sq)); }

// ---------------------------------------------------------------------------
// PointList
// ---------------------------------------------------------------------------

void PointList::append(const PointList& other) {
  if (dim != other.dim)
    throw std::invalid_argument("point list dimension mismatch");
  flat.insert(flat.end(), other.flat.begin(), other.flat.end());
}

std::vector<Int> PointList::as_int_vector(size_t i) const {
  std::vector<Int> out(dim);
  const long long* r = row(i);
  for (size_t j = 0; j < dim; ++j) out[j] = Int((long)r[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

SurfaceCount enumerate_surface(const QuadraticForm& Q, const Rat& a,
                               const Annulus& ann, const LinearMap* M,
                               const Region* R, const EnumOptions& opts) {
  validate_restriction(Q, M, R);
  Prepared P = prepare(Q, a, ann);
  if (M != nullptr && R->box_count() == 0) {
    SurfaceCount out;
    out.points.dim = P.d;
    return out;
  }
  if (P.use_ll) return run_engine<LLOps>(P, Q, a, M, R, opts);
  return run_engine<BigOps>(P, Q, a, M, R, opts);
}

PointList filter_points(const PointList& pts, const LinearMap& M,
                        const Region& R) {
  if (M.cols != pts.dim)
    throw std::invalid_argument("linear map dimension mismatch");
  if (R.dim != M.rows)
    throw std::invalid_argument("region dimension mismatch");
  PointList out(pts.dim);
  for (size_t i = 0; i < pts.count(); ++i) {
    if (R.contains(evaluate_map(M, pts.as_int_vector(i)))) out.push(pts.row(i));
  }
  return out;
}

uint64_t brute_force_oracle(const QuadraticForm& Q, const Rat& a,
                            const Annulus& ann, const LinearMap* M,
                            const Region* R, uint64_t cell_budget) {
  validate_restriction(Q, M, R);
  Prepared P = prepare(Q, a, ann);
  if (M != nullptr && R->box_count() == 0) return 0;
  if (P.hi_floor < 0) return 0;
  Int side = 2 * isqrt(P.hi_floor) + 1;
  Int cells = 1;
  for (size_t i = 0; i < P.d; ++i) cells *= side;
  if (cells > Int((unsigned long)cell_budget))
    throw BudgetExceeded("brute-force cell budget exceeded");
  if (P.use_ll) return brute_run<LLOps>(P, Q, a, M, R);
  return brute_run<BigOps>(P, Q, a, M, R);
}

std::vector<SeriesRow> count_series(const QuadraticForm& Q, const Rat& a,
                                    const std::vector<double>& grid,
                                    const LinearMap* M, const Region* R,
                                    const EnumOptions& opts) {
  validate_restriction(Q, M, R);
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0)
      throw std::invalid_argument("count series radii must be nonnegative");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("count series grid must be strictly increasing");
  }

  // All radii whose ball counts are needed, ascending; shells between
  // consecutive radii are enumerated exactly once.
  std::vector<Rat> radii;
  radii.reserve(grid.size() * 2);
  for (double T : grid) {
    Rat t(T);
    radii.push_back(t);
    radii.push_back(Rat(t / 2));
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  std::vector<uint64_t> cumulative(radii.size(), 0);
  size_t computed = 0;  // shells [0, computed) done
  EnumOptions shell_opts = opts;
  shell_opts.collect = false;

  auto ball_count_upto = [&](const Rat& r, double& seconds) -> uint64_t {
    size_t idx =
        (size_t)(std::lower_bound(radii.begin(), radii.end(), r) - radii.begin());
    while (computed <= idx) {
      auto t0 = std::chrono::steady_clock::now();
      Annulus shell =
          computed == 0
              ? Annulus::shell_exact(Rat(0), Rat(radii[0] * radii[0]), false)
              : Annulus::shell_exact(Rat(radii[computed - 1] * radii[computed - 1]),
                                     Rat(radii[computed] * radii[computed]), true);
      uint64_t c = enumerate_surface(Q, a, shell, M, R, shell_opts).count;
      auto t1 = std::chrono::steady_clock::now();
      seconds += std::chrono::duration<double>(t1 - t0).count();
      cumulative[computed] = (computed == 0 ? 0 : cumulative[computed - 1]) + c;
      ++computed;
    }
    return cumulative[idx];
  };

  std::vector<SeriesRow> rows;
  rows.reserve(grid.size());
  for (double T : grid) {
    SeriesRow row;
    row.T = T;
    Rat t(T);
    double secs = 0;
    uint64_t ball = ball_count_upto(t, secs);
    uint64_t half = ball_count_upto(Rat(t / 2), secs);
    row.count_ball = ball;
    row.count_annulus = ball - half;
    row.seconds = secs;
    rows.push_back(row);
  }
  return rows;
}

std::string series_to_csv(const std::vector<SeriesRow>& rows) {
  std::string out = "T,count_ball,count_annulus,seconds\n";
  char buf[160];
  for (const SeriesRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%llu,%llu,%.6f\n", r.T,
                  (unsigned long long)r.count_ball,
                  (unsigned long long)r.count_annulus, r.seconds);
    out += buf;
  }
  return out;
}

}  // namespace qsurf
