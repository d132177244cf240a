// Exact arithmetic in the real quadratic field Q(sqrt(D)), D squarefree.
//
// A QuadScalar is rat + irr*sqrt(D).  Purely rational values are normalized
// to D = 1 so that scalars from different sources mix: binary operations
// accept operands whose D's agree or where one side is rational, and refuse
// (throw) genuinely mixed fields like sqrt(2) + sqrt(3).
//
// Signs are decided exactly: for mixed-sign components the sign of
// a + b*sqrt(D) equals sgn(a) * sgn(a^2 - b^2 D), since for squarefree D >= 2
// the norm a^2 - b^2 D vanishes only at 0.

#pragma once

#include "qsurf/rational.hpp"

#include <cmath>
#include <iosfwd>

namespace qsurf {

class QuadScalar {
 public:
  QuadScalar() : rat_(0), irr_(0), d_(1) {}
  QuadScalar(const Rat& r) : rat_(r), irr_(0), d_(1) {}  // NOLINT(implicit)
  QuadScalar(long r) : rat_(r), irr_(0), d_(1) {}        // NOLINT(implicit)
  QuadScalar(const Rat& rat, const Rat& irr, const Int& d);

  const Rat& rat() const { return rat_; }
  const Rat& irr() const { return irr_; }
  const Int& field() const { return d_; }  // the D under the radical (1 if rational)

  bool is_rational() const { return irr_ == 0; }
  bool is_zero() const { return rat_ == 0 && irr_ == 0; }

  int sign() const;
  double to_double() const;

  QuadScalar operator-() const { return QuadScalar(-rat_, -irr_, d_); }
  QuadScalar conj() const { return QuadScalar(rat_, -irr_, d_); }  // Galois conjugate
  Rat norm() const { return rat_ * rat_ - irr_ * irr_ * Rat(d_); }

  QuadScalar& operator+=(const QuadScalar& o);
  QuadScalar& operator-=(const QuadScalar& o);
  QuadScalar& operator*=(const QuadScalar& o);
  QuadScalar& operator/=(const QuadScalar& o);

  friend QuadScalar operator+(QuadScalar a, const QuadScalar& b) { return a += b; }
  friend QuadScalar operator-(QuadScalar a, const QuadScalar& b) { return a -= b; }
  friend QuadScalar operator*(QuadScalar a, const QuadScalar& b) { return a *= b; }
  friend QuadScalar operator/(QuadScalar a, const QuadScalar& b) { return a /= b; }

  friend bool operator==(const QuadScalar& a, const QuadScalar& b) {
    return a.rat_ == b.rat_ && a.irr_ == b.irr_ && (a.irr_ == 0 || a.d_ == b.d_);
  }
  friend bool operator!=(const QuadScalar& a, const QuadScalar& b) { return !(a == b); }
  friend bool operator<(const QuadScalar& a, const QuadScalar& b) { return (a - b).sign() < 0; }
  friend bool operator<=(const QuadScalar& a, const QuadScalar& b) { return (a - b).sign() <= 0; }
  friend bool operator>(const QuadScalar& a, const QuadScalar& b) { return (a - b).sign() > 0; }
  friend bool operator>=(const QuadScalar& a, const QuadScalar& b) { return (a - b).sign() >= 0; }

  // sqrt of a positive rational as a QuadScalar: p/q = (s^2/q^2) * core with
  // core squarefree, so sqrt = (s/q) * sqrt(core).  Exact.
  static QuadScalar sqrt_of(const Rat& x);

  // Parse "p/q", "p/q+r/t*sqrtD", "p/q-r/t*sqrtD", "r/t*sqrtD", "-r/t*sqrtD".
  // expect_d > 1: require any radical to be exactly sqrt(expect_d);
  // expect_d == 1: radicals are forbidden.  Throws std::invalid_argument.
  static QuadScalar parse(const std::string& tok, const Int& expect_d);

  std::string str() const;  // round-trippable text form

 private:
  static void align(QuadScalar& a, QuadScalar& b);  // unify fields or throw
  Rat rat_, irr_;
  Int d_;
};

std::ostream& operator<<(std::ostream& os, const QuadScalar& x);

}  // namespace qsurf
