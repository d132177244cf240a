#include "qsurf/quadfield.hpp"

#include <ostream>
#include <sstream>

namespace qsurf {

QuadScalar::QuadScalar(const Rat& rat, const Rat& irr, const Int& d) : rat_(rat), irr_(irr), d_(d) {
  if (d_ < 1) throw std::invalid_argument("field discriminant must be >= 1");
  if (d_ == 1) {  // sqrt(1) folds into the rational part
    rat_ += irr_;
    irr_ = 0;
  }
  if (irr_ == 0)
    d_ = 1;
  else if (squarefree_core(d_) != d_)
    throw std::invalid_argument("field discriminant must be squarefree");
}

void QuadScalar::align(QuadScalar& a, QuadScalar& b) {
  if (a.d_ == b.d_) return;
  if (a.irr_ == 0)
    a.d_ = b.d_;
  else if (b.irr_ == 0)
    b.d_ = a.d_;
  else
    throw std::invalid_argument("mixing distinct quadratic fields");
}

QuadScalar& QuadScalar::operator+=(const QuadScalar& o) {
  QuadScalar b = o;
  align(*this, b);
  rat_ += b.rat_;
  irr_ += b.irr_;
  if (irr_ == 0) d_ = 1;
  return *this;
}

QuadScalar& QuadScalar::operator-=(const QuadScalar& o) { return *this += -o; }

QuadScalar& QuadScalar::operator*=(const QuadScalar& o) {
  QuadScalar b = o;
  align(*this, b);
  // (a + c sqrt(D))(e + f sqrt(D)) = ae + cfD + (af + ce) sqrt(D)
  Rat a = rat_, c = irr_;
  rat_ = a * b.rat_ + c * b.irr_ * Rat(d_);
  irr_ = a * b.irr_ + c * b.rat_;
  if (irr_ == 0) d_ = 1;
  return *this;
}

QuadScalar& QuadScalar::operator/=(const QuadScalar& o) {
  QuadScalar b = o;
  align(*this, b);
  Rat n = b.norm();
  if (n == 0) throw std::domain_error("division by zero in Q(sqrt(D))");
  // 1/(e + f sqrt(D)) = (e - f sqrt(D)) / (e^2 - f^2 D)
  QuadScalar inv(b.rat_ / n, -b.irr_ / n, b.d_);
  return *this *= inv;
}

int QuadScalar::sign() const {
  if (irr_ == 0) return sgn(rat_);
  if (rat_ == 0) return sgn(irr_);
  int sa = sgn(rat_), sb = sgn(irr_);
  if (sa == sb) return sa;
  return sa * sgn(norm());  // norm = 0 impossible for squarefree D >= 2 unless value is 0
}

double QuadScalar::to_double() const {
  return rat_.get_d() + irr_.get_d() * std::sqrt(d_.get_d());
}

QuadScalar QuadScalar::sqrt_of(const Rat& x) {
  if (x < 0) throw std::domain_error("sqrt of negative rational");
  if (x == 0) return QuadScalar(0);
  // sqrt(p/q) = sqrt(pq)/q; pq = s^2 * core
  Int pq = x.get_num() * x.get_den();
  Int core = squarefree_core(pq);
  Int s = isqrt(pq / core);
  Rat coef(s, x.get_den());
  coef.canonicalize();
  if (core == 1) return QuadScalar(coef);
  return QuadScalar(Rat(0), coef, core);
}

QuadScalar QuadScalar::parse(const std::string& tok, const Int& expect_d) {
  if (tok.empty()) throw std::invalid_argument("empty scalar token");
  auto bad = [&]() { throw std::invalid_argument("bad scalar token: " + tok); };

  // Locate "*sqrt"; everything after is the radicand.
  auto star = tok.find("*sqrt");
  if (star == std::string::npos) {
    if (tok.find("sqrt") != std::string::npos) bad();
    return QuadScalar(parse_rational(tok));
  }
  Int d;
  try {
    d = Int(tok.substr(star + 5));
  } catch (...) {
    bad();
  }
  if (expect_d == 1) throw std::invalid_argument("radical not allowed here: " + tok);
  if (d != expect_d) throw std::invalid_argument("radicand mismatch in: " + tok);

  // Split head = [rational][+-]coef.  The coefficient token starts after the
  // last '+' or '-' that is not the leading sign character.
  std::string head = tok.substr(0, star);
  if (head.empty()) bad();
  size_t split = std::string::npos;
  for (size_t i = head.size(); i-- > 1;) {
    if (head[i] == '+' || head[i] == '-') {
      if (head[i - 1] == '/') bad();  // "1/-2" style junk
      split = i;
      break;
    }
  }
  Rat rat(0), coef;
  if (split == std::string::npos) {
    coef = parse_rational(head);
  } else {
    rat = parse_rational(head.substr(0, split));
    std::string c = head.substr(split + 1);
    if (c.empty()) bad();
    coef = parse_rational(c);
    if (head[split] == '-') coef = -coef;
  }
  return QuadScalar(rat, coef, d);
}

std::string QuadScalar::str() const {
  std::ostringstream os;
  os << rat_.get_str();
  if (irr_ != 0) {
    if (irr_ > 0) os << "+";
    os << irr_.get_str() << "*sqrt" << d_.get_str();
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const QuadScalar& x) { return os << x.str(); }

}  // namespace qsurf
