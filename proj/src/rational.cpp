#include "qsurf/rational.hpp"

namespace qsurf {

Rat parse_rational(const std::string& tok) {
  if (tok.empty()) throw std::invalid_argument("empty rational token");
  // mpq_class(string) accepts "p/q" but does not canonicalize and is lax
  // about garbage; validate by hand first.
  auto ok_int = [](const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  auto slash = tok.find('/');
  if (slash == std::string::npos) {
    if (!ok_int(tok)) throw std::invalid_argument("bad rational: " + tok);
    return Rat(Int(tok));
  }
  std::string num = tok.substr(0, slash), den = tok.substr(slash + 1);
  if (!ok_int(num) || !ok_int(den)) throw std::invalid_argument("bad rational: " + tok);
  Int d(den);
  if (d == 0) throw std::invalid_argument("zero denominator: " + tok);
  Rat q(Int(num), d);
  q.canonicalize();
  return q;
}

Int isqrt(const Int& n) {
  if (n < 0) throw std::domain_error("isqrt of negative");
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

bool is_square(const Int& n) {
  if (n < 0) return false;
  return mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

Int squarefree_core(const Int& n) {
  if (n <= 0) throw std::domain_error("squarefree_core needs n > 0");
  Int m = n, core = 1;
  // strip factor p^2 while p*p <= m
  for (Int p = 2; p * p <= m; ++p) {
    if (m % p != 0) continue;
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    if (e % 2 == 1) core *= p;
  }
  core *= m;  // leftover prime (exponent 1)
  return core;
}

Int common_denominator(const std::vector<Rat>& v) {
  Int l = 1;
  for (const auto& q : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den().get_mpz_t());
  return l;
}

}  // namespace qsurf
