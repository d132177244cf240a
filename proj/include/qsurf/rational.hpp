// qsurf -- exact rational helpers on top of GMP's C++ bindings.
//
// Everything that must be exact (form evaluation, sign tests, lattice
// covolumes) runs on mpq_class / mpz_class; doubles only appear at the
// boundary where a numeric method takes over.

#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsurf {

using Int = mpz_class;
using Rat = mpq_class;

inline double to_double(const Rat& q) { return q.get_d(); }

// sign in {-1,0,1}
inline int sgn(const Rat& q) { return ::sgn(q); }
inline int sgn(const Int& z) { return ::sgn(z); }

// Parse "p", "-p", or "p/q" (whitespace-free). Throws std::invalid_argument.
Rat parse_rational(const std::string& tok);

// Floor of the square root of a nonnegative integer.
Int isqrt(const Int& n);

// true iff n is a perfect square (n >= 0).
bool is_square(const Int& n);

// Squarefree core: n = core * square, core squarefree.  n > 0 required.
// Trial division; intended for the small radicands that appear in inputs.
Int squarefree_core(const Int& n);

// Least common multiple of the denominators of a list of rationals (>= 1).
Int common_denominator(const std::vector<Rat>& v);

// n-th falling/choose helpers are not needed; keep this header lean.

}  // namespace qsurf
