#include "qsurf/forms.hpp"

#include <fstream>
#include <sstream>

namespace qsurf {

bool QuadraticForm::nondegenerate() const {
  Mat<Rat> g = gram;
  return determinant(g) != 0;
}

QuadraticForm form_from_poly(size_t d,
                             const std::vector<std::tuple<size_t, size_t, Rat>>& coeffs) {
  QuadraticForm Q;
  Q.dim = d;
  Q.gram.assign(d, Vec<Rat>(d, Rat(0)));
  for (const auto& [i, j, c] : coeffs) {
    if (i >= d || j >= d) throw std::out_of_range("coefficient index");
    if (i == j)
      Q.gram[i][i] += c;
    else {
      Rat half = c / 2;
      Q.gram[i][j] += half;
      Q.gram[j][i] += half;
    }
  }
  return Q;
}

LinearMap map_from_row(const Vec<QuadScalar>& row) {
  LinearMap M;
  M.rows = 1;
  M.cols = row.size();
  M.entries = {row};
  M.disc = 1;
  for (const auto& e : row)
    if (!e.is_rational()) M.disc = e.field();
  return M;
}

Rat evaluate_form(const QuadraticForm& Q, const std::vector<Int>& v) {
  if (v.size() != Q.dim) throw std::invalid_argument("dimension mismatch");
  Rat acc(0);
  for (size_t i = 0; i < Q.dim; ++i) {
    if (v[i] == 0) continue;
    Rat row(0);
    for (size_t j = 0; j < Q.dim; ++j) row += Q.gram[i][j] * Rat(v[j]);
    acc += Rat(v[i]) * row;
  }
  return acc;
}

QuadScalar evaluate_form_quad(const QuadraticForm& Q, const Vec<QuadScalar>& v) {
  Mat<QuadScalar> G(Q.dim, Vec<QuadScalar>(Q.dim));
  for (size_t i = 0; i < Q.dim; ++i)
    for (size_t j = 0; j < Q.dim; ++j) G[i][j] = QuadScalar(Q.gram[i][j]);
  return quad_eval(G, v);
}

Vec<QuadScalar> evaluate_map(const LinearMap& M, const std::vector<Int>& v) {
  if (v.size() != M.cols) throw std::invalid_argument("dimension mismatch");
  Vec<QuadScalar> out(M.rows, QuadScalar(0));
  for (size_t i = 0; i < M.rows; ++i)
    for (size_t j = 0; j < M.cols; ++j)
      if (v[j] != 0) out[i] += M.entries[i][j] * QuadScalar(Rat(v[j]));
  return out;
}

Vec<QuadScalar> evaluate_map_quad(const LinearMap& M, const Vec<QuadScalar>& v) {
  return matvec(M.entries, v);
}

Signature signature(const QuadraticForm& Q) {
  return diagonalize_symmetric(Q.gram).sig;
}

std::vector<Vec<QuadScalar>> kernel_basis(const LinearMap& M) {
  if (rank(M.entries) != M.rows) throw std::domain_error("linear map is rank deficient");
  return kernel_basis(M.entries);
}

Restriction restrict_form(const QuadraticForm& Q, const LinearMap& M) {
  auto ker = kernel_basis(M);
  Mat<QuadScalar> G(Q.dim, Vec<QuadScalar>(Q.dim));
  for (size_t i = 0; i < Q.dim; ++i)
    for (size_t j = 0; j < Q.dim; ++j) G[i][j] = QuadScalar(Q.gram[i][j]);
  size_t k = ker.size();
  Restriction out;
  out.gram.assign(k, Vec<QuadScalar>(k, QuadScalar(0)));
  for (size_t i = 0; i < k; ++i) {
    Vec<QuadScalar> Gi = matvec(G, ker[i]);
    for (size_t j = 0; j < k; ++j) out.gram[i][j] = dot(Gi, ker[j]);
  }
  out.sig = diagonalize_symmetric(out.gram).sig;
  return out;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::MainTheorem: return "MainTheorem";
    case Regime::Exceptional21: return "Exceptional21";
    case Regime::Exceptional22: return "Exceptional22";
    case Regime::Invalid: return "Invalid";
  }
  return "?";
}

// Condition 3: no alpha in R^s \ {0} makes alpha^T M a rational covector.
// Writing M = A + sqrt(D) B with A, B rational, any offending alpha reduces
// (using that M has full rank) to u + v sqrt(D) with u, v rational and
// u^T B + v^T A = 0; conversely any such nonzero (u, v) offends.  So the
// condition holds iff the 2s rows of [B; A] are linearly independent over Q.
static bool condition3_holds(const LinearMap& M) {
  size_t s = M.rows, d = M.cols;
  Mat<Rat> stacked(2 * s, Vec<Rat>(d));
  for (size_t i = 0; i < s; ++i)
    for (size_t j = 0; j < d; ++j) {
      stacked[i][j] = M.entries[i][j].irr();      // B
      stacked[s + i][j] = M.entries[i][j].rat();  // A
    }
  return rank(stacked) == 2 * s;
}

PairClass classify_pair(const QuadraticForm& Q, const LinearMap& M, const Rat& a,
                        const std::optional<std::vector<Int>>& witness) {
  PairClass pc;
  size_t d = Q.dim, s = M.rows;
  if (M.cols != d) {
    pc.reasons.push_back("dimension mismatch between form and map");
    return pc;
  }
  if (!Q.nondegenerate()) pc.reasons.push_back("form is degenerate");
  if (rank(M.entries) != s) {
    pc.reasons.push_back("map is rank deficient");
    return pc;
  }

  auto restr = restrict_form(Q, M);
  pc.kernel_signature = restr.sig;
  int r1 = restr.sig.pos, r2 = restr.sig.neg;

  bool dim_ok = d > 2 * s;
  bool rank_ok = restr.sig.zero == 0;  // rank(Q|ker) = d - s
  pc.cond1 = dim_ok && rank_ok;
  if (!dim_ok) pc.reasons.push_back("requires d > 2s");
  if (!rank_ok) pc.reasons.push_back("restriction of the form to ker(M) is degenerate");

  pc.negated = r2 > r1;
  int big = std::max(r1, r2), small = std::min(r1, r2);
  pc.cond2 = (big >= 3 && small >= 1);
  if (!pc.cond2) pc.reasons.push_back("kernel signature outside the main range");

  pc.cond3 = condition3_holds(M);
  if (!pc.cond3) pc.reasons.push_back("some real combination of the rows is rational");

  if (pc.cond1 && pc.cond3) {
    if (pc.cond2)
      pc.regime = Regime::MainTheorem;
    else if (big == 2 && small == 1)
      pc.regime = Regime::Exceptional21;
    else if (big == 2 && small == 2)
      pc.regime = Regime::Exceptional22;
    else
      pc.regime = Regime::Invalid;
  } else {
    pc.regime = Regime::Invalid;
  }

  if (witness) {
    if (witness->size() == d && evaluate_form(Q, *witness) == a)
      pc.nonempty = Nonempty::Witnessed;
    else
      pc.reasons.push_back("supplied witness does not lie on the surface");
  }
  return pc;
}

// ---- pair file parser --------------------------------------------------------

namespace {

std::vector<std::string> significant_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream probe(line);
    std::string tok;
    if (probe >> tok) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

long parse_size(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    long v = std::stol(tok, &pos);
    if (pos != tok.size() || v < 1) throw std::invalid_argument(what);
    return v;
  } catch (...) {
    throw std::invalid_argument(std::string("bad ") + what + ": " + tok);
  }
}

}  // namespace

Pair parse_pair_text(const std::string& text) {
  auto lines = significant_lines(text);
  size_t at = 0;
  auto need = [&](const char* what) -> std::vector<std::string> {
    if (at >= lines.size()) throw std::invalid_argument(std::string("missing ") + what);
    return tokens_of(lines[at++]);
  };

  Pair p;
  // Q <d>
  auto qh = need("Q header");
  if (qh.size() != 2 || qh[0] != "Q") throw std::invalid_argument("expected 'Q <d>'");
  size_t d = static_cast<size_t>(parse_size(qh[1], "dimension"));
  p.Q.dim = d;
  p.Q.gram.assign(d, Vec<Rat>(d));
  for (size_t i = 0; i < d; ++i) {
    auto row = need("Gram row");
    if (row.size() != d) throw std::invalid_argument("Gram row has wrong length");
    for (size_t j = 0; j < d; ++j) p.Q.gram[i][j] = parse_rational(row[j]);
  }
  for (size_t i = 0; i < d; ++i)
    for (size_t j = i + 1; j < d; ++j)
      if (p.Q.gram[i][j] != p.Q.gram[j][i])
        throw std::invalid_argument("Gram matrix must be symmetric");

  // M <s> <d> <D>
  auto mh = need("M header");
  if (mh.size() != 4 || mh[0] != "M") throw std::invalid_argument("expected 'M <s> <d> <D>'");
  size_t s = static_cast<size_t>(parse_size(mh[1], "row count"));
  size_t md = static_cast<size_t>(parse_size(mh[2], "dimension"));
  if (md != d) throw std::invalid_argument("form and map dimensions differ");
  Int D(mh[3]);
  if (D < 1 || squarefree_core(D) != D)
    throw std::invalid_argument("field discriminant must be squarefree and positive");
  p.M.rows = s;
  p.M.cols = d;
  p.M.disc = D;
  p.M.entries.assign(s, Vec<QuadScalar>(d));
  for (size_t i = 0; i < s; ++i) {
    auto row = need("map row");
    if (row.size() != d) throw std::invalid_argument("map row has wrong length");
    for (size_t j = 0; j < d; ++j) p.M.entries[i][j] = QuadScalar::parse(row[j], D);
  }
  if (at != lines.size()) throw std::invalid_argument("trailing content in pair file");
  if (rank(p.M.entries) != s) throw std::invalid_argument("map rows are linearly dependent");
  return p;
}

Pair load_pair_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pair file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_pair_text(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace qsurf
