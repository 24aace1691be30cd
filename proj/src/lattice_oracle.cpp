#include "c2/lattice_oracle.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace c2::lat {

// ===========================================================================
// CoefficientField

namespace {

// Fixed irreducible monic moduli x^j + c[j-1]x^(j-1) + ... + c[0].
const std::vector<int>* modulusFor(int p, int j) {
  static const std::vector<int> m31{0};
  static const std::vector<int> m32{1, 0};     // x^2 + 1
  static const std::vector<int> m33{1, 2, 0};  // x^3 + 2x + 1
  static const std::vector<int> m51{0};
  static const std::vector<int> m52{2, 0};     // x^2 + 2
  static const std::vector<int> m53{1, 1, 0};  // x^3 + x + 1
  if (p == 3 && j == 1) return &m31;
  if (p == 3 && j == 2) return &m32;
  if (p == 3 && j == 3) return &m33;
  if (p == 5 && j == 1) return &m51;
  if (p == 5 && j == 2) return &m52;
  if (p == 5 && j == 3) return &m53;
  return nullptr;
}

std::vector<int> digitsOf(int a, int p, int j) {
  std::vector<int> d(j, 0);
  for (int i = 0; i < j; ++i) {
    d[i] = a % p;
    a /= p;
  }
  return d;
}

int digitsToInt(const std::vector<int>& d, int p) {
  int a = 0;
  for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) a = a * p + d[i];
  return a;
}

}  // namespace

CoefficientField::CoefficientField(int p, int j) : p_(p), j_(j) {
  const std::vector<int>* mod = modulusFor(p, j);
  if (mod == nullptr) {
    throw std::invalid_argument("unsupported field parameters (p, j)");
  }
  modulus_ = *mod;
  q_ = 1;
  for (int i = 0; i < j; ++i) q_ *= p;

  addT_.assign(static_cast<std::size_t>(q_) * q_, 0);
  mulT_.assign(static_cast<std::size_t>(q_) * q_, 0);
  negT_.assign(q_, 0);
  for (int a = 0; a < q_; ++a) {
    std::vector<int> da = digitsOf(a, p_, j_);
    std::vector<int> na(j_, 0);
    for (int i = 0; i < j_; ++i) na[i] = (p_ - da[i]) % p_;
    negT_[a] = digitsToInt(na, p_);
    for (int b = 0; b < q_; ++b) {
      std::vector<int> db = digitsOf(b, p_, j_);
      // Addition: digitwise mod p.
      std::vector<int> s(j_, 0);
      for (int i = 0; i < j_; ++i) s[i] = (da[i] + db[i]) % p_;
      addT_[static_cast<std::size_t>(a) * q_ + b] = digitsToInt(s, p_);
      // Multiplication: convolution, then reduction by the monic modulus.
      std::vector<int> prod(2 * j_ - 1, 0);
      for (int i = 0; i < j_; ++i)
        for (int k = 0; k < j_; ++k)
          prod[i + k] = (prod[i + k] + da[i] * db[k]) % p_;
      for (int d = 2 * j_ - 2; d >= j_; --d) {
        int c = prod[d];
        if (c == 0) continue;
        prod[d] = 0;
        for (int k = 0; k < j_; ++k)
          prod[d - j_ + k] = (prod[d - j_ + k] + (p_ - modulus_[k]) * c) % p_;
      }
      std::vector<int> r(prod.begin(), prod.begin() + j_);
      mulT_[static_cast<std::size_t>(a) * q_ + b] = digitsToInt(r, p_);
    }
  }

  invT_.assign(q_, 0);
  for (int a = 1; a < q_; ++a) {
    for (int b = 1; b < q_; ++b) {
      if (mul(a, b) == 1) {
        invT_[a] = b;
        break;
      }
    }
    if (invT_[a] == 0) throw std::logic_error("modulus is not irreducible");
  }

  frobT_.assign(q_, 0);
  for (int a = 0; a < q_; ++a) {
    int r = 1;
    for (int i = 0; i < p_; ++i) r = mul(r, a);
    frobT_[a] = a == 0 ? 0 : r;
  }
}

int CoefficientField::inv(int a) const {
  if (a == 0) throw std::invalid_argument("inverse of zero");
  return invT_[a];
}

// ===========================================================================
// TruncatedSeriesRing

Series TruncatedSeriesRing::monomial(int coeff, int deg) const {
  Series s;
  if (deg >= 0 && deg < 4) s.c[deg] = coeff;
  return s;
}

Series TruncatedSeriesRing::add(const Series& a, const Series& b) const {
  Series s;
  for (int i = 0; i < 4; ++i) s.c[i] = F_->add(a.c[i], b.c[i]);
  return s;
}

Series TruncatedSeriesRing::sub(const Series& a, const Series& b) const {
  Series s;
  for (int i = 0; i < 4; ++i) s.c[i] = F_->sub(a.c[i], b.c[i]);
  return s;
}

Series TruncatedSeriesRing::mul(const Series& a, const Series& b) const {
  Series s;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; i + k < 4; ++k)
      s.c[i + k] = F_->add(s.c[i + k], F_->mul(a.c[i], b.c[k]));
  return s;
}

Series TruncatedSeriesRing::scale(int c, const Series& a) const {
  Series s;
  for (int i = 0; i < 4; ++i) s.c[i] = F_->mul(c, a.c[i]);
  return s;
}

int TruncatedSeriesRing::valuation(const Series& a) const {
  for (int i = 0; i < 4; ++i)
    if (a.c[i] != 0) return i;
  return 4;
}

Series TruncatedSeriesRing::inverse(const Series& a) const {
  if (!isUnit(a)) throw std::invalid_argument("series is not a unit");
  Series b;
  b.c[0] = F_->inv(a.c[0]);
  for (int k = 1; k < 4; ++k) {
    int acc = 0;
    for (int i = 1; i <= k; ++i) acc = F_->add(acc, F_->mul(a.c[i], b.c[k - i]));
    b.c[k] = F_->neg(F_->mul(b.c[0], acc));
  }
  return b;
}

Series TruncatedSeriesRing::shiftDown(const Series& a, int k) const {
  Series s;
  for (int i = 0; i + k < 4; ++i) s.c[i] = (i + k >= 0) ? a.c[i + k] : 0;
  return s;
}

Series TruncatedSeriesRing::truncateBelow(const Series& a, int k) const {
  Series s = a;
  for (int i = 0; i < 4 && i < k; ++i) s.c[i] = 0;
  return s;
}

// ===========================================================================
// Linear algebra over W = F_Q^16.
// Coordinate 4(d+2)+k is the coefficient of t^d u_k, d = -2..1, u = (e1,e2,f1,f2).

namespace {

constexpr int N = kResidueDim;
using Row = std::array<int, N>;

std::vector<Row> rref(std::vector<Row> m, const CoefficientField& F,
                      std::vector<int>* pivotCols = nullptr) {
  std::size_t r = 0;
  std::vector<int> pivots;
  for (int c = 0; c < N && r < m.size(); ++c) {
    std::size_t sel = r;
    while (sel < m.size() && m[sel][c] == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[r], m[sel]);
    int iv = F.inv(m[r][c]);
    for (int k = 0; k < N; ++k) m[r][k] = F.mul(m[r][k], iv);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] == 0) continue;
      int f = m[i][c];
      for (int k = 0; k < N; ++k) m[i][k] = F.sub(m[i][k], F.mul(f, m[r][k]));
    }
    pivots.push_back(c);
    ++r;
  }
  m.resize(r);
  if (pivotCols) *pivotCols = pivots;
  return m;
}

ModelLattice toLattice(const std::vector<Row>& rows) {
  ModelLattice L;
  L.dim = static_cast<int>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) L.rows[i] = rows[i];
  return L;
}

std::vector<Row> activeRows(const ModelLattice& L) {
  return std::vector<Row>(L.rows.begin(), L.rows.begin() + L.dim);
}

int leadingCol(const Row& r) {
  for (int c = 0; c < N; ++c)
    if (r[c] != 0) return c;
  return N;
}

// Residual of v modulo the row space of L (L in reduced echelon form).
Row reduceRow(Row v, const ModelLattice& L, const CoefficientField& F) {
  for (int i = 0; i < L.dim; ++i) {
    int pc = leadingCol(L.rows[i]);
    if (pc < N && v[pc] != 0) {
      int f = v[pc];
      for (int k = 0; k < N; ++k) v[k] = F.sub(v[k], F.mul(f, L.rows[i][k]));
    }
  }
  return v;
}

bool isZeroRow(const Row& r) { return leadingCol(r) == N; }

// Multiplication by t on residue classes: block d -> d+1, top block drops.
Row tbarRow(const Row& r) {
  Row out{};
  for (int k = 0; k < N - 4; ++k) out[k + 4] = r[k];
  return out;
}

// Basis of {x : M x = 0} for the linear map given by the rows of M.
std::vector<Row> nullspace(std::vector<Row> m, const CoefficientField& F) {
  std::vector<int> pivots;
  m = rref(std::move(m), F, &pivots);
  std::vector<bool> isPivot(N, false);
  for (int c : pivots) isPivot[c] = true;
  std::vector<Row> basis;
  for (int f = 0; f < N; ++f) {
    if (isPivot[f]) continue;
    Row x{};
    x[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = F.neg(m[r][f]);
    basis.push_back(x);
  }
  return rref(std::move(basis), F);
}

ModelLattice fullSpace(const CoefficientField& F) {
  std::vector<Row> all;
  for (int k = 0; k < N; ++k) {
    Row r{};
    r[k] = 1;
    all.push_back(r);
  }
  return toLattice(rref(std::move(all), F));
}

}  // namespace

// ===========================================================================
// Strata names

std::string stratumName(Stratum s) {
  switch (s) {
    case Stratum::Superspecial: return "superspecial";
    case Stratum::Type0: return "type0";
    case Stratum::Type2: return "type2";
    case Stratum::Type02: return "type02";
    case Stratum::Outside: return "outside";
  }
  return "?";
}

std::optional<Stratum> parseStratum(const std::string& name) {
  if (name == "superspecial") return Stratum::Superspecial;
  if (name == "type0") return Stratum::Type0;
  if (name == "type2") return Stratum::Type2;
  if (name == "type02") return Stratum::Type02;
  if (name == "outside") return Stratum::Outside;
  return std::nullopt;
}

// ===========================================================================
// SymplecticSpace

namespace {

// Gram matrix of the residue pairing β on W: β(t^d u_i, t^d' u_j) = J[i][j]
// when d + d' = -1, zero otherwise.
std::array<std::array<int, N>, N> residueGram(const CoefficientField& F) {
  std::array<std::array<int, N>, N> G{};
  const int minusOne = F.neg(1);
  int J[4][4] = {};
  J[0][2] = 1;
  J[1][3] = 1;
  J[2][0] = minusOne;
  J[3][1] = minusOne;
  for (int db = 0; db < 4; ++db) {      // block of degree db - 2
    const int dc = 3 - db;              // partner block: degrees sum to -1
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) G[4 * db + i][4 * dc + j] = J[i][j];
  }
  return G;
}

}  // namespace

SymplecticSpace::SymplecticSpace(int p, int j) : F_(p, j), R_(F_), gram_(residueGram(F_)) {}

ModelLattice SymplecticSpace::standardLattice() const {
  std::vector<Row> rows;
  for (int k = 8; k < 16; ++k) {  // degree-0 and degree-1 blocks
    Row r{};
    r[k] = 1;
    rows.push_back(r);
  }
  return toLattice(rref(std::move(rows), F_));
}

ModelLattice SymplecticSpace::basePoint() const {
  std::vector<Row> rows;
  for (int k : {8, 9, 10, 12, 13, 14, 15}) {  // e1, e2, f1, and all of tL0
    Row r{};
    r[k] = 1;
    rows.push_back(r);
  }
  return toLattice(rref(std::move(rows), F_));
}

ModelLattice SymplecticSpace::fromRows(const std::vector<std::array<int, N>>& rows) const {
  return toLattice(rref(rows, F_));
}

bool SymplecticSpace::isTbarStable(const ModelLattice& L) const {
  for (int i = 0; i < L.dim; ++i) {
    Row img = tbarRow(L.rows[i]);
    if (!isZeroRow(reduceRow(img, L, F_))) return false;
  }
  return true;
}

std::string SymplecticSpace::canonicalKey(const ModelLattice& L) const {
  std::string key;
  key.reserve(1 + static_cast<std::size_t>(N) * L.dim);
  key.push_back(static_cast<char>('0' + L.dim));
  for (int i = 0; i < L.dim; ++i)
    for (int k = 0; k < N; ++k) key.push_back(static_cast<char>(L.rows[i][k]));
  return key;
}

ModelLattice SymplecticSpace::dualLattice(const ModelLattice& L) const {
  if (L.dim == 0) return fullSpace(F_);
  std::vector<Row> m;
  for (int i = 0; i < L.dim; ++i) {
    Row y{};
    for (int jc = 0; jc < N; ++jc) {
      int acc = 0;
      for (int k = 0; k < N; ++k) acc = F_.add(acc, F_.mul(L.rows[i][k], gram_[k][jc]));
      y[jc] = acc;
    }
    m.push_back(y);
  }
  return toLattice(nullspace(std::move(m), F_));
}

ModelLattice SymplecticSpace::tauImage(const ModelLattice& L) const {
  std::vector<Row> rows;
  for (int i = 0; i < L.dim; ++i) {
    Row r = L.rows[i];
    for (int k = 0; k < N; ++k) r[k] = F_.frob(r[k]);
    rows.push_back(r);
  }
  return toLattice(rref(std::move(rows), F_));
}

ModelLattice SymplecticSpace::sum(const ModelLattice& a, const ModelLattice& b) const {
  std::vector<Row> rows = activeRows(a);
  std::vector<Row> rb = activeRows(b);
  rows.insert(rows.end(), rb.begin(), rb.end());
  return toLattice(rref(std::move(rows), F_));
}

ModelLattice SymplecticSpace::intersect(const ModelLattice& a, const ModelLattice& b) const {
  return dualLattice(sum(dualLattice(a), dualLattice(b)));
}

ModelLattice SymplecticSpace::timesT(const ModelLattice& L) const {
  std::vector<Row> rows;
  for (int i = 0; i < L.dim; ++i) rows.push_back(tbarRow(L.rows[i]));
  return toLattice(rref(std::move(rows), F_));
}

ModelLattice SymplecticSpace::dividesT(const ModelLattice& L) const {
  // Preimage of the row space of L under t̄.
  std::vector<Row> equations;
  std::array<Row, N> residuals{};
  for (int i = 0; i < N; ++i) {
    Row e{};
    e[i] = 1;
    residuals[i] = reduceRow(tbarRow(e), L, F_);
  }
  for (int c = 0; c < N; ++c) {
    Row eq{};
    bool nonzero = false;
    for (int i = 0; i < N; ++i) {
      eq[i] = residuals[i][c];
      nonzero = nonzero || eq[i] != 0;
    }
    if (nonzero) equations.push_back(eq);
  }
  if (equations.empty()) return fullSpace(F_);
  return toLattice(nullspace(std::move(equations), F_));
}

bool SymplecticSpace::isSubset(const ModelLattice& a, const ModelLattice& b) const {
  for (int i = 0; i < a.dim; ++i)
    if (!isZeroRow(reduceRow(a.rows[i], b, F_))) return false;
  return true;
}

int SymplecticSpace::latticeIndex(const ModelLattice& inner, const ModelLattice& outer) const {
  if (!isSubset(inner, outer)) throw std::invalid_argument("latticeIndex: not an inclusion");
  return outer.dim - inner.dim;
}

bool SymplecticSpace::isPointWindow(const ModelLattice& L) const {
  // tL0 <= Lambda: all four degree-1 unit vectors lie in the row space.
  for (int k = 12; k < 16; ++k) {
    Row r{};
    r[k] = 1;
    if (!isZeroRow(reduceRow(r, L, F_))) return false;
  }
  // Lambda <= t^-1 L0: no degree -2 components.
  for (int i = 0; i < L.dim; ++i)
    for (int c = 0; c < 4; ++c)
      if (L.rows[i][c] != 0) return false;
  return true;
}

// ===========================================================================
// Strata and the spin bound

Stratum classifyStratum(const SymplecticSpace& space, const ModelLattice& M) {
  if (M.dim != 7 || !space.isPointWindow(M) || !space.isTbarStable(M))
    return Stratum::Outside;
  const ModelLattice Md = space.dualLattice(M);
  if (!space.isSubset(M, Md)) return Stratum::Outside;
  if (!space.isSubset(space.timesT(Md), M)) return Stratum::Outside;
  const ModelLattice tauMd = space.tauImage(Md);
  if (!space.isSubset(M, tauMd)) return Stratum::Outside;
  if (!space.isSubset(space.timesT(tauMd), M)) return Stratum::Outside;

  const ModelLattice tauM = space.tauImage(M);
  if (tauM == M) return Stratum::Superspecial;
  const ModelLattice sm = space.sum(M, tauM);
  const ModelLattice it = space.intersect(M, tauM);
  const bool sumStable = space.tauImage(sm) == sm;
  const bool intStable = space.tauImage(it) == it;
  if (sumStable && intStable) return Stratum::Type02;
  if (sumStable) return Stratum::Type0;
  if (intStable) return Stratum::Type2;
  return Stratum::Outside;
}

bool spinCheck(const SymplecticSpace& space, const ModelLattice& M) {
  const ModelLattice sm = space.sum(M, space.tauImage(M));
  return sm.dim - M.dim <= 1;
}

// ===========================================================================
// Webs

namespace {

// Row vectors extending `sub` to `super` (both echelonized, sub <= super).
std::vector<Row> quotientExtension(const SymplecticSpace& space,
                                   const ModelLattice& sub,
                                   const ModelLattice& super) {
  const CoefficientField& F = space.field();
  std::vector<Row> ext;
  ModelLattice acc = sub;
  for (int i = 0; i < super.dim; ++i) {
    Row r = reduceRow(super.rows[i], acc, F);
    if (isZeroRow(r)) continue;
    int iv = F.inv(r[leadingCol(r)]);
    for (int k = 0; k < N; ++k) r[k] = F.mul(r[k], iv);
    ext.push_back(r);
    std::vector<Row> rows = activeRows(acc);
    rows.push_back(r);
    acc = toLattice(rref(std::move(rows), F));
  }
  return ext;
}

// All lines of a 2-dimensional quotient, as representative vectors:
// c1 + lambda c2 (lambda in F_Q) and c2.
std::vector<Row> quotientLines(const SymplecticSpace& space, const std::vector<Row>& ext) {
  const CoefficientField& F = space.field();
  std::vector<Row> lines;
  if (ext.size() != 2) throw std::logic_error("quotientLines: quotient is not 2-dimensional");
  for (int lam = 0; lam < F.q(); ++lam) {
    Row v;
    for (int k = 0; k < N; ++k) v[k] = F.add(ext[0][k], F.mul(lam, ext[1][k]));
    lines.push_back(v);
  }
  lines.push_back(ext[1]);
  return lines;
}

ModelLattice extendByVector(const SymplecticSpace& space, const ModelLattice& base,
                            const Row& v) {
  std::vector<Row> rows = activeRows(base);
  rows.push_back(v);
  return toLattice(rref(std::move(rows), space.field()));
}

}  // namespace

long long expectedWebCount(Stratum s, int Q) {
  switch (s) {
    case Stratum::Superspecial: return static_cast<long long>(Q + 1) * (Q + 1);
    case Stratum::Type0: return Q + 1;
    case Stratum::Type2: return Q + 1;
    case Stratum::Type02: return 2LL * Q + 1;
    case Stratum::Outside: return 0;
  }
  return 0;
}

std::vector<WebPair> enumerateWeb(const SymplecticSpace& space, const ModelLattice& M0,
                                  bool withCertificates) {
  std::vector<WebPair> web;
  if (classifyStratum(space, M0) == Stratum::Outside) return web;

  const ModelLattice Md = space.dualLattice(M0);
  const ModelLattice tMd = space.timesT(Md);
  const ModelLattice tauM = space.tauImage(M0);
  const ModelLattice tauMd = space.tauImage(Md);
  const ModelLattice invTauM = space.dividesT(tauM);

  const std::vector<Row> linesS = quotientLines(space, quotientExtension(space, tMd, M0));
  const std::vector<Row> linesT = quotientLines(space, quotientExtension(space, M0, Md));

  struct Half {
    ModelLattice lat;      // S or T
    ModelLattice tauDual;  // tau(dual)
    ModelLattice tTauDual; // t * tau(dual)
  };
  std::vector<Half> Ss, Ts;
  for (const Row& v : linesS) {
    Half h;
    h.lat = extendByVector(space, tMd, v);
    h.tauDual = space.tauImage(space.dualLattice(h.lat));
    h.tTauDual = space.timesT(h.tauDual);
    Ss.push_back(std::move(h));
  }
  for (const Row& v : linesT) {
    Half h;
    h.lat = extendByVector(space, M0, v);
    h.tauDual = space.tauImage(space.dualLattice(h.lat));
    h.tTauDual = space.timesT(h.tauDual);
    Ts.push_back(std::move(h));
  }

  for (const Half& S : Ss) {
    for (const Half& T : Ts) {
      if (!space.isSubset(S.lat, T.tauDual)) continue;
      if (!space.isSubset(T.tTauDual, S.lat)) continue;
      if (!space.isSubset(T.lat, S.tauDual)) continue;
      if (!space.isSubset(S.tTauDual, T.lat)) continue;

      WebPair pair;
      pair.S = S.lat;
      pair.T = T.lat;
      if (withCertificates) {
        auto cert = [&](const std::string& name, const ModelLattice& inner,
                        const ModelLattice& outer) {
          InclusionCertificate c;
          c.name = name;
          c.holds = space.isSubset(inner, outer);
          c.index = c.holds ? space.latticeIndex(inner, outer) : -1;
          return c;
        };
        pair.certificates.push_back(cert("t.Mdual <= S", tMd, S.lat));
        pair.certificates.push_back(cert("S <= M", S.lat, M0));
        pair.certificates.push_back(cert("M <= T", M0, T.lat));
        pair.certificates.push_back(cert("T <= Mdual", T.lat, Md));
        pair.certificates.push_back(cert("tau.M <= tau.Tdual", tauM, T.tauDual));
        pair.certificates.push_back(cert("tau.Tdual <= tau.Mdual", T.tauDual, tauMd));
        pair.certificates.push_back(cert("tau.Mdual <= tau.Sdual", tauMd, S.tauDual));
        pair.certificates.push_back(cert("tau.Sdual <= (1/t).tau.M", S.tauDual, invTauM));
        pair.certified = true;
        for (const InclusionCertificate& c : pair.certificates)
          if (!c.holds || c.index != 1) pair.certified = false;
      }
      web.push_back(std::move(pair));
    }
  }
  return web;
}

// ===========================================================================
// Breadth-first search for stratum representatives

SearchReport findBasePoints(const SymplecticSpace& space, Stratum target, int sampleSize,
                            std::uint64_t seed, long long budget, long long perVertexCap) {
  SearchReport report;
  std::mt19937_64 rng(seed);
  std::deque<ModelLattice> queue;
  std::set<std::string> seen;
  bool truncatedAny = false;

  auto consider = [&](const ModelLattice& C) {
    const std::string key = space.canonicalKey(C);
    if (!seen.insert(key).second) return;
    ++report.classifiedCandidates;
    const Stratum st = classifyStratum(space, C);
    ++report.strataSeen[stratumName(st)];
    if (st == Stratum::Outside) return;
    ++report.validPoints;
    ++report.spinChecked;
    if (spinCheck(space, C)) ++report.spinPassed;
    if (st == target && static_cast<int>(report.found.size()) < sampleSize)
      report.found.push_back(C);
    queue.push_back(C);
  };

  consider(space.basePoint());

  while (!queue.empty() && static_cast<int>(report.found.size()) < sampleSize &&
         report.dequeuedVertices < budget) {
    const ModelLattice M = queue.front();
    queue.pop_front();
    ++report.dequeuedVertices;

    const std::vector<WebPair> web = enumerateWeb(space, M, /*withCertificates=*/false);

    // Candidate points M' = S + line, with the line drawn from T/S.  Pairs
    // whose halves are both tau-stable are explored first: a non-fixed line
    // there gives a point whose sum and intersection with its tau-image stay
    // inside tau-stable bounds, which is the TYPE02 shape.
    std::vector<std::pair<int, Row>> prioritized, rest;
    for (std::size_t pi = 0; pi < web.size(); ++pi) {
      const WebPair& wp = web[pi];
      const bool stablePair =
          space.tauImage(wp.S) == wp.S && space.tauImage(wp.T) == wp.T;
      const std::vector<Row> ext = quotientExtension(space, wp.S, wp.T);
      for (const Row& v : quotientLines(space, ext)) {
        (stablePair ? prioritized : rest).emplace_back(static_cast<int>(pi), v);
      }
    }
    if (perVertexCap > 0 &&
        static_cast<long long>(prioritized.size() + rest.size()) > perVertexCap) {
      std::shuffle(rest.begin(), rest.end(), rng);
      truncatedAny = true;
    }
    long long taken = 0;
    auto visit = [&](const std::vector<std::pair<int, Row>>& list) {
      for (const auto& [pi, v] : list) {
        if (perVertexCap > 0 && taken >= perVertexCap) break;
        ++taken;
        consider(extendByVector(space, web[pi].S, v));
        if (static_cast<int>(report.found.size()) >= sampleSize) break;
      }
    };
    visit(prioritized);
    if (static_cast<int>(report.found.size()) < sampleSize) visit(rest);
  }

  report.exhausted = queue.empty() && !truncatedAny;
  report.budgetHit = !queue.empty() && report.dequeuedVertices >= budget;
  return report;
}

// ===========================================================================
// Partner uniqueness in a web

PartnerReport uniquePartnerCheck(const SymplecticSpace& space, const ModelLattice& M0,
                                 char side) {
  PartnerReport report;
  report.side = side;
  const Stratum st = classifyStratum(space, M0);
  const std::vector<WebPair> web = enumerateWeb(space, M0, /*withCertificates=*/false);
  const int Q = space.q();

  std::map<std::string, int> counts;
  for (const WebPair& wp : web) {
    const ModelLattice& keyL = side == 'T' ? wp.T : wp.S;
    ++counts[space.canonicalKey(keyL)];
  }
  for (const auto& [key, n] : counts) {
    ++report.histogram[n];
    if (n > 1) ++report.multiplePartnerEntries;
  }

  std::ostringstream detail;
  switch (st) {
    case Stratum::Superspecial: {
      bool ok = !counts.empty();
      for (const auto& [key, n] : counts)
        if (n != Q + 1) ok = false;
      report.expectationMet = ok;
      detail << "superspecial: every " << side << " should meet all Q+1 partners";
      break;
    }
    case Stratum::Type0:
    case Stratum::Type2: {
      const char uniqueSide = st == Stratum::Type2 ? 'T' : 'S';
      if (side == uniqueSide) {
        bool ok = !counts.empty();
        for (const auto& [key, n] : counts)
          if (n != 1) ok = false;
        report.expectationMet = ok;
        detail << stratumName(st) << ": every " << side << " should have a unique partner";
      } else {
        report.expectationMet = true;
        detail << stratumName(st) << ": no uniqueness constraint on side " << side;
      }
      break;
    }
    case Stratum::Type02: {
      const ModelLattice tauM = space.tauImage(M0);
      const ModelLattice special =
          side == 'T' ? space.sum(M0, tauM) : space.intersect(M0, tauM);
      const std::string specialKey = space.canonicalKey(special);
      bool ok = counts.count(specialKey) > 0 && counts[specialKey] > 1;
      for (const auto& [key, n] : counts)
        if (key != specialKey && n != 1) ok = false;
      report.expectationMet = ok;
      detail << "type02: unique multi-partner " << side << " equal to "
             << (side == 'T' ? "M + tau M" : "M inter tau M");
      break;
    }
    case Stratum::Outside:
      report.expectationMet = false;
      detail << "outside: no web";
      break;
  }
  report.detail = detail.str();
  return report;
}

// ===========================================================================
// Exhaustive census by shape decomposition

namespace {

using Vec4 = std::array<int, 4>;

// The symplectic form of C restricted to coordinate vectors.
int pairGram4(const CoefficientField& F, const Vec4& x, const Vec4& y) {
  int acc = 0;
  acc = F.add(acc, F.mul(x[0], y[2]));
  acc = F.add(acc, F.mul(x[1], y[3]));
  acc = F.sub(acc, F.mul(x[2], y[0]));
  acc = F.sub(acc, F.mul(x[3], y[1]));
  return acc;
}

Vec4 frobVec4(const CoefficientField& F, const Vec4& x) {
  return {F.frob(x[0]), F.frob(x[1]), F.frob(x[2]), F.frob(x[3])};
}

// One representative per line of P³(F_Q).
std::vector<Vec4> lineReps4(const CoefficientField& F) {
  std::vector<Vec4> reps;
  const int q = F.q();
  for (int a1 = 0; a1 < q; ++a1)
    for (int a2 = 0; a2 < q; ++a2)
      for (int a3 = 0; a3 < q; ++a3) reps.push_back({1, a1, a2, a3});
  for (int a2 = 0; a2 < q; ++a2)
    for (int a3 = 0; a3 < q; ++a3) reps.push_back({0, 1, a2, a3});
  for (int a3 = 0; a3 < q; ++a3) reps.push_back({0, 0, 1, a3});
  reps.push_back({0, 0, 0, 1});
  return reps;
}

int rankVec4(const CoefficientField& F, std::vector<Vec4> m) {
  int r = 0;
  for (int c = 0; c < 4 && r < static_cast<int>(m.size()); ++c) {
    int sel = -1;
    for (int i = r; i < static_cast<int>(m.size()); ++i)
      if (m[i][c] != 0) { sel = i; break; }
    if (sel < 0) continue;
    std::swap(m[r], m[sel]);
    const int iv = F.inv(m[r][c]);
    for (int k = 0; k < 4; ++k) m[r][k] = F.mul(m[r][k], iv);
    for (int i = 0; i < static_cast<int>(m.size()); ++i) {
      if (i == r || m[i][c] == 0) continue;
      const int f = m[i][c];
      for (int k = 0; k < 4; ++k) m[i][k] = F.sub(m[i][k], F.mul(f, m[r][k]));
    }
    ++r;
  }
  return r;
}

// Reduced echelon form of a plane; returns pivot columns.
std::array<int, 2> rrefPlane(const CoefficientField& F, std::array<Vec4, 2>& m) {
  std::array<int, 2> piv{-1, -1};
  int r = 0;
  for (int c = 0; c < 4 && r < 2; ++c) {
    int sel = -1;
    for (int i = r; i < 2; ++i)
      if (m[i][c] != 0) { sel = i; break; }
    if (sel < 0) continue;
    std::swap(m[r], m[sel]);
    const int iv = F.inv(m[r][c]);
    for (int k = 0; k < 4; ++k) m[r][k] = F.mul(m[r][k], iv);
    for (int i = 0; i < 2; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const int f = m[i][c];
      for (int k = 0; k < 4; ++k) m[i][k] = F.sub(m[i][k], F.mul(f, m[r][k]));
    }
    piv[r] = c;
    ++r;
  }
  return piv;
}

}  // namespace

StrataCensus censusAllPoints(const SymplecticSpace& space, int witnessCapPerStratum,
                             bool verifyPrefilters) {
  StrataCensus census;
  const CoefficientField& F = space.field();
  const int q = F.q();

  const auto tally = [&](const ModelLattice& V) {
    ++census.candidatesClassified;
    const Stratum st = classifyStratum(space, V);
    ++census.counts[stratumName(st)];
    if (st != Stratum::Outside) {
      ++census.validTotal;
      auto& bucket = census.witnesses[stratumName(st)];
      if (static_cast<int>(bucket.size()) < witnessCapPerStratum) bucket.push_back(V);
    }
    return st;
  };

  // Interior points: V = ker(φ) ⊕ tL0 over covectors φ.
  for (const Vec4& phi : lineReps4(F)) {
    int piv = 0;
    while (phi[piv] == 0) ++piv;
    std::vector<Row> rows;
    for (int k = 0; k < 4; ++k) {
      if (k == piv) continue;
      Row r{};
      r[8 + k] = 1;
      r[8 + piv] = F.neg(F.mul(phi[k], F.inv(phi[piv])));
      rows.push_back(r);
    }
    for (int k = 12; k < 16; ++k) {
      Row r{};
      r[k] = 1;
      rows.push_back(r);
    }
    tally(space.fromRows(rows));
  }

  // Co-interior points: V = ⟨t⁻¹w + z⟩ ⊕ K ⊕ tL0.  Validity needs K ∋ w
  // Lagrangian with τK = K and β(V, τV) = 0, which pins z to the kernel of
  // one Frobenius-linear functional; everything pruned here is OUTSIDE.
  const auto buildCoInterior = [&](const Vec4& w, const std::array<Vec4, 2>& plane,
                                   const Vec4& z) {
    std::vector<Row> rows;
    Row ru{};
    for (int k = 0; k < 4; ++k) ru[4 + k] = w[k];
    for (int k = 0; k < 4; ++k) ru[8 + k] = z[k];
    rows.push_back(ru);
    for (const Vec4& kv : plane) {
      Row r{};
      for (int k = 0; k < 4; ++k) r[8 + k] = kv[k];
      rows.push_back(r);
    }
    for (int k = 12; k < 16; ++k) {
      Row r{};
      r[k] = 1;
      rows.push_back(r);
    }
    return space.fromRows(rows);
  };

  const auto pruned = [&](const Vec4& w, const std::array<Vec4, 2>& plane, const Vec4& z,
                          long long weight) {
    census.prefilterPruned += weight;
    if (verifyPrefilters && classifyStratum(space, buildCoInterior(w, plane, z)) !=
                                Stratum::Outside)
      ++census.prefilterViolations;
  };

  for (const Vec4& w : lineReps4(F)) {
    const Vec4 tw = frobVec4(F, w);
    std::vector<std::array<Vec4, 2>> planes;
    if (rankVec4(F, {w, tw}) == 2) {
      // K must contain τw as well, so K = ⟨w, τw⟩; it must be isotropic and
      // τ-stable.
      const Vec4 ttw = frobVec4(F, tw);
      if (pairGram4(F, w, tw) != 0 || rankVec4(F, {w, tw, ttw}) > 2) {
        if (verifyPrefilters) pruned(w, {w, tw}, Vec4{}, 0);
        census.prefilterPruned += static_cast<long long>(q) * q;
        continue;
      }
      planes.push_back({w, tw});
    } else {
      std::set<std::array<Vec4, 2>> seen;
      for (const Vec4& y : lineReps4(F)) {
        if (pairGram4(F, w, y) != 0 || rankVec4(F, {w, y}) != 2) continue;
        const Vec4 ty = frobVec4(F, y);
        std::array<Vec4, 2> pl{w, y};
        rrefPlane(F, pl);
        if (rankVec4(F, {w, y, ty}) > 2) {
          if (seen.insert(pl).second)
            census.prefilterPruned += static_cast<long long>(q) * q;
          continue;
        }
        if (seen.insert(pl).second) planes.push_back({w, y});
      }
    }
    for (const auto& gen : planes) {
      std::array<Vec4, 2> pl = gen;
      const std::array<int, 2> piv = rrefPlane(F, pl);
      std::array<int, 2> freeCols{};
      int nf = 0;
      for (int c = 0; c < 4; ++c)
        if (c != piv[0] && c != piv[1]) freeCols[nf++] = c;
      for (int a = 0; a < q; ++a) {
        for (int b = 0; b < q; ++b) {
          Vec4 z{};
          z[freeCols[0]] = a;
          z[freeCols[1]] = b;
          const Vec4 tz = frobVec4(F, z);
          if (F.add(pairGram4(F, w, tz), pairGram4(F, z, tw)) != 0) {
            pruned(w, pl, z, 1);
            continue;
          }
          tally(buildCoInterior(w, pl, z));
        }
      }
    }
  }
  return census;
}

// ===========================================================================
// Hermite bases and JSON transport

std::array<std::array<Series, 4>, 4> SymplecticSpace::hermiteBasis(const ModelLattice& L) const {
  if (!isPointWindow(L))
    throw std::invalid_argument("hermiteBasis: lattice is not in the inner window");
  using SRow = std::array<Series, 4>;
  // Generators of t*Lambda inside L0 = R^4: t times a lift of each V-row.
  // A coordinate at index 4(d+2)+k contributes t^(d+1) to component k.
  std::vector<SRow> work;
  for (int i = 0; i < L.dim; ++i) {
    SRow r{};
    for (int d = -1; d <= 1; ++d)
      for (int k = 0; k < 4; ++k) {
        const int coeff = L.rows[i][4 * (d + 2) + k];
        if (coeff != 0) r[k].c[d + 1] = F_.add(r[k].c[d + 1], coeff);
      }
    work.push_back(r);
  }

  std::array<SRow, 4> basis{};
  for (int col = 3; col >= 0; --col) {
    // Pivot: the working row with minimal valuation in this column.
    int best = -1, bestVal = 5;
    for (std::size_t i = 0; i < work.size(); ++i) {
      const int v = R_.valuation(work[i][col]);
      if (v < bestVal) {
        bestVal = v;
        best = static_cast<int>(i);
      }
    }
    if (best < 0 || bestVal >= 4) throw std::logic_error("hermiteBasis: module is not full rank");
    SRow piv = work[best];
    work.erase(work.begin() + best);
    const Series unit = R_.shiftDown(piv[col], bestVal);
    const Series uinv = R_.inverse(unit);
    for (int k = 0; k < 4; ++k) piv[k] = R_.mul(piv[k], uinv);
    for (SRow& other : work) {
      if (R_.isZero(other[col])) continue;
      const Series q = R_.shiftDown(other[col], bestVal);
      for (int k = 0; k < 4; ++k) other[k] = R_.sub(other[k], R_.mul(q, piv[k]));
    }
    basis[col] = piv;
  }

  // Off-diagonal reduction: entry (k, j), j < k, reduced modulo t^(a_j).
  for (int k = 0; k < 4; ++k) {
    for (int j = k - 1; j >= 0; --j) {
      const int aj = R_.valuation(basis[j][j]);
      const Series q = R_.shiftDown(R_.truncateBelow(basis[k][j], aj), aj);
      if (R_.isZero(q)) continue;
      for (int c = 0; c < 4; ++c) basis[k][c] = R_.sub(basis[k][c], R_.mul(q, basis[j][c]));
    }
  }

  int pivotSum = 0;
  for (int k = 0; k < 4; ++k) pivotSum += R_.valuation(basis[k][k]);
  assert(pivotSum == 12 - L.dim);

  std::array<std::array<Series, 4>, 4> out{};
  for (int k = 0; k < 4; ++k) out[k] = basis[k];
  return out;
}

nlohmann::json SymplecticSpace::exportJson(const ModelLattice& L) const {
  const auto H = hermiteBasis(L);
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k < 4; ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 4; ++c)
      row.push_back(nlohmann::json::array(
          {H[k][c].c[0], H[k][c].c[1], H[k][c].c[2], H[k][c].c[3]}));
    rows.push_back(row);
  }
  return nlohmann::json{{"schema_version", "1.0"},
                        {"p", F_.p()},
                        {"j", F_.degree()},
                        {"shift", -1},
                        {"basis", rows}};
}

std::optional<ModelLattice> SymplecticSpace::importJson(const nlohmann::json& doc) const {
  using SRow = std::array<Series, 4>;
  try {
    if (doc.at("p").get<int>() != F_.p() || doc.at("j").get<int>() != F_.degree())
      return std::nullopt;
    const int shift = doc.at("shift").get<int>();
    if (shift < -2 || shift > 1) return std::nullopt;

    std::vector<SRow> gens;
    for (const auto& row : doc.at("basis")) {
      if (!row.is_array() || row.size() != 4) return std::nullopt;
      SRow r{};
      for (int c = 0; c < 4; ++c) {
        const auto& cell = row.at(c);
        if (!cell.is_array() || cell.size() != 4) return std::nullopt;
        for (int d = 0; d < 4; ++d) {
          const int v = cell.at(d).get<int>();
          if (v < 0 || v >= F_.q()) return std::nullopt;
          r[c].c[d] = v;
        }
      }
      gens.push_back(r);
    }
    if (gens.empty()) return std::nullopt;

    // Upper window: t^(shift+1) X <= L0; only binding for shift = -2.
    if (shift + 1 < 0) {
      const int need = -(shift + 1);
      for (const SRow& r : gens)
        for (int c = 0; c < 4; ++c)
          if (!R_.isZero(r[c]) && R_.valuation(r[c]) < need) return std::nullopt;
    }

    // Hermite form of X = span_R(gens); rejects modules of rank < 4.
    std::array<SRow, 4> H{};
    {
      std::vector<SRow> work = gens;
      for (int col = 3; col >= 0; --col) {
        int best = -1, bestVal = 5;
        for (std::size_t i = 0; i < work.size(); ++i) {
          const int v = R_.valuation(work[i][col]);
          if (v < bestVal) {
            bestVal = v;
            best = static_cast<int>(i);
          }
        }
        if (best < 0 || bestVal >= 4) return std::nullopt;
        SRow piv = work[best];
        work.erase(work.begin() + best);
        const Series uinv = R_.inverse(R_.shiftDown(piv[col], bestVal));
        for (int k = 0; k < 4; ++k) piv[k] = R_.mul(piv[k], uinv);
        for (SRow& other : work) {
          if (R_.isZero(other[col])) continue;
          const Series q = R_.shiftDown(other[col], bestVal);
          for (int k = 0; k < 4; ++k) other[k] = R_.sub(other[k], R_.mul(q, piv[k]));
        }
        H[col] = piv;
      }
    }

    // Lower window: t^(1-shift) u_k must lie in X for every k.
    const int lowDeg = 1 - shift;
    if (lowDeg < 0 || lowDeg > 3) return std::nullopt;
    for (int k = 0; k < 4; ++k) {
      SRow r{};
      r[k] = R_.monomial(1, lowDeg);
      for (int col = 3; col >= 0; --col) {
        if (R_.isZero(r[col])) continue;
        const int a = R_.valuation(H[col][col]);
        if (R_.valuation(r[col]) < a) return std::nullopt;
        const Series q = R_.shiftDown(r[col], a);
        for (int c = 0; c < 4; ++c) r[c] = R_.sub(r[c], R_.mul(q, H[col][c]));
      }
      for (int c = 0; c < 4; ++c)
        if (!R_.isZero(r[c])) return std::nullopt;
    }

    // Residue classes of t^m * t^shift * H-rows span V = Lambda / t^2 L0.
    std::vector<Row> vrows;
    for (int m = 0; m < 8; ++m) {
      for (int k = 0; k < 4; ++k) {
        Row v{};
        bool nonzero = false;
        for (int c = 0; c < 4; ++c) {
          for (int i = 0; i < 4; ++i) {
            if (H[k][c].c[i] == 0) continue;
            const int power = shift + m + i;
            if (power < -2 || power > 1) continue;
            const int idx = 4 * (power + 2) + c;
            v[idx] = F_.add(v[idx], H[k][c].c[i]);
            nonzero = true;
          }
        }
        if (nonzero) vrows.push_back(v);
      }
    }
    ModelLattice V = toLattice(rref(std::move(vrows), F_));
    if (!isTbarStable(V) || !isPointWindow(V)) return std::nullopt;
    return V;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace c2::lat
