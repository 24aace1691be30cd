#pragma once
//
// lattice_oracle.hpp — a finite brute-force oracle for chains of symplectic
// lattices over a truncated power-series ring, used to verify fiber theorems
// point by point.
//
// Setting.  Fix Q = p^j (p in {3,5}, j in {1,2,3}) and the field K = F_Q((t)).
// C is a rank-4 symplectic K-space with basis e1, e2, f1, f2 and Gram matrix
// J (⟨e_i, f_i⟩ = 1, all other pairings zero), and L0 = F_Q[[t]]^4 is the
// standard lattice.  Every lattice this oracle touches sits in the fixed
// window t²L0 ⊆ Λ ⊆ t⁻²L0, so lattices correspond exactly to t̄-stable
// F_Q-subspaces V = Λ/t²L0 of the 16-dimensional residue space
// W = t⁻²L0 / t²L0, where t̄ is the nilpotent shift induced by multiplication
// by t.  The basis of W is t^d·u_k for d = -2, -1, 0, 1 (in that block
// order) and u = (e1, e2, f1, f2).  W carries the residue pairing
// β(x, y) = [t⁻¹-coefficient of ⟨x, y⟩], which is perfect and pairs the
// degree blocks -2 with 1 and -1 with 0.  Under the correspondence the
// symplectic dual satisfies V_{Λ∨} = (V_Λ)^⊥ (the deeper congruence
// conditions follow from t̄-stability and self-adjointness of t̄), sums and
// intersections are plain linear algebra, multiplication by t is the image
// of t̄, division by t is the preimage, and the semilinear operator τ acts by
// the coordinate Frobenius x ↦ x^p followed by re-echelonning.  Everything
// is exact table-driven arithmetic.
//
// Points.  A point is a lattice M in the inner window tL0 ⊆ M ⊆ t⁻¹L0 with
//   t·M∨ ⊂ M ⊂ M∨  and  t·τ(M∨) ⊂ M ⊂ τ(M∨)   (all indices 2);
// in residue terms dim V_M = 7.  Valid points are classified by the
// τ-stability of M + τM and M ∩ τM:
//   SUPERSPECIAL  τM = M
//   TYPE02        both M + τM and M ∩ τM are τ-stable (τM ≠ M)
//   TYPE0         only M + τM is τ-stable
//   TYPE2         only M ∩ τM is τ-stable
//   OUTSIDE       anything else (including invalid window points).
//
// Webs.  At a valid point M the attached web is the set of pairs (S, T) with
//   S = t·M∨ + line ⊂ M,   T = M + line ⊂ M∨,
//   t·τ(T∨) ⊆ S ⊆ τ(T∨)  and  t·τ(S∨) ⊆ T ⊆ τ(S∨).
// Each retained pair carries eight index-1 inclusion certificates along the
// double chain
//   t·M∨ ⊂ S ⊂ M ⊂ T ⊂ M∨   and   τM ⊂ τ(T∨) ⊂ τ(M∨) ⊂ τ(S∨) ⊂ t⁻¹·τM.
// The expected pair counts are (Q+1)² at a superspecial point, Q+1 at TYPE0
// and TYPE2 points, and 2Q+1 at a TYPE02 point.
//
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace c2::lat {

// ---------------------------------------------------------------------------
// Finite field GF(p^j), fully table-driven (q <= 125).  Elements are encoded
// as integers in [0, q): the base-p digits are the polynomial coefficients of
// the residue class modulo a fixed irreducible monic polynomial.

class CoefficientField {
 public:
  CoefficientField(int p, int j);

  int p() const { return p_; }
  int degree() const { return j_; }
  int q() const { return q_; }
  // Coefficients c[0..j-1] of the monic modulus x^j + c[j-1]x^(j-1) + ... + c[0].
  const std::vector<int>& modulus() const { return modulus_; }

  int add(int a, int b) const { return addT_[a * q_ + b]; }
  int sub(int a, int b) const { return addT_[a * q_ + negT_[b]]; }
  int mul(int a, int b) const { return mulT_[a * q_ + b]; }
  int neg(int a) const { return negT_[a]; }
  int inv(int a) const;  // a != 0
  int frob(int a) const { return frobT_[a]; }  // x -> x^p

 private:
  int p_, j_, q_;
  std::vector<int> modulus_;
  std::vector<int> addT_, mulT_, negT_, frobT_, invT_;
};

// ---------------------------------------------------------------------------
// Truncated series ring R = F_Q[t]/t^4, used for Hermite bases and transport.

struct Series {
  std::array<int, 4> c{0, 0, 0, 0};  // c[d] = coefficient of t^d
  friend auto operator<=>(const Series&, const Series&) = default;
};

class TruncatedSeriesRing {
 public:
  explicit TruncatedSeriesRing(const CoefficientField& F) : F_(&F) {}

  Series zero() const { return Series{}; }
  Series one() const { return Series{{1, 0, 0, 0}}; }
  Series monomial(int coeff, int deg) const;
  Series add(const Series& a, const Series& b) const;
  Series sub(const Series& a, const Series& b) const;
  Series mul(const Series& a, const Series& b) const;
  Series scale(int c, const Series& a) const;
  bool isZero(const Series& a) const { return a == Series{}; }
  int valuation(const Series& a) const;  // 4 for the zero series
  bool isUnit(const Series& a) const { return a.c[0] != 0; }
  Series inverse(const Series& a) const;  // requires isUnit
  // a / t^k for val(a) >= k (exact shift; no information is lost below t^4).
  Series shiftDown(const Series& a, int k) const;
  // Zero out coefficients below degree k.
  Series truncateBelow(const Series& a, int k) const;

 private:
  const CoefficientField* F_;
};

// ---------------------------------------------------------------------------
// Lattices in the window t²L0 ⊆ Λ ⊆ t⁻²L0, as echelonized subspaces of W.

inline constexpr int kResidueDim = 16;

struct ModelLattice {
  int dim = 0;
  std::array<std::array<int, kResidueDim>, kResidueDim> rows{};
  friend auto operator<=>(const ModelLattice&, const ModelLattice&) = default;
};

enum class Stratum { Superspecial, Type0, Type2, Type02, Outside };
std::string stratumName(Stratum s);
std::optional<Stratum> parseStratum(const std::string& name);

class SymplecticSpace {
 public:
  SymplecticSpace(int p, int j);

  const CoefficientField& field() const { return F_; }
  const TruncatedSeriesRing& series() const { return R_; }
  int q() const { return F_.q(); }

  // Base objects.
  ModelLattice standardLattice() const;  // L0
  ModelLattice basePoint() const;        // M0 = <e1, e2, f1, t·f2>, τ-fixed

  // Construction and canonicalization.  Row coordinates follow the W basis:
  // index 4(d+2)+k is the coefficient of t^d u_k.
  ModelLattice fromRows(const std::vector<std::array<int, kResidueDim>>& rows) const;
  bool isTbarStable(const ModelLattice& L) const;
  std::string canonicalKey(const ModelLattice& L) const;

  // Core operations.
  ModelLattice dualLattice(const ModelLattice& L) const;
  ModelLattice tauImage(const ModelLattice& L) const;
  ModelLattice sum(const ModelLattice& a, const ModelLattice& b) const;
  ModelLattice intersect(const ModelLattice& a, const ModelLattice& b) const;
  ModelLattice timesT(const ModelLattice& L) const;     // t·Λ, needs Λ ⊇ tL0
  ModelLattice dividesT(const ModelLattice& L) const;   // t⁻¹·Λ, needs Λ ⊆ t⁻¹L0
  bool isSubset(const ModelLattice& a, const ModelLattice& b) const;  // a ⊆ b
  // F_Q-dimension of outer/inner; requires inner ⊆ outer.
  int latticeIndex(const ModelLattice& inner, const ModelLattice& outer) const;

  // Inner-window test: tL0 ⊆ Λ ⊆ t⁻¹L0.
  bool isPointWindow(const ModelLattice& L) const;

  // Hermite basis of t·Λ inside L0 = F_Q[[t]]^4 for an inner-window Λ:
  // four lower-triangular rows over R with monic pivots t^(a_k);
  // Σ a_k = 12 - dim V_Λ.
  std::array<std::array<Series, 4>, 4> hermiteBasis(const ModelLattice& L) const;

  // JSON transport for inner-window lattices.  The exported object spans
  // t^shift · rows over R with shift = -1.
  nlohmann::json exportJson(const ModelLattice& L) const;
  std::optional<ModelLattice> importJson(const nlohmann::json& doc) const;

 private:
  CoefficientField F_;
  TruncatedSeriesRing R_;
  std::array<std::array<int, kResidueDim>, kResidueDim> gram_{};  // β on W
};

// ---------------------------------------------------------------------------
// Strata, webs, searches.

Stratum classifyStratum(const SymplecticSpace& space, const ModelLattice& M);

// index(M, M + τM) <= 1 — the spin bound, checked on valid points.
bool spinCheck(const SymplecticSpace& space, const ModelLattice& M);

struct InclusionCertificate {
  std::string name;
  bool holds = false;
  int index = -1;  // expected 1
};

struct WebPair {
  ModelLattice S;
  ModelLattice T;
  std::vector<InclusionCertificate> certificates;  // exactly 8 when computed
  bool certified = false;  // all certificates hold with index 1
};

std::vector<WebPair> enumerateWeb(const SymplecticSpace& space,
                                  const ModelLattice& M0,
                                  bool withCertificates = true);

long long expectedWebCount(Stratum s, int Q);

struct SearchReport {
  std::vector<ModelLattice> found;
  long long dequeuedVertices = 0;
  long long classifiedCandidates = 0;
  long long validPoints = 0;  // distinct valid points encountered
  long long spinChecked = 0;
  long long spinPassed = 0;
  bool exhausted = false;   // queue ran dry with no candidate ever skipped
  bool budgetHit = false;   // dequeue budget reached with work remaining
  std::map<std::string, long long> strataSeen;  // name -> count
};

// Seeded breadth-first search through the web graph for points of the target
// stratum.  perVertexCap bounds how many neighbor candidates are classified
// per dequeued vertex (0 = unlimited, required for honest exhaustion claims).
SearchReport findBasePoints(const SymplecticSpace& space, Stratum target,
                            int sampleSize, std::uint64_t seed,
                            long long budget, long long perVertexCap = 0);

// Exhaustive census of every valid point at the given scale.  A valid point
// V (dim 7, containing the t-block, no t⁻²-components) decomposes by the
// t⁻¹-block rank of its middle part V/tL0 into exactly two shapes:
//   interior     V = ker(φ) ⊕ tL0          for a covector φ on the e-block;
//   co-interior  V = ⟨t⁻¹w + z⟩ ⊕ K ⊕ tL0  for a plane K ∋ w and a shift z.
// Both families are finite (φ over P³(F_Q); (w, K, z) with z running over a
// transversal of F_Q⁴/K), so classifying every member visits every valid
// point exactly once.  This turns a NOT_FOUND from the budgeted search into
// an exhaustion proof: a stratum absent from the census is empty at this Q.
// Necessary validity prefilters (K Lagrangian and τ-stable, one linear
// condition tying z to w) keep the candidate count near the valid count;
// verifyPrefilters additionally spot-classifies pruned candidates and counts
// any that were valid after all (expected 0; nonzero means a model bug).
struct StrataCensus {
  std::map<std::string, long long> counts;  // stratum name -> valid points
  long long validTotal = 0;
  long long candidatesClassified = 0;
  long long prefilterPruned = 0;
  long long prefilterViolations = 0;  // only populated with verifyPrefilters
  std::map<std::string, std::vector<ModelLattice>> witnesses;  // per stratum
};

StrataCensus censusAllPoints(const SymplecticSpace& space,
                             int witnessCapPerStratum = 2,
                             bool verifyPrefilters = false);

struct PartnerReport {
  char side = 'T';  // 'T': count S-partners per T; 'S': count T-partners per S
  std::map<int, int> histogram;  // partner count -> occurrences
  int multiplePartnerEntries = 0;
  bool expectationMet = false;
  std::string detail;
};

// Uniqueness structure of the web at M0, checked against the stratum of M0:
// TYPE2 ⇒ every T has exactly one S; TYPE0 ⇒ every S has exactly one T;
// TYPE02 ⇒ exactly one multi-partner entry per side (T = M+τM, S = M∩τM);
// SUPERSPECIAL ⇒ every entry has Q+1 partners.
PartnerReport uniquePartnerCheck(const SymplecticSpace& space,
                                 const ModelLattice& M0, char side);

}  // namespace c2::lat
