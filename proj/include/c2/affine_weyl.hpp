#pragma once
//
// affine_weyl.hpp — exact arithmetic in an extended affine Weyl group of
// type C~2.
//
// The group modeled here is W~ = W_a ⋊ Ω where W_a is the affine Weyl group
// with simple reflections s0, s1, s2 (Coxeter orders m(s0,s1) = m(s1,s2) = 4,
// m(s0,s2) = 2) and Ω ≅ Z is generated by a length-zero element τ whose
// square acts trivially on the apartment but is *not* the identity of the
// group: the Ω-grading (here called omega) records an integer similitude
// valuation, so τ² = (trivial apartment action, omega = 2).
//
// Apartment model.  Points live in R², the four positive roots are
//   e1 − e2,  e1 + e2,  2·e1,  2·e2,
// and the base alcove is { 0 < x2 < x1 < 1/2 }, cut out by the walls of
//   s1 : x1 = x2        (x ↦ (x2, x1))
//   s2 : x2 = 0         (x ↦ (x1, −x2))
//   s0 : x1 = 1/2       (x ↦ (1 − x1, x2))
// while τ acts by x ↦ (1/2 − x2, 1/2 − x1), rotating the base alcove onto
// itself.  Every group element is an affine map x ↦ A·x + a/2 with A a signed
// permutation matrix and a ∈ Z² ("doubled" translation coordinates so that
// half-integral translations stay integral), plus the omega grading.  A
// parity invariant ties the two: both entries of a are even iff omega is
// even, both odd iff omega is odd (mixed parity never occurs).
//
// All length/descent computations are exact integer arithmetic on the
// barycenter p = (1/3, 1/6) of the base alcove, stored scaled by 6 as
// P = (2, 1); an element moves P to A·P + 3·a.  Root evaluations of such
// image points are never divisible by 6 (no alcove point lies on a wall), so
//   length(w) = Σ_{α>0} #{ k ∈ Z : 6k strictly between ⟨α,P⟩ and ⟨α,w(P)⟩ }
// is a safe floor-division count.  A second, independent length
// implementation strips descents greedily; tests require the two to agree.
//
#include <array>
#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace c2::weyl {

// Index of a simple reflection: 0, 1 or 2 (0 is the affine node).
using SimpleReflection = int;

// Coweight in apartment coordinates, stored doubled so half-integral vectors
// are exact: Coweight{n1, n2} denotes (n1/2, n2/2).  The coweight lattice of
// this group requires n1 ≡ n2 (mod 2).
struct Coweight {
  int n1 = 0;
  int n2 = 0;
  friend auto operator<=>(const Coweight&, const Coweight&) = default;
};

// Group element: apartment map x ↦ lin·x + tr/2 together with the Ω-grading.
// lin is row-major 2×2; tr holds doubled translation coordinates.
struct Element {
  std::array<int, 4> lin{1, 0, 0, 1};
  std::array<int, 2> tr{0, 0};
  int omega = 0;
  friend auto operator<=>(const Element&, const Element&) = default;
};

// A word in the generators: s_{letters[0]} ··· s_{letters[k-1]} · τ^tauExp.
struct Word {
  std::vector<int> letters;
  int tauExp = 0;
  friend auto operator<=>(const Word&, const Word&) = default;
};

Element identity();
Element simpleReflection(SimpleReflection s);
Element tauElement();
Element tauPower(int k);

Element multiply(const Element& a, const Element& b);
Element inverse(const Element& w);

// Consistency of the representation (signed-permutation linear part and the
// translation/omega parity invariant).  Used by tests and debug checks.
bool isValidElement(const Element& w);

bool isTranslation(const Element& w);                 // lin == identity
Element translationElement(const Coweight& nu);       // t_ν, canonical omega
Coweight translationCoweight(const Element& w);       // requires isTranslation

// Image of a point scaled by 6 (P ↦ lin·P + 3·tr).
std::array<int, 2> actScaled(const Element& w, const std::array<int, 2>& p);

// Barycenter of the base alcove, scaled by 6.
inline constexpr std::array<int, 2> kBarycenter{2, 1};

int length(const Element& w);                    // hyperplane separation count
int lengthByDescentStripping(const Element& w);  // independent implementation

bool isLeftDescent(const Element& w, SimpleReflection s);   // ℓ(s·w) < ℓ(w)
bool isRightDescent(const Element& w, SimpleReflection s);  // ℓ(w·s) < ℓ(w)
std::set<SimpleReflection> leftDescents(const Element& w);
std::set<SimpleReflection> rightDescents(const Element& w);

// Lexicographically least reduced word (greedy smallest left descent).
Word reducedWord(const Element& w);
Element evaluate(const Word& word);

std::string formatWord(const Word& word);     // e.g. "s0 s1 t", "t^2", "e"
std::string canonicalName(const Element& w);  // formatWord(reducedWord(w))
// Parses whitespace-separated tokens "s0" "s1" "s2" "t" "t^<int>" "e" and
// multiplies them left to right.  Returns nullopt on malformed input.
std::optional<Element> parseElement(const std::string& text);

// Bruhat order, two independent implementations.  Elements are comparable
// only if their omega gradings agree.
bool bruhatLeqSubword(const Element& a, const Element& b);   // subword property
bool bruhatLeqDeletion(const Element& a, const Element& b);  // cover-chain BFS
inline bool bruhatLeq(const Element& a, const Element& b) {
  return bruhatLeqSubword(a, b);
}

// { x : x ≤ b }, via evaluation of all subwords of a reduced word of b.
std::set<Element> bruhatDownSet(const Element& b);

// Conjugation by τ; on the generators this is the diagram flip s0 ↔ s2.
Element sigma(const Element& w);
SimpleReflection sigmaOnLetter(SimpleReflection s);

// All elements w with length(w) <= maxLen in the coset W_a · τ^tauExp.
std::vector<Element> ballOfLength(int maxLen, int tauExp);

}  // namespace c2::weyl
