#include "c2/affine_weyl.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

namespace c2::weyl {

namespace {

constexpr std::array<std::array<int, 2>, 4> kPositiveRoots{{
    {1, -1},  // e1 - e2
    {1, 1},   // e1 + e2
    {2, 0},   // 2 e1
    {0, 2},   // 2 e2
}};

std::array<int, 4> matMul(const std::array<int, 4>& a,
                          const std::array<int, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

std::array<int, 2> matVec(const std::array<int, 4>& a,
                          const std::array<int, 2>& v) {
  return {a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]};
}

// Floor division for positive divisor.
int floorDiv(int a, int b) {
  return (a >= 0) ? a / b : -((-a + b - 1) / b);
}

int mod2(int a) { return ((a % 2) + 2) % 2; }

}  // namespace

Element identity() { return Element{}; }

Element simpleReflection(SimpleReflection s) {
  switch (s) {
    case 0:
      return Element{{-1, 0, 0, 1}, {2, 0}, 0};
    case 1:
      return Element{{0, 1, 1, 0}, {0, 0}, 0};
    case 2:
      return Element{{1, 0, 0, -1}, {0, 0}, 0};
    default:
      throw std::invalid_argument("simple reflection index must be 0, 1 or 2");
  }
}

Element tauElement() { return Element{{0, -1, -1, 0}, {1, 1}, 1}; }

Element tauPower(int k) {
  if (mod2(k) == 0) return Element{{1, 0, 0, 1}, {0, 0}, k};
  return Element{{0, -1, -1, 0}, {1, 1}, k};
}

Element multiply(const Element& a, const Element& b) {
  Element r;
  r.lin = matMul(a.lin, b.lin);
  const auto moved = matVec(a.lin, b.tr);
  r.tr = {moved[0] + a.tr[0], moved[1] + a.tr[1]};
  r.omega = a.omega + b.omega;
  return r;
}

Element inverse(const Element& w) {
  const int det = w.lin[0] * w.lin[3] - w.lin[1] * w.lin[2];
  assert(det == 1 || det == -1);
  Element r;
  r.lin = {det * w.lin[3], -det * w.lin[1], -det * w.lin[2], det * w.lin[0]};
  const auto moved = matVec(r.lin, w.tr);
  r.tr = {-moved[0], -moved[1]};
  r.omega = -w.omega;
  return r;
}

bool isValidElement(const Element& w) {
  // Linear part must be a signed permutation matrix of determinant ±1.
  const bool diag = w.lin[1] == 0 && w.lin[2] == 0 &&
                    std::abs(w.lin[0]) == 1 && std::abs(w.lin[3]) == 1;
  const bool anti = w.lin[0] == 0 && w.lin[3] == 0 &&
                    std::abs(w.lin[1]) == 1 && std::abs(w.lin[2]) == 1;
  if (!diag && !anti) return false;
  // Parity invariant: both translation entries share the parity of omega.
  return mod2(w.tr[0]) == mod2(w.omega) && mod2(w.tr[1]) == mod2(w.omega);
}

bool isTranslation(const Element& w) {
  return w.lin == std::array<int, 4>{1, 0, 0, 1};
}

Element translationElement(const Coweight& nu) {
  if (mod2(nu.n1) != mod2(nu.n2)) {
    throw std::invalid_argument(
        "coweight outside the lattice: doubled coordinates must share parity");
  }
  return Element{{1, 0, 0, 1}, {nu.n1, nu.n2}, mod2(nu.n1)};
}

Coweight translationCoweight(const Element& w) {
  if (!isTranslation(w)) {
    throw std::invalid_argument("translationCoweight: element is not a translation");
  }
  return Coweight{w.tr[0], w.tr[1]};
}

std::array<int, 2> actScaled(const Element& w, const std::array<int, 2>& p) {
  const auto moved = matVec(w.lin, p);
  return {moved[0] + 3 * w.tr[0], moved[1] + 3 * w.tr[1]};
}

int length(const Element& w) {
  const auto y = actScaled(w, kBarycenter);
  int total = 0;
  for (const auto& root : kPositiveRoots) {
    const int v = root[0] * y[0] + root[1] * y[1];
    assert(v % 6 != 0);  // alcove interior points never sit on a wall
    total += std::abs(floorDiv(v, 6));
  }
  return total;
}

bool isLeftDescent(const Element& w, SimpleReflection s) {
  const auto y = actScaled(w, kBarycenter);
  switch (s) {
    case 0:
      return y[0] > 3;  // far side of the wall x1 = 1/2
    case 1:
      return y[0] < y[1];  // far side of x1 = x2
    case 2:
      return y[1] < 0;  // far side of x2 = 0
    default:
      throw std::invalid_argument("simple reflection index must be 0, 1 or 2");
  }
}

bool isRightDescent(const Element& w, SimpleReflection s) {
  return isLeftDescent(inverse(w), s);
}

std::set<SimpleReflection> leftDescents(const Element& w) {
  std::set<SimpleReflection> out;
  for (int s = 0; s < 3; ++s) {
    if (isLeftDescent(w, s)) out.insert(s);
  }
  return out;
}

std::set<SimpleReflection> rightDescents(const Element& w) {
  const Element inv = inverse(w);
  std::set<SimpleReflection> out;
  for (int s = 0; s < 3; ++s) {
    if (isLeftDescent(inv, s)) out.insert(s);
  }
  return out;
}

int lengthByDescentStripping(const Element& w) {
  Element x = w;
  int count = 0;
  for (;;) {
    int s = -1;
    for (int i = 0; i < 3; ++i) {
      if (isLeftDescent(x, i)) {
        s = i;
        break;
      }
    }
    if (s < 0) break;
    x = multiply(simpleReflection(s), x);
    ++count;
  }
  // The remainder fixes the base alcove, hence is a power of τ.
  assert(x == tauPower(x.omega));
  return count;
}

Word reducedWord(const Element& w) {
  Word word;
  Element x = w;
  for (;;) {
    int s = -1;
    for (int i = 0; i < 3; ++i) {
      if (isLeftDescent(x, i)) {
        s = i;
        break;
      }
    }
    if (s < 0) break;
    word.letters.push_back(s);
    x = multiply(simpleReflection(s), x);
  }
  word.tauExp = x.omega;
  assert(x == tauPower(x.omega));
  return word;
}

Element evaluate(const Word& word) {
  Element x = identity();
  for (int s : word.letters) x = multiply(x, simpleReflection(s));
  return multiply(x, tauPower(word.tauExp));
}

std::string formatWord(const Word& word) {
  std::ostringstream out;
  bool first = true;
  for (int s : word.letters) {
    if (!first) out << ' ';
    out << 's' << s;
    first = false;
  }
  if (word.tauExp != 0) {
    if (!first) out << ' ';
    out << 't';
    if (word.tauExp != 1) out << '^' << word.tauExp;
    first = false;
  }
  if (first) out << 'e';
  return out.str();
}

std::string canonicalName(const Element& w) {
  return formatWord(reducedWord(w));
}

std::optional<Element> parseElement(const std::string& text) {
  std::istringstream in(text);
  Element x = identity();
  std::string token;
  bool any = false;
  while (in >> token) {
    any = true;
    if (token == "e") continue;
    if (token == "s0" || token == "s1" || token == "s2") {
      x = multiply(x, simpleReflection(token[1] - '0'));
      continue;
    }
    if (token == "t") {
      x = multiply(x, tauElement());
      continue;
    }
    if (token.rfind("t^", 0) == 0) {
      try {
        size_t used = 0;
        const int k = std::stoi(token.substr(2), &used);
        if (used != token.size() - 2) return std::nullopt;
        x = multiply(x, tauPower(k));
      } catch (const std::exception&) {
        return std::nullopt;
      }
      continue;
    }
    return std::nullopt;
  }
  if (!any) return std::nullopt;
  return x;
}

bool bruhatLeqSubword(const Element& a, const Element& b) {
  if (a.omega != b.omega) return false;
  const int la = length(a);
  const int lb = length(b);
  if (la > lb) return false;
  if (la == lb) return a == b;
  const Word wb = reducedWord(b);
  const int k = static_cast<int>(wb.letters.size());
  const Element tail = tauPower(b.omega);
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    if (__builtin_popcount(mask) != la) continue;
    Element x = identity();
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) x = multiply(x, simpleReflection(wb.letters[i]));
    }
    if (multiply(x, tail) == a) return true;
  }
  return false;
}

bool bruhatLeqDeletion(const Element& a, const Element& b) {
  if (a.omega != b.omega) return false;
  if (a == b) return true;
  if (length(a) >= length(b)) return false;
  // Close {b} under single-letter deletions from canonical reduced words;
  // by the strong exchange property every covering pair appears this way.
  std::set<Element> seen{b};
  std::deque<Element> queue{b};
  while (!queue.empty()) {
    const Element x = queue.front();
    queue.pop_front();
    const Word wx = reducedWord(x);
    const int k = static_cast<int>(wx.letters.size());
    for (int skip = 0; skip < k; ++skip) {
      Element y = identity();
      for (int i = 0; i < k; ++i) {
        if (i == skip) continue;
        y = multiply(y, simpleReflection(wx.letters[i]));
      }
      y = multiply(y, tauPower(wx.tauExp));
      if (y == a) return true;
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  return false;
}

std::set<Element> bruhatDownSet(const Element& b) {
  const Word wb = reducedWord(b);
  const int k = static_cast<int>(wb.letters.size());
  const Element tail = tauPower(wb.tauExp);
  std::set<Element> out;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    Element x = identity();
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) x = multiply(x, simpleReflection(wb.letters[i]));
    }
    out.insert(multiply(x, tail));
  }
  return out;
}

Element sigma(const Element& w) {
  return multiply(multiply(tauElement(), w), inverse(tauElement()));
}

SimpleReflection sigmaOnLetter(SimpleReflection s) {
  switch (s) {
    case 0:
      return 2;
    case 2:
      return 0;
    default:
      return s;
  }
}

std::vector<Element> ballOfLength(int maxLen, int tauExp) {
  std::set<Element> seen;
  std::deque<Element> queue;
  const Element start = tauPower(tauExp);
  seen.insert(start);
  queue.push_back(start);
  while (!queue.empty()) {
    const Element x = queue.front();
    queue.pop_front();
    const int lx = length(x);
    if (lx >= maxLen) continue;
    for (int s = 0; s < 3; ++s) {
      const Element y = multiply(simpleReflection(s), x);
      if (length(y) != lx + 1) continue;
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  return std::vector<Element>(seen.begin(), seen.end());
}

}  // namespace c2::weyl
