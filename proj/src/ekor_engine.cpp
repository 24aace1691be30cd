#include "c2/ekor_engine.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace c2::ekor {

using weyl::isLeftDescent;
using weyl::isRightDescent;
using weyl::multiply;
using weyl::simpleReflection;

// ---------------------------------------------------------------------------
// Levels.

GeneratorSet iwahoriLevel() { return GeneratorSet{}; }

GeneratorSet paramodularLevel() {
  GeneratorSet k;
  k.add(0);
  k.add(2);
  return k;
}

GeneratorSet siegelLevel() {
  GeneratorSet k;
  k.add(1);
  return k;
}

std::optional<GeneratorSet> parseGeneratorSet(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty() || s == "iwahori") return iwahoriLevel();
  if (s == "paramodular") return paramodularLevel();
  if (s == "siegel") return siegelLevel();
  GeneratorSet k;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string tok = s.substr(pos, comma - pos);
    if (tok.size() != 2 || tok[0] != 's' || tok[1] < '0' || tok[1] > '2') {
      return std::nullopt;
    }
    k.add(tok[1] - '0');
    pos = comma + 1;
  }
  return k;
}

std::string describeGeneratorSet(const GeneratorSet& K) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (int s : K.letters()) {
    if (!first) out << ',';
    out << 's' << s;
    first = false;
  }
  out << '}';
  return out.str();
}

std::string levelName(const GeneratorSet& K) {
  if (K == iwahoriLevel()) return "iwahori";
  if (K == paramodularLevel()) return "paramodular";
  if (K == siegelLevel()) return "siegel";
  return describeGeneratorSet(K);
}

// ---------------------------------------------------------------------------
// Conventions.

std::vector<Convention> allConventions() {
  std::vector<Convention> out;
  for (CosetSide side : {CosetSide::Left, CosetSide::Right}) {
    for (ConjugationOrientation o :
         {ConjugationOrientation::SWSigmaS, ConjugationOrientation::SigmaSWS}) {
      for (RuleOneScope scope :
           {RuleOneScope::StabilizerSubset, RuleOneScope::FullLevel}) {
        out.push_back(Convention{side, o, scope});
      }
    }
  }
  return out;
}

std::string describeConvention(const Convention& c) {
  std::string out = c.side == CosetSide::Left ? "left" : "right";
  out += c.orientation == ConjugationOrientation::SWSigmaS ? ",sws" : ",sigmasws";
  out += c.scope == RuleOneScope::FullLevel ? ",full" : ",stabilizer";
  return out;
}

std::optional<Convention> parseConvention(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!isspace(static_cast<unsigned char>(c))) {
      s.push_back(static_cast<char>(tolower(static_cast<unsigned char>(c))));
    }
  }
  if (s.empty() || s == "calibrated") return calibratedConvention();
  if (s == "honest") {
    return Convention{CosetSide::Left, ConjugationOrientation::SWSigmaS,
                      RuleOneScope::StabilizerSubset};
  }
  std::vector<std::string> parts;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    parts.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (parts.size() != 3) return std::nullopt;
  Convention c;
  if (parts[0] == "left") {
    c.side = CosetSide::Left;
  } else if (parts[0] == "right") {
    c.side = CosetSide::Right;
  } else {
    return std::nullopt;
  }
  if (parts[1] == "sws") {
    c.orientation = ConjugationOrientation::SWSigmaS;
  } else if (parts[1] == "sigmasws") {
    c.orientation = ConjugationOrientation::SigmaSWS;
  } else {
    return std::nullopt;
  }
  if (parts[2] == "full") {
    c.scope = RuleOneScope::FullLevel;
  } else if (parts[2] == "stabilizer") {
    c.scope = RuleOneScope::StabilizerSubset;
  } else {
    return std::nullopt;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Admissible sets.

Coweight defaultCoweight() { return Coweight{1, 1}; }

namespace {

std::set<Coweight> weylOrbit(const Coweight& mu) {
  std::set<Coweight> orbit{mu};
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Coweight> batch(orbit.begin(), orbit.end());
    for (const Coweight& v : batch) {
      const Coweight images[2] = {Coweight{v.n2, v.n1}, Coweight{v.n1, -v.n2}};
      for (const Coweight& im : images) {
        if (orbit.insert(im).second) changed = true;
      }
    }
  }
  return orbit;
}

std::vector<Element> extremeTranslations(const Coweight& mu) {
  std::vector<Element> out;
  for (const Coweight& nu : weylOrbit(mu)) {
    out.push_back(weyl::translationElement(nu));
  }
  return out;
}

}  // namespace

AdmissibleSet admissibleSet(const Coweight& mu) {
  AdmissibleSet out;
  for (const Element& t : extremeTranslations(mu)) {
    const auto down = weyl::bruhatDownSet(t);
    out.insert(down.begin(), down.end());
  }
  return out;
}

AdmissibleSet admissibleSetByLengthScan(const Coweight& mu) {
  const auto extremes = extremeTranslations(mu);
  int maxLen = 0;
  const int omega = extremes.front().omega;
  for (const Element& t : extremes) {
    maxLen = std::max(maxLen, weyl::length(t));
    assert(t.omega == omega);
  }
  AdmissibleSet out;
  for (const Element& x : weyl::ballOfLength(maxLen, omega)) {
    for (const Element& t : extremes) {
      if (weyl::bruhatLeqDeletion(x, t)) {
        out.insert(x);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimal coset representatives.

bool isMinimalCosetRep(const Element& w, const GeneratorSet& K,
                       CosetSide side) {
  for (int s : K.letters()) {
    const bool desc =
        side == CosetSide::Left ? isLeftDescent(w, s) : isRightDescent(w, s);
    if (desc) return false;
  }
  return true;
}

std::set<Element> minimalCosetReps(const GeneratorSet& K,
                                   const std::set<Element>& S,
                                   CosetSide side) {
  std::set<Element> out;
  for (const Element& w : S) {
    if (isMinimalCosetRep(w, K, side)) out.insert(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Support and Newton points.

GeneratorSet sigmaSupport(const Element& w) {
  GeneratorSet supp;
  const weyl::Word word = weyl::reducedWord(w);
  for (int s : word.letters) supp.add(s);
  // Residual diagram action Ad(tau^(omega+1)): for even omega the closure
  // must also be stable under the flip s0 <-> s2.
  const bool flip = ((w.omega % 2) + 2) % 2 == 0;
  if (flip) {
    if (supp.contains(0)) supp.add(2);
    if (supp.contains(2)) supp.add(0);
  }
  return supp;
}

bool isBasic(const Element& w) { return sigmaSupport(w).size() < 3; }

std::string formatNewtonPoint(const NewtonPoint& nu) {
  std::ostringstream out;
  auto frac = [&](long long n) {
    std::ostringstream f;
    if (n % nu.d == 0) {
      f << n / nu.d;
    } else {
      f << n << '/' << nu.d;
    }
    return f.str();
  };
  out << '(' << frac(nu.n1) << ',' << frac(nu.n2) << ')';
  return out.str();
}

NewtonPoint newtonPoint(const Element& w) {
  const Element sw = weyl::sigma(w);
  for (int n = 2; n <= 16; n += 2) {
    Element u = weyl::identity();
    for (int k = 0; k < n; ++k) {
      u = multiply(u, (k % 2 == 0) ? w : sw);
    }
    if (!weyl::isTranslation(u)) continue;
    // Translation vector is u.tr/2; average over n steps and move to the
    // dominant chamber x1 >= x2 >= 0 (coordinates up to signed permutation).
    long long a = std::llabs(u.tr[0]);
    long long b = std::llabs(u.tr[1]);
    if (a < b) std::swap(a, b);
    long long d = 2LL * n;
    const long long g = std::gcd(std::gcd(a, b), d);
    return NewtonPoint{a / g, b / g, d / g};
  }
  throw std::logic_error("newtonPoint: no pure-translation power up to n=16");
}

bool isBasicByNewton(const Element& w) {
  const NewtonPoint nu = newtonPoint(w);
  return nu.n1 == 0 && nu.n2 == 0;
}

// ---------------------------------------------------------------------------
// EKOR index sets.

std::set<Element> ekorSet(const Coweight& mu, const GeneratorSet& K,
                          bool basicOnly, const Convention& conv) {
  std::set<Element> out;
  for (const Element& w : admissibleSet(mu)) {
    if (basicOnly && !isBasic(w)) continue;
    if (!isMinimalCosetRep(w, K, conv.side)) continue;
    out.insert(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stabilizer subsets.

GeneratorSet stabilizerSubset(const GeneratorSet& K, const Element& x,
                              ConjugationOrientation orientation) {
  const Element xi = weyl::inverse(x);
  GeneratorSet J = K;
  for (;;) {
    GeneratorSet next;
    for (int s : J.letters()) {
      const Element gs = simpleReflection(weyl::sigmaOnLetter(s));
      const Element c = orientation == ConjugationOrientation::SWSigmaS
                            ? multiply(multiply(x, gs), xi)
                            : multiply(multiply(xi, gs), x);
      for (int t = 0; t < 3; ++t) {
        if (c == simpleReflection(t) && J.contains(t)) {
          next.add(s);
          break;
        }
      }
    }
    if (next == J) return J;
    J = next;
  }
}

// ---------------------------------------------------------------------------
// Level projection Σ_K.

namespace {

struct Decomposition {
  std::vector<int> uLetters;  // reduced word of the W_K factor
  Element x;                  // K-minimal remainder
};

Decomposition decompose(const Element& w, const GeneratorSet& K,
                        CosetSide side) {
  Decomposition d;
  d.x = w;
  for (;;) {
    int pick = -1;
    for (int s = 0; s < 3; ++s) {
      if (!K.contains(s)) continue;
      const bool desc = side == CosetSide::Left ? isLeftDescent(d.x, s)
                                                : isRightDescent(d.x, s);
      if (desc) {
        pick = s;
        break;
      }
    }
    if (pick < 0) break;
    d.uLetters.push_back(pick);
    d.x = side == CosetSide::Left ? multiply(simpleReflection(pick), d.x)
                                  : multiply(d.x, simpleReflection(pick));
  }
  return d;
}

bool lettersWithin(const std::vector<int>& letters, const GeneratorSet& I) {
  for (int s : letters) {
    if (!I.contains(s)) return false;
  }
  return true;
}

Element conjStep(const Element& v, int s, ConjugationOrientation o) {
  const Element gs = simpleReflection(s);
  const Element gss = simpleReflection(weyl::sigmaOnLetter(s));
  return o == ConjugationOrientation::SWSigmaS
             ? multiply(multiply(gs, v), gss)
             : multiply(multiply(gss, v), gs);
}

Element halfStep(const Element& v, int s, ConjugationOrientation o) {
  return o == ConjugationOrientation::SWSigmaS
             ? multiply(simpleReflection(s), v)
             : multiply(simpleReflection(weyl::sigmaOnLetter(s)), v);
}

struct SigmaKey {
  Element w;
  GeneratorSet K;
  Convention conv;
  friend auto operator<=>(const SigmaKey&, const SigmaKey&) = default;
};

std::map<SigmaKey, SigmaKResult>& sigmaMemo() {
  static std::map<SigmaKey, SigmaKResult> memo;
  return memo;
}

}  // namespace

SigmaKResult sigmaK(const Element& w, const GeneratorSet& K,
                    const Convention& conv) {
  const SigmaKey key{w, K, conv};
  if (auto it = sigmaMemo().find(key); it != sigmaMemo().end()) {
    return it->second;
  }
  SigmaKResult result;
  if (isMinimalCosetRep(w, K, conv.side)) {
    result.values.insert(w);
    sigmaMemo()[key] = result;
    return result;
  }

  // Rule 1 on w itself: absorb the W_K factor when the scope allows it.
  const Decomposition d = decompose(w, K, conv.side);
  const GeneratorSet scope1 =
      conv.scope == RuleOneScope::FullLevel
          ? K
          : stabilizerSubset(K, d.x, conv.orientation);
  if (lettersWithin(d.uLetters, scope1)) {
    result = sigmaK(d.x, K, conv);
    sigmaMemo()[key] = result;
    return result;
  }

  // Rules 2/3: explore the length-preserving twisted-conjugation orbit and
  // every length-decreasing exit.  Steps with the same letter are involutive,
  // so the orbit is well defined from any member.
  const int lw = weyl::length(w);
  std::set<Element> orbit{w};
  std::deque<Element> queue{w};
  while (!queue.empty()) {
    const Element v = queue.front();
    queue.pop_front();
    for (int s : K.letters()) {
      const Element v2 = conjStep(v, s, conv.orientation);
      if (weyl::length(v2) == lw && orbit.insert(v2).second) {
        queue.push_back(v2);
      }
    }
  }

  std::set<std::set<Element>> candidates;
  bool childTrouble = false;
  for (const Element& v : orbit) {
    if (isMinimalCosetRep(v, K, conv.side)) {
      candidates.insert({v});
      continue;
    }
    const Decomposition dv = decompose(v, K, conv.side);
    const GeneratorSet scopeV =
        conv.scope == RuleOneScope::FullLevel
            ? K
            : stabilizerSubset(K, dv.x, conv.orientation);
    if (lettersWithin(dv.uLetters, scopeV)) {
      const SigmaKResult r = sigmaK(dv.x, K, conv);
      if (r.status != SigmaStatus::Ok) childTrouble = true;
      candidates.insert(r.values);
    }
    for (int s : K.letters()) {
      const Element v2 = conjStep(v, s, conv.orientation);
      if (weyl::length(v2) >= lw) continue;
      const SigmaKResult r1 = sigmaK(v2, K, conv);
      const SigmaKResult r2 = sigmaK(halfStep(v, s, conv.orientation), K, conv);
      if (r1.status != SigmaStatus::Ok || r2.status != SigmaStatus::Ok) {
        childTrouble = true;
      }
      std::set<Element> merged = r1.values;
      merged.insert(r2.values.begin(), r2.values.end());
      candidates.insert(merged);
    }
  }

  if (candidates.empty()) {
    result.status = SigmaStatus::NonConfluent;
  } else if (candidates.size() == 1) {
    result.values = *candidates.begin();
    result.status = childTrouble ? SigmaStatus::NonConfluent : SigmaStatus::Ok;
  } else {
    for (const auto& c : candidates) {
      result.values.insert(c.begin(), c.end());
    }
    result.status = SigmaStatus::NonConfluent;
  }
  for (const Element& v : orbit) {
    sigmaMemo()[SigmaKey{v, K, conv}] = result;
  }
  return result;
}

FiberMapResult fiberMap(const GeneratorSet& fromLevel,
                        const GeneratorSet& toLevel, const Coweight& mu,
                        bool basicOnly, const Convention& conv) {
  FiberMapResult out;
  for (const Element& w : ekorSet(mu, fromLevel, basicOnly, conv)) {
    const SigmaKResult r = sigmaK(w, toLevel, conv);
    out.image[w] = r.values;
    if (r.values.size() != 1) out.multiValued = true;
    if (r.status != SigmaStatus::Ok) out.nonConfluent = true;
    for (const Element& target : r.values) {
      out.fibers[target].insert(w);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closures and dimensions.

std::set<Element> closureDownSet(const Element& w, bool basicOnly) {
  std::set<Element> out;
  for (const Element& x : weyl::bruhatDownSet(w)) {
    if (basicOnly && !isBasic(x)) continue;
    out.insert(x);
  }
  return out;
}

int dimension(const Element& w) { return weyl::length(w); }

// ---------------------------------------------------------------------------
// Calibration.

namespace {

Element mustParse(const std::string& s) {
  const auto e = weyl::parseElement(s);
  assert(e.has_value());
  return *e;
}

std::set<Element> parseSet(const std::vector<std::string>& words) {
  std::set<Element> out;
  for (const auto& s : words) out.insert(mustParse(s));
  return out;
}

}  // namespace

std::vector<CalibrationRow> calibrationTable() {
  // Reference anchors for the paramodular level.
  const std::set<Element> anchorIndexSet =
      parseSet({"t", "s1 t", "s1 s2 t", "s1 s0 t"});
  const std::map<Element, std::set<Element>> anchorFibers = {
      {mustParse("t"), parseSet({"t", "s0 t", "s2 t", "s0 s2 t"})},
      {mustParse("s1 t"), parseSet({"s1 t", "s0 s1 t", "s2 s1 t"})},
      {mustParse("s1 s2 t"), parseSet({"s1 s2 t", "s2 s1 s2 t"})},
      {mustParse("s1 s0 t"), parseSet({"s1 s0 t", "s0 s1 s0 t"})},
  };
  struct SigmaAnchor {
    std::string id;
    Element w;
    std::set<Element> expected;
  };
  const std::vector<SigmaAnchor> sigmaAnchors = {
      {"sigma-s0t", mustParse("s0 t"), parseSet({"t"})},
      {"sigma-s0s1t", mustParse("s0 s1 t"), parseSet({"s1 t"})},
      {"sigma-s1s2t", mustParse("s1 s2 t"), parseSet({"s1 s2 t"})},
  };

  const Coweight mu = defaultCoweight();
  const GeneratorSet K1 = paramodularLevel();
  std::vector<CalibrationRow> rows;
  for (const Convention& conv : allConventions()) {
    CalibrationRow row;
    row.convention = conv;
    row.maxScore = 5;

    if (ekorSet(mu, K1, true, conv) == anchorIndexSet) {
      ++row.score;
    } else {
      row.failures.push_back("paramodular-index-set");
    }

    const FiberMapResult fm = fiberMap(iwahoriLevel(), K1, mu, true, conv);
    if (!fm.multiValued && !fm.nonConfluent && fm.fibers == anchorFibers) {
      ++row.score;
    } else {
      row.failures.push_back("paramodular-fiber-partition");
    }

    for (const SigmaAnchor& a : sigmaAnchors) {
      const SigmaKResult r = sigmaK(a.w, K1, conv);
      if (r.status == SigmaStatus::Ok && r.values == a.expected) {
        ++row.score;
      } else {
        row.failures.push_back(a.id);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

Convention calibratedConvention() {
  static const Convention chosen = [] {
    const auto rows = calibrationTable();
    const CalibrationRow* best = &rows.front();
    for (const auto& row : rows) {
      if (row.score > best->score) best = &row;
    }
    return best->convention;
  }();
  return chosen;
}

}  // namespace c2::ekor
