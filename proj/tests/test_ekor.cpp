// Unit tests for the parahoric-level combinatorics.  Expected sets, fibers
// and stabilizer values were derived by hand (and cross-checked against the
// independent oracles in this suite) before being frozen here.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "c2/affine_weyl.hpp"
#include "c2/ekor_engine.hpp"

using namespace c2::ekor;
using c2::weyl::Element;

namespace {

Element elt(const std::string& s) {
  auto e = c2::weyl::parseElement(s);
  REQUIRE(e.has_value());
  return *e;
}

std::set<Element> elts(const std::vector<std::string>& words) {
  std::set<Element> out;
  for (const auto& w : words) out.insert(elt(w));
  return out;
}

const std::vector<std::string> kAdmissible13 = {
    "t",          "s0 t",       "s1 t",       "s2 t",      "s0 s1 t",
    "s0 s2 t",    "s1 s0 t",    "s1 s2 t",    "s2 s1 t",   "s0 s1 s0 t",
    "s2 s1 s2 t", "s0 s2 s1 t", "s1 s0 s2 t"};

const std::vector<std::string> kBasic11 = {
    "t",       "s0 t",    "s1 t",       "s2 t",       "s0 s1 t",   "s0 s2 t",
    "s1 s0 t", "s1 s2 t", "s2 s1 t",    "s0 s1 s0 t", "s2 s1 s2 t"};

}  // namespace

TEST_CASE("level parsing and names") {
  CHECK(parseGeneratorSet("iwahori") == iwahoriLevel());
  CHECK(parseGeneratorSet("paramodular") == paramodularLevel());
  CHECK(parseGeneratorSet("siegel") == siegelLevel());
  CHECK(parseGeneratorSet("s0,s2") == paramodularLevel());
  CHECK(parseGeneratorSet("s1") == siegelLevel());
  CHECK(parseGeneratorSet("") == iwahoriLevel());
  CHECK(!parseGeneratorSet("s3").has_value());
  CHECK(!parseGeneratorSet("q0").has_value());
  CHECK(levelName(paramodularLevel()) == "paramodular");
  CHECK(describeGeneratorSet(paramodularLevel()) == "{s0,s2}");
  GeneratorSet custom;
  custom.add(0);
  custom.add(1);
  CHECK(levelName(custom) == "{s0,s1}");
}

TEST_CASE("admissible set: 13 elements, two independent computations") {
  const auto adm = admissibleSet(defaultCoweight());
  CHECK(adm.size() == 13);
  CHECK(adm == elts(kAdmissible13));
  CHECK(adm == admissibleSetByLengthScan(defaultCoweight()));
}

TEST_CASE("basic locus: 11 elements with length multiset 1+3+5+2") {
  const auto adm = admissibleSet(defaultCoweight());
  std::set<Element> basic;
  std::map<int, int> byLength;
  for (const auto& w : adm) {
    if (isBasic(w)) {
      basic.insert(w);
      ++byLength[c2::weyl::length(w)];
    }
  }
  CHECK(basic.size() == 11);
  CHECK(basic == elts(kBasic11));
  CHECK(byLength == std::map<int, int>{{0, 1}, {1, 3}, {2, 5}, {3, 2}});
  // The two non-basic admissible elements.
  CHECK(!isBasic(elt("s0 s2 s1 t")));
  CHECK(!isBasic(elt("s1 s0 s2 t")));
}

TEST_CASE("sigma-support closure") {
  CHECK(sigmaSupport(elt("t")).size() == 0);
  CHECK(sigmaSupport(elt("s0 s1 t")).letters() == std::vector<int>{0, 1});
  CHECK(sigmaSupport(elt("s0 s2 s1 t")).size() == 3);
  // Even omega: the flip s0 <-> s2 closes the support.
  CHECK(sigmaSupport(elt("s0 s1 s2 s1")).size() == 3);  // t_(1,0), omega 0
  const Element s0 = c2::weyl::simpleReflection(0);
  CHECK(sigmaSupport(s0).letters() == std::vector<int>{0, 2});
}

TEST_CASE("Newton points agree with the support criterion on all 13") {
  for (const auto& name : kAdmissible13) {
    const Element w = elt(name);
    CHECK(isBasic(w) == isBasicByNewton(w));
  }
  for (const auto& name : kBasic11) {
    CHECK(newtonPoint(elt(name)) == NewtonPoint{0, 0, 1});
  }
  CHECK(newtonPoint(elt("s0 s2 s1 t")) == NewtonPoint{1, 1, 2});
  CHECK(newtonPoint(elt("s1 s0 s2 t")) == NewtonPoint{1, 1, 2});
  CHECK(formatNewtonPoint(NewtonPoint{1, 1, 2}) == "(1/2,1/2)");
  CHECK(formatNewtonPoint(NewtonPoint{0, 0, 1}) == "(0,0)");
}

TEST_CASE("calibration selects (left, sws, full) with a perfect score") {
  const auto table = calibrationTable();
  CHECK(table.size() == 8);
  const Convention winner = calibratedConvention();
  CHECK(winner == Convention{CosetSide::Left, ConjugationOrientation::SWSigmaS,
                             RuleOneScope::FullLevel});
  int perfect = 0;
  for (const auto& row : table) {
    CHECK(row.maxScore == 5);
    if (row.score == 5) {
      ++perfect;
      CHECK(row.convention.side == CosetSide::Left);
      CHECK(row.convention.scope == RuleOneScope::FullLevel);
    }
    if (row.convention.side == CosetSide::Right) {
      CHECK(row.score < 5);
      CHECK(std::count(row.failures.begin(), row.failures.end(),
                       "paramodular-index-set") == 1);
    }
    if (row.convention.scope == RuleOneScope::StabilizerSubset) {
      CHECK(row.score < 5);
    }
  }
  CHECK(perfect == 2);  // both orientations, which rule 1 makes irrelevant
  CHECK(describeConvention(winner) == "left,sws,full");
  CHECK(parseConvention("left,sws,full") == winner);
  CHECK(parseConvention("calibrated") == winner);
  CHECK(parseConvention("honest") ==
        Convention{CosetSide::Left, ConjugationOrientation::SWSigmaS,
                   RuleOneScope::StabilizerSubset});
  CHECK(!parseConvention("left,sws").has_value());
  CHECK(!parseConvention("middle,sws,full").has_value());
}

TEST_CASE("paramodular index set, both coset sides") {
  const auto mu = defaultCoweight();
  CHECK(ekorSet(mu, paramodularLevel(), true, calibratedConvention()) ==
        elts({"t", "s1 t", "s1 s2 t", "s1 s0 t"}));
  Convention right = calibratedConvention();
  right.side = CosetSide::Right;
  CHECK(ekorSet(mu, paramodularLevel(), true, right) ==
        elts({"t", "s1 t", "s0 s1 t", "s2 s1 t"}));
  // Without the basic filter the non-basic element s1s0s2·tau also survives.
  CHECK(ekorSet(mu, paramodularLevel(), false, calibratedConvention()) ==
        elts({"t", "s1 t", "s1 s2 t", "s1 s0 t", "s1 s0 s2 t"}));
}

TEST_CASE("Siegel index set has 8 elements (left-minimal, basic)") {
  CHECK(ekorSet(defaultCoweight(), siegelLevel(), true,
                calibratedConvention()) ==
        elts({"t", "s0 t", "s2 t", "s0 s1 t", "s0 s2 t", "s2 s1 t",
              "s0 s1 s0 t", "s2 s1 s2 t"}));
}

TEST_CASE("stabilizer subsets: honest fixed-point iteration") {
  for (auto orientation : {ConjugationOrientation::SWSigmaS,
                           ConjugationOrientation::SigmaSWS}) {
    CHECK(stabilizerSubset(paramodularLevel(), elt("t"), orientation) ==
          paramodularLevel());
    CHECK(stabilizerSubset(siegelLevel(), elt("t"), orientation) ==
          siegelLevel());
    CHECK(stabilizerSubset(iwahoriLevel(), elt("s0 s1 t"), orientation) ==
          iwahoriLevel());
    // The load-bearing discovery: at the paramodular level the stabilizer of
    // s1·tau is empty, under either orientation.
    CHECK(stabilizerSubset(paramodularLevel(), elt("s1 t"), orientation) ==
          iwahoriLevel());
    CHECK(stabilizerSubset(siegelLevel(), elt("s0 t"), orientation) ==
          iwahoriLevel());
  }
}

TEST_CASE("sigmaK under the calibrated convention: anchors and partition") {
  const Convention conv = calibratedConvention();
  const GeneratorSet K1 = paramodularLevel();
  auto single = [&](const std::string& w) {
    const SigmaKResult r = sigmaK(elt(w), K1, conv);
    REQUIRE(r.status == SigmaStatus::Ok);
    REQUIRE(r.values.size() == 1);
    return *r.values.begin();
  };
  CHECK(single("s0 t") == elt("t"));
  CHECK(single("s0 s1 t") == elt("s1 t"));
  CHECK(single("s1 s2 t") == elt("s1 s2 t"));
  CHECK(single("s2 s1 s2 t") == elt("s1 s2 t"));
  CHECK(single("s0 s1 s0 t") == elt("s1 s0 t"));

  const FiberMapResult fm =
      fiberMap(iwahoriLevel(), K1, defaultCoweight(), true, conv);
  CHECK(!fm.multiValued);
  CHECK(!fm.nonConfluent);
  REQUIRE(fm.fibers.size() == 4);
  CHECK(fm.fibers.at(elt("t")) == elts({"t", "s0 t", "s2 t", "s0 s2 t"}));
  CHECK(fm.fibers.at(elt("s1 t")) == elts({"s1 t", "s0 s1 t", "s2 s1 t"}));
  CHECK(fm.fibers.at(elt("s1 s2 t")) == elts({"s1 s2 t", "s2 s1 s2 t"}));
  CHECK(fm.fibers.at(elt("s1 s0 t")) == elts({"s1 s0 t", "s0 s1 s0 t"}));
  std::multiset<size_t> sizes;
  for (const auto& [rep, fiber] : fm.fibers) sizes.insert(fiber.size());
  CHECK(sizes == std::multiset<size_t>{2, 2, 3, 4});
}

TEST_CASE("sigmaK under the honest stabilizer convention") {
  const Convention honest{CosetSide::Left, ConjugationOrientation::SWSigmaS,
                          RuleOneScope::StabilizerSubset};
  const GeneratorSet K1 = paramodularLevel();

  // Twisted conjugation moves s0s1·tau to the (already minimal) s1s0·tau,
  // so the honest projection disagrees with the calibrated anchor {s1·tau}.
  const SigmaKResult r1 = sigmaK(elt("s0 s1 t"), K1, honest);
  CHECK(r1.status == SigmaStatus::Ok);
  CHECK(r1.values == elts({"s1 s0 t"}));

  const SigmaKResult r2 = sigmaK(elt("s2 s1 t"), K1, honest);
  CHECK(r2.status == SigmaStatus::Ok);
  CHECK(r2.values == elts({"s1 s2 t"}));

  // Length-3 elements exit through a length-decreasing step and pick up two
  // values: the projection is genuinely multi-valued here.
  const SigmaKResult r3 = sigmaK(elt("s0 s1 s0 t"), K1, honest);
  CHECK(r3.values == elts({"s1 t", "s1 s0 t"}));
  const SigmaKResult r4 = sigmaK(elt("s2 s1 s2 t"), K1, honest);
  CHECK(r4.values == elts({"s1 t", "s1 s2 t"}));

  // Absorption still works where the stabilizer permits it.
  const SigmaKResult r5 = sigmaK(elt("s0 s2 t"), K1, honest);
  CHECK(r5.status == SigmaStatus::Ok);
  CHECK(r5.values == elts({"t"}));

  const FiberMapResult fm =
      fiberMap(iwahoriLevel(), K1, defaultCoweight(), true, honest);
  CHECK(fm.multiValued);

  // Siegel level, honest scope: the orbit {s1s0t, s0s1t} exits at the
  // minimal member.
  const SigmaKResult r6 = sigmaK(elt("s1 s0 t"), siegelLevel(), honest);
  CHECK(r6.status == SigmaStatus::Ok);
  CHECK(r6.values == elts({"s0 s1 t"}));
}

TEST_CASE("Siegel fibers under the calibrated convention") {
  const FiberMapResult fm = fiberMap(iwahoriLevel(), siegelLevel(),
                                     defaultCoweight(), true,
                                     calibratedConvention());
  CHECK(!fm.multiValued);
  CHECK(!fm.nonConfluent);
  REQUIRE(fm.fibers.size() == 8);
  CHECK(fm.fibers.at(elt("t")) == elts({"t", "s1 t"}));
  CHECK(fm.fibers.at(elt("s0 t")) == elts({"s0 t", "s1 s0 t"}));
  CHECK(fm.fibers.at(elt("s2 t")) == elts({"s2 t", "s1 s2 t"}));
  for (const auto& name : {"s0 s2 t", "s0 s1 t", "s2 s1 t", "s0 s1 s0 t",
                           "s2 s1 s2 t"}) {
    CHECK(fm.fibers.at(elt(name)) == elts({name}));
  }
}

TEST_CASE("closures and dimension") {
  const auto closure = closureDownSet(elt("s2 s1 s2 t"), true);
  CHECK(closure ==
        elts({"t", "s1 t", "s2 t", "s2 s1 t", "s1 s2 t", "s2 s1 s2 t"}));
  // The three maximal basic closures cover the 11-element basic locus.
  std::set<Element> cover;
  for (const auto& top : {"s0 s1 s0 t", "s2 s1 s2 t", "s0 s2 t"}) {
    const auto down = closureDownSet(elt(top), true);
    cover.insert(down.begin(), down.end());
  }
  CHECK(cover == elts(kBasic11));
  for (const auto& name : kAdmissible13) {
    CHECK(dimension(elt(name)) == c2::weyl::length(elt(name)));
  }
}
