#include "c2/conformance.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "c2/affine_weyl.hpp"
#include "c2/lattice_oracle.hpp"

namespace c2::conf {

using ekor::Convention;
using ekor::GeneratorSet;
using weyl::Element;

namespace {

Element mustParse(const std::string& word) {
  auto e = weyl::parseElement(word);
  if (!e) throw std::logic_error("unparseable reference word: " + word);
  return *e;
}

std::set<Element> parseSet(const std::vector<std::string>& words) {
  std::set<Element> out;
  for (const auto& w : words) out.insert(mustParse(w));
  return out;
}

std::string renderSet(const std::set<Element>& S) {
  std::string out = "{";
  bool first = true;
  for (const Element& w : S) {
    if (!first) out += ", ";
    first = false;
    out += weyl::canonicalName(w);
  }
  return out + "}";
}

std::string renderFibers(const std::map<Element, std::set<Element>>& fibers) {
  std::string out;
  bool first = true;
  for (const auto& [rep, fiber] : fibers) {
    if (!first) out += "; ";
    first = false;
    out += weyl::canonicalName(rep) + " <- " + renderSet(fiber);
  }
  return out;
}

// Element-level diff of two sets, for discrepancy notes.
std::string diffSets(const std::set<Element>& expected,
                     const std::set<Element>& computed) {
  std::set<Element> missing, extra;
  std::set_difference(expected.begin(), expected.end(), computed.begin(),
                      computed.end(), std::inserter(missing, missing.end()));
  std::set_difference(computed.begin(), computed.end(), expected.begin(),
                      expected.end(), std::inserter(extra, extra.end()));
  if (missing.empty() && extra.empty()) return "";
  std::string out;
  if (!missing.empty()) out += "missing " + renderSet(missing);
  if (!extra.empty()) {
    if (!out.empty()) out += ", ";
    out += "extra " + renderSet(extra);
  }
  return out;
}

// The three projection anchors quoted for the paramodular level.
struct SigmaAnchorRow {
  std::string id;
  std::string w;
  std::vector<std::string> expected;
};
const std::vector<SigmaAnchorRow> kSigmaAnchors = {
    {"sigma-paramodular-s0t", "s0 t", {"t"}},
    {"sigma-paramodular-s0s1t", "s0 s1 t", {"s1 t"}},
    {"sigma-paramodular-s1s2t", "s1 s2 t", {"s1 s2 t"}},
};

TargetResult setTarget(const std::string& id, TargetKind kind,
                       const std::string& description,
                       const std::set<Element>& expected,
                       const std::set<Element>& computed,
                       const std::string& extraNote = "") {
  TargetResult t;
  t.id = id;
  t.kind = kind;
  t.description = description;
  t.expected = renderSet(expected);
  t.computed = renderSet(computed);
  t.match = expected == computed;
  t.note = t.match ? extraNote : diffSets(expected, computed);
  if (!t.match && !extraNote.empty()) t.note += (t.note.empty() ? "" : "; ") + extraNote;
  return t;
}

std::map<Element, std::set<Element>> parseFiberTable(
    const std::map<std::string, std::vector<std::string>>& rows) {
  std::map<Element, std::set<Element>> out;
  for (const auto& [rep, fiber] : rows) out[mustParse(rep)] = parseSet(fiber);
  return out;
}

TargetResult fiberTarget(const std::string& id, TargetKind kind,
                         const std::string& description,
                         const std::map<Element, std::set<Element>>& expected,
                         const std::map<Element, std::set<Element>>& computed,
                         const std::string& extraNote = "") {
  TargetResult t;
  t.id = id;
  t.kind = kind;
  t.description = description;
  t.expected = renderFibers(expected);
  t.computed = renderFibers(computed);
  t.match = expected == computed;
  std::string diff;
  if (!t.match) {
    for (const auto& [rep, fiber] : expected) {
      auto it = computed.find(rep);
      if (it == computed.end())
        diff += (diff.empty() ? "" : "; ") + weyl::canonicalName(rep) + ": no computed fiber";
      else if (it->second != fiber)
        diff += (diff.empty() ? "" : "; ") + weyl::canonicalName(rep) + ": " +
                diffSets(fiber, it->second);
    }
    for (const auto& [rep, fiber] : computed)
      if (!expected.count(rep))
        diff += (diff.empty() ? "" : "; ") + weyl::canonicalName(rep) +
                ": unlisted computed fiber " + renderSet(fiber);
  }
  t.note = diff;
  if (!extraNote.empty()) t.note += (t.note.empty() ? "" : "; ") + extraNote;
  return t;
}

void appendLatticeTargets(std::vector<TargetResult>& targets,
                          const ConformanceOptions& options) {
  using namespace c2::lat;
  const int p = options.latticeP;
  const int startJ = options.latticeJ;

  // Census per scale, computed once.
  std::map<int, StrataCensus> censusByJ;
  const auto censusFor = [&](int j) -> const StrataCensus& {
    auto it = censusByJ.find(j);
    if (it == censusByJ.end())
      it = censusByJ.emplace(j, censusAllPoints(SymplecticSpace(p, j), 2)).first;
    return it->second;
  };

  const auto webCountAt = [&](int j, const ModelLattice& M) {
    const SymplecticSpace space(p, j);
    const auto web = enumerateWeb(space, M, true);
    long long certified = 0;
    for (const auto& pair : web)
      if (pair.certified) ++certified;
    return std::pair<long long, long long>(static_cast<long long>(web.size()),
                                           certified);
  };

  const auto stratumRow = [&](Stratum stratum, int j, TargetKind kind) {
    const int Q = SymplecticSpace(p, j).q();
    const long long expectedCount = expectedWebCount(stratum, Q);
    TargetResult t;
    t.id = "lattice-" + stratumName(stratum) + "-web-Q" + std::to_string(Q);
    t.kind = kind;
    t.description = "retained web pairs at a " + stratumName(stratum) +
                    " witness, Q = " + std::to_string(Q);
    t.expected = std::to_string(expectedCount);

    const StrataCensus& census = censusFor(j);
    const auto wit = census.witnesses.find(stratumName(stratum));
    if (wit == census.witnesses.end() || wit->second.empty()) {
      // Honest miss: report the budgeted search and the exhaustion proof.
      const SymplecticSpace space(p, j);
      SearchReport sr = findBasePoints(space, stratum, 1, options.seed,
                                       std::max<long long>(1, options.searchBudget / 2000),
                                       2000);
      std::ostringstream note;
      note << "NOT_FOUND: search classified " << sr.classifiedCandidates
           << " candidates without a witness; exhaustive census of all "
           << census.validTotal << " valid points confirms the stratum is empty"
           << " at Q = " << Q
           << " (pure strata need Frobenius orbits of length >= 4; the"
           << " coefficient Frobenius has order <= 3 here)";
      t.computed = "NOT_FOUND";
      t.match = false;
      t.note = note.str();
      targets.push_back(std::move(t));
      return;
    }

    const auto [pairs, certified] = webCountAt(j, wit->second.front());
    t.computed = std::to_string(pairs);
    t.match = pairs == expectedCount && certified == pairs;
    std::ostringstream note;
    note << certified << "/" << pairs << " pairs carry all eight index-1"
         << " certificates; stratum population " << census.counts.at(stratumName(stratum));
    t.note = note.str();
    targets.push_back(std::move(t));
  };

  // Witnessed strata at the default scale are anchored counts.
  stratumRow(Stratum::Superspecial, startJ, TargetKind::MustMatch);
  stratumRow(Stratum::Type02, startJ, TargetKind::MustMatch);
  // The pure strata are documented misses at the default scale; the widening
  // rule escalates them to the next scale, where the census again decides.
  stratumRow(Stratum::Type0, startJ, TargetKind::KnownDiscrepancy);
  stratumRow(Stratum::Type2, startJ, TargetKind::KnownDiscrepancy);
  if (startJ < 3) {
    stratumRow(Stratum::Type0, startJ + 1, TargetKind::KnownDiscrepancy);
    stratumRow(Stratum::Type2, startJ + 1, TargetKind::KnownDiscrepancy);
  }

  // Spin bound across every valid point of the default-scale census.
  {
    const SymplecticSpace space(p, startJ);
    const StrataCensus& census = censusFor(startJ);
    long long checked = 0, passed = 0;
    for (const auto& [name, ws] : census.witnesses)
      for (const ModelLattice& w : ws) {
        ++checked;
        if (spinCheck(space, w)) ++passed;
      }
    TargetResult t;
    t.id = "lattice-spin-witnesses";
    t.kind = TargetKind::MustMatch;
    t.description = "spin bound dim(M + tauM)/M <= 1 on census witnesses";
    t.expected = std::to_string(checked) + "/" + std::to_string(checked);
    t.computed = std::to_string(passed) + "/" + std::to_string(checked);
    t.match = checked == passed;
    t.note = "census population " + std::to_string(census.validTotal);
    targets.push_back(std::move(t));
  }
}

}  // namespace

std::string targetKindName(TargetKind k) {
  return k == TargetKind::MustMatch ? "MUST_MATCH" : "KNOWN_DISCREPANCY";
}

const std::map<std::string, std::vector<std::string>>& goldenIndexTables() {
  // iwahori: the 11 basic admissible elements
  //   (tau; w0, w1, w2; w01, w02, w10, w12, w21; w010, w212).
  // paramodular: 4 rows (tau, w1, w12, w10).
  // siegel: 4 rows as printed (tau, w0, w2, w02).
  static const std::map<std::string, std::vector<std::string>> tables = {
      {"iwahori",
       {"t", "s0 t", "s1 t", "s2 t", "s0 s1 t", "s0 s2 t", "s1 s0 t",
        "s1 s2 t", "s2 s1 t", "s0 s1 s0 t", "s2 s1 s2 t"}},
      {"paramodular", {"t", "s1 t", "s1 s2 t", "s1 s0 t"}},
      {"siegel", {"t", "s0 t", "s2 t", "s0 s2 t"}},
  };
  return tables;
}

const std::map<std::string, std::map<std::string, std::vector<std::string>>>&
goldenFiberTables() {
  // iwahori->paramodular: tau <- {tau, w0, w2, w02}; w1 <- {w1, w01, w21};
  //   w12 <- {w12, w212}; w10 <- {w10, w010}.
  // iwahori->siegel, as printed: tau <- {w1}; w0 <- {w10, w21};
  //   w2 <- {w12, w01}; w02 <- {w010, w212}.
  static const std::map<std::string,
                        std::map<std::string, std::vector<std::string>>>
      tables = {
          {"iwahori->paramodular",
           {
               {"t", {"t", "s0 t", "s2 t", "s0 s2 t"}},
               {"s1 t", {"s1 t", "s0 s1 t", "s2 s1 t"}},
               {"s1 s2 t", {"s1 s2 t", "s2 s1 s2 t"}},
               {"s1 s0 t", {"s1 s0 t", "s0 s1 s0 t"}},
           }},
          {"iwahori->siegel",
           {
               {"t", {"s1 t"}},
               {"s0 t", {"s1 s0 t", "s2 s1 t"}},
               {"s2 t", {"s1 s2 t", "s0 s1 t"}},
               {"s0 s2 t", {"s0 s1 s0 t", "s2 s1 s2 t"}},
           }},
      };
  return tables;
}

bool ConformanceReport::allMustMatchOk() const {
  for (const TargetResult& t : targets)
    if (t.kind == TargetKind::MustMatch && !t.match) return false;
  return true;
}

bool ConformanceReport::anyKnownDiscrepancyDiffers() const {
  for (const TargetResult& t : targets)
    if (t.kind == TargetKind::KnownDiscrepancy && !t.match) return true;
  return false;
}

int ConformanceReport::exitCode() const {
  if (!allMustMatchOk()) return 1;
  return anyKnownDiscrepancyDiffers() ? 5 : 0;
}

ConformanceReport runConformance(const ConformanceOptions& options) {
  using namespace c2::ekor;
  ConformanceReport report;
  report.convention = options.convention;
  report.calibration = calibrationTable();

  const Coweight mu = defaultCoweight();
  const Convention& conv = options.convention;

  // --- admissible set and basicness ---------------------------------------
  {
    const AdmissibleSet adm = admissibleSet(mu);
    const AdmissibleSet scan = admissibleSetByLengthScan(mu);
    TargetResult t;
    t.id = "admissible-count";
    t.kind = TargetKind::MustMatch;
    t.description = "size of the admissible set by two independent oracles";
    t.expected = "13 = 13";
    t.computed = std::to_string(adm.size()) + " = " + std::to_string(scan.size());
    t.match = adm.size() == 13 && adm == scan;
    report.targets.push_back(std::move(t));

    long long agree = 0;
    for (const Element& w : adm)
      if (isBasic(w) == isBasicByNewton(w)) ++agree;
    TargetResult b;
    b.id = "basicness-two-oracles";
    b.kind = TargetKind::MustMatch;
    b.description = "support criterion vs Newton-point criterion on Adm";
    b.expected = "13/13";
    b.computed = std::to_string(agree) + "/" + std::to_string(adm.size());
    b.match = agree == static_cast<long long>(adm.size()) && adm.size() == 13;
    report.targets.push_back(std::move(b));
  }

  // --- index-set tables ----------------------------------------------------
  report.targets.push_back(setTarget(
      "paramodular-index-set", TargetKind::MustMatch,
      "index set of the paramodular level (basic locus)",
      parseSet(goldenIndexTables().at("paramodular")),
      ekorSet(mu, paramodularLevel(), true, conv)));

  {
    std::set<Element> basic;
    for (const Element& w : admissibleSet(mu))
      if (isBasic(w)) basic.insert(w);
    report.targets.push_back(setTarget(
        "iwahori-index-set", TargetKind::MustMatch,
        "index set of the Iwahori level (basic locus)",
        parseSet(goldenIndexTables().at("iwahori")), basic));
  }

  report.targets.push_back(setTarget(
      "siegel-index-set", TargetKind::KnownDiscrepancy,
      "index set of the Siegel level: printed table vs computed minimal"
      " representatives",
      parseSet(goldenIndexTables().at("siegel")),
      ekorSet(mu, siegelLevel(), true, conv),
      "left-minimal basic representatives necessarily include s0s1t and"
      " mirrors; the printed 4-row table omits them"));

  // --- projection anchors ---------------------------------------------------
  for (const SigmaAnchorRow& row : kSigmaAnchors) {
    const SigmaKResult r = sigmaK(mustParse(row.w), paramodularLevel(), conv);
    TargetResult t = setTarget(row.id, TargetKind::MustMatch,
                               "projection of " + row.w + " to the paramodular level",
                               parseSet(row.expected), r.values);
    if (r.status != SigmaStatus::Ok) {
      t.match = false;
      t.note += (t.note.empty() ? "" : "; ") + std::string("non-confluent reduction");
    }
    report.targets.push_back(std::move(t));
  }

  // --- fiber tables ----------------------------------------------------------
  {
    const FiberMapResult fm = fiberMap(iwahoriLevel(), paramodularLevel(), mu, true, conv);
    report.targets.push_back(fiberTarget(
        "paramodular-fibers", TargetKind::MustMatch,
        "fibers of the Iwahori -> paramodular projection (4+3+2+2)",
        parseFiberTable(goldenFiberTables().at("iwahori->paramodular")),
        fm.fibers, fm.multiValued ? "multi-valued projection" : ""));
  }
  {
    const FiberMapResult fm = fiberMap(iwahoriLevel(), siegelLevel(), mu, true, conv);
    report.targets.push_back(fiberTarget(
        "siegel-fibers-as-printed", TargetKind::KnownDiscrepancy,
        "fibers of the Iwahori -> Siegel projection vs the printed rows",
        parseFiberTable(goldenFiberTables().at("iwahori->siegel")), fm.fibers,
        "the printed rows pair s2s1t with s0t and s0s1t with s2t, but"
        " twisted conjugation puts each in its own coset fiber"));

    // Second reading: printed rows augmented with the identity-mapped
    // representatives (fiber sizes 2+3+3+3 covering all 11 elements).
    std::map<Element, std::set<Element>> augmented =
        parseFiberTable(goldenFiberTables().at("iwahori->siegel"));
    for (auto& [rep, fiber] : augmented) fiber.insert(rep);
    report.targets.push_back(fiberTarget(
        "siegel-fibers-augmented", TargetKind::KnownDiscrepancy,
        "fibers of the Iwahori -> Siegel projection vs the augmented reading",
        augmented, fm.fibers,
        "augmented reading adds the trivially-projected representative to"
        " each printed row"));
  }

  // --- intermediate stabilizer claim ----------------------------------------
  {
    const GeneratorSet computed =
        stabilizerSubset(paramodularLevel(), mustParse("s1 t"), conv.orientation);
    TargetResult t;
    t.id = "stabilizer-claim-s1t";
    t.kind = TargetKind::KnownDiscrepancy;
    t.description = "iterated stabilizer of s1t at the paramodular level vs"
                    " the asserted full level group";
    t.expected = describeGeneratorSet(paramodularLevel());
    t.computed = describeGeneratorSet(computed);
    t.match = computed == paramodularLevel();
    t.note = "x sigma(s) x^-1 is never simple for x = s1t, so the honest"
             " fixed-point iteration returns the empty set; the calibrated"
             " full-level absorption reproduces the anchored fibers anyway";
    report.targets.push_back(std::move(t));
  }

  // --- closure relations -----------------------------------------------------
  {
    const auto downLeft = closureDownSet(mustParse("s2 s1 s2 t"), true);
    const auto downRight = closureDownSet(mustParse("s0 s1 s0 t"), true);
    std::set<Element> inter;
    std::set_intersection(downLeft.begin(), downLeft.end(), downRight.begin(),
                          downRight.end(), std::inserter(inter, inter.end()));
    report.targets.push_back(setTarget(
        "closure-intersection", TargetKind::MustMatch,
        "intersection of the two maximal 3-dimensional closures",
        closureDownSet(mustParse("s1 t"), true), inter));

    std::set<Element> cover;
    for (const char* top : {"s0 s1 s0 t", "s2 s1 s2 t", "s0 s2 t"}) {
      const auto down = closureDownSet(mustParse(top), true);
      cover.insert(down.begin(), down.end());
    }
    report.targets.push_back(setTarget(
        "closure-cover", TargetKind::MustMatch,
        "the three maximal closures cover the 11-element basic locus",
        parseSet(goldenIndexTables().at("iwahori")), cover));
  }

  // --- lattice oracle ---------------------------------------------------------
  if (options.includeLattice) appendLatticeTargets(report.targets, options);

  return report;
}

// ---------------------------------------------------------------------------
// Rendering

std::string renderText(const ConformanceReport& report) {
  std::ostringstream out;
  out << "conformance report (schema " << report.schemaVersion << ")\n";
  out << "convention: " << ekor::describeConvention(report.convention) << "\n";
  out << "calibration scores:";
  for (const auto& row : report.calibration)
    out << " " << ekor::describeConvention(row.convention) << "=" << row.score
        << "/" << row.maxScore;
  out << "\n\n";
  for (const TargetResult& t : report.targets) {
    out << (t.match ? "MATCH        " : "DISCREPANCY  ") << t.id << " ["
        << targetKindName(t.kind) << "]\n";
    out << "  " << t.description << "\n";
    out << "  reference: " << t.expected << "\n";
    out << "  computed : " << t.computed << "\n";
    if (!t.note.empty()) out << "  note     : " << t.note << "\n";
  }
  out << "\nexit code: " << report.exitCode() << "\n";
  return out.str();
}

nlohmann::json renderJson(const ConformanceReport& report) {
  nlohmann::json doc;
  doc["schema_version"] = report.schemaVersion;
  doc["convention"] = ekor::describeConvention(report.convention);
  nlohmann::json calib = nlohmann::json::array();
  for (const auto& row : report.calibration) {
    calib.push_back({{"convention", ekor::describeConvention(row.convention)},
                     {"score", row.score},
                     {"max_score", row.maxScore},
                     {"failures", row.failures}});
  }
  doc["calibration"] = std::move(calib);
  nlohmann::json targets = nlohmann::json::array();
  for (const TargetResult& t : report.targets) {
    targets.push_back({{"id", t.id},
                       {"kind", targetKindName(t.kind)},
                       {"description", t.description},
                       {"expected", t.expected},
                       {"computed", t.computed},
                       {"match", t.match},
                       {"note", t.note}});
  }
  doc["targets"] = std::move(targets);
  doc["exit_code"] = report.exitCode();
  return doc;
}

std::string renderCsv(const ConformanceReport& report) {
  const auto quote = [](std::string s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += "\"\"";
      else out += c;
    }
    return out + "\"";
  };
  std::ostringstream out;
  out << "id,kind,match,expected,computed,note\n";
  for (const TargetResult& t : report.targets) {
    out << quote(t.id) << "," << targetKindName(t.kind) << ","
        << (t.match ? "true" : "false") << "," << quote(t.expected) << ","
        << quote(t.computed) << "," << quote(t.note) << "\n";
  }
  return out.str();
}

}  // namespace c2::conf
