//
// c2ekor — command-line front end for the affine Weyl / index-set engine and
// the finite lattice oracle.
//
// Subcommands:
//   adm           admissible elements with length, support, basic flag,
//                 Newton point
//   ekor          level index set (iwahori | paramodular | siegel | --K ...)
//   fibers        fibers of the projection between two levels
//   sigma-k       projection of a single element to a level
//   closure       Bruhat down-set of an element
//   newton        Newton point of an element
//   lattice fibers  witness search + web enumeration + certificates
//   conformance   full diff against the embedded reference tables
//
// Global flags: --format text|json|csv, --out PATH, --convention TUPLE.
// An optional key=value config file (./c2ekor.conf, or the path in the
// C2EKOR_CONFIG environment variable) may pin convention, format, p, j, and
// seed; explicit flags override the config.
//
// Exit codes: 0 success; 2 usage or parse error; 3 engine inconsistency
// (non-confluent or multi-valued projection, deviating counts); 4 witness
// search exhausted without a hit; 5 output differs from the reference tables
// in documented ways only.
//
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "c2/affine_weyl.hpp"
#include "c2/conformance.hpp"
#include "c2/ekor_engine.hpp"
#include "c2/lattice_oracle.hpp"

namespace {

using c2::ekor::Convention;
using c2::ekor::GeneratorSet;
using c2::weyl::Element;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kEngine = 3;
constexpr int kExhausted = 4;
constexpr int kDiscrepancy = 5;

// ---------------------------------------------------------------------------
// Shared option state (config defaults overridden by flags).

struct Globals {
  std::string format = "text";
  std::string outPath;
  std::string conventionText;  // empty = calibrated
  int p = 3;
  int j = 2;
  std::uint64_t seed = 12345;
  long long budget = 10000;  // candidate classifications for witness search

  Convention convention() const {
    if (conventionText.empty()) return c2::ekor::calibratedConvention();
    const auto c = c2::ekor::parseConvention(conventionText);
    if (!c) throw CLI::ValidationError("--convention", "unknown convention tuple '" + conventionText + "'");
    return *c;
  }
};

// Reads a key=value config file.  Returns an error message on malformed
// content or unknown keys; missing optional file is not an error.
std::optional<std::string> applyConfigFile(Globals& g) {
  const char* env = std::getenv("C2EKOR_CONFIG");
  const std::string path = env ? env : "c2ekor.conf";
  std::ifstream in(path);
  if (!in) {
    if (env) return "config file from C2EKOR_CONFIG not readable: " + path;
    return std::nullopt;  // default config is optional
  }
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      return path + ":" + std::to_string(lineNo) + ": expected key=value";
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "convention") {
        if (!c2::ekor::parseConvention(value))
          return path + ": unknown convention '" + value + "'";
        g.conventionText = value;
      } else if (key == "format") {
        if (value != "text" && value != "json" && value != "csv")
          return path + ": unknown format '" + value + "'";
        g.format = value;
      } else if (key == "p") {
        g.p = std::stoi(value);
      } else if (key == "j") {
        g.j = std::stoi(value);
      } else if (key == "seed") {
        g.seed = std::stoull(value);
      } else {
        return path + ": unknown config key '" + key + "'";
      }
    } catch (const std::exception&) {
      return path + ": bad value for '" + key + "': " + value;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Output plumbing and small renderers.

int emit(const Globals& g, const std::string& payload) {
  if (g.outPath.empty()) {
    std::cout << payload;
    return kOk;
  }
  std::ofstream out(g.outPath);
  if (!out) {
    std::cerr << "error: cannot open output file: " << g.outPath << "\n";
    return kUsage;
  }
  out << payload;
  return kOk;
}

std::string csvQuote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

std::string wordName(const Element& w) { return c2::weyl::canonicalName(w); }

std::vector<Element> sortedByLength(const std::set<Element>& S) {
  std::vector<Element> v(S.begin(), S.end());
  std::sort(v.begin(), v.end(), [](const Element& a, const Element& b) {
    const int la = c2::weyl::length(a), lb = c2::weyl::length(b);
    if (la != lb) return la < lb;
    return wordName(a) < wordName(b);
  });
  return v;
}

std::string braceList(const std::set<Element>& S) {
  std::string out = "{";
  bool first = true;
  for (const Element& w : sortedByLength(S)) {
    if (!first) out += ", ";
    first = false;
    out += wordName(w);
  }
  return out + "}";
}

std::set<Element> parseWords(const std::vector<std::string>& words) {
  std::set<Element> out;
  for (const auto& s : words) out.insert(*c2::weyl::parseElement(s));
  return out;
}

std::string seriesText(const c2::lat::Series& s) {
  std::string out;
  for (int d = 0; d < 4; ++d) {
    if (s.c[d] == 0) continue;
    if (!out.empty()) out += " + ";
    if (d == 0) out += std::to_string(s.c[d]);
    else {
      if (s.c[d] != 1) out += std::to_string(s.c[d]) + "*";
      out += d == 1 ? "t" : "t^" + std::to_string(d);
    }
  }
  return out.empty() ? "0" : out;
}

// Comparison of a computed element set against an embedded reference table.
struct TableComparison {
  bool applicable = false;
  bool match = false;
  std::set<Element> missing, extra;
};

TableComparison compareWithReference(const std::string& key,
                                     const std::set<Element>& computed) {
  TableComparison cmp;
  const auto& tables = c2::conf::goldenIndexTables();
  const auto it = tables.find(key);
  if (it == tables.end()) return cmp;
  cmp.applicable = true;
  const std::set<Element> ref = parseWords(it->second);
  cmp.match = ref == computed;
  std::set_difference(ref.begin(), ref.end(), computed.begin(), computed.end(),
                      std::inserter(cmp.missing, cmp.missing.end()));
  std::set_difference(computed.begin(), computed.end(), ref.begin(), ref.end(),
                      std::inserter(cmp.extra, cmp.extra.end()));
  return cmp;
}

std::string comparisonNote(const TableComparison& cmp) {
  std::string note = "KNOWN-DISCREPANCY vs reference table:";
  if (!cmp.missing.empty()) note += " missing " + braceList(cmp.missing);
  if (!cmp.extra.empty()) {
    if (!cmp.missing.empty()) note += ",";
    note += " extra " + braceList(cmp.extra);
  }
  return note;
}

json comparisonJson(const TableComparison& cmp) {
  json out;
  out["status"] = cmp.match ? "MATCH" : "KNOWN_DISCREPANCY";
  json missing = json::array(), extra = json::array();
  for (const Element& w : cmp.missing) missing.push_back(wordName(w));
  for (const Element& w : cmp.extra) extra.push_back(wordName(w));
  out["missing"] = std::move(missing);
  out["extra"] = std::move(extra);
  return out;
}

// ---------------------------------------------------------------------------
// adm

int cmdAdm(const Globals& g, bool basicOnly) {
  using namespace c2::ekor;
  const Coweight mu = defaultCoweight();
  std::set<Element> elements;
  for (const Element& w : admissibleSet(mu))
    if (!basicOnly || isBasic(w)) elements.insert(w);

  struct Row {
    std::string word, support, newton;
    int length;
    bool basic;
  };
  std::vector<Row> rows;
  for (const Element& w : sortedByLength(elements)) {
    rows.push_back({wordName(w), describeGeneratorSet(sigmaSupport(w)),
                    formatNewtonPoint(newtonPoint(w)), c2::weyl::length(w),
                    isBasic(w)});
  }

  std::ostringstream out;
  if (g.format == "json") {
    json doc;
    doc["schema_version"] = "1.0";
    doc["command"] = "adm";
    doc["count"] = rows.size();
    json records = json::array();
    for (const Row& r : rows)
      records.push_back({{"word", r.word},
                         {"length", r.length},
                         {"support", r.support},
                         {"basic", r.basic},
                         {"newton", r.newton}});
    doc["records"] = std::move(records);
    out << doc.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "word,length,support,basic,newton\n";
    for (const Row& r : rows)
      out << csvQuote(r.word) << "," << r.length << "," << csvQuote(r.support)
          << "," << (r.basic ? "true" : "false") << "," << csvQuote(r.newton)
          << "\n";
  } else {
    out << "admissible elements (" << rows.size() << ")\n";
    for (const Row& r : rows)
      out << "  " << r.word << "  length " << r.length << "  support "
          << r.support << "  " << (r.basic ? "basic    " : "non-basic")
          << "  newton " << r.newton << "\n";
  }
  return emit(g, out.str());
}

// ---------------------------------------------------------------------------
// ekor

int cmdEkor(const Globals& g, const std::string& levelText, bool all) {
  using namespace c2::ekor;
  const auto K = parseGeneratorSet(levelText);
  if (!K) {
    std::cerr << "error: unknown level '" << levelText << "'\n";
    return kUsage;
  }
  const Convention conv = g.convention();
  const std::set<Element> elements =
      ekorSet(defaultCoweight(), *K, /*basicOnly=*/!all, conv);

  TableComparison cmp;
  if (!all) cmp = compareWithReference(levelName(*K), elements);
  const bool discrepancy = cmp.applicable && !cmp.match;

  std::ostringstream out;
  if (g.format == "json") {
    json doc;
    doc["schema_version"] = "1.0";
    doc["command"] = "ekor";
    doc["level"] = levelName(*K);
    doc["convention"] = describeConvention(conv);
    doc["count"] = elements.size();
    json elems = json::array();
    for (const Element& w : sortedByLength(elements))
      elems.push_back({{"word", wordName(w)},
                       {"length", c2::weyl::length(w)},
                       {"basic", isBasic(w)}});
    doc["elements"] = std::move(elems);
    doc["reference_comparison"] =
        cmp.applicable ? comparisonJson(cmp) : json(nullptr);
    out << doc.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "word,length,basic\n";
    for (const Element& w : sortedByLength(elements))
      out << csvQuote(wordName(w)) << "," << c2::weyl::length(w) << ","
          << (isBasic(w) ? "true" : "false") << "\n";
    if (discrepancy) std::cerr << comparisonNote(cmp) << "\n";
  } else {
    out << "index set at level " << levelName(*K) << " (" << elements.size()
        << " elements, convention " << describeConvention(conv) << ")\n";
    for (const Element& w : sortedByLength(elements))
      out << "  " << wordName(w) << "  length " << c2::weyl::length(w) << "\n";
    if (discrepancy) out << comparisonNote(cmp) << "\n";
    else if (cmp.applicable) out << "MATCH vs reference table\n";
  }
  const int code = emit(g, out.str());
  if (code != kOk) return code;
  return discrepancy ? kDiscrepancy : kOk;
}

// ---------------------------------------------------------------------------
// fibers

int cmdFibers(const Globals& g, const std::string& fromText,
              const std::string& toText, bool all) {
  using namespace c2::ekor;
  const auto from = parseGeneratorSet(fromText);
  const auto to = parseGeneratorSet(toText);
  if (!from || !to) {
    std::cerr << "error: unknown level '" << (from ? toText : fromText)
              << "'\n";
    return kUsage;
  }
  const Convention conv = g.convention();
  const FiberMapResult fm =
      fiberMap(*from, *to, defaultCoweight(), /*basicOnly=*/!all, conv);

  // Compare against the embedded fiber table, when one covers this map.
  bool applicable = false, match = false;
  std::string note;
  if (!all) {
    const std::string key = levelName(*from) + "->" + levelName(*to);
    const auto& tables = c2::conf::goldenFiberTables();
    const auto it = tables.find(key);
    if (it != tables.end()) {
      applicable = true;
      std::map<Element, std::set<Element>> ref;
      for (const auto& [rep, fiber] : it->second)
        ref[*c2::weyl::parseElement(rep)] = parseWords(fiber);
      match = ref == fm.fibers;
      if (!match) {
        note = "KNOWN-DISCREPANCY vs reference table:";
        for (const auto& [rep, fiber] : ref) {
          const auto c = fm.fibers.find(rep);
          if (c == fm.fibers.end())
            note += " [" + wordName(rep) + ": no computed fiber]";
          else if (c->second != fiber)
            note += " [" + wordName(rep) + ": computed " + braceList(c->second) +
                    " vs " + braceList(fiber) + "]";
        }
        for (const auto& [rep, fiber] : fm.fibers)
          if (!ref.count(rep))
            note += " [" + wordName(rep) + ": unlisted computed fiber " +
                    braceList(fiber) + "]";
      }
    }
  }
  const bool discrepancy = applicable && !match;

  std::ostringstream out;
  if (g.format == "json") {
    json doc;
    doc["schema_version"] = "1.0";
    doc["command"] = "fibers";
    doc["from"] = levelName(*from);
    doc["to"] = levelName(*to);
    doc["convention"] = describeConvention(conv);
    doc["multi_valued"] = fm.multiValued;
    doc["non_confluent"] = fm.nonConfluent;
    json fibers = json::array();
    for (const auto& [rep, fiber] : fm.fibers) {
      json sources = json::array();
      for (const Element& w : sortedByLength(fiber))
        sources.push_back(wordName(w));
      fibers.push_back(
          {{"target", wordName(rep)}, {"sources", std::move(sources)}});
    }
    doc["fibers"] = std::move(fibers);
    if (applicable) {
      doc["reference_comparison"] = match ? "MATCH" : "KNOWN_DISCREPANCY";
      doc["reference_note"] = note;
    } else {
      doc["reference_comparison"] = nullptr;
    }
    out << doc.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "target,source\n";
    for (const auto& [rep, fiber] : fm.fibers)
      for (const Element& w : sortedByLength(fiber))
        out << csvQuote(wordName(rep)) << "," << csvQuote(wordName(w)) << "\n";
    if (discrepancy) std::cerr << note << "\n";
  } else {
    out << "fibers of " << levelName(*from) << " -> " << levelName(*to)
        << " (convention " << describeConvention(conv) << ")\n";
    for (const auto& [rep, fiber] : fm.fibers)
      out << "  " << wordName(rep) << "  <-  " << braceList(fiber) << "  ("
          << fiber.size() << ")\n";
    if (discrepancy) out << note << "\n";
    else if (applicable) out << "MATCH vs reference table\n";
  }
  const int code = emit(g, out.str());
  if (code != kOk) return code;
  if (fm.nonConfluent || fm.multiValued) {
    std::cerr << "error: projection is "
              << (fm.nonConfluent ? "NON_CONFLUENT" : "MULTI_VALUED")
              << " under convention " << describeConvention(conv) << "\n";
    return kEngine;
  }
  return discrepancy ? kDiscrepancy : kOk;
}

// ---------------------------------------------------------------------------
// sigma-k / closure / newton

int cmdSigmaK(const Globals& g, const std::string& wordText,
              const std::string& levelText) {
  using namespace c2::ekor;
  const auto w = c2::weyl::parseElement(wordText);
  if (!w) {
    std::cerr << "error: cannot parse element '" << wordText << "'\n";
    return kUsage;
  }
  const auto K = parseGeneratorSet(levelText);
  if (!K) {
    std::cerr << "error: unknown level '" << levelText << "'\n";
    return kUsage;
  }
  const Convention conv = g.convention();
  const SigmaKResult r = sigmaK(*w, *K, conv);

  std::ostringstream out;
  if (g.format == "json") {
    json doc;
    doc["schema_version"] = "1.0";
    doc["command"] = "sigma-k";
    doc["word"] = wordName(*w);
    doc["level"] = levelName(*K);
    doc["convention"] = describeConvention(conv);
    doc["status"] = r.status == SigmaStatus::Ok ? "ok" : "non_confluent";
    json values = json::array();
    for (const Element& v : sortedByLength(r.values))
      values.push_back(wordName(v));
    doc["values"] = std::move(values);
    out << doc.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "value\n";
    for (const Element& v : sortedByLength(r.values))
      out << csvQuote(wordName(v)) << "\n";
  } else {
    out << "projection of " << wordName(*w) << " to level " << levelName(*K)
        << ": " << braceList(r.values) << "\n";
  }
  const int code = emit(g, out.str());
  if (code != kOk) return code;
  if (r.status != SigmaStatus::Ok) {
    std::cerr << "error: reduction is NON_CONFLUENT; candidate values "
              << braceList(r.values) << "\n";
    return kEngine;
  }
  if (r.values.size() > 1) {
    std::cerr << "error: projection is MULTI_VALUED: " << braceList(r.values)
              << "\n";
    return kEngine;
  }
  return kOk;
}

int cmdClosure(const Globals& g, const std::string& wordText, bool all) {
  const auto w = c2::weyl::parseElement(wordText);
  if (!w) {
    std::cerr << "error: cannot parse element '" << wordText << "'\n";
    return kUsage;
  }
  const std::set<Element> down = c2::ekor::closureDownSet(*w, !all);

  std::ostringstream out;
  if (g.format == "json") {
    json doc;
    doc["schema_version"] = "1.0";
    doc["command"] = "closure";
    doc["word"] = wordName(*w);
    doc["count"] = down.size();
    json elems = json::array();
    for (const Element& v : sortedByLength(down))
      elems.push_back(
          {{"word", wordName(v)}, {"length", c2::weyl::length(v)}});
    doc["elements"] = std::move(elems);
    out << doc.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "word,length\n";
    for (const Element& v : sortedByLength(down))
      out << csvQuote(wordName(v)) << "," << c2::weyl::length(v) << "\n";
  } else {
    out << "closure of " << wordName(*w) << " (" << down.size()
        << " elements)\n";
    for (const Element& v : sortedByLength(down))
      out << "  " << wordName(v) << "  length " << c2::weyl::length(v) << "\n";
  }
  return emit(g, out.str());
}

int cmdNewton(const Globals& g, const std::string& wordText) {
  const auto w = c2::weyl::parseElement(wordText);
  if (!w) {
    std::cerr << "error: cannot parse element '" << wordText << "'\n";
    return kUsage;
  }
  const auto nu = c2::ekor::newtonPoint(*w);
  const bool basic = c2::ekor::isBasicByNewton(*w);

  std::ostringstream out;
  if (g.format == "json") {
    json doc;
    doc["schema_version"] = "1.0";
    doc["command"] = "newton";
    doc["word"] = wordName(*w);
    doc["newton"] = c2::ekor::formatNewtonPoint(nu);
    doc["basic"] = basic;
    out << doc.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "word,newton,basic\n";
    out << csvQuote(wordName(*w)) << ","
        << csvQuote(c2::ekor::formatNewtonPoint(nu)) << ","
        << (basic ? "true" : "false") << "\n";
  } else {
    out << "newton point of " << wordName(*w) << ": "
        << c2::ekor::formatNewtonPoint(nu) << "  ("
        << (basic ? "basic" : "non-basic") << ")\n";
  }
  return emit(g, out.str());
}

// ---------------------------------------------------------------------------
// lattice fibers

struct ScaleAttempt {
  int p = 0, j = 0, q = 0;
  c2::lat::SearchReport search;
  long long censusValidTotal = -1;  // -1 = census not run
  long long censusStratumCount = -1;
  bool witnessFromCensus = false;
};

json searchJson(const c2::lat::SearchReport& sr) {
  json out;
  out["dequeued_vertices"] = sr.dequeuedVertices;
  out["classified_candidates"] = sr.classifiedCandidates;
  out["valid_points"] = sr.validPoints;
  out["spin_checked"] = sr.spinChecked;
  out["spin_passed"] = sr.spinPassed;
  out["exhausted"] = sr.exhausted;
  out["budget_hit"] = sr.budgetHit;
  out["strata_seen"] = sr.strataSeen;
  return out;
}

int cmdLatticeFibers(const Globals& g, const std::string& stratumText,
                     int sample, bool widen) {
  using namespace c2::lat;
  const auto stratum = parseStratum(stratumText);
  if (!stratum || *stratum == Stratum::Outside) {
    std::cerr << "error: unknown fiber stratum '" << stratumText
              << "' (expected superspecial | type0 | type2 | type02)\n";
    return kUsage;
  }
  if ((g.p != 3 && g.p != 5) || g.j < 1 || g.j > 3) {
    std::cerr << "error: unsupported field parameters p=" << g.p
              << " j=" << g.j << " (supported: p in {3,5}, j in {1,2,3})\n";
    return kUsage;
  }

  const long long perVertexCap = 2000;
  const long long dequeueBudget = std::max<long long>(1, g.budget / perVertexCap);

  std::vector<ScaleAttempt> attempts;
  std::optional<ModelLattice> witness;
  int witnessJ = 0;
  for (int j = g.j; j <= 3; ++j) {
    const SymplecticSpace space(g.p, j);
    ScaleAttempt at;
    at.p = g.p;
    at.j = j;
    at.q = space.q();
    at.search = findBasePoints(space, *stratum, sample, g.seed, dequeueBudget,
                               perVertexCap);
    if (!at.search.found.empty()) {
      witness = at.search.found.front();
      witnessJ = j;
      attempts.push_back(std::move(at));
      break;
    }
    // The budgeted search missed; the exhaustive census settles the scale.
    const StrataCensus census = censusAllPoints(space, 1);
    at.censusValidTotal = census.validTotal;
    const auto it = census.counts.find(stratumName(*stratum));
    at.censusStratumCount = it == census.counts.end() ? 0 : it->second;
    if (at.censusStratumCount > 0) {
      witness = census.witnesses.at(stratumName(*stratum)).front();
      witnessJ = j;
      at.witnessFromCensus = true;
      attempts.push_back(std::move(at));
      break;
    }
    attempts.push_back(std::move(at));
    if (!widen) break;
  }

  json doc;
  doc["schema_version"] = "1.0";
  doc["command"] = "lattice fibers";
  doc["stratum"] = stratumName(*stratum);
  doc["requested"] = {{"p", g.p}, {"j", g.j}};
  doc["seed"] = g.seed;
  doc["budget"] = g.budget;
  json attemptArr = json::array();
  for (const ScaleAttempt& at : attempts) {
    json a;
    a["p"] = at.p;
    a["j"] = at.j;
    a["q"] = at.q;
    a["search"] = searchJson(at.search);
    if (at.censusValidTotal >= 0) {
      a["census"] = {{"valid_points", at.censusValidTotal},
                     {"stratum_population", at.censusStratumCount}};
    }
    attemptArr.push_back(std::move(a));
  }
  doc["attempts"] = std::move(attemptArr);

  std::ostringstream text;
  text << "stratum " << stratumName(*stratum) << ", requested scale p=" << g.p
       << " j=" << g.j << " (Q=" << (attempts.empty() ? 0 : attempts.front().q)
       << ")\n";
  for (const ScaleAttempt& at : attempts) {
    text << "  scale Q=" << at.q << ": search classified "
         << at.search.classifiedCandidates << " candidates over "
         << at.search.dequeuedVertices << " vertices ("
         << (at.search.found.empty()
                 ? (at.search.budgetHit ? "budget hit" : "queue exhausted")
                 : "witness found")
         << ")";
    if (at.censusValidTotal >= 0)
      text << "; census: " << at.censusStratumCount << " of "
           << at.censusValidTotal << " valid points in this stratum";
    if (at.witnessFromCensus) text << " (witness taken from census)";
    text << "\n";
  }

  if (!witness) {
    doc["result"] = nullptr;
    doc["status"] = "NOT_FOUND";
    text << "NOT_FOUND: no " << stratumName(*stratum)
         << " witness at any attempted scale; every attempted scale was"
         << " settled by exhaustive census\n";
    std::ostringstream out;
    if (g.format == "json") out << doc.dump(2) << "\n";
    else out << text.str();
    const int code = emit(g, out.str());
    return code != kOk ? code : kExhausted;
  }

  // Witness found: enumerate the web, certify, and run the partner checks.
  const SymplecticSpace space(g.p, witnessJ);
  const int Q = space.q();
  const long long expected = expectedWebCount(*stratum, Q);
  const auto web = enumerateWeb(space, *witness, true);
  long long certified = 0;
  for (const auto& pr : web)
    if (pr.certified) ++certified;
  const bool spinOk = spinCheck(space, *witness);
  const PartnerReport ps = uniquePartnerCheck(space, *witness, 'S');
  const PartnerReport pt = uniquePartnerCheck(space, *witness, 'T');

  const bool deviation = static_cast<long long>(web.size()) != expected ||
                         certified != static_cast<long long>(web.size()) ||
                         !spinOk || !ps.expectationMet || !pt.expectationMet;

  json result;
  result["p"] = g.p;
  result["j"] = witnessJ;
  result["q"] = Q;
  result["witness"] = space.exportJson(*witness);
  result["web_pairs"] = web.size();
  result["expected_web_pairs"] = expected;
  result["certified_pairs"] = certified;
  result["spin_ok"] = spinOk;
  const auto partnerJson = [](const PartnerReport& pr) {
    json out;
    std::map<std::string, long long> hist;
    for (const auto& [partners, count] : pr.histogram)
      hist[std::to_string(partners)] = count;
    out["histogram"] = std::move(hist);
    out["multiple_partner_entries"] = pr.multiplePartnerEntries;
    out["expectation_met"] = pr.expectationMet;
    out["detail"] = pr.detail;
    return out;
  };
  result["partners_S"] = partnerJson(ps);
  result["partners_T"] = partnerJson(pt);
  if (!web.empty()) {
    json certs = json::array();
    for (const auto& cert : web.front().certificates)
      certs.push_back({{"name", cert.name},
                       {"holds", cert.holds},
                       {"index", cert.index}});
    result["first_pair_certificates"] = std::move(certs);
  }
  doc["result"] = std::move(result);
  doc["status"] = deviation ? "DEVIATION" : "OK";

  text << "witness at Q=" << Q << " (stratum " << stratumName(*stratum)
       << "), hermite basis:\n";
  const auto rows = space.hermiteBasis(*witness);
  for (const auto& row : rows) {
    text << "    [";
    for (int k = 0; k < 4; ++k)
      text << (k ? ", " : "") << seriesText(row[k]);
    text << "]\n";
  }
  text << "  web pairs: " << web.size() << " (expected " << expected << ", "
       << certified << " fully certified)\n";
  if (!web.empty()) {
    text << "  certificate path of first pair:\n";
    for (const auto& cert : web.front().certificates)
      text << "    " << cert.name << ": "
           << (cert.holds ? "holds" : "FAILS") << ", index " << cert.index
           << "\n";
  }
  text << "  spin bound at witness: " << (spinOk ? "holds" : "FAILS") << "\n";
  text << "  partners of S-side: " << ps.detail << "\n";
  text << "  partners of T-side: " << pt.detail << "\n";
  if (deviation)
    text << "DEVIATION: counts differ from the expected values; raw numbers"
         << " above\n";

  std::ostringstream out;
  if (g.format == "json") {
    out << doc.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "metric,value\n";
    out << "stratum," << stratumName(*stratum) << "\n";
    out << "q," << Q << "\n";
    out << "web_pairs," << web.size() << "\n";
    out << "expected_web_pairs," << expected << "\n";
    out << "certified_pairs," << certified << "\n";
    out << "spin_ok," << (spinOk ? "true" : "false") << "\n";
    out << "partners_S_met," << (ps.expectationMet ? "true" : "false") << "\n";
    out << "partners_T_met," << (pt.expectationMet ? "true" : "false") << "\n";
  } else {
    out << text.str();
  }
  const int code = emit(g, out.str());
  if (code != kOk) return code;
  return deviation ? kEngine : kOk;
}

// ---------------------------------------------------------------------------
// conformance

int cmdConformance(const Globals& g, bool noLattice) {
  c2::conf::ConformanceOptions opts;
  opts.convention = g.convention();
  opts.includeLattice = !noLattice;
  opts.latticeP = g.p;
  opts.latticeJ = g.j;
  opts.seed = g.seed;
  opts.searchBudget = g.budget;
  const c2::conf::ConformanceReport report = c2::conf::runConformance(opts);

  std::string payload;
  if (g.format == "json") payload = c2::conf::renderJson(report).dump(2) + "\n";
  else if (g.format == "csv") payload = c2::conf::renderCsv(report);
  else payload = c2::conf::renderText(report);
  const int code = emit(g, payload);
  if (code != kOk) return code;
  return report.exitCode();
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  if (const auto err = applyConfigFile(g)) {
    std::cerr << "error: " << *err << "\n";
    return kUsage;
  }

  CLI::App app{"engine for level index sets, projections, closures, and the"
               " finite lattice fiber oracle"};
  app.require_subcommand(1);
  // Global flags (--format, --out, --convention) are accepted before or
  // after the subcommand.
  app.fallthrough();
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", g.outPath, "write output to this file");
  app.add_option("--convention", g.conventionText,
                 "convention tuple, e.g. left,sws,full (default: calibrated)");

  auto* admCmd = app.add_subcommand("adm", "admissible elements");
  bool basicOnly = false;
  admCmd->add_flag("--basic-only", basicOnly, "restrict to basic elements");

  auto* ekorCmd = app.add_subcommand("ekor", "level index set");
  std::string levelText, kText;
  ekorCmd->add_option("--level", levelText,
                      "iwahori | paramodular | siegel | letter list");
  ekorCmd->add_option("--K", kText, "explicit generator list, e.g. s0,s2");
  bool ekorAll = false;
  ekorCmd->add_flag("--all", ekorAll, "include non-basic elements");

  auto* fibersCmd = app.add_subcommand("fibers", "fibers of a level projection");
  std::string fromText, toText;
  fibersCmd->add_option("--from", fromText, "source level")->required();
  fibersCmd->add_option("--to", toText, "target level")->required();
  bool fibersAll = false;
  fibersCmd->add_flag("--all", fibersAll, "include non-basic elements");

  auto* sigmaCmd = app.add_subcommand("sigma-k", "project one element");
  std::string sigmaWord, sigmaLevel;
  sigmaCmd->add_option("--w", sigmaWord, "element, e.g. \"s0 s1 t\"")->required();
  sigmaCmd->add_option("--K", sigmaLevel, "level")->required();

  auto* closureCmd = app.add_subcommand("closure", "Bruhat down-set");
  std::string closureWord;
  closureCmd->add_option("--w", closureWord, "element")->required();
  bool closureAll = false;
  closureCmd->add_flag("--all", closureAll, "include non-basic elements");

  auto* newtonCmd = app.add_subcommand("newton", "Newton point of an element");
  std::string newtonWord;
  newtonCmd->add_option("--w", newtonWord, "element")->required();

  auto* latticeCmd = app.add_subcommand("lattice", "finite lattice oracle");
  latticeCmd->require_subcommand(1);
  auto* latFibersCmd =
      latticeCmd->add_subcommand("fibers", "witness search + web enumeration");
  std::string stratumText;
  int sample = 1;
  bool noWiden = false;
  latFibersCmd->add_option("--stratum", stratumText,
                           "superspecial | type0 | type2 | type02")
      ->required();
  latFibersCmd->add_option("--p", g.p, "field characteristic")->capture_default_str();
  latFibersCmd->add_option("--j", g.j, "field degree")->capture_default_str();
  latFibersCmd->add_option("--seed", g.seed, "search seed")->capture_default_str();
  latFibersCmd->add_option("--budget", g.budget, "search budget in candidates")
      ->capture_default_str();
  latFibersCmd->add_option("--sample", sample, "witnesses to collect")
      ->capture_default_str();
  latFibersCmd->add_flag("--no-widen", noWiden,
                         "do not escalate to larger fields on NOT_FOUND");

  auto* confCmd =
      app.add_subcommand("conformance", "diff against the reference tables");
  bool noLattice = false;
  confCmd->add_flag("--no-lattice", noLattice, "skip the lattice section");
  confCmd->add_option("--p", g.p, "lattice field characteristic")
      ->capture_default_str();
  confCmd->add_option("--j", g.j, "lattice field degree")->capture_default_str();
  confCmd->add_option("--seed", g.seed, "lattice search seed")
      ->capture_default_str();
  confCmd->add_option("--budget", g.budget, "lattice search budget")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  if (!g.conventionText.empty() &&
      !c2::ekor::parseConvention(g.conventionText)) {
    std::cerr << "error: unknown convention tuple '" << g.conventionText
              << "'\n";
    return kUsage;
  }

  try {
    if (app.got_subcommand(admCmd)) return cmdAdm(g, basicOnly);
    if (app.got_subcommand(ekorCmd)) {
      if (levelText.empty() == kText.empty()) {
        std::cerr << "error: provide exactly one of --level or --K\n";
        return kUsage;
      }
      return cmdEkor(g, levelText.empty() ? kText : levelText, ekorAll);
    }
    if (app.got_subcommand(fibersCmd))
      return cmdFibers(g, fromText, toText, fibersAll);
    if (app.got_subcommand(sigmaCmd)) return cmdSigmaK(g, sigmaWord, sigmaLevel);
    if (app.got_subcommand(closureCmd))
      return cmdClosure(g, closureWord, closureAll);
    if (app.got_subcommand(newtonCmd)) return cmdNewton(g, newtonWord);
    if (app.got_subcommand(latticeCmd))
      return cmdLatticeFibers(g, stratumText, sample, !noWiden);
    if (app.got_subcommand(confCmd)) return cmdConformance(g, noLattice);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kEngine;
  }
  std::cerr << "error: no subcommand\n";
  return kUsage;
}
