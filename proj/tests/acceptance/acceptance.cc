// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixtures.h"
#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/cli.h"
#include "moira/fusion.h"
#include "moira/interpreter.h"
#include "moira/protocol.h"
#include "moira/service.h"
#include "moira/tasking.h"
#include "moira/text.h"
#include "properties.h"

using namespace moira;
using namespace moira::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const char* kUc1Listing =
    "there is a vehicle named v48 that\n"
    " has DEF456 as registration and\n"
    " has the colour black as colour and\n"
    " has the vehicle body type saloon as body type and\n"
    " is a moving thing.\n"
    "there is a moving thing named v48 that\n"
    " has the direction south as direction of travel.\n";

const char* kUc2Sighting =
    "there is a suspect sighting named SS_v48 that\n"
    " has the vehicle v48 as target vehicle and\n"
    " has the person p1 as suspect candidate.\n";

const char* kUc2Because =
    "because there is a person named p1\n"
    " that is known as 'John Smith' and is a suspect and\n"
    " the person p1 has DEF456 as linked vehicle registration and\n"
    "  there is a vehicle named v48 that has DEF456 as registration.\n";

const char* kUc3Task =
    "there is a task named TS_SS_v48 that\n"
    " requires the intelligence capability localize and\n"
    " is looking for the detectable thing car and\n"
    " is seeking instance the vehicle v48 and\n"
    " operates in the spatial area 'North Road' and\n"
    " is ranked with the task priority High.\n";

InterpreterOptions report_options() {
  InterpreterOptions o;
  o.excluded_concepts = ProtocolConfig{}.excluded_concepts;
  return o;
}

// KB after the spot report has been confirmed: intel, report, v48.
KnowledgeBase reported_kb() {
  KnowledgeBase kb = full_kb();
  load_ce(kb, kIntel, Told{"intel db", "", ""});
  kb.bump_counter("v", 47);
  Interpretation in = interpret(kSpotReport, kb, report_options());
  assert_statements(kb, in.statements, Told{"Border Patrol", "c1", ""});
  return kb;
}

Outcome use_case_1() {
  KnowledgeBase kb = full_kb();
  load_ce(kb, kIntel, Told{"intel db", "", ""});
  kb.bump_counter("v", 47);
  auto t0 = std::chrono::steady_clock::now();
  Interpretation in = interpret(kSpotReport, kb, report_options());
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
  auto expected = parse_statements(kUc1Listing, parse_options(kb));
  bool suspicious = false;
  for (const auto& w : in.unmatched_words) suspicious = suspicious || fold(w.text) == "suspicious";
  std::ostringstream d;
  d << "score " << in.score << ", " << ms << " ms";
  if (in.statements != expected)
    d << "; got:\n" << render_statements(in.statements, RenderStyle::kMultiLine);
  if (!suspicious) d << "; 'Suspicious' not unmatched";
  return {in.statements == expected && suspicious && ms < 1000.0, d.str()};
}

Outcome use_case_2() {
  KnowledgeBase kb = reported_kb();
  RunResult run = run_rules(kb, fusion_rules());
  auto sighting = parse_statement(kUc2Sighting, parse_options(kb));
  const auto* clauses = clauses_of(sighting);
  std::ostringstream d;
  bool ok = kb.instance_has_type("SS_v48", "suspect sighting");
  std::string target_fact;
  for (const auto& c : *clauses) {
    const auto& pc = std::get<PropertyClause>(c);
    const auto& ref = std::get<InstanceRef>(pc.value);
    const PropertyDef* p = kb.resolve_property("SS_v48", pc.property);
    const Fact* f = p ? kb.find_triple("SS_v48", p->key(), Term::instance(ref.id)) : nullptr;
    if (!f) {
      ok = false;
      d << "missing SS_v48 " << pc.property << " " << ref.id << "; ";
    } else if (target_fact.empty()) {
      target_fact = f->id;
    }
  }
  if (!ok) return {false, d.str()};
  Rationale why = rationale(kb, target_fact);
  auto expected = parse_statement(kUc2Because, parse_options(kb));
  d << run.new_fact_ids.size() << " facts inferred by rule '" << why.rule << "'";
  if (!(why.because == expected)) {
    d << "; because-statement differs:\n" << why.text;
    return {false, d.str()};
  }
  return {true, d.str()};
}

Outcome use_case_3() {
  std::ostringstream d;
  KnowledgeBase kb = reported_kb();
  run_rules(kb, fusion_rules());
  kb.assert_fact("v48", kb.resolve_property("v48", "is located in")->key(),
                 Term::instance("North Road"), Told{"Border Patrol", "c1", ""});
  Task task = build_task(kb, "SS_v48");
  auto expected = parse_statement(kUc3Task, parse_options(kb));
  bool fields = task.id == "TS_SS_v48" && task.capability == "localize" &&
                task.detectable == "car" && task.sought == "v48" &&
                task.area == "North Road" && task.priority == Priority::kHigh &&
                task_statement(task) == expected;
  if (!fields)
    d << "task:\n" << render_statement(task_statement(task), RenderStyle::kMultiLine) << "; ";
  auto catalogue = assets_from_kb(kb);
  auto ranked = match_assets(kb, task, catalogue);
  bool uav = !ranked.empty() && ranked.front().id == "uav1" &&
             ranked.front().label == "MALE UAV with EO camera";
  d << catalogue.size() << " assets, selected "
    << (ranked.empty() ? std::string("none") : ranked.front().id);

  // The same chain through the agent service: report, accept, gists.
  auto svc = scenario_service();
  Session patrol = svc->create_session("Border Patrol", "patrol", "phone", "North Road");
  svc->create_session("Analyst", "analyst", "phone");
  svc->post(patrol.id, Post{MessageKind::kNlInput, MessageBody{.text = kSpotReport}, "", {}});
  svc->post(patrol.id, Post{MessageKind::kConfirmAccept, {}, "", {}});
  bool tasked = false, lookout = false;
  for (const auto& c : svc->conversations()) {
    for (const auto& m : c.transcript) {
      if (m.kind != MessageKind::kGist) continue;
      tasked = tasked || m.body.text.find("has been tasked to localize") != std::string::npos;
      lookout = lookout || m.body.text.find("Be on the lookout for") != std::string::npos;
    }
  }
  if (!tasked) d << "; no tasking gist";
  if (!lookout) d << "; no lookout gist";
  return {fields && uav && tasked && lookout, d.str()};
}

Outcome from(const PropertyResult& r, const std::string& what) {
  std::ostringstream d;
  d << r.cases << " " << what << ", " << r.failures << " failures";
  if (!r.detail.empty()) d << " (" << r.detail << ")";
  if (r.failures) d << "; first: " << r.first_failure;
  return {r.ok(), d.str()};
}

Outcome ce_round_trip_suite() {
  return from(ce_round_trip(model_kb(), 1000, 20140502), "renderings of 1000 ASTs");
}

Outcome interpreter_suite() {
  KnowledgeBase kb = full_kb();
  load_ce(kb, kIntel, Told{"intel db", "", ""});
  auto inputs = lines_of(data_dir() / "corpus/scenes.txt");
  auto generated = generated_reports(kb, 100, 7);
  inputs.insert(inputs.end(), generated.begin(), generated.end());
  long sentences = 0;
  PropertyResult corpus = interpreter_invariants(kb, inputs, &sentences);
  PropertyResult fuzz = interpreter_fuzz(kb, 10000, 11);
  std::ostringstream d;
  d << sentences << " sentences: " << corpus.failures << " failures";
  if (corpus.failures) d << " (" << corpus.first_failure << ")";
  d << "; fuzz " << fuzz.cases << " inputs: " << fuzz.failures << " failures";
  if (fuzz.failures) d << " (" << fuzz.first_failure << ")";
  return {corpus.ok() && fuzz.ok() && sentences >= 100 && fuzz.cases == 10000, d.str()};
}

Outcome fusion_suite() { return from(fusion_oracle(100, 99), "random KBs"); }

Outcome protocol_suite() { return from(protocol_model_check(6), "message sequences to depth 6"); }

Outcome persistence_suite() { return from(persistence_round_trip(100, 5), "random KBs"); }

Outcome corpus_statistics() {
  CliOptions options;
  options.data_dir = data_dir();
  options.format = "json";
  std::ifstream in(data_dir() / "corpus/scenes.txt");
  std::ostringstream out, err;
  int code = cmd_interpret(options, in, out, err);
  if (code != 0) return {false, "cmd_interpret exited " + std::to_string(code) + ": " + err.str()};
  auto got = nlohmann::json::parse(out.str());
  auto expected = nlohmann::json::parse(read_file(data_dir() / "corpus/scenes.expected.json"));
  std::ostringstream d;
  d << got["rows"].size() << " inputs";
  bool ok = got["statistics"] == expected["statistics"];
  if (!ok) d << "; got " << got["statistics"].dump() << " expected " << expected["statistics"].dump();
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"use case 1: spot report to CE", use_case_1},
      {"use case 2: fusion and because-statement", use_case_2},
      {"use case 3: task, asset selection, gists", use_case_3},
      {"CE round trip", ce_round_trip_suite},
      {"interpreter properties and fuzzing", interpreter_suite},
      {"fusion fixpoint against brute-force closure", fusion_suite},
      {"protocol model check", protocol_suite},
      {"persistence round trip", persistence_suite},
      {"corpus scoring statistics", corpus_statistics},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass"
            << std::endl;
  return failed ? 1 : 0;
}
