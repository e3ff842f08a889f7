#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "fixtures.h"
#include "moira/assertion.h"
#include "moira/fusion.h"
#include "moira/interpreter.h"
#include "moira/message_json.h"
#include "moira/persistence.h"
#include "moira/protocol.h"
#include "moira/run_report.h"

using namespace moira;
using namespace moira::testing;

namespace {
KnowledgeBase populated() {
  KnowledgeBase kb = full_kb();
  load_ce(kb, kIntel, Told{"intel db", "c0", "2014-05-01T09:00:00Z"});
  load_ce(kb, "there is a vehicle named v48 that has DEF456 as registration.",
          Told{"Border Patrol", "c1", "2014-05-02T10:15:00Z"});
  kb.set_description("v48", "Suspicious vehicle heading south: \"black\" saloon");
  run_rules(kb, fusion_rules());
  kb.bump_counter("v", 48);
  return kb;
}
}  // namespace

TEST_CASE("persist and restore round trip") {
  KnowledgeBase kb = populated();
  std::string text = persist(kb);
  KnowledgeBase back = restore(text);
  CHECK(back.equivalent(kb));
  CHECK(persist(back) == text);
  CHECK(back.fresh_id("vehicle") == "v49");
}

TEST_CASE("persisted text is readable CE") {
  std::string text = persist(populated());
  CHECK(text.find("there is a suspect sighting named SS_v48.") != std::string::npos);
  CHECK(text.find("the person p1 has DEF456 as linked vehicle registration.") != std::string::npos);
}

TEST_CASE("restore is all-or-nothing and reports positions") {
  std::string text = persist(populated());
  text += "the vehicle v48 has the direction south as colour.\n";
  try {
    restore(text);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(':') != std::string::npos);
  }
}

TEST_CASE("file persistence") {
  auto path = std::filesystem::temp_directory_path() / "moira_kb_test.ce";
  KnowledgeBase kb = populated();
  persist_file(kb, path);
  CHECK(restore_file(path).equivalent(kb));
  std::filesystem::remove(path);
  CHECK_THROWS(restore_file(path));
}

TEST_CASE("message JSON round trip") {
  Message m;
  m.id = "m2";
  m.conversation = "c1";
  m.sender = "Moira";
  m.audience = {"Border Patrol"};
  m.kind = MessageKind::kCeConfirmRequest;
  m.body.text = "black saloon vehicle (DEF456) heading south.";
  m.body.ce = "there is a vehicle named v48.";
  m.body.gist = GistDescriptor{"black saloon", {{"car", "black saloon"}}, {"v48"}, "vehicle report"};
  m.body.score = 6;
  m.body.unmatched = {"Suspicious"};
  m.in_reply_to = "m1";
  m.timestamp = "2014-05-02T10:15:00Z";
  auto j = to_json(m);
  CHECK(j["kind"] == "CeConfirmRequest");
  CHECK(message_from_json(j) == m);
  CHECK(message_from_json(nlohmann::json::parse(j.dump())) == m);
}

TEST_CASE("malformed envelopes are rejected") {
  CHECK_THROWS_AS(message_from_json(nlohmann::json::parse(R"({"kind":"Shout"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(message_from_json(nlohmann::json::parse(R"([1,2])")), std::invalid_argument);
  for (auto kind : kAllMessageKinds) CHECK(parse_message_kind(to_string(kind)) == kind);
}

TEST_CASE("statistics: mean rounds half up, median averages the middle pair") {
  auto s = summarise("Score", {1, 2, 2, 3});
  CHECK(s.max == 3);
  CHECK(s.min == 1);
  CHECK(s.mean_text() == "2.00");
  CHECK(s.median_text() == "2");
  auto t = summarise("Score", {6, 7});
  CHECK(t.median_text() == "6.5");
  CHECK(summarise("x", {1, 1, 2}).mean_text() == "1.33");
  CHECK(summarise("x", {0, 0, 1, 1, 1, 1, 1, 1}).mean_text() == "0.75");
  CHECK(summarise("x", {1, 2, 2, 2, 2, 2, 2, 2}).mean_text() == "1.88");  // 1.875
}

TEST_CASE("run report rows, JSON round trip and empty input") {
  KnowledgeBase kb = full_kb();
  InterpreterOptions o;
  o.excluded_concepts = ProtocolConfig{}.excluded_concepts;
  std::istringstream in("red car heading north\n\n   \nzzqx wvvt. second sentence\n");
  RunReport r = run_interpret(kb, in, o);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].score == 4);
  CHECK(r.rows[1].sentences == 2);
  CHECK(r.rows[1].score == 0);
  auto j = to_json(r);
  CHECK(report_from_json(j) == r);
  auto tampered = j;
  tampered["statistics"][4]["max"] = 99;
  CHECK_THROWS(report_from_json(tampered));

  KnowledgeBase kb2 = full_kb();
  std::istringstream empty("\n\n");
  RunReport none = run_interpret(kb2, empty, o);
  CHECK(none.rows.empty());
  CHECK(none.statistics().empty());
  CHECK(to_json(none)["statistics"].is_null());
  CHECK(render_text(none).find("undefined") != std::string::npos);
}

TEST_CASE("run report output is byte-stable") {
  InterpreterOptions o;
  o.excluded_concepts = ProtocolConfig{}.excluded_concepts;
  std::string text = read_file(data_dir() / "corpus/scenes.txt");
  KnowledgeBase a = full_kb(), b = full_kb();
  std::istringstream ia(text), ib(text);
  auto ra = run_interpret(a, ia, o), rb = run_interpret(b, ib, o);
  CHECK(render_text(ra) == render_text(rb));
  CHECK(to_json(ra).dump() == to_json(rb).dump());
}
