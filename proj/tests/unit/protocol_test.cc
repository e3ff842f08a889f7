#include <doctest.h>

#include "fixtures.h"
#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/protocol.h"

using namespace moira;
using namespace moira::testing;

namespace {
struct Rig {
  KnowledgeBase kb;
  GistStore gists;
  ProtocolEngine engine;

  Rig() : kb(base()), engine(kb, gists, config()) {
    engine.set_clock([] { return std::string("2014-05-02T10:15:00Z"); });
  }
  static KnowledgeBase base() {
    KnowledgeBase kb = full_kb();
    load_ce(kb, kIntel, Told{"intel db", "", ""});
    kb.bump_counter("v", 47);
    return kb;
  }
  static ProtocolConfig config() {
    ProtocolConfig c;
    c.templates = gist_templates();
    return c;
  }
};

Message msg(MessageKind kind, std::string text = "", std::string ce = "", std::string ref = "") {
  Message m;
  m.sender = "Border Patrol";
  m.kind = kind;
  m.body.text = std::move(text);
  m.body.ce = std::move(ce);
  m.body.ref = std::move(ref);
  return m;
}
}  // namespace

TEST_CASE("transition table parses and matches the built-in one") {
  auto t = parse_transitions(read_file(data_dir() / "protocol/transitions.txt"));
  CHECK(t.starts == default_transitions().starts);
  CHECK(t.next == default_transitions().next);
  CHECK(t.can_start(Interaction::kConfirm));
  CHECK_FALSE(t.can_start(Interaction::kWhy));
  CHECK(t.can_follow(Interaction::kConfirm, Interaction::kAskTell));
  CHECK_FALSE(t.can_follow(Interaction::kConfirm, Interaction::kWhy));
}

TEST_CASE("allowed moves") {
  const auto& t = default_transitions();
  CHECK(allowed_moves(std::nullopt, MessageKind::kWhy, t).empty());
  CHECK(allowed_moves(std::nullopt, MessageKind::kBecause, t).empty());
  auto open = allowed_moves(std::nullopt, MessageKind::kNlInput, t);
  REQUIRE(open.size() == 1);
  CHECK(open[0] == Position{Interaction::kConfirm, Phase::kAwaitingDecision});
  Position decided{Interaction::kConfirm, Phase::kAwaitingDecision};
  CHECK(allowed_moves(decided, MessageKind::kConfirmAccept, t) ==
        std::vector<Position>{{Interaction::kConfirm, Phase::kConfirmed}});
  CHECK(allowed_moves(decided, MessageKind::kAsk, t).empty());
  for (auto kind : kAllMessageKinds)
    for (auto p : allowed_moves(std::nullopt, kind, t)) CHECK(phase_belongs(p.interaction, p.phase));
}

TEST_CASE("a conversation cannot open with Why") {
  Rig r;
  CHECK_THROWS_AS(r.engine.begin("Border Patrol", msg(MessageKind::kWhy, "", "", "p1")), ProtocolError);
  CHECK_THROWS_AS(start_conversation("c9", "x", msg(MessageKind::kBecause), default_transitions()),
                  ProtocolError);
}

TEST_CASE("confirm: report, correct, accept") {
  Rig r;
  auto [c, out] = r.engine.begin("Border Patrol", msg(MessageKind::kNlInput, kSpotReport));
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == MessageKind::kCeConfirmRequest);
  CHECK(out[0].body.score == 6);
  CHECK(out[0].body.gist->text == "black saloon vehicle (DEF456) heading south.");
  CHECK(out[0].body.unmatched == std::vector<std::string>{"Suspicious", "with", "DEF456"});
  auto version = r.kb.version();

  auto fixed = r.engine.step(c, msg(MessageKind::kConfirmCorrect, "it's a hatchback not a saloon"));
  REQUIRE(fixed.size() == 1);
  CHECK(fixed[0].body.ce.find("hatchback") != std::string::npos);
  CHECK(fixed[0].body.ce.find("v49") != std::string::npos);
  CHECK(r.kb.version() == version);
  CHECK(c.position == Position{Interaction::kConfirm, Phase::kAwaitingDecision});

  r.engine.step(c, msg(MessageKind::kConfirmAccept));
  CHECK(c.position == Position{Interaction::kConfirm, Phase::kConfirmed});
  CHECK(r.kb.instance_has_type("v49", "moving thing"));
  CHECK(c.confirmed_score == 6);
  CHECK_THROWS_AS(r.engine.step(c, msg(MessageKind::kConfirmAccept)), ProtocolError);
}

TEST_CASE("confirm: a CE edit replaces the pending statements") {
  Rig r;
  auto [c, out] = r.engine.begin("Border Patrol", msg(MessageKind::kNlInput, "red car"));
  auto edited = r.engine.step(
      c, msg(MessageKind::kConfirmCorrect, "", "there is a vehicle named v77 that has the colour blue as colour."));
  REQUIRE(edited.size() == 1);
  CHECK(edited[0].body.ce.find("blue") != std::string::npos);
  auto bad = r.engine.step(c, msg(MessageKind::kConfirmCorrect, "", "there is a spaceship named x."));
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].kind == MessageKind::kError);
  CHECK(c.position.phase == Phase::kAwaitingDecision);
}

TEST_CASE("ask and tell") {
  Rig r;
  auto [c, out] = r.engine.begin("Analyst", msg(MessageKind::kAsk, "?s is a suspect"));
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == MessageKind::kTell);
  CHECK(out[0].body.ce.find("John Smith") != std::string::npos);
  CHECK(c.position == Position{Interaction::kAskTell, Phase::kAnswered});
}

TEST_CASE("a tell missing mandatory slots draws a counter-ask") {
  Rig r;
  auto [c, out] = r.engine.begin(
      "Border Patrol", msg(MessageKind::kTell, "", "there is a vehicle named v90 that has the colour red as colour."));
  REQUIRE_FALSE(out.empty());
  CHECK(out.back().kind == MessageKind::kAsk);
  CHECK(out.back().body.missing ==
        std::vector<std::string>{"registration", "direction of travel"});
  CHECK(c.position.phase == Phase::kAwaitingAnswer);
  CHECK(r.kb.has_instance("v90"));
  r.engine.step(c, msg(MessageKind::kTell, "", "the vehicle v90 has XYZ1 as registration."));
  CHECK(r.kb.query({"v90", "registration", "XYZ1", {}}).size() == 1);
}

TEST_CASE("gist, expand, why") {
  Rig r;
  auto st = parse_statements("there is a vehicle named v5 that has the colour red as colour.",
                             parse_options(r.kb));
  Message g = r.engine.make_gist(st, {"patrol", "phone", "confirm"}, "Moira", {"Border Patrol"});
  CHECK(g.kind == MessageKind::kGist);
  auto [c, out] = r.engine.begin("Moira", g);
  auto exp = r.engine.step(c, msg(MessageKind::kExpandRequest, "", "", g.body.ref));
  REQUIRE(exp.size() == 1);
  CHECK(exp[0].kind == MessageKind::kExpand);
  CHECK(parse_statements(exp[0].body.ce, parse_options(r.kb)) == st);
  auto missing = r.engine.step(c, msg(MessageKind::kExpandRequest, "", "", "g404"));
  CHECK(missing[0].kind == MessageKind::kError);

  FactPattern p;
  p.subject = "p1";
  std::string fact = r.kb.query(p).front().id;
  auto why = r.engine.step(c, msg(MessageKind::kWhy, "", "", fact));
  REQUIRE(why.size() == 1);
  CHECK(why[0].kind == MessageKind::kBecause);
  CHECK(why[0].body.ce.find("intel db") != std::string::npos);
}

TEST_CASE("corrections") {
  CHECK(apply_correction("black saloon on North Road", "it's a truck not a saloon") ==
        "black truck on North Road");
  CHECK(apply_correction("black saloon", "It is a van, not a saloon.") == "black van");
  CHECK(apply_correction("black car", "its blue not red") == "black car blue");
  CHECK_FALSE(apply_correction("black car", "blue please"));
}

TEST_CASE("ask patterns") {
  auto q = parse_query("?s is a suspect; ?s has ?r as linked vehicle registration");
  REQUIRE(q.size() == 2);
  CHECK(q[0].kind == RulePattern::Kind::kIsA);
  CHECK(q[1].property == "linked vehicle registration");
}

TEST_CASE("replay rebuilds the same conversation") {
  Rig a;
  auto [c, out] = a.engine.begin("Border Patrol", msg(MessageKind::kNlInput, kSpotReport));
  a.engine.step(c, msg(MessageKind::kConfirmCorrect, "it's a hatchback not a saloon"));
  a.engine.step(c, msg(MessageKind::kConfirmAccept));
  Rig b;
  Conversation again = replay(b.engine, c.transcript);
  CHECK(again.position == c.position);
  CHECK(again.outcome == c.outcome);
  CHECK(b.kb.equivalent(a.kb));
}
