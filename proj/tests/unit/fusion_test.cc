#include <doctest.h>

#include "fixtures.h"
#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/fusion.h"

using namespace moira;
using namespace moira::testing;

namespace {
KnowledgeBase sighting_kb() {
  KnowledgeBase kb = model_kb();
  load_ce(kb, kIntel, Told{"intel db", "", "2014-05-01T09:00:00Z"});
  load_ce(kb, "there is a vehicle named v48 that has DEF456 as registration.",
          Told{"Border Patrol", "c1", "2014-05-02T10:15:00Z"});
  return kb;
}
}  // namespace

TEST_CASE("rule files parse and render back to the same rules") {
  auto rules = fusion_rules();
  REQUIRE_FALSE(rules.empty());
  CHECK(rules[0].name == "suspect sighting");
  CHECK(parse_rules(render_rules(rules)) == rules);
  CHECK_NOTHROW(validate_rules(rules, model_kb().model()));
}

TEST_CASE("pattern terms") {
  auto p = parse_pattern("SS_?v has ?p as suspect candidate");
  CHECK(p.subject.kind == RuleTerm::Kind::kTemplate);
  CHECK(p.object.kind == RuleTerm::Kind::kVariable);
  auto q = parse_pattern("?x is located in 'North Road'");
  CHECK(q.object.kind == RuleTerm::Kind::kConstant);
  CHECK(q.object.text == "North Road");
  CHECK(render_pattern(q) == "?x is located in 'North Road'");
}

TEST_CASE("rule validation") {
  Model m = model_kb().model();
  CHECK_THROWS_AS(validate_rules(parse_rules("rule r\nif:\n  ?x is a spaceship\nthen:\n  ?x is a person\n"), m),
                  RuleError);
  CHECK_THROWS_AS(validate_rules(parse_rules("rule r\nif:\n  ?x is a person\nthen:\n  ?y is a suspect\n"), m),
                  RuleError);
  CHECK_THROWS_AS(parse_rules("rule r\nthen:\n  ?x is a person\n"), RuleError);
}

TEST_CASE("solve joins conditions and records premises") {
  KnowledgeBase kb = sighting_kb();
  auto sols = solve(kb, fusion_rules()[0].conditions);
  REQUIRE(sols.size() == 1);
  CHECK(sols[0].bindings.at("v") == Term::instance("v48"));
  CHECK(sols[0].bindings.at("p") == Term::instance("p1"));
  CHECK(sols[0].premises.size() == 3);
}

TEST_CASE("run_rules infers the suspect sighting and audits it") {
  KnowledgeBase kb = sighting_kb();
  auto rules = fusion_rules();
  RunResult r = run_rules(kb, rules);
  CHECK_FALSE(r.capped);
  CHECK(r.new_instance_ids == std::vector<std::string>{"SS_v48"});
  for (const auto& id : r.new_fact_ids) {
    const Fact* f = kb.find_fact(id);
    REQUIRE(f);
    CHECK(f->is_inferred());
    CHECK(audit_fact(kb, rules, *f));
  }
  // Fixpoint: a second run adds nothing.
  RunResult again = run_rules(kb, rules);
  CHECK(again.new_fact_ids.empty());
}

TEST_CASE("rationale for told facts cites the source") {
  KnowledgeBase kb = sighting_kb();
  FactPattern p;
  p.subject = "v48";
  auto facts = kb.query(p);
  REQUIRE(facts.size() == 1);
  Rationale r = rationale(kb, facts[0].id);
  CHECK(r.rule.empty());
  CHECK(r.text ==
        "because there is a vehicle named v48 that\n has DEF456 as registration and\n"
        " this was reported by 'Border Patrol' at '2014-05-02T10:15:00Z'.");
}

TEST_CASE("unbounded rules stop at the round cap") {
  KnowledgeBase kb;
  load_ce(kb,
          "conceptualise a ~ node ~ N.\n"
          "conceptualise the node A ~ points to ~ the node B.\n"
          "there is a node named n.\n",
          Told{});
  auto rules = parse_rules(
      "rule grow\nif:\n  ?x is a node\nthen:\n  there is a node named X_?x\n  ?x points to X_?x\n");
  RunResult r = run_rules(kb, rules, 5);
  CHECK(r.capped);
  CHECK(r.rounds == 5);
}

TEST_CASE("subscriptions see existing and later matches") {
  KnowledgeBase kb = sighting_kb();
  SubscriptionHub hub;
  std::vector<std::string> seen;
  FactPattern p;
  p.subject_concept = "suspect sighting";
  int id = hub.subscribe(kb, p, [&](const std::vector<Fact>& fs) {
    for (const auto& f : fs) seen.push_back(f.id);
  });
  CHECK(seen.empty());
  RunResult r = run_rules(kb, fusion_rules());
  hub.publish(kb, r.new_fact_ids);
  CHECK(seen.size() == r.new_fact_ids.size());
  hub.unsubscribe(id);
  CHECK(hub.size() == 0);
}
