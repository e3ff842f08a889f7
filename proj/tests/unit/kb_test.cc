#include <doctest.h>

#include "fixtures.h"
#include "moira/assertion.h"
#include "moira/knowledge_base.h"

using namespace moira;
using namespace moira::testing;

TEST_CASE("instances: idempotent add, conflicting concept throws") {
  KnowledgeBase kb = model_kb();
  kb.add_instance({"v1", "vehicle", "", ""});
  CHECK_NOTHROW(kb.add_instance({"v1", "vehicle", "", ""}));
  CHECK_THROWS_AS(kb.add_instance({"v1", "person", "", ""}), ModelError);
  CHECK_THROWS_AS(kb.add_instance({"x1", "spaceship", "", ""}), ModelError);
}

TEST_CASE("types through is-a facts and subtypes") {
  KnowledgeBase kb = model_kb();
  kb.add_instance({"p1", "person", "", ""});
  CHECK_FALSE(kb.instance_has_type("p1", "suspect"));
  kb.assert_fact("p1", kIsA, Term::of_concept("suspect"), Told{"t", "", ""});
  CHECK(kb.instance_has_type("p1", "suspect"));
  CHECK(kb.instance_has_type("p1", "person"));
  CHECK(kb.types_of("p1") == std::vector<std::string>{"person", "suspect"});
}

TEST_CASE("assert_fact checks domain and range, deduplicates triples") {
  KnowledgeBase kb = model_kb();
  kb.add_instance({"v1", "vehicle", "", ""});
  kb.add_instance({"p1", "person", "", ""});
  const std::string colour = "vehicle:colour:colour";
  auto first = kb.assert_fact("v1", colour, Term::instance("black"), Told{"a", "", ""});
  CHECK(first.inserted);
  auto again = kb.assert_fact("v1", colour, Term::instance("black"), Told{"b", "", ""});
  CHECK_FALSE(again.inserted);
  CHECK(again.fact_id == first.fact_id);
  // domain
  CHECK_THROWS_AS(kb.assert_fact("p1", colour, Term::instance("black"), Told{}), ModelError);
  // range: a relation needs an instance of the range concept
  CHECK_THROWS_AS(kb.assert_fact("v1", colour, Term::instance("south"), Told{}), ModelError);
  CHECK_THROWS_AS(kb.assert_fact("v1", colour, Term::literal("black"), Told{}), ModelError);
  // an attribute takes a literal
  CHECK_THROWS_AS(kb.assert_fact("v1", "vehicle:registration:value", Term::instance("black"), Told{}),
                  ModelError);
  CHECK_THROWS_AS(kb.assert_fact("nobody", colour, Term::instance("black"), Told{}), ModelError);
}

TEST_CASE("resolve_property picks the subject's property by name") {
  KnowledgeBase kb = model_kb();
  kb.add_instance({"v1", "vehicle", "", ""});
  const PropertyDef* p = kb.resolve_property("v1", "Registration");
  REQUIRE(p);
  CHECK(p->key() == "vehicle:registration:value");
  CHECK(kb.resolve_property("v1", "linked vehicle registration") == nullptr);
  const PropertyDef* loc = kb.resolve_property("v1", "is located in");
  REQUIRE(loc);
  CHECK(loc->domain == "thing");
}

TEST_CASE("query patterns: wildcards, names, subject concept") {
  KnowledgeBase kb = model_kb();
  load_ce(kb, kIntel, Told{"intel", "", ""});
  load_ce(kb, "there is a vehicle named v1 that has DEF456 as registration.", Told{"r", "", ""});
  FactPattern by_name;
  by_name.property = "registration";
  CHECK(kb.query(by_name).size() == 1);
  FactPattern by_object;
  by_object.object = "DEF456";
  CHECK(kb.query(by_object).size() == 2);
  FactPattern persons;
  persons.subject_concept = "person";
  CHECK(kb.query(persons).size() == 2);  // is a suspect, linked registration
  CHECK(kb.query({}).size() == kb.facts().size());
}

TEST_CASE("fresh ids use concept initials and skip taken ids") {
  KnowledgeBase kb = model_kb();
  CHECK(KnowledgeBase::id_prefix("suspect sighting") == "ss");
  CHECK(kb.fresh_id("vehicle") == "v1");
  kb.add_instance({"v2", "vehicle", "", ""});
  CHECK(kb.fresh_id("vehicle") == "v3");
  kb.bump_counter("v", 47);
  CHECK(kb.fresh_id("vehicle") == "v48");
}

TEST_CASE("version counts content changes but not id reservations") {
  KnowledgeBase kb = model_kb();
  auto v = kb.version();
  kb.fresh_id("vehicle");
  CHECK(kb.version() == v);
  kb.add_instance({"v9", "vehicle", "", ""});
  CHECK(kb.version() > v);
}

TEST_CASE("lexicon orders instance before property before concept") {
  KnowledgeBase kb = model_kb();
  auto truck = kb.lookup_surface({"truck"});
  REQUIRE(truck.size() == 2);
  CHECK(truck[0].element.kind == ElementKind::kInstance);
  CHECK(truck[1].element.kind == ElementKind::kConcept);
  CHECK(truck[1].via_synonym);
  auto plate = kb.lookup_surface({"license", "plate"});
  REQUIRE(plate.size() == 1);
  CHECK(plate[0].element.key == "vehicle:registration:value");
  CHECK(kb.lookup_surface({"north", "road"}).front().element.key == "North Road");
  CHECK(kb.lookup_surface({"zzqx"}).empty());
}

TEST_CASE("labels are matched like names") {
  KnowledgeBase kb = model_kb();
  load_ce(kb, kIntel, Told{"intel", "", ""});
  auto m = kb.lookup_surface({"john", "smith"});
  REQUIRE(m.size() == 1);
  CHECK(m[0].element.key == "p1");
}

TEST_CASE("synonyms must target existing elements") {
  KnowledgeBase kb = model_kb();
  CHECK_THROWS_AS(kb.add_synonym("boat", ElementRef{ElementKind::kConcept, "ship"}), ModelError);
}
