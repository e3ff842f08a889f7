#include <doctest.h>

#include "moira/knowledge_base.h"
#include "moira/model.h"
#include "moira/text.h"

using namespace moira;

TEST_CASE("fold lowers ASCII only") {
  CHECK(fold("North ROAD") == "north road");
  CHECK(fold("Zürich") == "zürich");
  CHECK(fold("ÄB") == "Äb");
}

TEST_CASE("split, join and trim") {
  CHECK(split_ws("  a \t b\nc  ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_ws("   ").empty());
  CHECK(join({"a", "b"}, ", ") == "a, b");
  CHECK(trim("  x y \n") == "x y");
  CHECK(surface_key("  License   Plate ") == "license plate");
  CHECK(starts_with_upper("North"));
  CHECK_FALSE(starts_with_upper("north"));
}

TEST_CASE("subtypes are reflexive and transitive, rooted at thing") {
  Model m;
  m.add_concepts({{"vehicle", {}, true}, {"car", {"vehicle"}, true}, {"sports car", {"car"}, true}});
  CHECK(m.is_subtype("sports car", "vehicle"));
  CHECK(m.is_subtype("car", "car"));
  CHECK(m.is_subtype("car", "thing"));
  CHECK_FALSE(m.is_subtype("vehicle", "car"));
  CHECK(m.is_subtype("Sports Car", "VEHICLE"));
}

TEST_CASE("concept batches may refer forward and apply atomically") {
  Model m;
  m.add_concepts({{"boat", {"craft"}, true}, {"craft", {}, true}});
  CHECK(m.is_subtype("boat", "craft"));
  Model n;
  CHECK_THROWS_AS(n.add_concepts({{"x", {"missing"}, true}, {"y", {}, true}}), ModelError);
  CHECK_FALSE(n.has_concept("y"));
}

TEST_CASE("cyclic hierarchies are rejected") {
  Model m;
  CHECK_THROWS_AS(m.add_concepts({{"ping", {"pong"}, true}, {"pong", {"ping"}, true}}), ModelError);
}

TEST_CASE("properties: kinds, keys and unknown domains") {
  Model m;
  m.add_concepts({{"vehicle", {}, true}, {"colour", {}, true}});
  m.add_property({"vehicle", "registration", "value", PropertyForm::kHasAs});
  m.add_property({"vehicle", "colour", "colour", PropertyForm::kHasAs});
  const PropertyDef* reg = m.find_property("vehicle:registration:value");
  REQUIRE(reg);
  CHECK(reg->kind() == PropertyKind::kAttribute);
  CHECK(m.find_property("vehicle:colour:colour")->kind() == PropertyKind::kRelation);
  CHECK(m.properties_named("Colour").size() == 1);
  CHECK(m.property_rank("vehicle:registration:value") < m.property_rank("vehicle:colour:colour"));
  CHECK_THROWS_AS(m.add_property({"boat", "hull", "value", PropertyForm::kHasAs}), ModelError);
}

TEST_CASE("names that would make sentences ambiguous are rejected") {
  CHECK_THROWS_AS(validate_concept_name("the"), ModelError);
  CHECK_THROWS_AS(validate_concept_name(""), ModelError);
  CHECK_NOTHROW(validate_concept_name("suspect sighting"));
}
