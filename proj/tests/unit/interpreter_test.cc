#include <doctest.h>

#include <algorithm>

#include "fixtures.h"
#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/interpreter.h"
#include "moira/protocol.h"
#include "moira/text.h"

using namespace moira;
using namespace moira::testing;

namespace {
InterpreterOptions hidden() {
  InterpreterOptions o;
  o.excluded_concepts = ProtocolConfig{}.excluded_concepts;
  return o;
}

std::vector<std::string> unmatched(const Interpretation& in) {
  std::vector<std::string> out;
  for (const auto& w : in.unmatched_words) out.push_back(w.text);
  return out;
}
}  // namespace

TEST_CASE("tokenizer: phrases, sentences, clauses, words") {
  auto t = tokenize("A car, going north; fast. Then: stop!\n\nSecond block 3.5 km");
  CHECK(t.phrase_count() == 2);
  CHECK(t.sentence_count() == 3);
  CHECK(t.clause_count() == 6);
  CHECK(t.word_count() == 11);
  auto s = t.sentences();
  CHECK(s[0]->clauses[0].words[1].text == "car");
  CHECK(s[2]->clauses[0].words[2].text == "3.5");
}

TEST_CASE("tokenizer: a colon ends a clause only before whitespace") {
  auto t = tokenize("time 10:15 now: go");
  CHECK(t.clause_count() == 2);
  CHECK(t.sentences()[0]->clauses[0].words[1].text == "10:15");
}

TEST_CASE("tokenizer: empty and whitespace-only input") {
  CHECK(tokenize("").sentence_count() == 0);
  CHECK(tokenize(" \n\n\t ").word_count() == 0);
  CHECK(tokenize("...").word_count() == 0);
}

TEST_CASE("scan prefers the longest match") {
  KnowledgeBase kb = model_kb();
  auto t = tokenize("the license plate and the sports car");
  auto spans = scan(t.sentences()[0]->clauses[0], kb, {});
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].surface == "license plate");
  CHECK(spans[0].element.key == "vehicle:registration:value");
  CHECK(spans[1].surface == "sports car");
  CHECK(spans[1].via_synonym);
}

TEST_CASE("scan honours the lookahead limit") {
  KnowledgeBase kb = model_kb();
  auto t = tokenize("vehicle body type");
  InterpreterOptions o;
  o.max_lookahead = 2;
  auto spans = scan(t.sentences()[0]->clauses[0], kb, o);
  REQUIRE_FALSE(spans.empty());
  CHECK(spans[0].length <= 2);
}

TEST_CASE("spot report yields the confirmed listing") {
  KnowledgeBase kb = full_kb();
  kb.bump_counter("v", 47);
  auto in = interpret(kSpotReport, kb, hidden());
  CHECK(render_statements(in.statements, RenderStyle::kMultiLine) ==
        "there is a vehicle named v48 that\n"
        " has DEF456 as registration and\n"
        " has the colour black as colour and\n"
        " has the vehicle body type saloon as body type and\n"
        " is a moving thing.\n"
        "there is a moving thing named v48 that\n"
        " has the direction south as direction of travel.");
  CHECK(in.score == 6);
  CHECK(unmatched(in) == std::vector<std::string>{"Suspicious", "with", "DEF456"});
  REQUIRE(in.new_instances.size() == 1);
  CHECK(in.new_instances[0].id == "v48");
}

TEST_CASE("gibberish scores zero with every word unmatched") {
  KnowledgeBase kb = model_kb();
  auto in = interpret("zzqx wvvt", kb, hidden());
  CHECK(in.score == 0);
  CHECK(in.statements.empty());
  CHECK(unmatched(in) == std::vector<std::string>{"zzqx", "wvvt"});
}

TEST_CASE("interpretation leaves the KB content untouched") {
  KnowledgeBase kb = full_kb();
  auto before = kb.version();
  interpret("red car heading north on North Road", kb, hidden());
  CHECK(kb.version() == before);
}

TEST_CASE("interpretation is deterministic for fixed counters") {
  KnowledgeBase a = full_kb(), b = full_kb();
  const char* text = "white van going west near South Road, driver is a man";
  auto x = interpret(text, a, hidden());
  auto y = interpret(text, b, hidden());
  CHECK(x.statements == y.statements);
  CHECK(x.score == y.score);
}

TEST_CASE("excluded concepts are invisible") {
  KnowledgeBase kb = full_kb();
  auto shown = interpret("car", kb, {});
  auto hid = interpret("car", kb, hidden());
  // "car" also names the detectable thing car.
  auto alternatives = [](const Interpretation& in) {
    auto& sp = in.spans.front();
    std::vector<ElementRef> all{sp.element};
    all.insert(all.end(), sp.alternatives.begin(), sp.alternatives.end());
    return all;
  };
  ElementRef detectable{ElementKind::kInstance, "car"};
  auto a = alternatives(shown), b = alternatives(hid);
  CHECK(std::find(a.begin(), a.end(), detectable) != a.end());
  CHECK(std::find(b.begin(), b.end(), detectable) == b.end());
  CHECK(hid.spans.front().element == ElementRef{ElementKind::kConcept, "vehicle"});
}

TEST_CASE("emitted statements always type-check") {
  KnowledgeBase kb = full_kb();
  for (const auto& line : lines_of(data_dir() / "corpus/scenes.txt")) {
    auto in = interpret(line, kb, hidden());
    CHECK_NOTHROW(validate_statements(kb, in.statements));
  }
}

TEST_CASE("repeated mentions each score") {
  KnowledgeBase kb = model_kb();
  auto in = interpret("red car. red car.", kb, hidden());
  CHECK(in.score == 4);
  CHECK(in.statements.size() == 2);
}

TEST_CASE("a property named apart from its value still scores") {
  KnowledgeBase kb = model_kb();
  auto in = interpret("car with red colour", kb, hidden());
  CHECK(in.score == 3);
  auto in2 = interpret("colour of the car is red", kb, hidden());
  CHECK(in2.score == 3);
}

TEST_CASE("adding synonyms never lowers a corpus score") {
  KnowledgeBase base = full_kb();
  KnowledgeBase richer = full_kb();
  richer.add_synonym("lorry", {ElementKind::kConcept, "vehicle"});
  richer.add_synonym("towards", {ElementKind::kProperty, "moving thing:direction of travel:direction"});
  richer.add_synonym("reg", {ElementKind::kProperty, "vehicle:registration:value"});
  richer.add_synonym("suspicious", {ElementKind::kConcept, "suspect"});
  for (const auto& line : lines_of(data_dir() / "corpus/scenes.txt")) {
    KnowledgeBase a = base, b = richer;
    CHECK_MESSAGE(interpret(line, b, hidden()).score >= interpret(line, a, hidden()).score, line);
  }
}
