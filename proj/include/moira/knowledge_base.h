#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "moira/model.h"

namespace moira {

// Reserved property key for type assertions ("p1 is a suspect").
inline constexpr std::string_view kIsA = "is a";

struct Instance {
  std::string id;
  std::string concept_name;
  std::string label;        // "is known as"
  std::string description;  // verbatim NL text the instance came from

  bool operator==(const Instance&) const = default;
};

struct Told {
  std::string source;
  std::string conversation;
  std::string timestamp;

  bool operator==(const Told&) const = default;
};

struct Inferred {
  std::string rule;
  std::vector<std::string> premises;  // fact ids

  bool operator==(const Inferred&) const = default;
};

using Provenance = std::variant<Told, Inferred>;

struct Term {
  enum class Kind { kInstance, kLiteral, kConcept };
  Kind kind = Kind::kLiteral;
  std::string text;

  static Term instance(std::string id) { return {Kind::kInstance, std::move(id)}; }
  static Term literal(std::string text) { return {Kind::kLiteral, std::move(text)}; }
  static Term of_concept(std::string name) { return {Kind::kConcept, std::move(name)}; }

  bool operator==(const Term&) const = default;
};

struct Fact {
  std::string id;
  std::string subject;
  std::string property;  // PropertyDef::key() or kIsA
  Term object;
  Provenance provenance;

  bool is_type_fact() const { return property == kIsA; }
  bool is_inferred() const {
    return std::holds_alternative<Inferred>(provenance);
  }

  bool operator==(const Fact&) const = default;
};

// Unset fields are wildcards. `property` matches a property key or a
// bare property name; `subject_concept` matches up to subtype.
struct FactPattern {
  std::optional<std::string> subject;
  std::optional<std::string> property;
  std::optional<std::string> object;
  std::optional<std::string> subject_concept;
};

struct LexMatch {
  ElementRef element;
  bool via_synonym = false;
};

// Model + instances + facts with provenance. Not internally locked: callers
// serialise writers (see agent-service), reads may run concurrently between
// mutations.
class KnowledgeBase {
 public:
  struct AssertOutcome {
    std::string fact_id;
    bool inserted = false;
  };

  const Model& model() const { return model_; }

  void add_concept(const Concept& concept_name);
  void add_concepts(const std::vector<Concept>& batch);
  void add_property(const PropertyDef& property);
  // Target must already resolve.
  void add_synonym(std::string_view surface, const ElementRef& target);
  const std::vector<Synonym>& synonyms() const { return synonyms_; }

  // Idempotent for an identical id/concept; throws on a conflicting concept.
  const Instance& add_instance(const Instance& instance);
  const Instance* find_instance(std::string_view id) const;
  bool has_instance(std::string_view id) const {
    return find_instance(id) != nullptr;
  }
  void set_label(std::string_view id, std::string label);
  void set_description(std::string_view id, std::string description);
  // Declaration order.
  std::vector<const Instance*> instances() const;

  // Primary concept followed by concepts asserted through "is a" facts.
  std::vector<std::string> types_of(std::string_view id) const;
  bool instance_has_type(std::string_view id, std::string_view concept_name) const;

  // Initials of the concept's words, lower case: person -> p,
  // suspect sighting -> ss.
  static std::string id_prefix(std::string_view concept_name);
  std::string fresh_id(std::string_view concept_name);
  void bump_counter(const std::string& prefix, long value);
  const std::map<std::string, long>& counters() const { return counters_; }

  // Property resolution for a subject: the named property whose domain
  // covers one of the subject's types; the most specific domain wins.
  const PropertyDef* resolve_property(std::string_view subject,
                                      std::string_view name) const;

  AssertOutcome assert_fact(std::string_view subject, std::string_view property,
                            const Term& object, const Provenance& provenance);
  // Inserts a fact with a fixed id (restore path). Same checks as assert_fact.
  void restore_fact(const Fact& fact);

  std::vector<Fact> query(const FactPattern& pattern) const;
  bool matches(const Fact& fact, const FactPattern& pattern) const;
  const Fact* find_fact(std::string_view id) const;
  const Fact* find_triple(std::string_view subject, std::string_view property,
                          const Term& object) const;
  const std::vector<Fact>& facts() const { return facts_; }
  long fact_counter() const { return fact_counter_; }

  // Every model element whose name, label or synonym equals the folded
  // word sequence, ordered instance > property > concept, then declaration
  // order.
  std::vector<LexMatch> lookup_surface(const std::vector<std::string>& words) const;
  std::size_t max_surface_words() const { return max_surface_words_; }

  // Bumped on every content change (model, instances, facts). Id
  // reservations do not count.
  std::uint64_t version() const { return version_; }

  // Equal model, synonyms, instances, facts (ids and provenance included)
  // and counters.
  bool equivalent(const KnowledgeBase& other) const;

 private:
  struct LexEntry {
    LexMatch match;
    std::size_t order = 0;
  };

  void index_surface(const std::string& surface, ElementRef element,
                     bool via_synonym);
  void check_fact(std::string_view subject, std::string_view property,
                  const Term& object, std::string* canonical_property) const;
  std::string triple_key(std::string_view subject, std::string_view property,
                         const Term& object) const;
  void note_id(std::string_view id);

  Model model_;
  std::vector<Synonym> synonyms_;
  std::vector<Instance> instances_;
  std::map<std::string, std::size_t> instance_index_;
  std::vector<Fact> facts_;
  std::map<std::string, std::size_t> fact_index_;
  std::map<std::string, std::size_t> triple_index_;
  std::map<std::string, std::vector<std::size_t>> facts_by_subject_;
  std::map<std::string, long> counters_;
  long fact_counter_ = 0;
  std::map<std::string, std::vector<LexEntry>> lexicon_;
  std::size_t lex_order_ = 0;
  std::size_t max_surface_words_ = 0;
  std::uint64_t version_ = 0;
};

}  // namespace moira
