#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace moira {

// Range marker for literal-valued properties ("has the value R as ~ x ~").
inline constexpr std::string_view kLiteralRange = "value";

// Implicit root: every declared concept is a subtype of it.
inline constexpr std::string_view kRootConcept = "thing";

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Concept {
  std::string name;
  std::vector<std::string> parents;
  bool is_entity = true;

  bool operator==(const Concept&) const = default;
};

// How a property surfaces in CE text: "has V as name" or "name V".
enum class PropertyForm { kHasAs, kVerb };

enum class PropertyKind { kAttribute, kRelation };

struct PropertyDef {
  std::string domain;
  std::string name;
  std::string range;
  PropertyForm form = PropertyForm::kHasAs;

  PropertyKind kind() const;
  // domain:name:range, in declared case.
  std::string key() const;

  bool operator==(const PropertyDef&) const = default;
};

// Ordering doubles as the interpreter's tie-break: instance > property > concept.
enum class ElementKind { kInstance = 0, kProperty = 1, kConcept = 2 };

std::string_view to_string(ElementKind kind);

struct ElementRef {
  ElementKind kind = ElementKind::kConcept;
  std::string key;

  auto operator<=>(const ElementRef&) const = default;
};

struct Synonym {
  std::string surface;
  ElementRef target;

  bool operator==(const Synonym&) const = default;
};

// Concept hierarchy and property definitions. Names are matched
// case-insensitively and stored as declared.
class Model {
 public:
  Model();

  void add_concept(const Concept& concept_name);
  // Parents may refer to concepts declared later in the same batch. The
  // batch is applied atomically.
  void add_concepts(const std::vector<Concept>& batch);
  void add_property(const PropertyDef& property);

  const Concept* find_concept(std::string_view name) const;
  bool has_concept(std::string_view name) const {
    return find_concept(name) != nullptr;
  }
  // Reflexive, transitive. Everything is a subtype of the root concept.
  bool is_subtype(std::string_view sub, std::string_view super) const;
  std::vector<std::string> ancestors(std::string_view name) const;

  const PropertyDef* find_property(std::string_view key) const;
  std::vector<const PropertyDef*> properties_named(std::string_view name) const;
  // Position in declaration order; used to order clauses canonically.
  std::size_t property_rank(std::string_view key) const;

  const std::vector<Concept>& concepts() const { return concepts_; }
  const std::vector<PropertyDef>& properties() const { return properties_; }

  bool operator==(const Model& other) const {
    return concepts_ == other.concepts_ && properties_ == other.properties_;
  }

 private:
  std::vector<Concept> concepts_;
  std::map<std::string, std::size_t> concept_index_;
  std::vector<PropertyDef> properties_;
  std::map<std::string, std::size_t> property_index_;
};

// Rejects names that would make CE sentences ambiguous.
void validate_concept_name(std::string_view name);
void validate_property_name(std::string_view name, PropertyForm form);

}  // namespace moira
