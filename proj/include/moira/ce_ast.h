#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "moira/model.h"

namespace moira {

// "the colour black"
struct InstanceRef {
  std::string concept_name;
  std::string id;

  bool operator==(const InstanceRef&) const = default;
};

struct Literal {
  std::string text;

  bool operator==(const Literal&) const = default;
};

using Value = std::variant<Literal, InstanceRef>;

// "has DEF456 as registration" (kHasAs) or
// "is married to the person p2" (kVerb).
struct PropertyClause {
  std::string property;
  Value value;
  PropertyForm form = PropertyForm::kHasAs;

  bool operator==(const PropertyClause&) const = default;
};

struct IsA {
  std::string concept_name;

  bool operator==(const IsA&) const = default;
};

struct KnownAs {
  std::string label;

  bool operator==(const KnownAs&) const = default;
};

using Clause = std::variant<PropertyClause, IsA, KnownAs>;

// "there is a vehicle named v48 that ..."
struct NewInstance {
  std::string concept_name;
  std::string id;
  std::vector<Clause> clauses;

  bool operator==(const NewInstance&) const = default;
};

// "the person p1 has DEF456 as linked vehicle registration"
struct InstanceFacts {
  std::string concept_name;
  std::string id;
  std::vector<Clause> clauses;

  bool operator==(const InstanceFacts&) const = default;
};

// Trailing "this was reported by 'source' at 'time'" of a because-statement.
struct ReportedBy {
  std::string source;
  std::string timestamp;

  bool operator==(const ReportedBy&) const = default;
};

struct CeStatement;

struct Because {
  std::vector<CeStatement> premises;
  std::optional<ReportedBy> reported;

  bool operator==(const Because&) const;
};

struct CeStatement {
  std::variant<NewInstance, InstanceFacts, Because> body;

  bool operator==(const CeStatement&) const = default;
};

inline bool Because::operator==(const Because& other) const {
  return premises == other.premises && reported == other.reported;
}

// Model declarations.
struct PropertyDecl {
  std::string name;
  std::string range;  // concept name or "value"

  bool operator==(const PropertyDecl&) const = default;
};

// "conceptualise a ~ vehicle ~ V that is a X and has the colour C as ~ colour ~"
struct Conceptualise {
  std::string name;
  std::vector<std::string> parents;
  std::vector<PropertyDecl> properties;

  bool operator==(const Conceptualise&) const = default;
};

// "conceptualise the person P ~ is married to ~ the person Q"
struct RelationDecl {
  std::string domain;
  std::string name;
  std::string range;

  bool operator==(const RelationDecl&) const = default;
};

// "the entity concept 'vehicle' is expressed by the value 'car' and ..."
struct SynonymDecl {
  ElementKind target_kind = ElementKind::kConcept;
  std::string target;
  std::vector<std::string> surfaces;

  bool operator==(const SynonymDecl&) const = default;
};

// "there is a colour named red."
struct StaticInstance {
  std::string concept_name;
  std::string id;

  bool operator==(const StaticInstance&) const = default;
};

using CeModelDecl =
    std::variant<Conceptualise, RelationDecl, SynonymDecl, StaticInstance>;

// Head (concept, id) of a NewInstance/InstanceFacts statement; nullopt for
// Because.
struct StatementHead {
  std::string concept_name;
  std::string id;
};
std::optional<StatementHead> head_of(const CeStatement& statement);
const std::vector<Clause>* clauses_of(const CeStatement& statement);

}  // namespace moira
