#include "moira/model.h"

#include <algorithm>
#include <set>

#include "moira/text.h"

namespace moira {
namespace {

const std::set<std::string, std::less<>> kReservedConceptWords = {
    "a",    "an",   "and",     "as",    "because", "has",
    "is",   "named", "that",   "the",   "there",   "this"};

bool has_bad_chars(std::string_view s) {
  return s.find_first_of("'`~.\"") != std::string_view::npos;
}

}  // namespace

PropertyKind PropertyDef::kind() const {
  return fold(range) == kLiteralRange ? PropertyKind::kAttribute
                                      : PropertyKind::kRelation;
}

std::string PropertyDef::key() const {
  return domain + ":" + name + ":" + range;
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::kInstance: return "instance";
    case ElementKind::kProperty: return "property";
    case ElementKind::kConcept: return "concept";
  }
  return "?";
}

void validate_concept_name(std::string_view name) {
  auto words = split_ws(name);
  if (words.empty()) throw ModelError("empty concept name");
  if (has_bad_chars(name))
    throw ModelError("concept name '" + std::string(name) +
                     "' contains quote, tilde or period");
  for (const auto& w : words) {
    if (kReservedConceptWords.count(fold(w)))
      throw ModelError("concept name '" + std::string(name) +
                       "' contains reserved word '" + w + "'");
  }
}

void validate_property_name(std::string_view name, PropertyForm form) {
  auto words = split_ws(name);
  if (words.empty()) throw ModelError("empty property name");
  if (has_bad_chars(name))
    throw ModelError("property name '" + std::string(name) +
                     "' contains quote, tilde or period");
  for (const auto& w : words) {
    std::string f = fold(w);
    if (f == "and" || (form == PropertyForm::kVerb && f == "the"))
      throw ModelError("property name '" + std::string(name) +
                       "' contains reserved word '" + w + "'");
  }
  if (form == PropertyForm::kVerb) {
    std::string first = fold(words[0]);
    std::string second = words.size() > 1 ? fold(words[1]) : "";
    if (first == "has" || first == "there" || first == "this" ||
        (first == "is" && (second == "a" || second == "an")) ||
        (first == "is" && second == "known"))
      throw ModelError("verb property '" + std::string(name) +
                       "' collides with a built-in clause form");
  }
}

Model::Model() = default;

void Model::add_concept(const Concept& concept_name) { add_concepts({concept_name}); }

void Model::add_concepts(const std::vector<Concept>& batch) {
  Model staged = *this;
  for (const auto& c : batch) {
    validate_concept_name(c.name);
    std::string key = fold(c.name);
    if (key == kRootConcept && c.parents.empty()) continue;
    auto it = staged.concept_index_.find(key);
    if (it != staged.concept_index_.end()) {
      Concept& existing = staged.concepts_[it->second];
      if (c.parents.empty()) continue;
      std::set<std::string> a, b;
      for (const auto& p : existing.parents) a.insert(fold(p));
      for (const auto& p : c.parents) b.insert(fold(p));
      if (existing.parents.empty()) {
        existing.parents = c.parents;
      } else if (a != b) {
        throw ModelError("concept '" + c.name +
                         "' redeclared with conflicting parents");
      }
      continue;
    }
    staged.concept_index_[key] = staged.concepts_.size();
    staged.concepts_.push_back(c);
  }
  // Every parent must resolve once the whole batch is in.
  for (const auto& c : staged.concepts_) {
    for (const auto& p : c.parents) {
      if (fold(p) != kRootConcept && !staged.concept_index_.count(fold(p)))
        throw ModelError("concept '" + c.name + "' has undeclared parent '" +
                         p + "'");
    }
  }
  // Acyclicity: DFS with colours over the parent graph.
  std::map<std::string, int> colour;
  std::vector<std::pair<std::string, std::size_t>> stack;
  for (const auto& c : staged.concepts_) {
    std::string start = fold(c.name);
    if (colour[start] != 0) continue;
    stack.push_back({start, 0});
    colour[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const Concept& cur = staged.concepts_[staged.concept_index_.at(node)];
      if (next < cur.parents.size()) {
        std::string parent = fold(cur.parents[next++]);
        if (parent == kRootConcept) continue;
        if (colour[parent] == 1)
          throw ModelError("cycle in concept hierarchy through '" +
                           cur.name + "'");
        if (colour[parent] == 0) {
          colour[parent] = 1;
          stack.push_back({parent, 0});
        }
      } else {
        colour[node] = 2;
        stack.pop_back();
      }
    }
  }
  *this = std::move(staged);
}

void Model::add_property(const PropertyDef& property) {
  validate_property_name(property.name, property.form);
  if (!has_concept(property.domain) && fold(property.domain) != kRootConcept)
    throw ModelError("property '" + property.key() +
                     "' has undeclared domain '" + property.domain + "'");
  if (property.kind() == PropertyKind::kRelation &&
      !has_concept(property.range) && fold(property.range) != kRootConcept)
    throw ModelError("property '" + property.key() +
                     "' has undeclared range '" + property.range + "'");
  std::string key = fold(property.key());
  auto it = property_index_.find(key);
  if (it != property_index_.end()) {
    if (properties_[it->second].form != property.form)
      throw ModelError("property '" + property.key() +
                       "' redeclared with a different form");
    return;
  }
  property_index_[key] = properties_.size();
  properties_.push_back(property);
}

const Concept* Model::find_concept(std::string_view name) const {
  auto it = concept_index_.find(fold(name));
  return it == concept_index_.end() ? nullptr : &concepts_[it->second];
}

std::vector<std::string> Model::ancestors(std::string_view name) const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::vector<std::string> todo{fold(name)};
  while (!todo.empty()) {
    std::string cur = todo.back();
    todo.pop_back();
    if (!seen.insert(cur).second) continue;
    const Concept* c = find_concept(cur);
    out.push_back(c ? c->name : cur);
    if (c) {
      for (const auto& p : c->parents) todo.push_back(fold(p));
    }
  }
  if (!seen.count(std::string(kRootConcept))) out.emplace_back(kRootConcept);
  return out;
}

bool Model::is_subtype(std::string_view sub, std::string_view super) const {
  std::string target = fold(super);
  if (target == kRootConcept) return true;
  std::string start = fold(sub);
  if (start == target) return true;
  std::set<std::string> seen;
  std::vector<std::string> todo{start};
  while (!todo.empty()) {
    std::string cur = todo.back();
    todo.pop_back();
    if (cur == target) return true;
    if (!seen.insert(cur).second) continue;
    if (const Concept* c = find_concept(cur)) {
      for (const auto& p : c->parents) todo.push_back(fold(p));
    }
  }
  return false;
}

const PropertyDef* Model::find_property(std::string_view key) const {
  auto it = property_index_.find(fold(key));
  return it == property_index_.end() ? nullptr : &properties_[it->second];
}

std::vector<const PropertyDef*> Model::properties_named(
    std::string_view name) const {
  std::vector<const PropertyDef*> out;
  std::string key = fold(name);
  for (const auto& p : properties_) {
    if (fold(p.name) == key) out.push_back(&p);
  }
  return out;
}

std::size_t Model::property_rank(std::string_view key) const {
  auto it = property_index_.find(fold(key));
  return it == property_index_.end() ? properties_.size() : it->second;
}

}  // namespace moira
