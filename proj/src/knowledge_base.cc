#include "moira/knowledge_base.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "moira/text.h"

namespace moira {

void KnowledgeBase::add_concept(const Concept& concept_name) {
  add_concepts({concept_name});
}

void KnowledgeBase::add_concepts(const std::vector<Concept>& batch) {
  model_.add_concepts(batch);
  for (const auto& c : batch) {
    index_surface(fold(c.name), {ElementKind::kConcept,
                                 model_.find_concept(c.name)
                                     ? model_.find_concept(c.name)->name
                                     : c.name},
                  false);
  }
  ++version_;
}

void KnowledgeBase::add_property(const PropertyDef& property) {
  model_.add_property(property);
  const PropertyDef* stored = model_.find_property(property.key());
  index_surface(fold(stored->name), {ElementKind::kProperty, stored->key()},
                false);
  ++version_;
}

void KnowledgeBase::add_synonym(std::string_view surface,
                                const ElementRef& target) {
  std::string key = surface_key(surface);
  if (key.empty()) throw ModelError("empty synonym surface");
  ElementRef resolved = target;
  switch (target.kind) {
    case ElementKind::kConcept: {
      const Concept* c = model_.find_concept(target.key);
      if (!c) throw ModelError("synonym target concept '" + target.key +
                               "' is not declared");
      resolved.key = c->name;
      break;
    }
    case ElementKind::kProperty: {
      const PropertyDef* p = model_.find_property(target.key);
      if (!p) throw ModelError("synonym target property '" + target.key +
                               "' is not declared");
      resolved.key = p->key();
      break;
    }
    case ElementKind::kInstance: {
      const Instance* i = find_instance(target.key);
      if (!i) throw ModelError("synonym target instance '" + target.key +
                               "' does not exist");
      resolved.key = i->id;
      break;
    }
  }
  Synonym syn{key, resolved};
  if (std::find(synonyms_.begin(), synonyms_.end(), syn) != synonyms_.end())
    return;
  synonyms_.push_back(syn);
  index_surface(key, resolved, true);
  ++version_;
}

void KnowledgeBase::index_surface(const std::string& surface,
                                  ElementRef element, bool via_synonym) {
  std::string key = surface_key(surface);
  if (key.empty()) return;
  auto& entries = lexicon_[key];
  for (const auto& e : entries) {
    if (e.match.element == element) return;
  }
  entries.push_back({{std::move(element), via_synonym}, lex_order_++});
  max_surface_words_ = std::max(max_surface_words_, split_ws(key).size());
}

const Instance& KnowledgeBase::add_instance(const Instance& instance) {
  if (trim(instance.id).empty()) throw ModelError("empty instance id");
  const Concept* c = model_.find_concept(instance.concept_name);
  if (!c) throw ModelError("instance '" + instance.id +
                           "' has undeclared concept '" + instance.concept_name + "'");
  if (const Instance* existing = find_instance(instance.id)) {
    if (fold(existing->concept_name) != fold(instance.concept_name))
      throw ModelError("instance '" + instance.id + "' already exists as a " +
                       existing->concept_name);
    return *existing;
  }
  Instance stored = instance;
  stored.concept_name = c->name;
  instance_index_[fold(stored.id)] = instances_.size();
  instances_.push_back(stored);
  index_surface(fold(stored.id), {ElementKind::kInstance, stored.id}, false);
  if (!stored.label.empty())
    index_surface(fold(stored.label), {ElementKind::kInstance, stored.id}, false);
  note_id(stored.id);
  ++version_;
  return instances_.back();
}

const Instance* KnowledgeBase::find_instance(std::string_view id) const {
  auto it = instance_index_.find(fold(id));
  return it == instance_index_.end() ? nullptr : &instances_[it->second];
}

void KnowledgeBase::set_label(std::string_view id, std::string label) {
  auto it = instance_index_.find(fold(id));
  if (it == instance_index_.end())
    throw ModelError("unknown instance '" + std::string(id) + "'");
  Instance& inst = instances_[it->second];
  if (inst.label == label) return;
  inst.label = std::move(label);
  if (!inst.label.empty())
    index_surface(fold(inst.label), {ElementKind::kInstance, inst.id}, false);
  ++version_;
}

void KnowledgeBase::set_description(std::string_view id,
                                    std::string description) {
  auto it = instance_index_.find(fold(id));
  if (it == instance_index_.end())
    throw ModelError("unknown instance '" + std::string(id) + "'");
  Instance& inst = instances_[it->second];
  if (inst.description == description) return;
  inst.description = std::move(description);
  ++version_;
}

std::vector<const Instance*> KnowledgeBase::instances() const {
  std::vector<const Instance*> out;
  out.reserve(instances_.size());
  for (const auto& i : instances_) out.push_back(&i);
  return out;
}

std::vector<std::string> KnowledgeBase::types_of(std::string_view id) const {
  std::vector<std::string> out;
  const Instance* inst = find_instance(id);
  if (!inst) return out;
  out.push_back(inst->concept_name);
  auto it = facts_by_subject_.find(fold(id));
  if (it == facts_by_subject_.end()) return out;
  for (std::size_t idx : it->second) {
    const Fact& f = facts_[idx];
    if (f.is_type_fact()) {
      bool seen = false;
      for (const auto& t : out) seen = seen || fold(t) == fold(f.object.text);
      if (!seen) out.push_back(f.object.text);
    }
  }
  return out;
}

bool KnowledgeBase::instance_has_type(std::string_view id,
                                      std::string_view concept_name) const {
  for (const auto& t : types_of(id)) {
    if (model_.is_subtype(t, concept_name)) return true;
  }
  return false;
}

std::string KnowledgeBase::id_prefix(std::string_view concept_name) {
  std::string prefix;
  for (const auto& w : split_ws(concept_name)) {
    unsigned char c = static_cast<unsigned char>(w[0]);
    if (std::isalpha(c)) prefix += static_cast<char>(std::tolower(c));
  }
  return prefix.empty() ? "x" : prefix;
}

void KnowledgeBase::note_id(std::string_view id) {
  std::size_t i = 0;
  while (i < id.size() && std::isalpha(static_cast<unsigned char>(id[i]))) ++i;
  if (i == 0 || i == id.size()) return;
  std::size_t digits = i;
  while (digits < id.size() &&
         std::isdigit(static_cast<unsigned char>(id[digits])))
    ++digits;
  if (digits != id.size() || digits - i > 15) return;
  std::string prefix = fold(id.substr(0, i));
  long n = std::stol(std::string(id.substr(i)));
  long& counter = counters_[prefix];
  counter = std::max(counter, n);
}

std::string KnowledgeBase::fresh_id(std::string_view concept_name) {
  std::string prefix = id_prefix(concept_name);
  long& counter = counters_[prefix];
  std::string id;
  do {
    id = prefix + std::to_string(++counter);
  } while (has_instance(id));
  return id;
}

void KnowledgeBase::bump_counter(const std::string& prefix, long value) {
  long& counter = counters_[fold(prefix)];
  counter = std::max(counter, value);
}

const PropertyDef* KnowledgeBase::resolve_property(
    std::string_view subject, std::string_view name) const {
  const PropertyDef* best = nullptr;
  auto types = types_of(subject);
  for (const PropertyDef* p : model_.properties_named(name)) {
    bool covers = false;
    for (const auto& t : types) covers = covers || model_.is_subtype(t, p->domain);
    if (!covers) continue;
    if (!best || (model_.is_subtype(p->domain, best->domain) &&
                  fold(p->domain) != fold(best->domain)))
      best = p;
  }
  return best;
}

std::string KnowledgeBase::triple_key(std::string_view subject,
                                      std::string_view property,
                                      const Term& object) const {
  std::string obj = object.kind == Term::Kind::kLiteral ? object.text
                                                        : fold(object.text);
  return fold(subject) + '\x1f' + fold(property) + '\x1f' +
         std::to_string(static_cast<int>(object.kind)) + '\x1f' + obj;
}

void KnowledgeBase::check_fact(std::string_view subject,
                               std::string_view property, const Term& object,
                               std::string* canonical_property) const {
  const Instance* subj = find_instance(subject);
  if (!subj)
    throw ModelError("fact subject '" + std::string(subject) +
                     "' is not a known instance");
  if (property == kIsA) {
    if (object.kind != Term::Kind::kConcept ||
        !model_.has_concept(object.text))
      throw ModelError("'is a' fact on '" + subj->id +
                       "' must name a declared concept");
    *canonical_property = std::string(kIsA);
    return;
  }
  const PropertyDef* p = model_.find_property(property);
  if (!p)
    throw ModelError("unknown property '" + std::string(property) + "'");
  if (!instance_has_type(subj->id, p->domain))
    throw ModelError("domain violation: property '" + p->key() +
                     "' does not apply to " + subj->id + " (" + subj->concept_name +
                     ")");
  if (p->kind() == PropertyKind::kAttribute) {
    if (object.kind != Term::Kind::kLiteral)
      throw ModelError("range violation: property '" + p->key() +
                       "' takes a literal value");
  } else {
    if (object.kind != Term::Kind::kInstance)
      throw ModelError("range violation: property '" + p->key() +
                       "' takes an instance value");
    const Instance* obj = find_instance(object.text);
    if (!obj)
      throw ModelError("range violation: property '" + p->key() +
                       "' refers to unknown instance '" + object.text + "'");
    if (!instance_has_type(obj->id, p->range))
      throw ModelError("range violation: property '" + p->key() + "' needs a " +
                       p->range + ", got " + obj->id + " (" + obj->concept_name +
                       ")");
  }
  *canonical_property = p->key();
}

KnowledgeBase::AssertOutcome KnowledgeBase::assert_fact(
    std::string_view subject, std::string_view property, const Term& object,
    const Provenance& provenance) {
  std::string canonical;
  check_fact(subject, property, object, &canonical);
  Term obj = object;
  if (obj.kind == Term::Kind::kInstance) obj.text = find_instance(obj.text)->id;
  if (obj.kind == Term::Kind::kConcept)
    obj.text = model_.find_concept(obj.text)->name;
  std::string subj = find_instance(subject)->id;
  std::string key = triple_key(subj, canonical, obj);
  if (auto it = triple_index_.find(key); it != triple_index_.end())
    return {facts_[it->second].id, false};
  if (const auto* inferred = std::get_if<Inferred>(&provenance)) {
    for (const auto& premise : inferred->premises) {
      if (!find_fact(premise))
        throw ModelError("inferred fact cites unknown premise '" + premise + "'");
    }
  }
  std::string id;
  do {
    id = "f" + std::to_string(++fact_counter_);
  } while (fact_index_.count(id));
  restore_fact(Fact{id, subj, canonical, obj, provenance});
  return {id, true};
}

void KnowledgeBase::restore_fact(const Fact& fact) {
  if (fact_index_.count(fact.id))
    throw ModelError("duplicate fact id '" + fact.id + "'");
  std::string canonical;
  check_fact(fact.subject, fact.property, fact.object, &canonical);
  std::string key = triple_key(fact.subject, canonical, fact.object);
  if (triple_index_.count(key))
    throw ModelError("duplicate fact for '" + fact.subject + "'");
  Fact stored = fact;
  stored.property = canonical;
  std::size_t idx = facts_.size();
  facts_.push_back(std::move(stored));
  fact_index_[fact.id] = idx;
  triple_index_[key] = idx;
  facts_by_subject_[fold(fact.subject)].push_back(idx);
  if (fact.id.size() > 1 && fact.id[0] == 'f') {
    bool digits = std::all_of(fact.id.begin() + 1, fact.id.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
    if (digits && fact.id.size() < 17)
      fact_counter_ = std::max(fact_counter_, std::stol(fact.id.substr(1)));
  }
  ++version_;
}

bool KnowledgeBase::matches(const Fact& fact, const FactPattern& pattern) const {
  if (pattern.subject && fold(*pattern.subject) != fold(fact.subject))
    return false;
  if (pattern.property) {
    std::string want = fold(*pattern.property);
    bool ok = fold(fact.property) == want;
    if (!ok && !fact.is_type_fact()) {
      const PropertyDef* p = model_.find_property(fact.property);
      ok = p && fold(p->name) == want;
    }
    if (!ok) return false;
  }
  if (pattern.object) {
    bool ok = fact.object.kind == Term::Kind::kLiteral
                  ? fact.object.text == *pattern.object
                  : fold(fact.object.text) == fold(*pattern.object);
    if (!ok) return false;
  }
  if (pattern.subject_concept &&
      !instance_has_type(fact.subject, *pattern.subject_concept))
    return false;
  return true;
}

std::vector<Fact> KnowledgeBase::query(const FactPattern& pattern) const {
  std::vector<Fact> out;
  if (pattern.subject) {
    auto it = facts_by_subject_.find(fold(*pattern.subject));
    if (it == facts_by_subject_.end()) return out;
    for (std::size_t idx : it->second) {
      if (matches(facts_[idx], pattern)) out.push_back(facts_[idx]);
    }
    return out;
  }
  for (const auto& f : facts_) {
    if (matches(f, pattern)) out.push_back(f);
  }
  return out;
}

const Fact* KnowledgeBase::find_fact(std::string_view id) const {
  auto it = fact_index_.find(std::string(id));
  return it == fact_index_.end() ? nullptr : &facts_[it->second];
}

const Fact* KnowledgeBase::find_triple(std::string_view subject,
                                       std::string_view property,
                                       const Term& object) const {
  auto it = triple_index_.find(triple_key(subject, property, object));
  return it == triple_index_.end() ? nullptr : &facts_[it->second];
}

std::vector<LexMatch> KnowledgeBase::lookup_surface(
    const std::vector<std::string>& words) const {
  std::vector<LexMatch> out;
  auto it = lexicon_.find(surface_key(words));
  if (it == lexicon_.end()) return out;
  std::vector<LexEntry> entries = it->second;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const LexEntry& a, const LexEntry& b) {
                     if (a.match.element.kind != b.match.element.kind)
                       return a.match.element.kind < b.match.element.kind;
                     return a.order < b.order;
                   });
  for (auto& e : entries) out.push_back(std::move(e.match));
  return out;
}

bool KnowledgeBase::equivalent(const KnowledgeBase& other) const {
  if (!(model_ == other.model_)) return false;
  std::set<std::pair<std::string, ElementRef>> a, b;
  for (const auto& s : synonyms_) a.insert({s.surface, s.target});
  for (const auto& s : other.synonyms_) b.insert({s.surface, s.target});
  if (a != b) return false;
  if (instances_ != other.instances_) return false;
  if (facts_.size() != other.facts_.size()) return false;
  for (const auto& f : facts_) {
    const Fact* g = other.find_fact(f.id);
    if (!g || !(*g == f)) return false;
  }
  auto nonzero = [](const std::map<std::string, long>& m) {
    std::map<std::string, long> out;
    for (const auto& [k, v] : m) {
      if (v) out[k] = v;
    }
    return out;
  };
  return nonzero(counters_) == nonzero(other.counters_);
}

}  // namespace moira
