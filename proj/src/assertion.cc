#include "moira/assertion.h"

#include <map>

#include "moira/text.h"

namespace moira {
namespace {

bool is_description(const PropertyClause& clause) {
  return clause.form == PropertyForm::kHasAs &&
         fold(clause.property) == kDescriptionProperty &&
         std::holds_alternative<Literal>(clause.value);
}

// Creates the instance or re-types it; returns the stored id.
std::string ensure_instance(KnowledgeBase& kb, const std::string& concept_name,
                            const std::string& id, const Provenance& provenance,
                            AssertReport& report) {
  if (!kb.model().has_concept(concept_name))
    throw ModelError("unknown concept '" + concept_name + "'");
  if (const Instance* existing = kb.find_instance(id)) {
    if (!kb.instance_has_type(existing->id, concept_name)) {
      auto out = kb.assert_fact(existing->id, kIsA, Term::of_concept(concept_name),
                                provenance);
      if (out.inserted) report.new_fact_ids.push_back(out.fact_id);
    }
    return existing->id;
  }
  kb.add_instance(Instance{id, concept_name, "", ""});
  report.new_instance_ids.push_back(id);
  return id;
}

void assert_clause(KnowledgeBase& kb, const std::string& subject,
                   const Clause& clause, const Provenance& provenance,
                   AssertReport& report) {
  if (const auto* known = std::get_if<KnownAs>(&clause)) {
    kb.set_label(subject, known->label);
    return;
  }
  if (const auto* isa = std::get_if<IsA>(&clause)) {
    if (!kb.model().has_concept(isa->concept_name))
      throw ModelError("unknown concept '" + isa->concept_name + "'");
    auto out = kb.assert_fact(subject, kIsA, Term::of_concept(isa->concept_name),
                              provenance);
    if (out.inserted) report.new_fact_ids.push_back(out.fact_id);
    return;
  }
  const auto& pc = std::get<PropertyClause>(clause);
  if (is_description(pc)) {
    kb.set_description(subject, std::get<Literal>(pc.value).text);
    return;
  }
  const PropertyDef* p = kb.resolve_property(subject, pc.property);
  if (!p) {
    const Instance* inst = kb.find_instance(subject);
    throw ModelError("no property '" + pc.property + "' applies to " +
                     subject + " (" + (inst ? inst->concept_name : "?") + ")");
  }
  Term object;
  if (const auto* ref = std::get_if<InstanceRef>(&pc.value)) {
    if (p->kind() == PropertyKind::kAttribute)
      throw ModelError("range violation: property '" + p->key() +
                       "' takes a literal value");
    object = Term::instance(
        ensure_instance(kb, ref->concept_name, ref->id, provenance, report));
  } else {
    const auto& lit = std::get<Literal>(pc.value);
    object = p->kind() == PropertyKind::kAttribute ? Term::literal(lit.text)
                                                   : Term::instance(lit.text);
  }
  auto out = kb.assert_fact(subject, p->key(), object, provenance);
  if (out.inserted) report.new_fact_ids.push_back(out.fact_id);
}

void assert_into(KnowledgeBase& kb, std::span<const CeStatement> statements,
                 const Provenance& provenance, AssertReport& report) {
  std::vector<std::string> subjects;
  for (const auto& s : statements) {
    auto head = head_of(s);
    if (!head) throw ModelError("because-statements cannot be asserted");
    subjects.push_back(
        ensure_instance(kb, head->concept_name, head->id, provenance, report));
  }
  for (std::size_t i = 0; i < statements.size(); ++i) {
    for (const auto& clause : *clauses_of(statements[i]))
      assert_clause(kb, subjects[i], clause, provenance, report);
  }
}

std::string concept_name(const KnowledgeBase& kb, const std::string& name) {
  const Concept* c = kb.model().find_concept(name);
  return c ? c->name : name;
}

}  // namespace

AssertReport assert_statements(KnowledgeBase& kb,
                               std::span<const CeStatement> statements,
                               const Provenance& provenance) {
  KnowledgeBase staged = kb;
  AssertReport report;
  assert_into(staged, statements, provenance, report);
  kb = std::move(staged);
  return report;
}

void validate_statements(const KnowledgeBase& kb,
                         std::span<const CeStatement> statements) {
  KnowledgeBase staged = kb;
  AssertReport report;
  assert_into(staged, statements, Told{"validation", "", ""}, report);
}

void apply_decl(KnowledgeBase& kb, const CeModelDecl& decl) {
  if (const auto* c = std::get_if<Conceptualise>(&decl)) {
    kb.add_concept(Concept{c->name, c->parents, true});
    for (const auto& p : c->properties) {
      std::string range =
          fold(p.range) == kLiteralRange ? std::string(kLiteralRange) : p.range;
      kb.add_property(PropertyDef{concept_name(kb, c->name), p.name,
                                  concept_name(kb, range),
                                  PropertyForm::kHasAs});
    }
  } else if (const auto* r = std::get_if<RelationDecl>(&decl)) {
    kb.add_property(PropertyDef{concept_name(kb, r->domain), r->name,
                                concept_name(kb, r->range),
                                PropertyForm::kVerb});
  } else if (const auto* s = std::get_if<SynonymDecl>(&decl)) {
    for (const auto& surface : s->surfaces)
      kb.add_synonym(surface, ElementRef{s->target_kind, s->target});
  } else {
    const auto& i = std::get<StaticInstance>(decl);
    kb.add_instance(Instance{i.id, i.concept_name, "", ""});
  }
}

ParseOptions parse_options(const KnowledgeBase& kb) {
  return ParseOptions{&kb.model()};
}

AssertReport load_ce(KnowledgeBase& kb, std::string_view text,
                     const Provenance& provenance) {
  KnowledgeBase staged = kb;
  auto raws = split_sentences(text);
  std::vector<std::pair<CeModelDecl, SourceLocation>> decls;
  std::vector<const RawSentence*> statements;
  for (const auto& raw : raws) {
    if (is_model_decl(raw))
      decls.push_back({std::get<CeModelDecl>(parse_sentence(raw)), raw.start});
    else
      statements.push_back(&raw);
  }
  auto located = [](SourceLocation where, const std::exception& e) {
    return ModelError(std::to_string(where.line) + ":" +
                      std::to_string(where.column) + ": " + e.what());
  };
  // Concepts first (forward parent references), then properties, then
  // instances and facts, then synonyms (which may target instances).
  std::vector<Concept> batch;
  for (const auto& [d, where] : decls) {
    if (const auto* c = std::get_if<Conceptualise>(&d))
      batch.push_back(Concept{c->name, c->parents, true});
  }
  try {
    staged.add_concepts(batch);
  } catch (const ModelError& e) {
    throw located(decls.empty() ? SourceLocation{} : decls.front().second, e);
  }
  for (const auto& [d, where] : decls) {
    if (std::holds_alternative<SynonymDecl>(d)) continue;
    try {
      apply_decl(staged, d);
    } catch (const ModelError& e) {
      throw located(where, e);
    }
  }
  AssertReport report;
  ParseOptions options = parse_options(staged);
  for (const RawSentence* raw : statements) {
    try {
      CeStatement stmt = parse_statement(*raw, options);
      assert_into(staged, std::span<const CeStatement>(&stmt, 1), provenance,
                  report);
    } catch (const ModelError& e) {
      throw located(raw->start, e);
    }
  }
  for (const auto& [d, where] : decls) {
    if (!std::holds_alternative<SynonymDecl>(d)) continue;
    try {
      apply_decl(staged, d);
    } catch (const ModelError& e) {
      throw located(where, e);
    }
  }
  kb = std::move(staged);
  return report;
}

Value value_for_term(const KnowledgeBase& kb, const Term& term) {
  if (term.kind == Term::Kind::kInstance) {
    const Instance* i = kb.find_instance(term.text);
    return InstanceRef{i ? i->concept_name : std::string(kRootConcept), term.text};
  }
  return Literal{term.text};
}

Clause clause_for_fact(const KnowledgeBase& kb, const Fact& fact) {
  if (fact.is_type_fact()) return IsA{fact.object.text};
  const PropertyDef* p = kb.model().find_property(fact.property);
  PropertyClause clause;
  clause.property = p ? p->name : fact.property;
  clause.form = p ? p->form : PropertyForm::kHasAs;
  clause.value = value_for_term(kb, fact.object);
  return clause;
}

CeStatement statement_for_fact(const KnowledgeBase& kb, const Fact& fact,
                               bool introduce) {
  const Instance* subject = kb.find_instance(fact.subject);
  std::string concept_name = subject ? subject->concept_name : std::string(kRootConcept);
  std::vector<Clause> clauses;
  if (introduce && subject && !subject->label.empty())
    clauses.push_back(KnownAs{subject->label});
  clauses.push_back(clause_for_fact(kb, fact));
  if (introduce)
    return CeStatement{NewInstance{concept_name, fact.subject, std::move(clauses)}};
  return CeStatement{InstanceFacts{concept_name, fact.subject, std::move(clauses)}};
}

CeStatement describe_instance(const KnowledgeBase& kb, std::string_view id) {
  const Instance* inst = kb.find_instance(id);
  if (!inst) throw ModelError("unknown instance '" + std::string(id) + "'");
  NewInstance out{inst->concept_name, inst->id, {}};
  if (!inst->label.empty()) out.clauses.push_back(KnownAs{inst->label});
  std::vector<Clause> types;
  for (const auto& f : kb.query(FactPattern{std::string(id), {}, {}, {}})) {
    Clause c = clause_for_fact(kb, f);
    if (std::holds_alternative<IsA>(c)) types.push_back(std::move(c));
    else out.clauses.push_back(std::move(c));
  }
  if (!inst->description.empty())
    out.clauses.push_back(PropertyClause{std::string(kDescriptionProperty),
                                         Literal{inst->description},
                                         PropertyForm::kHasAs});
  for (auto& t : types) out.clauses.push_back(std::move(t));
  return CeStatement{std::move(out)};
}

std::vector<CeModelDecl> model_decls(const KnowledgeBase& kb) {
  std::vector<CeModelDecl> out;
  const Model& m = kb.model();
  for (const auto& c : m.concepts())
    out.push_back(Conceptualise{c.name, c.parents, {}});
  for (const auto& p : m.properties()) {
    if (p.form == PropertyForm::kVerb) {
      out.push_back(RelationDecl{p.domain, p.name, p.range});
    } else {
      out.push_back(Conceptualise{p.domain, {}, {PropertyDecl{p.name, p.range}}});
    }
  }
  // One declaration per target, surfaces in insertion order.
  std::vector<std::pair<ElementRef, std::vector<std::string>>> grouped;
  for (const auto& s : kb.synonyms()) {
    auto it = std::find_if(grouped.begin(), grouped.end(),
                           [&](const auto& g) { return g.first == s.target; });
    if (it == grouped.end()) grouped.push_back({s.target, {s.surface}});
    else it->second.push_back(s.surface);
  }
  for (const auto& [target, surfaces] : grouped)
    out.push_back(SynonymDecl{target.kind, target.key, surfaces});
  return out;
}

}  // namespace moira
