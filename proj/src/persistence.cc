#include "moira/persistence.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/text.h"

namespace moira {
namespace {

using nlohmann::json;

constexpr std::string_view kHeaderKey = "moira";

json provenance_json(const Provenance& p) {
  if (const auto* t = std::get_if<Told>(&p)) {
    return {{"told", {{"source", t->source},
                      {"conversation", t->conversation},
                      {"timestamp", t->timestamp}}}};
  }
  const auto& i = std::get<Inferred>(p);
  return {{"inferred", {{"rule", i.rule}, {"premises", i.premises}}}};
}

Provenance provenance_from(const json& j) {
  if (j.contains("told")) {
    const auto& t = j.at("told");
    return Told{t.at("source").get<std::string>(),
                t.at("conversation").get<std::string>(),
                t.at("timestamp").get<std::string>()};
  }
  const auto& i = j.at("inferred");
  return Inferred{i.at("rule").get<std::string>(),
                  i.at("premises").get<std::vector<std::string>>()};
}

std::string pragma(const json& j) { return "--@ " + j.dump() + "\n"; }

PersistError located(SourceLocation where, std::string_view what) {
  return PersistError(std::to_string(where.line) + ":" +
                      std::to_string(where.column) + ": " + std::string(what));
}

}  // namespace

std::string persist(const KnowledgeBase& kb) {
  std::ostringstream out;
  json counters = json::object();
  for (const auto& [prefix, n] : kb.counters()) {
    if (n) counters[prefix] = n;
  }
  out << "-- knowledge base\n";
  out << pragma({{std::string(kHeaderKey), 1}, {"counters", counters}});

  auto decls = model_decls(kb);
  for (const auto& d : decls) {
    if (!std::holds_alternative<SynonymDecl>(d)) out << render_decl(d) << "\n";
  }
  out << "\n";
  for (const Instance* inst : kb.instances()) {
    json meta = {{"instance", inst->id}};
    if (!inst->label.empty()) meta["label"] = inst->label;
    if (!inst->description.empty()) meta["description"] = inst->description;
    out << pragma(meta);
    CeStatement s{NewInstance{inst->concept_name, inst->id, {}}};
    out << render_statement(s) << "\n";
  }
  out << "\n";
  for (const auto& d : decls) {
    if (std::holds_alternative<SynonymDecl>(d)) out << render_decl(d) << "\n";
  }
  out << "\n";
  for (const auto& f : kb.facts()) {
    json meta = {{"fact", f.id}, {"property", f.property}};
    meta.update(provenance_json(f.provenance));
    out << pragma(meta);
    CeStatement s{InstanceFacts{"", f.subject, {clause_for_fact(kb, f)}}};
    const Instance* subject = kb.find_instance(f.subject);
    std::get<InstanceFacts>(s.body).concept_name =
        subject ? subject->concept_name : std::string(kRootConcept);
    out << render_statement(s) << "\n";
  }
  return out.str();
}

KnowledgeBase restore(std::string_view text) {
  KnowledgeBase kb;
  std::vector<RawSentence> raws;
  try {
    raws = split_sentences(text);
  } catch (const CeParseError& e) {
    throw located(e.where(), e.message());
  }

  // Header pragma may precede any sentence.
  json header;
  {
    std::istringstream lines{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
      ++n;
      auto t = trim(line);
      if (!t.starts_with("--@")) continue;
      json j = json::parse(t.substr(3), nullptr, false);
      if (j.is_discarded()) throw located({n, 1}, "malformed pragma");
      if (j.is_object() && j.contains(kHeaderKey)) header = j;
    }
  }

  struct Meta {
    const RawSentence* raw;
    json meta;
  };
  std::vector<std::pair<CeModelDecl, SourceLocation>> decls;
  std::vector<Meta> instances, facts;
  for (const auto& raw : raws) {
    try {
      if (is_model_decl(raw)) {
        decls.push_back({std::get<CeModelDecl>(parse_sentence(raw)), raw.start});
        continue;
      }
    } catch (const CeParseError& e) {
      throw located(e.where(), e.message());
    }
    json meta;
    for (const auto& p : raw.pragmas) {
      json j = json::parse(p, nullptr, false);
      if (j.is_object() && !j.contains(kHeaderKey)) meta = j;
    }
    if (meta.contains("fact")) {
      facts.push_back({&raw, meta});
    } else {
      instances.push_back({&raw, meta});
    }
  }

  std::vector<Concept> batch;
  for (const auto& [d, where] : decls) {
    if (const auto* c = std::get_if<Conceptualise>(&d))
      batch.push_back(Concept{c->name, c->parents, true});
  }
  try {
    kb.add_concepts(batch);
  } catch (const ModelError& e) {
    throw located(decls.empty() ? SourceLocation{} : decls.front().second, e.what());
  }
  for (const auto& [d, where] : decls) {
    if (std::holds_alternative<SynonymDecl>(d)) continue;
    try {
      apply_decl(kb, d);
    } catch (const ModelError& e) {
      throw located(where, e.what());
    }
  }

  ParseOptions options = parse_options(kb);
  for (const auto& [raw, meta] : instances) {
    try {
      CeStatement s = parse_statement(*raw, options);
      const auto* n = std::get_if<NewInstance>(&s.body);
      if (!n || !n->clauses.empty())
        throw ModelError("expected \"there is a <concept> named <id>.\"");
      Instance inst{n->id, n->concept_name, meta.value("label", ""),
                    meta.value("description", "")};
      if (kb.has_instance(inst.id)) throw ModelError("duplicate instance '" + inst.id + "'");
      kb.add_instance(inst);
    } catch (const CeParseError& e) {
      throw located(e.where(), e.message());
    } catch (const std::exception& e) {
      throw located(raw->start, e.what());
    }
  }
  for (const auto& [d, where] : decls) {
    if (!std::holds_alternative<SynonymDecl>(d)) continue;
    try {
      apply_decl(kb, d);
    } catch (const ModelError& e) {
      throw located(where, e.what());
    }
  }

  options = parse_options(kb);
  for (const auto& [raw, meta] : facts) {
    try {
      CeStatement s = parse_statement(*raw, options);
      const auto* head = std::get_if<InstanceFacts>(&s.body);
      if (!head || head->clauses.size() != 1)
        throw ModelError("expected one clause about one instance");
      Fact f;
      f.id = meta.at("fact").get<std::string>();
      f.subject = head->id;
      f.provenance = provenance_from(meta);
      const Clause& c = head->clauses.front();
      if (const auto* isa = std::get_if<IsA>(&c)) {
        f.property = std::string(kIsA);
        f.object = Term::of_concept(isa->concept_name);
      } else if (const auto* pc = std::get_if<PropertyClause>(&c)) {
        f.property = meta.value("property", pc->property);
        if (const auto* lit = std::get_if<Literal>(&pc->value)) {
          f.object = Term::literal(lit->text);
        } else {
          f.object = Term::instance(std::get<InstanceRef>(pc->value).id);
        }
      } else {
        throw ModelError("labels are carried by instance pragmas");
      }
      kb.restore_fact(f);
    } catch (const CeParseError& e) {
      throw located(e.where(), e.message());
    } catch (const std::exception& e) {
      throw located(raw->start, e.what());
    }
  }

  if (header.contains("counters")) {
    for (const auto& [prefix, n] : header.at("counters").items())
      kb.bump_counter(prefix, n.get<long>());
  }
  return kb;
}

void persist_file(const KnowledgeBase& kb, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistError("cannot write " + tmp.string());
    out << persist(kb);
    if (!out) throw PersistError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw PersistError("cannot replace " + path.string() + ": " + ec.message());
}

KnowledgeBase restore_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return restore(buf.str());
  } catch (const PersistError& e) {
    throw PersistError(path.string() + ":" + e.what());
  }
}

}  // namespace moira
