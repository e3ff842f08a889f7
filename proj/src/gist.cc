#include "moira/gist.h"

#include <memory>
#include <set>

#include "moira/ce_parser.h"
#include "moira/text.h"

namespace moira {
namespace {

struct Node {
  enum class Kind { kText, kSlot, kGroup };
  Kind kind = Kind::kText;
  std::string text;  // literal text or slot path
  bool presence_only = false;
  std::vector<Node> children;
};

std::vector<Node> parse_nodes(std::string_view p, std::size_t& i, bool in_group,
                              const std::string& where) {
  std::vector<Node> out;
  std::string text;
  auto flush = [&] {
    if (!text.empty()) out.push_back(Node{Node::Kind::kText, text, false, {}});
    text.clear();
  };
  while (i < p.size()) {
    char c = p[i];
    if (c == '[') {
      flush();
      ++i;
      Node g{Node::Kind::kGroup, "", false, parse_nodes(p, i, true, where)};
      out.push_back(std::move(g));
    } else if (c == ']') {
      if (!in_group) throw GistError(where + ": unbalanced ']'");
      flush();
      ++i;
      return out;
    } else if (c == '{') {
      flush();
      std::size_t close = p.find('}', i);
      if (close == std::string_view::npos)
        throw GistError(where + ": unterminated '{'");
      std::string path(trim(p.substr(i + 1, close - i - 1)));
      Node slot{Node::Kind::kSlot, path, false, {}};
      if (!path.empty() && path[0] == '?') {
        slot.presence_only = true;
        slot.text = std::string(trim(std::string_view(path).substr(1)));
      }
      if (slot.text.empty()) throw GistError(where + ": empty slot");
      out.push_back(std::move(slot));
      i = close + 1;
    } else {
      text += c;
      ++i;
    }
  }
  if (in_group) throw GistError(where + ": unterminated '['");
  flush();
  return out;
}

std::vector<Node> parse_pattern_text(std::string_view p, const std::string& where) {
  std::size_t i = 0;
  return parse_nodes(p, i, false, where);
}

void collect_slots(const std::vector<Node>& nodes, std::vector<std::string>& out) {
  for (const auto& n : nodes) {
    if (n.kind == Node::Kind::kSlot) out.push_back(n.text);
    if (n.kind == Node::Kind::kGroup) collect_slots(n.children, out);
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = path.find('/', start);
    out.emplace_back(trim(std::string_view(path).substr(
        start, slash == std::string::npos ? std::string::npos : slash - start)));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return out;
}

class SlotResolver {
 public:
  SlotResolver(const KnowledgeBase& kb, std::span<const CeStatement> statements,
               std::string subject, const std::set<std::string>& withheld)
      : kb_(kb), statements_(statements), subject_(std::move(subject)),
        withheld_(withheld) {}

  std::optional<std::string> resolve(const std::string& path) const {
    if (withheld_.count(fold(path))) return std::nullopt;
    Term cur = Term::instance(subject_);
    for (const auto& step : split_path(path)) {
      if (cur.kind != Term::Kind::kInstance) return std::nullopt;
      auto next = lookup(cur.text, step);
      if (!next) return std::nullopt;
      cur = *next;
    }
    if (cur.kind == Term::Kind::kInstance) return display(cur.text);
    return cur.text;
  }

 private:
  std::optional<Term> lookup(const std::string& id, const std::string& prop) const {
    for (const auto& s : statements_) {
      auto head = head_of(s);
      if (!head || fold(head->id) != fold(id)) continue;
      for (const auto& c : *clauses_of(s)) {
        const auto* pc = std::get_if<PropertyClause>(&c);
        if (!pc || fold(pc->property) != fold(prop)) continue;
        if (const auto* ref = std::get_if<InstanceRef>(&pc->value))
          return Term::instance(ref->id);
        const auto& lit = std::get<Literal>(pc->value);
        const PropertyDef* def = kb_.resolve_property(id, prop);
        if (def && def->kind() == PropertyKind::kRelation)
          return Term::instance(lit.text);
        return Term::literal(lit.text);
      }
    }
    FactPattern fp;
    fp.subject = id;
    fp.property = prop;
    auto facts = kb_.query(fp);
    if (facts.empty()) return std::nullopt;
    return facts.front().object;
  }

  std::string display(const std::string& id) const {
    for (const auto& s : statements_) {
      auto head = head_of(s);
      if (!head || fold(head->id) != fold(id)) continue;
      for (const auto& c : *clauses_of(s)) {
        if (const auto* k = std::get_if<KnownAs>(&c)) return k->label;
      }
    }
    if (const Instance* inst = kb_.find_instance(id)) {
      if (!inst->label.empty()) return inst->label;
      return inst->id;
    }
    return id;
  }

  const KnowledgeBase& kb_;
  std::span<const CeStatement> statements_;
  std::string subject_;
  const std::set<std::string>& withheld_;
};

// Renders nodes; nullopt when a required slot is empty.
std::optional<std::string> render_nodes(const std::vector<Node>& nodes,
                                        const SlotResolver& slots,
                                        const std::set<std::string>& optional,
                                        bool in_group) {
  std::string out;
  for (const auto& n : nodes) {
    switch (n.kind) {
      case Node::Kind::kText:
        out += n.text;
        break;
      case Node::Kind::kSlot: {
        auto v = slots.resolve(n.text);
        if (!v) {
          if (in_group || !optional.count(fold(n.text))) return std::nullopt;
          break;
        }
        if (!n.presence_only) out += *v;
        break;
      }
      case Node::Kind::kGroup:
        if (auto g = render_nodes(n.children, slots, optional, true)) out += *g;
        break;
    }
  }
  return out;
}

// Collapses runs of spaces and drops spaces before closing punctuation.
std::string tidy(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' && (out.empty() || out.back() == ' ' || out.back() == '('))
      continue;
    if ((c == '.' || c == ',' || c == ')' || c == '?' || c == '!') &&
        !out.empty() && out.back() == ' ')
      out.pop_back();
    out += c;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

bool statement_has_type(const KnowledgeBase& kb, const CeStatement& s,
                        const std::string& concept_name) {
  auto head = head_of(s);
  if (!head) return false;
  const Model& m = kb.model();
  if (m.is_subtype(head->concept_name, concept_name)) return true;
  for (const auto& c : *clauses_of(s)) {
    if (const auto* isa = std::get_if<IsA>(&c)) {
      if (m.is_subtype(isa->concept_name, concept_name)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<GistTemplate> parse_templates(std::string_view text) {
  std::vector<GistTemplate> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.substr(0, 2) == "--") continue;
    std::string where = "line " + std::to_string(line_no);
    if (line.substr(0, 9) == "template ") {
      GistTemplate t;
      t.name = std::string(trim(line.substr(9)));
      out.push_back(std::move(t));
      continue;
    }
    if (out.empty()) throw GistError(where + ": expected 'template <name>'");
    auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw GistError(where + ": expected '<key>: <value>'");
    std::string key = fold(trim(line.substr(0, colon)));
    std::string value(trim(line.substr(colon + 1)));
    GistTemplate& t = out.back();
    if (key == "trigger") {
      t.trigger = value;
    } else if (key == "purpose") {
      t.purpose = value;
    } else if (key == "pattern") {
      parse_pattern_text(value, where);
      t.pattern = value;
    } else if (key == "optional") {
      std::size_t start = 0;
      while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        if (comma == std::string::npos) comma = value.size();
        std::string slot(trim(std::string_view(value).substr(start, comma - start)));
        if (!slot.empty()) t.optional.push_back(slot);
        start = comma + 1;
      }
    } else if (key == "segment") {
      auto sp = value.find(' ');
      if (sp == std::string::npos) throw GistError(where + ": segment needs an icon and a caption");
      std::string caption(trim(std::string_view(value).substr(sp + 1)));
      parse_pattern_text(caption, where);
      t.segments.push_back({value.substr(0, sp), caption});
    } else if (key == "withhold") {
      auto sp = value.find(' ');
      if (sp == std::string::npos) throw GistError(where + ": withhold needs a role and a slot");
      t.withhold[fold(value.substr(0, sp))].push_back(
          std::string(trim(std::string_view(value).substr(sp + 1))));
    } else {
      throw GistError(where + ": unknown key '" + key + "'");
    }
  }
  for (const auto& t : out) {
    if (t.trigger.empty() || t.pattern.empty())
      throw GistError("template '" + t.name + "' needs trigger: and pattern:");
  }
  return out;
}

void validate_templates(const std::vector<GistTemplate>& templates,
                        const Model& model) {
  for (const auto& t : templates) {
    if (!model.has_concept(t.trigger))
      throw GistError("template '" + t.name + "': unknown trigger concept '" +
                      t.trigger + "'");
    std::vector<std::string> slots;
    collect_slots(parse_pattern_text(t.pattern, t.name), slots);
    for (const auto& [icon, caption] : t.segments)
      collect_slots(parse_pattern_text(caption, t.name), slots);
    for (const auto& slot : slots) {
      std::string first = split_path(slot).front();
      // Instances may carry extra types, so any declared property will do.
      if (model.properties_named(first).empty())
        throw GistError("template '" + t.name + "': slot '" + slot +
                        "' names no property");
    }
  }
}

GistDescriptor gist(const KnowledgeBase& kb,
                    std::span<const CeStatement> statements,
                    const std::vector<GistTemplate>& templates,
                    const GistContext& context) {
  GistDescriptor out;
  for (const auto& s : statements) {
    auto head = head_of(s);
    if (!head) continue;
    bool seen = false;
    for (const auto& id : out.source_ids) seen = seen || id == head->id;
    if (!seen) out.source_ids.push_back(head->id);
  }
  for (const auto& t : templates) {
    if (!t.purpose.empty() && fold(t.purpose) != fold(context.purpose)) continue;
    const CeStatement* subject = nullptr;
    for (const auto& s : statements) {
      if (statement_has_type(kb, s, t.trigger)) {
        subject = &s;
        break;
      }
    }
    if (!subject) continue;
    std::set<std::string> withheld, optional;
    if (auto it = t.withhold.find(fold(context.role)); it != t.withhold.end()) {
      for (const auto& w : it->second) withheld.insert(fold(w));
    }
    for (const auto& o : t.optional) optional.insert(fold(o));
    SlotResolver slots(kb, statements, head_of(*subject)->id, withheld);
    auto text = render_nodes(parse_pattern_text(t.pattern, t.name), slots,
                             optional, false);
    if (!text) continue;
    out.template_name = t.name;
    if (fold(context.device) == "glass" && !t.segments.empty()) {
      for (const auto& [icon, caption] : t.segments) {
        auto c = render_nodes(parse_pattern_text(caption, t.name), slots,
                              optional, true);
        if (c && !tidy(*c).empty()) out.segments.push_back({icon, tidy(*c)});
      }
    }
    if (out.segments.empty()) out.text = tidy(*text);
    return out;
  }
  out.text = render_statements(statements);
  return out;
}

std::string GistStore::put(GistDescriptor descriptor,
                           std::vector<CeStatement> statements) {
  std::lock_guard<std::mutex> lock(mu_);
  std::string id = "g" + std::to_string(++next_);
  Entry e;
  e.id = id;
  e.ce_text = render_statements(statements, RenderStyle::kMultiLine);
  e.descriptor = std::move(descriptor);
  e.statements = std::move(statements);
  entries_[id] = std::move(e);
  return id;
}

std::optional<GistStore::Entry> GistStore::find(std::string_view id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(std::string(id));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

GistStore::Entry GistStore::expand(std::string_view id) const {
  auto e = find(id);
  if (!e) throw GistError("unknown gist '" + std::string(id) + "'");
  return *e;
}

std::size_t GistStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

}  // namespace moira
