#include "moira/fusion.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "moira/assertion.h"
#include "moira/ce_parser.h"
#include "moira/text.h"

namespace moira {
namespace {

struct Tok {
  std::string text;
  bool quoted = false;
};

std::vector<Tok> tokens_of(std::string_view line, int line_no) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '\'' || c == '`') {
      std::size_t close = line.find('\'', i + 1);
      if (close == std::string_view::npos)
        throw RuleError(line_no, "unterminated quote");
      out.push_back({std::string(line.substr(i + 1, close - i - 1)), true});
      i = close + 1;
    } else {
      std::size_t end = i;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t' &&
             line[end] != '\r')
        ++end;
      out.push_back({std::string(line.substr(i, end - i)), false});
      i = end;
    }
  }
  return out;
}

RuleTerm term_of(const Tok& t) {
  if (t.quoted) return {RuleTerm::Kind::kConstant, t.text};
  if (t.text.size() > 1 && t.text[0] == '?')
    return {RuleTerm::Kind::kVariable, t.text.substr(1)};
  if (t.text.find('?') != std::string::npos)
    return {RuleTerm::Kind::kTemplate, t.text};
  return {RuleTerm::Kind::kConstant, t.text};
}

bool kw(const std::vector<Tok>& t, std::size_t i, std::string_view word) {
  return i < t.size() && !t[i].quoted && fold(t[i].text) == word;
}

std::string words(const std::vector<Tok>& t, std::size_t from, std::size_t to,
                  int line_no, const char* what) {
  if (from >= to) throw RuleError(line_no, std::string("expected ") + what);
  std::vector<std::string> parts;
  for (std::size_t i = from; i < to; ++i) {
    if (t[i].quoted) throw RuleError(line_no, std::string("expected ") + what);
    parts.push_back(t[i].text);
  }
  return join(parts, " ");
}

bool is_var_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Variables named in a term.
std::vector<std::string> variables_of(const RuleTerm& term) {
  if (term.kind == RuleTerm::Kind::kVariable) return {term.text};
  std::vector<std::string> out;
  if (term.kind != RuleTerm::Kind::kTemplate) return out;
  for (std::size_t i = 0; i < term.text.size(); ++i) {
    if (term.text[i] != '?') continue;
    std::size_t j = i + 1;
    while (j < term.text.size() && is_var_char(term.text[j])) ++j;
    out.push_back(term.text.substr(i + 1, j - i - 1));
    i = j - 1;
  }
  return out;
}

std::string render_term(const RuleTerm& term) {
  switch (term.kind) {
    case RuleTerm::Kind::kVariable: return "?" + term.text;
    case RuleTerm::Kind::kTemplate: return term.text;
    case RuleTerm::Kind::kConstant: break;
  }
  bool plain = !term.text.empty();
  for (char c : term.text) {
    if (!is_var_char(c) && c != '-') plain = false;
  }
  return plain ? term.text : "'" + term.text + "'";
}

bool same_value(const Term& a, const Term& b) {
  if (a.kind == Term::Kind::kLiteral && b.kind == Term::Kind::kLiteral)
    return a.text == b.text;
  return fold(a.text) == fold(b.text);
}

// Text of a non-variable term under `b`; nullopt when a variable is unbound.
std::optional<std::string> instantiate(const RuleTerm& term, const Bindings& b) {
  if (term.kind == RuleTerm::Kind::kConstant) return term.text;
  if (term.kind == RuleTerm::Kind::kVariable) {
    auto it = b.find(term.text);
    if (it == b.end()) return std::nullopt;
    return it->second.text;
  }
  std::string out;
  for (std::size_t i = 0; i < term.text.size(); ++i) {
    if (term.text[i] != '?') {
      out += term.text[i];
      continue;
    }
    std::size_t j = i + 1;
    while (j < term.text.size() && is_var_char(term.text[j])) ++j;
    auto it = b.find(term.text.substr(i + 1, j - i - 1));
    if (it == b.end()) return std::nullopt;
    out += it->second.text;
    i = j - 1;
  }
  return out;
}

// Round bookkeeping for semi-naive evaluation; absent entries are round 0.
struct Rounds {
  std::map<std::string, int> fact;
  std::map<std::string, int> instance;

  int of_fact(const std::string& id) const {
    auto it = fact.find(id);
    return it == fact.end() ? 0 : it->second;
  }
  int of_instance(const std::string& id) const {
    auto it = instance.find(fold(id));
    return it == instance.end() ? 0 : it->second;
  }
};

// Round window per condition: [lo, hi]. Unbounded when rounds is null.
struct Window {
  int lo = 0;
  int hi = 1 << 30;
  bool admits(int r) const { return r >= lo && r <= hi; }
};

class Matcher {
 public:
  Matcher(const KnowledgeBase& kb, const std::vector<RulePattern>& conditions,
          const Rounds* rounds, std::vector<Window> windows)
      : kb_(kb), conds_(conditions), rounds_(rounds),
        windows_(std::move(windows)) {}

  std::vector<Solution> run() {
    Solution s;
    step(0, s);
    return std::move(out_);
  }

 private:
  bool admits(std::size_t i, int r) const {
    return !rounds_ || windows_[i].admits(r);
  }

  // Binds `term` to `value`; returns false on a clash.
  static bool bind(const RuleTerm& term, const Term& value, Bindings& b) {
    if (term.kind == RuleTerm::Kind::kVariable) {
      auto it = b.find(term.text);
      if (it != b.end()) return same_value(it->second, value);
      b.emplace(term.text, value);
      return true;
    }
    auto text = instantiate(term, b);
    if (!text) return false;
    return same_value(Term{value.kind, *text}, value);
  }

  void push_premise(Solution& s, const std::string& id) {
    if (std::find(s.premises.begin(), s.premises.end(), id) == s.premises.end())
      s.premises.push_back(id);
  }

  void step(std::size_t i, const Solution& partial) {
    if (i == conds_.size()) {
      out_.push_back(partial);
      return;
    }
    const RulePattern& c = conds_[i];
    if (c.kind == RulePattern::Kind::kIsA) {
      std::vector<std::string> subjects;
      if (auto text = instantiate(c.subject, partial.bindings)) {
        if (const Instance* inst = kb_.find_instance(*text))
          subjects.push_back(inst->id);
      } else {
        for (const Instance* inst : kb_.instances()) subjects.push_back(inst->id);
      }
      for (const auto& id : subjects) {
        FactPattern fp;
        fp.subject = id;
        fp.property = std::string(kIsA);
        for (const auto& f : kb_.query(fp)) {
          if (!kb_.model().is_subtype(f.object.text, c.concept_name)) continue;
          if (rounds_ && !admits(i, rounds_->of_fact(f.id))) continue;
          Solution next = partial;
          if (!bind(c.subject, Term::instance(id), next.bindings)) continue;
          push_premise(next, f.id);
          step(i + 1, next);
        }
        const Instance* inst = kb_.find_instance(id);
        if (kb_.model().is_subtype(inst->concept_name, c.concept_name)) {
          if (rounds_ && !admits(i, rounds_->of_instance(id))) continue;
          Solution next = partial;
          if (!bind(c.subject, Term::instance(id), next.bindings)) continue;
          step(i + 1, next);
        }
      }
      return;
    }
    FactPattern fp;
    fp.property = c.property;
    if (auto text = instantiate(c.subject, partial.bindings)) fp.subject = *text;
    for (const auto& f : kb_.query(fp)) {
      if (f.is_type_fact()) continue;
      if (rounds_ && !admits(i, rounds_->of_fact(f.id))) continue;
      Solution next = partial;
      if (!bind(c.subject, Term::instance(f.subject), next.bindings)) continue;
      if (!bind(c.object, f.object, next.bindings)) continue;
      push_premise(next, f.id);
      step(i + 1, next);
    }
  }

  const KnowledgeBase& kb_;
  const std::vector<RulePattern>& conds_;
  const Rounds* rounds_;
  std::vector<Window> windows_;
  std::vector<Solution> out_;
};

struct Applied {
  std::vector<std::string> facts;
  std::vector<std::string> instances;
};

void apply_productions(KnowledgeBase& kb, const Rule& rule,
                       const Solution& s, Applied& applied,
                       std::string& diagnostic) {
  Inferred prov{rule.name, s.premises};
  auto note = [&](const std::string& msg) {
    if (!diagnostic.empty()) diagnostic += "; ";
    diagnostic += rule.name + ": " + msg;
  };
  for (const auto& p : rule.productions) {
    auto subject = instantiate(p.subject, s.bindings);
    if (!subject) continue;
    try {
      if (p.kind == RulePattern::Kind::kNewInstance) {
        if (const Instance* inst = kb.find_instance(*subject)) {
          if (!kb.instance_has_type(inst->id, p.concept_name)) {
            auto out = kb.assert_fact(inst->id, kIsA,
                                      Term::of_concept(p.concept_name), prov);
            if (out.inserted) applied.facts.push_back(out.fact_id);
          }
        } else {
          kb.add_instance(Instance{*subject, p.concept_name, "", ""});
          applied.instances.push_back(*subject);
        }
        continue;
      }
      const Instance* inst = kb.find_instance(*subject);
      if (!inst) {
        note("no instance '" + *subject + "'");
        continue;
      }
      if (p.kind == RulePattern::Kind::kIsA) {
        auto out = kb.assert_fact(inst->id, kIsA,
                                  Term::of_concept(p.concept_name), prov);
        if (out.inserted) applied.facts.push_back(out.fact_id);
        continue;
      }
      const PropertyDef* def = kb.resolve_property(inst->id, p.property);
      if (!def) {
        note("property '" + p.property + "' does not apply to " + inst->id);
        continue;
      }
      Term object;
      if (p.object.kind == RuleTerm::Kind::kVariable) {
        object = s.bindings.at(p.object.text);
      } else {
        auto text = instantiate(p.object, s.bindings);
        object = def->kind() == PropertyKind::kAttribute
                     ? Term::literal(*text)
                     : Term::instance(*text);
      }
      if (def->kind() == PropertyKind::kAttribute)
        object.kind = Term::Kind::kLiteral;
      else if (object.kind == Term::Kind::kLiteral)
        object.kind = Term::Kind::kInstance;
      auto out = kb.assert_fact(inst->id, def->key(), object, prov);
      if (out.inserted) applied.facts.push_back(out.fact_id);
    } catch (const ModelError& e) {
      note(e.what());
    }
  }
}

std::vector<const Rule*> ordered(const std::vector<Rule>& rules) {
  std::vector<const Rule*> out;
  for (const auto& r : rules) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const Rule* a, const Rule* b) {
    return a->priority > b->priority;
  });
  return out;
}

}  // namespace

RuleError::RuleError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                        message
                                  : message),
      line_(line) {}

RulePattern parse_pattern(std::string_view line, int line_no) {
  auto t = tokens_of(line, line_no);
  RulePattern p;
  if (kw(t, 0, "there") && kw(t, 1, "is") && (kw(t, 2, "a") || kw(t, 2, "an"))) {
    std::size_t named = 3;
    while (named < t.size() && !kw(t, named, "named")) ++named;
    if (named + 2 != t.size())
      throw RuleError(line_no, "expected 'there is a <concept> named <term>'");
    p.kind = RulePattern::Kind::kNewInstance;
    p.concept_name = words(t, 3, named, line_no, "a concept");
    p.subject = term_of(t[named + 1]);
    return p;
  }
  if (t.size() < 3) throw RuleError(line_no, "pattern too short");
  p.subject = term_of(t[0]);
  if (kw(t, 1, "is") && (kw(t, 2, "a") || kw(t, 2, "an"))) {
    p.kind = RulePattern::Kind::kIsA;
    p.concept_name = words(t, 3, t.size(), line_no, "a concept");
    return p;
  }
  if (kw(t, 1, "has")) {
    if (!kw(t, 3, "as"))
      throw RuleError(line_no, "expected '<term> has <term> as <property>'");
    p.kind = RulePattern::Kind::kProperty;
    p.form = PropertyForm::kHasAs;
    p.object = term_of(t[2]);
    p.property = words(t, 4, t.size(), line_no, "a property name");
    return p;
  }
  p.kind = RulePattern::Kind::kProperty;
  p.form = PropertyForm::kVerb;
  p.property = words(t, 1, t.size() - 1, line_no, "a property name");
  p.object = term_of(t.back());
  return p;
}

std::vector<Rule> parse_rules(std::string_view text) {
  std::vector<Rule> out;
  enum class Section { kNone, kIf, kThen } section = Section::kNone;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto c = raw.find("--"); c != std::string_view::npos)
      raw = raw.substr(0, c);
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    std::string head = fold(line.substr(0, line.find(' ')));
    if (head == "rule") {
      Rule r;
      r.name = std::string(trim(line.substr(4)));
      if (r.name.empty()) throw RuleError(line_no, "rule needs a name");
      out.push_back(std::move(r));
      section = Section::kNone;
      continue;
    }
    if (out.empty()) throw RuleError(line_no, "expected 'rule <name>'");
    Rule& r = out.back();
    if (head == "priority") {
      try {
        r.priority = std::stoi(std::string(trim(line.substr(8))));
      } catch (const std::exception&) {
        throw RuleError(line_no, "priority must be an integer");
      }
    } else if (fold(line) == "if:") {
      section = Section::kIf;
    } else if (fold(line) == "then:") {
      section = Section::kThen;
    } else if (section == Section::kIf) {
      auto p = parse_pattern(line, line_no);
      if (p.kind == RulePattern::Kind::kNewInstance)
        throw RuleError(line_no, "'there is' is only allowed after then:");
      r.conditions.push_back(std::move(p));
    } else if (section == Section::kThen) {
      r.productions.push_back(parse_pattern(line, line_no));
    } else {
      throw RuleError(line_no, "expected 'if:' or 'then:'");
    }
  }
  for (const auto& r : out) {
    if (r.conditions.empty() || r.productions.empty())
      throw RuleError(0, "rule '" + r.name + "' needs if: and then: patterns");
  }
  return out;
}

std::string render_pattern(const RulePattern& p) {
  switch (p.kind) {
    case RulePattern::Kind::kNewInstance:
      return "there is a " + p.concept_name + " named " + render_term(p.subject);
    case RulePattern::Kind::kIsA:
      return render_term(p.subject) + " is a " + p.concept_name;
    case RulePattern::Kind::kProperty:
      if (p.form == PropertyForm::kHasAs)
        return render_term(p.subject) + " has " + render_term(p.object) +
               " as " + p.property;
      return render_term(p.subject) + " " + p.property + " " +
             render_term(p.object);
  }
  return "";
}

std::string render_rules(const std::vector<Rule>& rules) {
  std::ostringstream out;
  for (const auto& r : rules) {
    out << "rule " << r.name << "\n";
    if (r.priority != 0) out << "priority " << r.priority << "\n";
    out << "if:\n";
    for (const auto& c : r.conditions) out << "  " << render_pattern(c) << "\n";
    out << "then:\n";
    for (const auto& p : r.productions) out << "  " << render_pattern(p) << "\n";
    out << "\n";
  }
  return out.str();
}

void validate_rules(const std::vector<Rule>& rules, const Model& model) {
  for (const auto& r : rules) {
    std::set<std::string> bound;
    auto check = [&](const RulePattern& p) {
      if (p.kind != RulePattern::Kind::kProperty) {
        if (!model.has_concept(p.concept_name))
          throw RuleError(0, "rule '" + r.name + "': unknown concept '" +
                                 p.concept_name + "'");
        return;
      }
      auto named = model.properties_named(p.property);
      bool ok = std::any_of(named.begin(), named.end(), [&](const auto* d) {
        return d->form == p.form;
      });
      if (!ok)
        throw RuleError(0, "rule '" + r.name + "': unknown property '" +
                               p.property + "'");
    };
    for (const auto& c : r.conditions) {
      check(c);
      for (const auto& v : variables_of(c.subject)) bound.insert(v);
      for (const auto& v : variables_of(c.object)) bound.insert(v);
    }
    for (const auto& p : r.productions) {
      check(p);
      for (const auto* t : {&p.subject, &p.object}) {
        for (const auto& v : variables_of(*t)) {
          if (!bound.count(v))
            throw RuleError(0, "rule '" + r.name + "': variable ?" + v +
                                   " is not bound by a condition");
        }
      }
    }
  }
}

std::vector<Solution> solve(const KnowledgeBase& kb,
                            const std::vector<RulePattern>& conditions) {
  return Matcher(kb, conditions, nullptr, {}).run();
}

RunResult run_rules(KnowledgeBase& kb, const std::vector<Rule>& rules,
                    int max_rounds) {
  RunResult result;
  Rounds rounds;
  auto order = ordered(rules);
  for (int k = 1;; ++k) {
    if (k > max_rounds) {
      result.capped = true;
      if (!result.diagnostic.empty()) result.diagnostic += "; ";
      result.diagnostic += "stopped after " + std::to_string(max_rounds) +
                           " rounds without reaching a fixpoint";
      break;
    }
    // Match everything against the state at the end of round k-1, then apply.
    std::vector<std::pair<const Rule*, Solution>> found;
    for (const Rule* r : order) {
      std::size_t n = r->conditions.size();
      for (std::size_t delta = 0; delta < n; ++delta) {
        std::vector<Window> windows(n);
        for (std::size_t i = 0; i < n; ++i) {
          if (i < delta) windows[i] = {0, k - 2};
          else if (i == delta) windows[i] = {k - 1, k - 1};
          else windows[i] = {0, k - 1};
        }
        for (auto& s : Matcher(kb, r->conditions, &rounds, windows).run())
          found.push_back({r, std::move(s)});
      }
    }
    Applied applied;
    for (const auto& [r, s] : found)
      apply_productions(kb, *r, s, applied, result.diagnostic);
    for (const auto& id : applied.facts) rounds.fact[id] = k;
    for (const auto& id : applied.instances) rounds.instance[fold(id)] = k;
    result.rounds = k;
    result.new_fact_ids.insert(result.new_fact_ids.end(), applied.facts.begin(),
                               applied.facts.end());
    result.new_instance_ids.insert(result.new_instance_ids.end(),
                                   applied.instances.begin(),
                                   applied.instances.end());
    if (applied.facts.empty() && applied.instances.empty()) break;
  }
  return result;
}

bool audit_fact(const KnowledgeBase& kb, const std::vector<Rule>& rules,
                const Fact& fact) {
  const auto* inf = std::get_if<Inferred>(&fact.provenance);
  if (!inf) return true;
  for (const auto& premise : inf->premises) {
    if (!kb.find_fact(premise)) return false;
  }
  std::set<std::string> want(inf->premises.begin(), inf->premises.end());
  for (const auto& r : rules) {
    if (r.name != inf->rule) continue;
    for (const auto& s : solve(kb, r.conditions)) {
      if (std::set<std::string>(s.premises.begin(), s.premises.end()) != want)
        continue;
      for (const auto& p : r.productions) {
        auto subject = instantiate(p.subject, s.bindings);
        if (!subject || fold(*subject) != fold(fact.subject)) continue;
        if (p.kind == RulePattern::Kind::kNewInstance ||
            p.kind == RulePattern::Kind::kIsA) {
          if (fact.is_type_fact() &&
              fold(fact.object.text) == fold(p.concept_name))
            return true;
          continue;
        }
        if (fact.is_type_fact()) continue;
        const PropertyDef* def = kb.model().find_property(fact.property);
        if (!def || fold(def->name) != fold(p.property)) continue;
        auto object = instantiate(p.object, s.bindings);
        if (object && same_value(Term{fact.object.kind, *object}, fact.object))
          return true;
      }
    }
  }
  return false;
}

Rationale rationale(const KnowledgeBase& kb, std::string_view fact_id) {
  const Fact* f = kb.find_fact(fact_id);
  if (!f) throw ModelError("unknown fact '" + std::string(fact_id) + "'");
  Rationale out;
  out.conclusion = f->id;
  Because because;
  if (const auto* inf = std::get_if<Inferred>(&f->provenance)) {
    out.rule = inf->rule;
    out.premises = inf->premises;
    std::set<std::string> introduced;
    for (const auto& pid : inf->premises) {
      const Fact* p = kb.find_fact(pid);
      if (!p) throw ModelError("premise '" + pid + "' is missing");
      bool first = introduced.insert(fold(p->subject)).second;
      because.premises.push_back(statement_for_fact(kb, *p, first));
    }
    if (because.premises.empty())
      because.premises.push_back(describe_instance(kb, f->subject));
  } else {
    const auto& told = std::get<Told>(f->provenance);
    because.premises.push_back(statement_for_fact(kb, *f, true));
    because.reported = ReportedBy{told.source, told.timestamp};
  }
  out.because = CeStatement{std::move(because)};
  out.text = render_statement(out.because, RenderStyle::kMultiLine);
  return out;
}

int SubscriptionHub::subscribe(const KnowledgeBase& kb,
                               const FactPattern& pattern, Callback callback) {
  int id;
  {
    std::lock_guard<std::mutex> lock(mu_);
    id = next_id_++;
    entries_.push_back(Entry{id, pattern, callback});
  }
  auto existing = kb.query(pattern);
  if (!existing.empty()) callback(existing);
  return id;
}

void SubscriptionHub::unsubscribe(int id) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                [&](const Entry& e) { return e.id == id; }),
                 entries_.end());
}

void SubscriptionHub::publish(const KnowledgeBase& kb,
                              const std::vector<std::string>& new_fact_ids) {
  std::vector<Entry> snapshot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    snapshot = entries_;
  }
  for (const auto& e : snapshot) {
    std::vector<Fact> hits;
    for (const auto& id : new_fact_ids) {
      const Fact* f = kb.find_fact(id);
      if (f && kb.matches(*f, e.pattern)) hits.push_back(*f);
    }
    if (!hits.empty()) e.callback(hits);
  }
}

std::size_t SubscriptionHub::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

}  // namespace moira
