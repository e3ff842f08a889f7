#include "moira/interpreter.h"

#include <algorithm>
#include <cctype>
#include <limits>
#include <optional>

#include "moira/assertion.h"
#include "moira/text.h"

namespace moira {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::string strip_punct(std::string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e && is_punct(w[b])) ++b;
  while (e > b && is_punct(w[e - 1])) --e;
  return std::string(w.substr(b, e - b));
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  TokenizedInput run() {
    TokenizedInput out;
    for (std::string_view block : blocks()) {
      phrase_ = {};
      sentence_ = {};
      clause_ = {};
      word_.clear();
      for (std::size_t i = 0; i < block.size(); ++i) {
        char c = block[i];
        bool at_break = i + 1 >= block.size() || is_space(block[i + 1]);
        if (is_space(c)) {
          end_word();
        } else if (c == ',' || c == ';') {
          end_clause();
        } else if (c == ':' && at_break) {
          end_clause();
        } else if ((c == '.' || c == '!' || c == '?') &&
                   (at_break || block[i + 1] == '.' || block[i + 1] == '!' ||
                    block[i + 1] == '?')) {
          end_sentence();
        } else {
          word_ += c;
        }
      }
      end_sentence();
      if (!phrase_.sentences.empty()) out.phrases.push_back(std::move(phrase_));
    }
    return out;
  }

 private:
  // Blank-line separated blocks.
  std::vector<std::string_view> blocks() const {
    std::vector<std::string_view> out;
    std::size_t start = 0, pos = 0;
    while (pos <= text_.size()) {
      std::size_t eol = text_.find('\n', pos);
      if (eol == std::string_view::npos) eol = text_.size();
      std::string_view line = text_.substr(pos, eol - pos);
      bool blank = std::all_of(line.begin(), line.end(), is_space);
      if (blank) {
        if (pos > start) out.push_back(text_.substr(start, pos - start));
        start = eol + 1;
      }
      pos = eol + 1;
    }
    if (start < text_.size()) out.push_back(text_.substr(start));
    return out;
  }

  void end_word() {
    std::string w = strip_punct(word_);
    word_.clear();
    if (!w.empty()) clause_.words.push_back(Word{w, fold(w)});
  }
  void end_clause() {
    end_word();
    if (!clause_.words.empty()) sentence_.clauses.push_back(std::move(clause_));
    clause_ = {};
  }
  void end_sentence() {
    end_clause();
    if (!sentence_.clauses.empty())
      phrase_.sentences.push_back(std::move(sentence_));
    sentence_ = {};
  }

  std::string_view text_;
  TextPhrase phrase_;
  TextSentence sentence_;
  TextClause clause_;
  std::string word_;
};

bool is_function_word(const std::string& folded) {
  static const std::set<std::string> kWords = {
      "a",  "an", "the", "with", "and", "of", "to", "in", "on",
      "at", "is", "was", "by",   "for", "it", "its", "from"};
  return kWords.count(folded) > 0;
}

bool is_article(const std::string& folded) {
  return folded == "a" || folded == "an" || folded == "the";
}

// Working state for one sentence.
class Assembler {
 public:
  Assembler(KnowledgeBase& kb, const TextSentence& sentence,
            std::vector<MatchSpan>& spans, Interpretation& out)
      : kb_(kb), model_(kb.model()), spans_(spans), out_(out) {
    for (const auto& c : sentence.clauses) {
      clause_start_.push_back(words_.size());
      for (const auto& w : c.words) {
        words_.push_back(w);
        clause_of_word_.push_back(clause_start_.size() - 1);
      }
    }
    covered_.assign(words_.size(), kNone);
    consumed_.assign(words_.size(), false);
    for (std::size_t s = 0; s < spans_.size(); ++s) {
      for (std::size_t k = 0; k < spans_[s].length; ++k)
        covered_[spans_[s].start + k] = s;
    }
    span_used_.assign(spans_.size(), false);
  }

  void run() {
    std::size_t clause = kNone;
    for (std::size_t s = 0; s < spans_.size(); ++s) {
      std::size_t c = clause_of_word_[spans_[s].start];
      if (c != clause) {
        clause = c;
        current_ = primary_;
      }
      if (span_used_[s]) continue;
      switch (spans_[s].element.kind) {
        case ElementKind::kConcept: on_concept(s); break;
        case ElementKind::kInstance: on_instance(s); break;
        case ElementKind::kProperty: on_property(s); break;
      }
    }
    emit();
  }

 private:
  struct Draft {
    bool is_new = true;
    std::string concept_name;
    std::string id;
    std::vector<Clause> clauses;
  };

  struct Entity {
    std::string id;
    bool fresh = false;  // minted from a concept match
    std::vector<std::size_t> drafts;
    std::size_t origin_span = kNone;  // instance span that introduced it
  };

  // --- entity helpers -----------------------------------------------------

  std::vector<std::string> types_of(const Entity& e) const {
    std::vector<std::string> out;
    if (!e.fresh && kb_.has_instance(e.id)) out = kb_.types_of(e.id);
    for (std::size_t d : e.drafts) {
      out.push_back(drafts_[d].concept_name);
      for (const auto& c : drafts_[d].clauses) {
        if (const auto* isa = std::get_if<IsA>(&c)) out.push_back(isa->concept_name);
      }
    }
    return out;
  }

  bool covers(const Entity& e, const std::string& domain) const {
    for (const auto& t : types_of(e)) {
      if (model_.is_subtype(t, domain)) return true;
    }
    return false;
  }

  bool instance_fits(const std::string& id, const std::string& range) const {
    for (const auto& t : kb_.types_of(id)) {
      if (model_.is_subtype(t, range)) return true;
    }
    return false;
  }

  std::size_t find_entity(const std::string& id) const {
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      if (fold(entities_[i].id) == fold(id)) return i;
    }
    return kNone;
  }

  std::size_t new_draft(bool is_new, const std::string& concept_name,
                        const std::string& id) {
    drafts_.push_back(Draft{is_new, concept_name, id, {}});
    return drafts_.size() - 1;
  }

  std::size_t add_entity(Entity e) {
    entities_.push_back(std::move(e));
    std::size_t idx = entities_.size() - 1;
    if (primary_ == kNone) primary_ = idx;
    return idx;
  }

  std::size_t mint(const std::string& concept_name, std::string description,
                   bool fresh) {
    std::string id = kb_.fresh_id(concept_name);
    Entity e{id, fresh, {}, kNone};
    e.drafts.push_back(new_draft(true, concept_name, id));
    out_.new_instances.push_back(
        MintedInstance{id, concept_name, std::move(description)});
    return add_entity(std::move(e));
  }

  // Draft that should carry a clause whose property has `domain`.
  std::size_t draft_for(std::size_t entity, const std::string& domain) {
    Entity& e = entities_[entity];
    for (std::size_t d : e.drafts) {
      if (model_.is_subtype(drafts_[d].concept_name, domain)) return d;
    }
    if (e.drafts.empty()) {
      const Instance* inst = kb_.find_instance(e.id);
      e.drafts.push_back(new_draft(false, inst->concept_name, inst->id));
    }
    return e.drafts.front();
  }

  void mark(std::size_t span) {
    if (span != kNone) spans_[span].contributed = true;
  }

  // Adds the clause unless the draft already has it. Contributing spans are
  // credited only on success.
  bool add_clause(std::size_t entity, const std::string& domain, Clause clause,
                  std::initializer_list<std::size_t> credit) {
    std::size_t d = draft_for(entity, domain);
    auto& clauses = drafts_[d].clauses;
    if (std::find(clauses.begin(), clauses.end(), clause) != clauses.end())
      return false;
    clauses.push_back(std::move(clause));
    for (std::size_t s : credit) mark(s);
    mark(entities_[entity].origin_span);
    return true;
  }

  Value value_of(const std::string& id) const {
    const Instance* inst = kb_.find_instance(id);
    if (inst) return InstanceRef{inst->concept_name, inst->id};
    for (const auto& e : entities_) {
      if (e.id == id && !e.drafts.empty())
        return InstanceRef{drafts_[e.drafts.front()].concept_name, id};
    }
    return Literal{id};
  }

  // --- span handlers -------------------------------------------------------

  void on_concept(std::size_t s) {
    span_used_[s] = true;
    const MatchSpan& span = spans_[s];
    std::size_t begin = span.start;
    std::size_t clause_begin = clause_start_[clause_of_word_[span.start]];
    while (begin > clause_begin && free_word(begin - 1) &&
           !is_function_word(words_[begin - 1].folded))
      --begin;
    std::vector<std::string> phrase;
    for (std::size_t i = begin; i < span.start + span.length; ++i)
      phrase.push_back(words_[i].text);
    std::size_t e = mint(span.element.key, join(phrase, " "), true);
    mark(s);
    current_ = e;
    adopt_pending(e);
  }

  // Earlier unattached instances may describe entity `e`.
  void adopt_pending(std::size_t e) {
    std::vector<std::size_t> still;
    for (std::size_t p : pending_) {
      if (!attach_instance(p, {e})) still.push_back(p);
    }
    pending_ = std::move(still);
  }

  // Links instance span `s` to the first candidate entity with a fitting
  // relation. Returns false when nothing fits.
  bool attach_instance(std::size_t s, const std::vector<std::size_t>& candidates) {
    const std::string& id = spans_[s].element.key;
    for (std::size_t e : candidates) {
      if (fold(entities_[e].id) == fold(id)) continue;
      for (const auto& p : model_.properties()) {
        if (p.kind() != PropertyKind::kRelation) continue;
        if (!covers(entities_[e], p.domain) || !instance_fits(id, p.range))
          continue;
        span_used_[s] = true;
        std::size_t credit = s;
        std::size_t self = find_entity(id);
        if (spans_[s].contributed && self != kNone &&
            entities_[self].origin_span != kNone &&
            !spans_[entities_[self].origin_span].contributed)
          credit = entities_[self].origin_span;
        std::size_t named = unfilled_property(p.key());
        if (add_clause(e, p.domain, PropertyClause{p.name, value_of(id), p.form},
                       {credit, named}) &&
            named == kNone)
          filled_.emplace_back(s, p.key());
        return true;
      }
    }
    return false;
  }

  // "colour ... red": a property span left without a value is credited when
  // an instance later fills that property.
  std::size_t unfilled_property(const std::string& key) {
    for (auto it = unfilled_.begin(); it != unfilled_.end(); ++it) {
      if (spans_[*it].element.key == key) {
        std::size_t u = *it;
        unfilled_.erase(it);
        return u;
      }
    }
    return kNone;
  }

  // "van ... body type": an instance already filled the property unnamed.
  bool credit_filled(std::size_t s, const std::string& key) {
    for (auto it = filled_.begin(); it != filled_.end(); ++it) {
      if (it->second == key) {
        mark(s);
        filled_.erase(it);
        return true;
      }
    }
    return false;
  }

  void swap_to(std::size_t s, ElementRef alt) {
    auto& span = spans_[s];
    std::vector<ElementRef> rest{span.element};
    for (const auto& a : span.alternatives) {
      if (!(a == alt)) rest.push_back(a);
    }
    span.element = std::move(alt);
    span.alternatives = std::move(rest);
  }

  // Instances of vocabulary concepts (colours, directions) only ever fill
  // values; no property other than the universal ones starts from them.
  bool value_only(const std::string& id) const {
    for (const auto& type : kb_.types_of(id)) {
      for (const auto& p : model_.properties()) {
        if (p.domain != kRootConcept && model_.is_subtype(type, p.domain))
          return false;
      }
    }
    return true;
  }

  std::vector<std::size_t> attach_order() const {
    std::vector<std::size_t> out;
    if (current_ != kNone) out.push_back(current_);
    for (std::size_t i = entities_.size(); i-- > 0;) {
      if (i != current_) out.push_back(i);
    }
    return out;
  }

  void on_instance(std::size_t s) {
    const std::string& id = spans_[s].element.key;
    std::size_t existing = find_entity(id);
    if (existing != kNone) {
      span_used_[s] = true;
      current_ = existing;
      // A repeat mention is credited by the next clause about it.
      std::size_t& origin = entities_[existing].origin_span;
      if (origin == kNone || spans_[origin].contributed) origin = s;
      return;
    }
    if (attach_instance(s, attach_order())) return;
    // "truck" names a body type and a vehicle; with nothing to describe,
    // take the concept.
    for (const auto& alt : spans_[s].alternatives) {
      if (alt.kind != ElementKind::kConcept) continue;
      swap_to(s, alt);
      on_concept(s);
      return;
    }
    span_used_[s] = true;
    if (value_only(id)) {
      pending_.push_back(s);
      return;
    }
    const Instance* inst = kb_.find_instance(id);
    Entity e{inst->id, false, {}, s};
    current_ = add_entity(std::move(e));
    pending_.push_back(s);
  }

  // Run of capitalised unmatched words ending just before `at`.
  std::optional<std::pair<std::size_t, std::size_t>> name_before(
      std::size_t at) const {
    std::size_t end = at;
    std::size_t begin = end;
    std::size_t clause_begin = clause_start_[clause_of_word_[at]];
    while (begin > clause_begin && is_name_word(begin - 1)) --begin;
    if (begin == end) return std::nullopt;
    return std::make_pair(begin, end);
  }

  // Run of capitalised unmatched words starting after `at` (articles skipped).
  std::optional<std::pair<std::size_t, std::size_t>> name_after(
      std::size_t at) const {
    std::size_t begin = at;
    std::size_t clause = clause_of_word_[at - 1];
    while (begin < words_.size() && clause_of_word_[begin] == clause &&
           free_word(begin) && is_article(words_[begin].folded))
      ++begin;
    std::size_t end = begin;
    while (end < words_.size() && clause_of_word_[end] == clause &&
           is_name_word(end))
      ++end;
    if (begin == end) return std::nullopt;
    return std::make_pair(begin, end);
  }

  bool is_name_word(std::size_t i) const {
    return free_word(i) && starts_with_upper(words_[i].text) &&
           !is_function_word(words_[i].folded);
  }

  bool free_word(std::size_t i) const {
    return covered_[i] == kNone && !consumed_[i];
  }

  std::string text_of(std::pair<std::size_t, std::size_t> range) const {
    std::vector<std::string> parts;
    for (std::size_t i = range.first; i < range.second; ++i)
      parts.push_back(words_[i].text);
    return join(parts, " ");
  }

  void consume(std::pair<std::size_t, std::size_t> range) {
    for (std::size_t i = range.first; i < range.second; ++i) consumed_[i] = true;
  }

  // Named individual for `concept_name`: an existing instance when the text
  // resolves to one of that type, else a fresh instance described by it.
  std::size_t bind_name(const std::string& text, const std::string& concept_name) {
    if (const Instance* inst = kb_.find_instance(text)) {
      if (instance_fits(inst->id, concept_name)) {
        std::size_t e = find_entity(inst->id);
        if (e != kNone) return e;
        return add_entity(Entity{inst->id, false, {}, kNone});
      }
    }
    std::size_t e = mint(concept_name, text, false);
    add_clause(e, concept_name,
               PropertyClause{std::string(kDescriptionProperty), Literal{text},
                              PropertyForm::kHasAs},
               {});
    return e;
  }

  void on_property(std::size_t s) {
    span_used_[s] = true;
    const PropertyDef* p = model_.find_property(spans_[s].element.key);
    if (!p) return;
    const MatchSpan& span = spans_[s];
    std::size_t clause = clause_of_word_[span.start];
    std::size_t after = span.start + span.length;
    bool relation = p->kind() == PropertyKind::kRelation;
    bool range_declared = relation && model_.has_concept(p->range);

    // Value candidates.
    std::size_t value_span = kNone;
    std::optional<std::pair<std::size_t, std::size_t>> value_name;
    std::size_t value_word = kNone;
    if (relation) {
      for (std::size_t t = s + 1; t < spans_.size(); ++t) {
        if (clause_of_word_[spans_[t].start] != clause) break;
        if (spans_[t].element.kind != ElementKind::kInstance) break;
        if (span_used_[t]) continue;
        if (instance_fits(spans_[t].element.key, p->range)) {
          value_span = t;
          break;
        }
      }
      if (value_span == kNone && range_declared && after < words_.size() &&
          clause_of_word_[after] == clause)
        value_name = name_after(after);
    } else {
      if (after < words_.size() && clause_of_word_[after] == clause &&
          free_word(after) && !is_function_word(words_[after].folded))
        value_word = after;
      else if (span.start > clause_start_[clause] && free_word(span.start - 1) &&
               !is_function_word(words_[span.start - 1].folded))
        value_word = span.start - 1;
    }
    bool has_value =
        value_span != kNone || value_name.has_value() || value_word != kNone;

    // Subject.
    std::size_t subject = kNone;
    std::optional<std::pair<std::size_t, std::size_t>> subject_name;
    if (relation && model_.has_concept(p->domain) && span.start > 0 &&
        clause_of_word_[span.start - 1] == clause)
      subject_name = name_before(span.start);
    if (!subject_name) {
      if (current_ != kNone && covers(entities_[current_], p->domain)) {
        subject = current_;
      } else {
        for (std::size_t i = entities_.size(); i-- > 0;) {
          if (covers(entities_[i], p->domain)) {
            subject = i;
            break;
          }
        }
      }
    }
    if (!subject_name && subject == kNone) {
      // A surface that also names a concept reads as that concept.
      for (const auto& alt : span.alternatives) {
        if (alt.kind != ElementKind::kConcept) continue;
        swap_to(s, alt);
        on_concept(s);
        return;
      }
    }
    if (!has_value) {
      if (relation && !credit_filled(s, p->key())) unfilled_.push_back(s);
      return;
    }

    if (subject_name) {
      consume(*subject_name);
      subject = bind_name(text_of(*subject_name), p->domain);
    } else if (subject == kNone) {
      if (current_ != kNone && entities_[current_].fresh &&
          model_.has_concept(p->domain)) {
        // Re-type the fresh subject and describe it in a separate sentence.
        Entity& e = entities_[current_];
        drafts_[e.drafts.front()].clauses.push_back(IsA{p->domain});
        e.drafts.push_back(new_draft(true, p->domain, e.id));
        subject = current_;
        adopt_pending(subject);
      } else if (model_.has_concept(p->domain)) {
        subject = mint(p->domain, span.surface, true);
        adopt_pending(subject);
      } else {
        if (relation && !credit_filled(s, p->key())) unfilled_.push_back(s);
        return;
      }
    }

    Value value;
    std::size_t credit_value = kNone;
    if (value_span != kNone) {
      span_used_[value_span] = true;
      credit_value = value_span;
      value = value_of(spans_[value_span].element.key);
    } else if (value_name) {
      consume(*value_name);
      std::size_t v = bind_name(text_of(*value_name), p->range);
      value = value_of(entities_[v].id);
    } else {
      consumed_[value_word] = true;
      value = Literal{words_[value_word].text};
    }
    if (!add_clause(subject, p->domain, PropertyClause{p->name, value, p->form},
                    {s, credit_value}))
      credit_filled(s, p->key());
    current_ = subject;
  }

  // --- output ------------------------------------------------------------

  std::size_t rank(const Clause& c) const {
    std::size_t n = model_.properties().size();
    if (std::holds_alternative<IsA>(c)) return n + 2;
    if (std::holds_alternative<KnownAs>(c)) return 0;
    const auto& pc = std::get<PropertyClause>(c);
    if (fold(pc.property) == kDescriptionProperty) return n + 1;
    return model_.property_rank(pc.property);
  }

  std::size_t clause_rank(const Draft& d, const Clause& c) const {
    if (const auto* pc = std::get_if<PropertyClause>(&c)) {
      if (fold(pc->property) != kDescriptionProperty) {
        for (const auto& p : model_.properties()) {
          if (fold(p.name) == fold(pc->property) &&
              model_.is_subtype(d.concept_name, p.domain))
            return model_.property_rank(p.key());
        }
      }
    }
    return rank(c);
  }

  void emit() {
    for (auto& d : drafts_) {
      std::stable_sort(d.clauses.begin(), d.clauses.end(),
                       [&](const Clause& a, const Clause& b) {
                         return clause_rank(d, a) < clause_rank(d, b);
                       });
      if (d.is_new) {
        out_.statements.push_back(
            CeStatement{NewInstance{d.concept_name, d.id, d.clauses}});
      } else if (!d.clauses.empty()) {
        out_.statements.push_back(
            CeStatement{InstanceFacts{d.concept_name, d.id, d.clauses}});
      }
    }
  }

  KnowledgeBase& kb_;
  const Model& model_;
  std::vector<MatchSpan>& spans_;
  Interpretation& out_;
  std::vector<Word> words_;
  std::vector<std::size_t> clause_start_;
  std::vector<std::size_t> clause_of_word_;
  std::vector<std::size_t> covered_;
  std::vector<bool> consumed_;
  std::vector<bool> span_used_;
  std::vector<Draft> drafts_;
  std::vector<Entity> entities_;
  std::vector<std::size_t> pending_;
  std::vector<std::size_t> unfilled_;
  std::vector<std::pair<std::size_t, std::string>> filled_;
  std::size_t current_ = kNone;
  std::size_t primary_ = kNone;
};

bool excluded(const KnowledgeBase& kb, const ElementRef& ref,
              const InterpreterOptions& options) {
  if (options.excluded_concepts.empty()) return false;
  auto hidden = [&](const std::string& concept_name) {
    for (const auto& x : options.excluded_concepts) {
      if (kb.model().is_subtype(concept_name, x)) return true;
    }
    return false;
  };
  if (ref.kind == ElementKind::kConcept) return hidden(ref.key);
  if (ref.kind == ElementKind::kInstance) {
    for (const auto& t : kb.types_of(ref.key)) {
      if (hidden(t)) return true;
    }
  }
  return false;
}

}  // namespace

std::size_t TextSentence::word_count() const {
  std::size_t n = 0;
  for (const auto& c : clauses) n += c.words.size();
  return n;
}

std::size_t TokenizedInput::sentence_count() const {
  std::size_t n = 0;
  for (const auto& p : phrases) n += p.sentences.size();
  return n;
}

std::size_t TokenizedInput::clause_count() const {
  std::size_t n = 0;
  for (const auto& p : phrases) {
    for (const auto& s : p.sentences) n += s.clauses.size();
  }
  return n;
}

std::size_t TokenizedInput::word_count() const {
  std::size_t n = 0;
  for (const auto& p : phrases) {
    for (const auto& s : p.sentences) n += s.word_count();
  }
  return n;
}

std::vector<const TextSentence*> TokenizedInput::sentences() const {
  std::vector<const TextSentence*> out;
  for (const auto& p : phrases) {
    for (const auto& s : p.sentences) out.push_back(&s);
  }
  return out;
}

TokenizedInput tokenize(std::string_view text) { return Tokenizer(text).run(); }

std::vector<MatchSpan> scan(const TextClause& clause, const KnowledgeBase& kb,
                            const InterpreterOptions& options,
                            std::size_t offset) {
  std::vector<MatchSpan> out;
  const auto& words = clause.words;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t longest = std::min(options.max_lookahead, words.size() - i);
    bool matched = false;
    for (std::size_t len = longest; len >= 1 && !matched; --len) {
      std::vector<std::string> key;
      for (std::size_t k = 0; k < len; ++k) key.push_back(words[i + k].folded);
      std::vector<LexMatch> hits;
      for (auto& m : kb.lookup_surface(key)) {
        if (!excluded(kb, m.element, options)) hits.push_back(std::move(m));
      }
      if (hits.empty()) continue;
      MatchSpan span;
      span.start = offset + i;
      span.length = len;
      span.element = hits.front().element;
      span.via_synonym = hits.front().via_synonym;
      std::vector<std::string> surface;
      for (std::size_t k = 0; k < len; ++k) surface.push_back(words[i + k].text);
      span.surface = join(surface, " ");
      for (std::size_t h = 1; h < hits.size(); ++h)
        span.alternatives.push_back(hits[h].element);
      out.push_back(std::move(span));
      i += len;
      matched = true;
    }
    if (!matched) ++i;
  }
  return out;
}

Interpretation interpret(std::string_view text, KnowledgeBase& kb,
                         const InterpreterOptions& options) {
  Interpretation out;
  out.input = tokenize(text);
  auto sentences = out.input.sentences();
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const TextSentence& sentence = *sentences[si];
    std::vector<MatchSpan> spans;
    std::size_t offset = 0;
    for (const auto& clause : sentence.clauses) {
      auto part = scan(clause, kb, options, offset);
      std::vector<bool> covered(clause.words.size(), false);
      for (auto& sp : part) {
        sp.sentence = si;
        for (std::size_t k = 0; k < sp.length; ++k)
          covered[sp.start - offset + k] = true;
        spans.push_back(std::move(sp));
      }
      for (std::size_t w = 0; w < clause.words.size(); ++w) {
        if (!covered[w])
          out.unmatched_words.push_back(
              UnmatchedWord{si, offset + w, clause.words[w].text});
      }
      offset += clause.words.size();
    }
    Assembler(kb, sentence, spans, out).run();
    out.statement_sentence.resize(out.statements.size(), si);
    for (auto& sp : spans) out.spans.push_back(std::move(sp));
  }
  out.score = score(out);
  return out;
}

int score(const Interpretation& interpretation) {
  int n = 0;
  for (const auto& s : interpretation.spans) n += s.contributed ? 1 : 0;
  return n;
}

}  // namespace moira
