#include "moira/ce_parser.h"

#include <set>
#include <sstream>

#include "moira/text.h"

namespace moira {
namespace {

using Tokens = std::vector<CeToken>;

const std::set<std::string, std::less<>> kKeywords = {
    "a",     "an",     "and",  "as",            "because", "has",
    "is",    "known",  "named", "that",         "the",     "there",
    "this",  "value",  "was",  "conceptualise"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string format_location(SourceLocation where, const std::string& message) {
  std::ostringstream out;
  out << where.line << ":" << where.column << ": " << message;
  return out.str();
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<RawSentence> run() {
    std::vector<RawSentence> out;
    RawSentence current;
    std::vector<std::string> pragmas;
    bool have_start = false;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c == '-' && peek(1) == '-') {
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        std::string_view line = text_.substr(pos_, end - pos_);
        if (line.size() >= 3 && line[2] == '@')
          pragmas.emplace_back(trim(line.substr(3)));
        advance(end - pos_);
        continue;
      }
      if (!have_start) {
        current.start = here();
        current.pragmas = std::move(pragmas);
        pragmas.clear();
        have_start = true;
      }
      bool ends = false;
      if (c == '~') {
        current.tokens.push_back({CeToken::Kind::kTilde, "~", here()});
        advance(1);
      } else if (c == '`' || c == '\'') {
        current.tokens.push_back(read_quoted());
        ends = at_terminator();
      } else {
        auto word = read_word(&ends);
        if (!word.text.empty()) current.tokens.push_back(std::move(word));
      }
      if (ends) {
        advance(1);  // the period
        if (current.tokens.empty())
          throw CeParseError(current.start, "empty sentence");
        out.push_back(std::move(current));
        current = RawSentence{};
        have_start = false;
      }
    }
    if (have_start && !current.tokens.empty())
      throw CeParseError(here(), "sentence is missing its terminating period");
    return out;
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  SourceLocation here() const { return {line_, col_}; }

  void advance(std::size_t n) {
    for (std::size_t k = 0; k < n && pos_ < text_.size(); ++k, ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) advance(1);
  }

  // A period at pos_ followed by whitespace or end of input.
  bool at_terminator() const {
    return pos_ < text_.size() && text_[pos_] == '.' &&
           (pos_ + 1 >= text_.size() || is_space(text_[pos_ + 1]));
  }

  CeToken read_quoted() {
    SourceLocation start = here();
    advance(1);
    std::size_t from = pos_;
    while (pos_ < text_.size()) {
      if (text_[pos_] == '\'' &&
          (pos_ + 1 >= text_.size() ||
           !is_word_byte(static_cast<unsigned char>(text_[pos_ + 1])))) {
        std::string body(text_.substr(from, pos_ - from));
        advance(1);
        return {CeToken::Kind::kQuoted, std::move(body), start};
      }
      advance(1);
    }
    throw CeParseError(start, "unterminated quoted value");
  }

  CeToken read_word(bool* ends) {
    SourceLocation start = here();
    std::size_t from = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) &&
           text_[pos_] != '~') {
      if (at_terminator()) {
        *ends = true;
        return {CeToken::Kind::kWord,
                std::string(text_.substr(from, pos_ - from)), start};
      }
      advance(1);
    }
    return {CeToken::Kind::kWord, std::string(text_.substr(from, pos_ - from)),
            start};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class SentenceParser {
 public:
  SentenceParser(const RawSentence& sentence, const ParseOptions& options)
      : tokens_(sentence.tokens), start_(sentence.start), options_(options) {}

  CeSentence parse() {
    if (kw(0, "conceptualise")) return CeModelDecl{parse_conceptualise()};
    if (is_synonym_decl()) return CeModelDecl{parse_synonym()};
    return parse_statement_range(0, tokens_.size());
  }

  bool is_decl() const { return kw(0, "conceptualise") || is_synonym_decl(); }

  CeStatement parse_statement_only() {
    if (kw(0, "conceptualise") || is_synonym_decl())
      fail(0, "expected a CE statement, found a model declaration");
    return parse_statement_range(0, tokens_.size());
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& message) const {
    SourceLocation where = at < tokens_.size() ? tokens_[at].where
                           : tokens_.empty()   ? start_
                                               : tokens_.back().where;
    std::string near;
    if (at < tokens_.size()) near = " near '" + tokens_[at].text + "'";
    else near = " at end of sentence";
    throw CeParseError(where, message + near);
  }

  bool kw(std::size_t at, std::string_view word) const {
    return at < tokens_.size() && tokens_[at].kind == CeToken::Kind::kWord &&
           fold(tokens_[at].text) == word;
  }
  bool is_word(std::size_t at) const {
    return at < tokens_.size() && tokens_[at].kind == CeToken::Kind::kWord;
  }
  bool is_tilde(std::size_t at) const {
    return at < tokens_.size() && tokens_[at].kind == CeToken::Kind::kTilde;
  }
  bool is_quoted(std::size_t at) const {
    return at < tokens_.size() && tokens_[at].kind == CeToken::Kind::kQuoted;
  }

  // Joined words in [from, to); every token must be a plain word.
  std::string words(std::size_t from, std::size_t to,
                    const char* what) const {
    if (from >= to) fail(from, std::string("expected ") + what);
    std::vector<std::string> parts;
    for (std::size_t i = from; i < to; ++i) {
      if (!is_word(i)) fail(i, std::string("expected ") + what);
      parts.push_back(tokens_[i].text);
    }
    return join(parts, " ");
  }

  // Identifier or literal: one bare word or one quoted token.
  std::string name_at(std::size_t at, const char* what) const {
    if (at >= tokens_.size() || is_tilde(at))
      fail(at, std::string("expected ") + what);
    return tokens_[at].text;
  }

  bool is_synonym_decl() const {
    if (!kw(0, "the")) return false;
    if ((kw(1, "entity") || kw(1, "relation")) && kw(2, "concept") &&
        is_quoted(3) && kw(4, "is") && kw(5, "expressed"))
      return true;
    return kw(1, "instance") && is_quoted(2) && kw(3, "is") &&
           kw(4, "expressed");
  }

  // Top-level "and" separators in [from, to).
  std::vector<std::pair<std::size_t, std::size_t>> split_and(
      std::size_t from, std::size_t to) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t seg = from;
    for (std::size_t i = from; i < to; ++i) {
      if (kw(i, "and")) {
        if (i == seg) fail(i, "empty clause");
        out.push_back({seg, i});
        seg = i + 1;
      }
    }
    if (seg >= to) fail(to, "empty clause");
    out.push_back({seg, to});
    return out;
  }

  CeStatement parse_statement_range(std::size_t from, std::size_t to) {
    if (kw(from, "there")) return parse_new_instance(from, to);
    if (kw(from, "the")) return parse_instance_facts(from, to);
    if (kw(from, "because")) return parse_because(from, to);
    fail(from, "expected 'there is', 'the' or 'because'");
  }

  CeStatement parse_new_instance(std::size_t from, std::size_t to) {
    if (!kw(from + 1, "is") || !(kw(from + 2, "a") || kw(from + 2, "an")))
      fail(from + 1, "expected 'there is a'");
    std::size_t named = from + 3;
    while (named < to && !kw(named, "named")) ++named;
    if (named >= to) fail(to, "expected 'named'");
    NewInstance out;
    out.concept_name = words(from + 3, named, "a concept name");
    if (named + 1 >= to) fail(named + 1, "expected an instance name");
    out.id = name_at(named + 1, "an instance name");
    std::size_t rest = named + 2;
    if (rest < to) {
      if (!kw(rest, "that")) fail(rest, "expected 'that' or end of sentence");
      out.clauses = parse_clauses(rest + 1, to);
    }
    return CeStatement{std::move(out)};
  }

  CeStatement parse_instance_facts(std::size_t from, std::size_t to) {
    // "the <concept words> <id> <clause> ..."
    std::size_t id_at = 0;
    if (options_.vocabulary) {
      for (std::size_t len = to - from; len >= 1; --len) {
        std::size_t end = from + 1 + len;
        if (end + 1 >= to) continue;
        bool plain = true;
        for (std::size_t i = from + 1; i < end; ++i) plain = plain && is_word(i);
        if (!plain) continue;
        // A bare keyword cannot be the name, so the concept is shorter.
        if (is_word(end) && kKeywords.count(fold(tokens_[end].text))) continue;
        std::vector<std::string> parts;
        for (std::size_t i = from + 1; i < end; ++i)
          parts.push_back(tokens_[i].text);
        if (options_.vocabulary->has_concept(join(parts, " "))) {
          id_at = end;
          break;
        }
      }
    }
    if (id_at == 0) {
      for (std::size_t i = from + 3; i < to; ++i) {
        if (kw(i, "has") || kw(i, "is")) {
          id_at = i - 1;
          break;
        }
      }
    }
    if (id_at == 0) id_at = from + 2;
    if (id_at + 1 >= to) fail(to, "expected a clause after the instance name");
    InstanceFacts out;
    out.concept_name = words(from + 1, id_at, "a concept name");
    out.id = name_at(id_at, "an instance name");
    out.clauses = parse_clauses(id_at + 1, to);
    return CeStatement{std::move(out)};
  }

  CeStatement parse_because(std::size_t from, std::size_t to) {
    Because out;
    std::size_t seg = from + 1;
    if (seg >= to) fail(seg, "expected a statement after 'because'");
    auto starts_statement = [&](std::size_t i) {
      return kw(i, "there") || kw(i, "the") || kw(i, "this");
    };
    std::size_t i = seg;
    auto flush = [&](std::size_t end) {
      if (kw(seg, "this")) {
        // this was reported by 'source' at 'time'
        if (!kw(seg + 1, "was") || !kw(seg + 2, "reported") ||
            !kw(seg + 3, "by") || !kw(seg + 5, "at") || seg + 7 != end)
          fail(seg, "expected \"this was reported by '...' at '...'\"");
        out.reported = ReportedBy{name_at(seg + 4, "a source"),
                                  name_at(seg + 6, "a time")};
        if (end != to) fail(end, "report clause must come last");
        return;
      }
      out.premises.push_back(parse_statement_range(seg, end));
    };
    for (; i < to; ++i) {
      if (kw(i, "and") && starts_statement(i + 1)) {
        flush(i);
        seg = i + 1;
      }
    }
    flush(to);
    if (out.premises.empty()) fail(from, "because-statement has no premises");
    for (const auto& p : out.premises) {
      if (std::holds_alternative<Because>(p.body))
        fail(from, "nested because-statements are not allowed");
    }
    return CeStatement{std::move(out)};
  }

  std::vector<Clause> parse_clauses(std::size_t from, std::size_t to) {
    std::vector<Clause> out;
    for (auto [a, b] : split_and(from, to)) out.push_back(parse_clause(a, b));
    return out;
  }

  Value parse_value(std::size_t from, std::size_t to) const {
    if (kw(from, "the")) {
      if (to - from < 3) fail(from, "expected 'the <concept> <name>'");
      return InstanceRef{words(from + 1, to - 1, "a concept name"),
                         name_at(to - 1, "an instance name")};
    }
    if (to - from != 1) fail(from, "expected a single value");
    if (is_word(from) && kKeywords.count(fold(tokens_[from].text)))
      fail(from, "reserved word used as a value");
    return Literal{name_at(from, "a value")};
  }

  Clause parse_clause(std::size_t from, std::size_t to) {
    if (kw(from, "has")) {
      std::size_t as = 0;
      if (kw(from + 1, "the")) {
        for (std::size_t i = from + 4; i < to; ++i) {
          if (kw(i, "as")) {
            as = i;
            break;
          }
        }
      } else if (kw(from + 2, "as")) {
        as = from + 2;
      }
      if (as == 0) fail(from + 1, "expected 'has <value> as <property>'");
      PropertyClause clause;
      clause.value = parse_value(from + 1, as);
      clause.property = words(as + 1, to, "a property name");
      clause.form = PropertyForm::kHasAs;
      return clause;
    }
    if (kw(from, "is") && (kw(from + 1, "a") || kw(from + 1, "an"))) {
      return IsA{words(from + 2, to, "a concept name")};
    }
    if (kw(from, "is") && kw(from + 1, "known") && kw(from + 2, "as")) {
      if (from + 4 != to) fail(from + 3, "expected a single quoted name");
      return KnownAs{name_at(from + 3, "a name")};
    }
    std::size_t value_at = from;
    while (value_at < to && !kw(value_at, "the") && !is_quoted(value_at))
      ++value_at;
    if (value_at >= to) fail(from, "expected a clause");
    if (value_at == from) fail(from, "expected a property name");
    PropertyClause clause;
    clause.property = words(from, value_at, "a property name");
    clause.value = parse_value(value_at, to);
    clause.form = PropertyForm::kVerb;
    return clause;
  }

  Conceptualise parse_conceptualise_entity() {
    // conceptualise a ~ name ~ V [that ...]
    if (!is_tilde(2)) fail(2, "expected '~'");
    std::size_t close = 3;
    while (close < tokens_.size() && !is_tilde(close)) ++close;
    if (close >= tokens_.size()) fail(close, "expected closing '~'");
    Conceptualise out;
    out.name = words(3, close, "a concept name");
    std::size_t rest = close + 1;
    if (is_word(rest) && !kw(rest, "that")) ++rest;  // variable marker
    if (rest >= tokens_.size()) return out;
    if (!kw(rest, "that")) fail(rest, "expected 'that'");
    for (auto [a, b] : split_and(rest + 1, tokens_.size())) {
      if (kw(a, "is") && (kw(a + 1, "a") || kw(a + 1, "an"))) {
        out.parents.push_back(words(a + 2, b, "a parent concept"));
        continue;
      }
      // has the <range> <V> as ~ <name> ~
      if (!kw(a, "has") || !kw(a + 1, "the"))
        fail(a, "expected 'is a' or 'has the' in a concept declaration");
      std::size_t as = a + 2;
      while (as < b && !kw(as, "as")) ++as;
      if (as >= b || as < a + 4) fail(a, "expected 'has the <range> <V> as'");
      if (!is_tilde(as + 1) || !is_tilde(b - 1) || b - 1 <= as + 2)
        fail(as + 1, "expected '~ <property name> ~'");
      PropertyDecl decl;
      decl.range = words(a + 2, as - 1, "a range concept");
      decl.name = words(as + 2, b - 1, "a property name");
      out.properties.push_back(std::move(decl));
    }
    return out;
  }

  RelationDecl parse_conceptualise_relation() {
    // conceptualise the <domain> D ~ name ~ the <range> R
    std::size_t t1 = 2;
    while (t1 < tokens_.size() && !is_tilde(t1)) ++t1;
    std::size_t t2 = t1 + 1;
    while (t2 < tokens_.size() && !is_tilde(t2)) ++t2;
    if (t2 >= tokens_.size() || t1 < 4) fail(t1, "expected '~ <relation> ~'");
    if (!kw(t2 + 1, "the") || t2 + 4 > tokens_.size())
      fail(t2 + 1, "expected 'the <range> <R>'");
    RelationDecl out;
    out.domain = words(2, t1 - 1, "a domain concept");
    out.name = words(t1 + 1, t2, "a relation name");
    out.range = words(t2 + 2, tokens_.size() - 1, "a range concept");
    return out;
  }

  CeModelDecl parse_conceptualise() {
    if (kw(1, "a") || kw(1, "an")) return parse_conceptualise_entity();
    if (kw(1, "the")) return parse_conceptualise_relation();
    fail(1, "expected 'a ~' or 'the' after 'conceptualise'");
  }

  SynonymDecl parse_synonym() {
    SynonymDecl out;
    std::size_t rest = 0;
    if (kw(1, "instance")) {
      out.target_kind = ElementKind::kInstance;
      out.target = tokens_[2].text;
      rest = 3;
    } else {
      out.target_kind = kw(1, "entity") ? ElementKind::kConcept
                                        : ElementKind::kProperty;
      out.target = tokens_[3].text;
      rest = 4;
    }
    for (auto [a, b] : split_and(rest, tokens_.size())) {
      if (!kw(a, "is") || !kw(a + 1, "expressed") || !kw(a + 2, "by") ||
          !kw(a + 3, "the") || !kw(a + 4, "value") || b != a + 6)
        fail(a, "expected \"is expressed by the value '...'\"");
      out.surfaces.push_back(name_at(a + 5, "a surface form"));
    }
    return out;
  }

  const Tokens& tokens_;
  SourceLocation start_;
  ParseOptions options_;
};

std::string article(std::string_view noun) {
  if (noun.empty()) return "a";
  char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun[0])));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an"
                                                                      : "a";
}

std::string quoted(std::string_view text) {
  return "'" + std::string(text) + "'";
}

std::string initials(std::string_view name) {
  std::string out;
  for (const auto& w : split_ws(name)) {
    out += static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  }
  return out.empty() ? "X" : out;
}

std::string render_value(const Value& value, PropertyForm form) {
  if (const auto* ref = std::get_if<InstanceRef>(&value))
    return "the " + ref->concept_name + " " + render_name(ref->id);
  const auto& lit = std::get<Literal>(value);
  return form == PropertyForm::kHasAs ? render_name(lit.text)
                                      : quoted(lit.text);
}

void render_clauses(std::ostringstream& out, const std::vector<Clause>& clauses,
                    RenderStyle style) {
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) out << " and";
    out << (style == RenderStyle::kMultiLine ? "\n " : " ");
    out << render_clause(clauses[i]);
  }
}

void render_into(std::ostringstream& out, const CeStatement& statement,
                 RenderStyle style) {
  if (const auto* n = std::get_if<NewInstance>(&statement.body)) {
    out << "there is " << article(n->concept_name) << " " << n->concept_name
        << " named " << render_name(n->id);
    if (!n->clauses.empty()) {
      out << " that";
      render_clauses(out, n->clauses, style);
    }
  } else if (const auto* f = std::get_if<InstanceFacts>(&statement.body)) {
    out << "the " << f->concept_name << " " << render_name(f->id);
    render_clauses(out, f->clauses, style);
  } else {
    const auto& b = std::get<Because>(statement.body);
    out << "because ";
    for (std::size_t i = 0; i < b.premises.size(); ++i) {
      if (i) out << " and" << (style == RenderStyle::kMultiLine ? "\n " : " ");
      render_into(out, b.premises[i], style);
    }
    if (b.reported) {
      out << " and" << (style == RenderStyle::kMultiLine ? "\n " : " ")
          << "this was reported by " << quoted(b.reported->source) << " at "
          << quoted(b.reported->timestamp);
    }
  }
}

}  // namespace

CeParseError::CeParseError(SourceLocation where, const std::string& message)
    : std::runtime_error(format_location(where, message)),
      where_(where),
      message_(message) {}

std::optional<StatementHead> head_of(const CeStatement& statement) {
  if (const auto* n = std::get_if<NewInstance>(&statement.body))
    return StatementHead{n->concept_name, n->id};
  if (const auto* f = std::get_if<InstanceFacts>(&statement.body))
    return StatementHead{f->concept_name, f->id};
  return std::nullopt;
}

const std::vector<Clause>* clauses_of(const CeStatement& statement) {
  if (const auto* n = std::get_if<NewInstance>(&statement.body))
    return &n->clauses;
  if (const auto* f = std::get_if<InstanceFacts>(&statement.body))
    return &f->clauses;
  return nullptr;
}

std::vector<RawSentence> split_sentences(std::string_view text) {
  return Lexer(text).run();
}

CeSentence parse_sentence(const RawSentence& sentence,
                          const ParseOptions& options) {
  return SentenceParser(sentence, options).parse();
}

bool is_model_decl(const RawSentence& sentence) {
  return SentenceParser(sentence, {}).is_decl();
}

CeStatement parse_statement(const RawSentence& sentence,
                            const ParseOptions& options) {
  return SentenceParser(sentence, options).parse_statement_only();
}

std::vector<CeModelDecl> parse_model(std::string_view text) {
  std::vector<CeModelDecl> out;
  for (const auto& raw : split_sentences(text)) {
    CeSentence s = parse_sentence(raw);
    if (auto* decl = std::get_if<CeModelDecl>(&s)) {
      out.push_back(std::move(*decl));
      continue;
    }
    const auto& stmt = std::get<CeStatement>(s);
    const auto* n = std::get_if<NewInstance>(&stmt.body);
    if (!n || !n->clauses.empty())
      throw CeParseError(raw.start,
                         "expected a model declaration, found a statement");
    out.push_back(StaticInstance{n->concept_name, n->id});
  }
  return out;
}

CeStatement parse_statement(std::string_view text,
                            const ParseOptions& options) {
  auto sentences = split_sentences(text);
  if (sentences.size() != 1)
    throw CeParseError(sentences.empty() ? SourceLocation{}
                                         : sentences[1].start,
                       "expected exactly one CE sentence");
  return parse_statement(sentences[0], options);
}

std::vector<CeStatement> parse_statements(std::string_view text,
                                          const ParseOptions& options) {
  std::vector<CeStatement> out;
  for (const auto& raw : split_sentences(text))
    out.push_back(parse_statement(raw, options));
  return out;
}

std::vector<CeSentence> parse_document(std::string_view text,
                                       const ParseOptions& options) {
  std::vector<CeSentence> out;
  for (const auto& raw : split_sentences(text))
    out.push_back(parse_sentence(raw, options));
  return out;
}

std::string render_name(std::string_view id) {
  bool plain = !id.empty();
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-';
    plain = plain && ok;
  }
  if (plain && id.size() >= 2 && id[0] == '-' && id[1] == '-') plain = false;
  if (plain && kKeywords.count(fold(id))) plain = false;
  return plain ? std::string(id) : quoted(id);
}

std::string render_clause(const Clause& clause) {
  if (const auto* p = std::get_if<PropertyClause>(&clause)) {
    if (p->form == PropertyForm::kHasAs)
      return "has " + render_value(p->value, p->form) + " as " + p->property;
    return p->property + " " + render_value(p->value, p->form);
  }
  if (const auto* isa = std::get_if<IsA>(&clause))
    return "is " + article(isa->concept_name) + " " + isa->concept_name;
  return "is known as " + quoted(std::get<KnownAs>(clause).label);
}

std::string render_statement(const CeStatement& statement, RenderStyle style) {
  std::ostringstream out;
  render_into(out, statement, style);
  out << ".";
  return out.str();
}

std::string render_statements(std::span<const CeStatement> statements,
                              RenderStyle style) {
  std::string out;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    if (i) out += "\n";
    out += render_statement(statements[i], style);
  }
  return out;
}

std::string render_decl(const CeModelDecl& decl) {
  std::ostringstream out;
  if (const auto* c = std::get_if<Conceptualise>(&decl)) {
    out << "conceptualise " << article(c->name) << " ~ " << c->name << " ~ "
        << initials(c->name);
    bool first = true;
    auto sep = [&] {
      out << (first ? " that " : " and ");
      first = false;
    };
    for (const auto& p : c->parents) {
      sep();
      out << "is " << article(p) << " " << p;
    }
    for (const auto& p : c->properties) {
      sep();
      out << "has the " << p.range << " " << initials(p.range) << " as ~ "
          << p.name << " ~";
    }
  } else if (const auto* r = std::get_if<RelationDecl>(&decl)) {
    std::string dv = initials(r->domain);
    std::string rv = initials(r->range);
    if (rv == dv) rv += "2";
    out << "conceptualise the " << r->domain << " " << dv << " ~ " << r->name
        << " ~ the " << r->range << " " << rv;
  } else if (const auto* s = std::get_if<SynonymDecl>(&decl)) {
    switch (s->target_kind) {
      case ElementKind::kConcept: out << "the entity concept "; break;
      case ElementKind::kProperty: out << "the relation concept "; break;
      case ElementKind::kInstance: out << "the instance "; break;
    }
    out << quoted(s->target);
    for (std::size_t i = 0; i < s->surfaces.size(); ++i) {
      out << (i ? " and" : "") << " is expressed by the value "
          << quoted(s->surfaces[i]);
    }
  } else {
    const auto& i = std::get<StaticInstance>(decl);
    out << "there is " << article(i.concept_name) << " " << i.concept_name << " named "
        << render_name(i.id);
  }
  out << ".";
  return out.str();
}

}  // namespace moira
