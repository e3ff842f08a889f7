#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "moira/ce_ast.h"

namespace moira {

struct SourceLocation {
  int line = 1;
  int column = 1;
};

class CeParseError : public std::runtime_error {
 public:
  CeParseError(SourceLocation where, const std::string& message);

  SourceLocation where() const { return where_; }
  const std::string& message() const { return message_; }

 private:
  SourceLocation where_;
  std::string message_;
};

struct CeToken {
  enum class Kind { kWord, kQuoted, kTilde };
  Kind kind = Kind::kWord;
  std::string text;
  SourceLocation where;
};

// One period-terminated sentence. `pragmas` holds the bodies of any
// "--@" comment lines seen since the previous sentence.
struct RawSentence {
  std::vector<CeToken> tokens;
  SourceLocation start;
  std::vector<std::string> pragmas;
};

// Tokenises CE text: `--` starts a line comment, quotes are `x' or 'x',
// a period followed by whitespace or end of input ends a sentence.
std::vector<RawSentence> split_sentences(std::string_view text);

struct ParseOptions {
  // Known concept names; disambiguates "the <concept> <id>" when the
  // concept has several words. Model-free when null.
  const Model* vocabulary = nullptr;
};

using CeSentence = std::variant<CeModelDecl, CeStatement>;

CeSentence parse_sentence(const RawSentence& sentence,
                          const ParseOptions& options = {});
CeStatement parse_statement(const RawSentence& sentence,
                            const ParseOptions& options = {});
// Conceptualise or synonym declaration (statements need a vocabulary).
bool is_model_decl(const RawSentence& sentence);

// Declarations only; "there is a C named X." reads as StaticInstance.
std::vector<CeModelDecl> parse_model(std::string_view text);
// Exactly one sentence.
CeStatement parse_statement(std::string_view text,
                            const ParseOptions& options = {});
std::vector<CeStatement> parse_statements(std::string_view text,
                                          const ParseOptions& options = {});
std::vector<CeSentence> parse_document(std::string_view text,
                                       const ParseOptions& options = {});

enum class RenderStyle { kSingleLine, kMultiLine };

std::string render_statement(const CeStatement& statement,
                             RenderStyle style = RenderStyle::kSingleLine);
std::string render_statements(std::span<const CeStatement> statements,
                              RenderStyle style = RenderStyle::kSingleLine);
std::string render_decl(const CeModelDecl& decl);
std::string render_clause(const Clause& clause);
// Bare when the text is a single plain token, quoted otherwise.
std::string render_name(std::string_view id);

}  // namespace moira
