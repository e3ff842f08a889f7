#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "moira/ce_ast.h"
#include "moira/knowledge_base.h"

namespace moira {

struct Word {
  std::string text;    // punctuation-stripped original
  std::string folded;  // case-folded copy used for lookup
};

struct TextClause {
  std::vector<Word> words;
};

struct TextSentence {
  std::vector<TextClause> clauses;
  std::size_t word_count() const;
};

struct TextPhrase {
  std::vector<TextSentence> sentences;
};

// Phrases are blank-line separated blocks. Sentences end at . ! ? (and
// clauses at :) when followed by whitespace or end of text; , and ; always
// end a clause. Empty pieces are dropped.
struct TokenizedInput {
  std::vector<TextPhrase> phrases;

  std::size_t phrase_count() const { return phrases.size(); }
  std::size_t sentence_count() const;
  std::size_t clause_count() const;
  std::size_t word_count() const;
  // Sentences in reading order across phrases.
  std::vector<const TextSentence*> sentences() const;
};

TokenizedInput tokenize(std::string_view text);

struct MatchSpan {
  std::size_t sentence = 0;  // index into TokenizedInput::sentences()
  std::size_t start = 0;     // sentence-relative word offset
  std::size_t length = 0;
  ElementRef element;
  bool via_synonym = false;
  std::string surface;
  // Other elements the same surface resolved to, lower priority.
  std::vector<ElementRef> alternatives;
  bool contributed = false;
};

struct MintedInstance {
  std::string id;
  std::string concept_name;
  std::string description;
};

struct UnmatchedWord {
  std::size_t sentence = 0;
  std::size_t position = 0;
  std::string text;
};

struct Interpretation {
  TokenizedInput input;
  std::vector<MatchSpan> spans;
  std::vector<CeStatement> statements;
  std::vector<std::size_t> statement_sentence;  // parallel to statements
  std::vector<MintedInstance> new_instances;
  std::vector<UnmatchedWord> unmatched_words;
  int score = 0;
};

struct InterpreterOptions {
  std::size_t max_lookahead = 4;
  // Instances of these concepts (and the concepts themselves) are invisible
  // to NL matching.
  std::set<std::string> excluded_concepts;
};

// Greedy longest match over one clause. `offset` is added to span starts so
// they stay sentence-relative.
std::vector<MatchSpan> scan(const TextClause& clause, const KnowledgeBase& kb,
                            const InterpreterOptions& options,
                            std::size_t offset = 0);

// Fresh ids are drawn from `kb`; nothing else in it changes.
Interpretation interpret(std::string_view text, KnowledgeBase& kb,
                         const InterpreterOptions& options = {});

// Number of spans that contributed to an emitted statement.
int score(const Interpretation& interpretation);

}  // namespace moira
