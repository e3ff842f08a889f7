#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moira/ce_ast.h"
#include "moira/ce_parser.h"
#include "moira/knowledge_base.h"

namespace moira {

// Built-in literal attribute every instance carries.
inline constexpr std::string_view kDescriptionProperty = "description";

struct AssertReport {
  std::vector<std::string> new_fact_ids;
  std::vector<std::string> new_instance_ids;
};

// Asserts CE statements. All-or-nothing: on error the KB is unchanged.
// A NewInstance naming an existing id re-types it (adds an "is a" fact when
// the concept is not already one of its types).
AssertReport assert_statements(KnowledgeBase& kb,
                               std::span<const CeStatement> statements,
                               const Provenance& provenance);

// Dry run of assert_statements against a copy; throws the same errors.
void validate_statements(const KnowledgeBase& kb,
                         std::span<const CeStatement> statements);

void apply_decl(KnowledgeBase& kb, const CeModelDecl& decl);

// Loads a CE document (declarations and statements). All-or-nothing.
AssertReport load_ce(KnowledgeBase& kb, std::string_view text,
                     const Provenance& provenance);

ParseOptions parse_options(const KnowledgeBase& kb);

// CE views of stored knowledge.
Value value_for_term(const KnowledgeBase& kb, const Term& term);
Clause clause_for_fact(const KnowledgeBase& kb, const Fact& fact);
// "there is a C named id that <clause>" when `introduce`, else
// "the C id <clause>". An introduction carries the instance's label.
CeStatement statement_for_fact(const KnowledgeBase& kb, const Fact& fact,
                               bool introduce);
// NewInstance with label, description and every stored fact about `id`.
CeStatement describe_instance(const KnowledgeBase& kb, std::string_view id);

// Declarations that rebuild the model and synonyms of `kb`.
std::vector<CeModelDecl> model_decls(const KnowledgeBase& kb);

}  // namespace moira
